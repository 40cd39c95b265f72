#pragma once

#include <string>

#include "luxland/lightfield.hpp"

namespace luxland {

// Grid CSV format: optional '#'-prefixed comment lines carrying "label=" and
// "height=" metadata, a "x,y,z,intensity" header, then one sample per row in
// row-major order with x fastest. Units are meters and au.
//
// Malformed files throw std::runtime_error with the offending row number.
MeasuredFieldGrid load_field_grid(const std::string& path);

void save_field_grid(const MeasuredFieldGrid& grid, const std::string& path);

}  // namespace luxland
