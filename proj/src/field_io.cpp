#include "luxland/field_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "luxland/export.hpp"

namespace luxland {

namespace {

[[noreturn]] void fail(const std::string& path, int row, const std::string& what) {
    throw std::runtime_error(path + ": " + what + " at row " + std::to_string(row));
}

struct Sample {
    double x, y, z, v;
    int row;
};

// Reconstructs the axis coordinate list from a row-major sweep, checking that
// coordinates repeat in a consistent monotonic pattern.
std::vector<double> unique_sorted(std::vector<double> vals) {
    std::sort(vals.begin(), vals.end());
    std::vector<double> out;
    for (double v : vals) {
        if (out.empty() || std::abs(v - out.back()) > 1e-9) out.push_back(v);
    }
    return out;
}

}  // namespace

MeasuredFieldGrid load_field_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open file");

    MeasuredFieldGrid grid;
    std::vector<Sample> rows;
    std::string line;
    int row = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto key_val = [&](const std::string& key) -> std::string {
                const auto pos = line.find(key);
                if (pos == std::string::npos) return {};
                auto val = line.substr(pos + key.size());
                while (!val.empty() && (val.front() == ' ')) val.erase(val.begin());
                while (!val.empty() && (val.back() == ' ' || val.back() == '\r'))
                    val.pop_back();
                return val;
            };
            if (auto v = key_val("label="); !v.empty()) grid.label = v;
            continue;  // height= is informational; z column is authoritative
        }
        if (!header_seen) {
            std::string stripped = line;
            stripped.erase(std::remove_if(stripped.begin(), stripped.end(),
                                          [](char c) { return c == ' ' || c == '\r'; }),
                           stripped.end());
            if (stripped != "x,y,z,intensity")
                fail(path, row, "malformed header (expected 'x,y,z,intensity')");
            header_seen = true;
            continue;
        }
        std::istringstream ss(line);
        Sample s{};
        char c1, c2, c3;
        if (!(ss >> s.x >> c1 >> s.y >> c2 >> s.z >> c3 >> s.v) || c1 != ',' ||
            c2 != ',' || c3 != ',')
            fail(path, row, "malformed sample row");
        if (!std::isfinite(s.v)) fail(path, row, "non-finite sample");
        if (s.v < 0.0) fail(path, row, "negative sample");
        s.row = row;
        rows.push_back(s);
    }
    if (!header_seen) throw std::runtime_error(path + ": missing header");
    if (rows.size() < 4) throw std::runtime_error(path + ": too few samples");

    std::vector<double> xs, ys, zs;
    for (const auto& s : rows) {
        xs.push_back(s.x);
        ys.push_back(s.y);
        zs.push_back(s.z);
    }
    const auto ux = unique_sorted(xs);
    const auto uy = unique_sorted(ys);
    const auto uz = unique_sorted(zs);
    grid.nx = static_cast<int>(ux.size());
    grid.ny = static_cast<int>(uy.size());
    grid.nz = static_cast<int>(uz.size());
    if (grid.nx < 2 || grid.ny < 2)
        throw std::runtime_error(path + ": grid must span at least 2 points in x and y");
    if (rows.size() != static_cast<std::size_t>(grid.nx) * grid.ny * grid.nz)
        throw std::runtime_error(path + ": inconsistent row count (" +
                                 std::to_string(rows.size()) + " rows for " +
                                 std::to_string(grid.nx) + "x" + std::to_string(grid.ny) +
                                 "x" + std::to_string(grid.nz) + " grid)");

    const auto check_uniform = [&](const std::vector<double>& u, const char* axis) {
        if (u.size() < 2) return 0.0;
        const double d = u[1] - u[0];
        for (std::size_t i = 1; i + 1 < u.size(); ++i) {
            if (std::abs((u[i + 1] - u[i]) - d) > 1e-6)
                throw std::runtime_error(path + ": non-uniform spacing along " +
                                         std::string(axis));
        }
        return d;
    };
    grid.origin = Vec3(ux.front(), uy.front(), uz.front());
    grid.spacing =
        Vec3(check_uniform(ux, "x"), check_uniform(uy, "y"),
             grid.nz > 1 ? check_uniform(uz, "z") : 1.0);

    // Rows must walk the grid with x fastest, then y, then z.
    grid.samples.assign(rows.size(), 0.0);
    int data_row = 0;
    for (const auto& s : rows) {
        const int ix = static_cast<int>(std::lround((s.x - grid.origin.x()) / grid.spacing.x()));
        const int iy = static_cast<int>(std::lround((s.y - grid.origin.y()) / grid.spacing.y()));
        const int iz = grid.nz > 1
                           ? static_cast<int>(std::lround((s.z - grid.origin.z()) / grid.spacing.z()))
                           : 0;
        const int expect = (iz * grid.ny + iy) * grid.nx + ix;
        if (expect != data_row)
            fail(path, s.row,
                 "rows out of row-major (x-fastest) order or non-monotonic coordinates");
        grid.samples[static_cast<std::size_t>(expect)] = s.v;
        ++data_row;
    }
    grid.validate();
    return grid;
}

void save_field_grid(const MeasuredFieldGrid& grid, const std::string& path) {
    grid.validate();
    std::ostringstream out;
    if (!grid.label.empty()) out << "# label=" << grid.label << "\n";
    out << "# height=" << grid.origin.z() << "\n";
    out << "x,y,z,intensity\n";
    out.precision(12);
    for (int iz = 0; iz < grid.nz; ++iz) {
        for (int iy = 0; iy < grid.ny; ++iy) {
            for (int ix = 0; ix < grid.nx; ++ix) {
                out << grid.origin.x() + ix * grid.spacing.x() << ','
                    << grid.origin.y() + iy * grid.spacing.y() << ','
                    << grid.origin.z() + iz * grid.spacing.z() << ','
                    << grid.at(ix, iy, iz) << '\n';
            }
        }
    }
    atomic_write(path, out.str());
}

}  // namespace luxland
