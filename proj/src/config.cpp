#include "luxland/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "luxland/field_io.hpp"

namespace luxland {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error("config error at '" + path + "': " + what);
}

void require_keys(const json& j, const std::string& path,
                  const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) fail(path + "." + key, "unknown key");
    }
}

double num(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

Vec3 vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) fail(path, "expected [x, y, z]");
    return Vec3(num(j[0], path), num(j[1], path), num(j[2], path));
}

Surface parse_surface(const json& j, const std::string& path) {
    require_keys(j, path, {"a", "b", "z0", "z1", "reflectance", "opaque"});
    if (!j.contains("a") || !j.contains("b")) fail(path, "surface needs 'a' and 'b' endpoints");
    const auto endpoint = [&](const json& e, const std::string& p) {
        if (!e.is_array() || e.size() != 2) fail(p, "expected [x, y]");
        return Vec2(num(e[0], p), num(e[1], p));
    };
    return Surface::wall(endpoint(j["a"], path + ".a"), endpoint(j["b"], path + ".b"),
                         j.contains("z0") ? num(j["z0"], path + ".z0") : 0.0,
                         j.contains("z1") ? num(j["z1"], path + ".z1") : 2.5,
                         j.contains("reflectance") ? num(j["reflectance"], path + ".reflectance") : 0.0,
                         j.contains("opaque") ? j["opaque"].get<bool>() : true);
}

void parse_environment(const json& j, const std::string& path, RunSettings& out) {
    require_keys(j, path, {"reference", "source", "surfaces", "ambient_dc", "patch_edge"});
    if (j.contains("reference")) {
        const std::string name = j["reference"].get<std::string>();
        for (const auto& e : reference_environments()) {
            if (e.name == name) {
                out.scenario.environment = e.env;
                out.scenario.start = e.start;
                if (j.contains("ambient_dc"))
                    out.scenario.environment.ambient_dc = num(j["ambient_dc"], path + ".ambient_dc");
                return;
            }
        }
        fail(path + ".reference", "unknown reference environment '" + name + "'");
    }
    Environment env;
    env.source = calibrated_bulb();
    if (j.contains("source")) {
        const json& s = j["source"];
        const std::string spath = path + ".source";
        require_keys(s, spath,
                     {"type", "position", "axis", "power", "lambert_exponent", "path", "field"});
        const std::string type = s.contains("type") ? s["type"].get<std::string>() : "bulb";
        if (type == "bulb") {
            LightSource ls = calibrated_bulb();
            if (s.contains("position")) ls.position = vec3(s["position"], spath + ".position");
            if (s.contains("axis")) ls.axis = vec3(s["axis"], spath + ".axis").normalized();
            if (s.contains("power")) ls.power = num(s["power"], spath + ".power");
            if (s.contains("lambert_exponent"))
                ls.lambert_exponent = num(s["lambert_exponent"], spath + ".lambert_exponent");
            env.source = ls;
        } else if (type == "grid") {
            if (!s.contains("path")) fail(spath, "grid source needs 'path'");
            env.source = load_field_grid(s["path"].get<std::string>());
        } else if (type == "reference_field") {
            if (!s.contains("field")) fail(spath, "reference_field source needs 'field'");
            const std::string f = s["field"].get<std::string>();
            if (f == "bulb") env.source = reference_field_grid(ReferenceField::Bulb);
            else if (f == "no_lens") env.source = reference_field_grid(ReferenceField::NoLens);
            else if (f == "lens1") env.source = reference_field_grid(ReferenceField::Lens1);
            else if (f == "lens2") env.source = reference_field_grid(ReferenceField::Lens2);
            else fail(spath + ".field", "unknown reference field '" + f + "'");
        } else {
            fail(spath + ".type", "unknown source type '" + type + "'");
        }
    }
    if (j.contains("surfaces")) {
        const json& arr = j["surfaces"];
        if (!arr.is_array()) fail(path + ".surfaces", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i)
            env.surfaces.push_back(
                parse_surface(arr[i], path + ".surfaces[" + std::to_string(i) + "]"));
    }
    if (j.contains("ambient_dc")) env.ambient_dc = num(j["ambient_dc"], path + ".ambient_dc");
    if (j.contains("patch_edge")) env.patch_edge = num(j["patch_edge"], path + ".patch_edge");
    out.scenario.environment = env;
}

void parse_response(const json& j, const std::string& path, PDResponse& r) {
    require_keys(j, path,
                 {"angular_exponent", "gain", "adc_bits", "full_scale", "noise_sigma"});
    if (j.contains("angular_exponent"))
        r.angular_exponent = num(j["angular_exponent"], path + ".angular_exponent");
    if (j.contains("gain")) r.gain = num(j["gain"], path + ".gain");
    if (j.contains("adc_bits")) r.adc_bits = integer(j["adc_bits"], path + ".adc_bits");
    if (j.contains("full_scale")) r.full_scale = num(j["full_scale"], path + ".full_scale");
    if (j.contains("noise_sigma")) r.noise_sigma = num(j["noise_sigma"], path + ".noise_sigma");
}

void parse_params(const json& j, const std::string& path, GuidanceParams& p) {
    require_keys(j, path,
                 {"equal_tol", "switch_margin", "barrier_ratio", "barrier_window", "tilt_gain",
                  "min_signal", "yaw_rate", "approach_speed", "near_speed", "descend_speed",
                  "leg_distance", "z_land", "polar_steps", "polar_hold", "signal_lost_timeout",
                  "history_capacity", "filter_window"});
    const auto set_num = [&](const char* key, double& target) {
        if (j.contains(key)) target = num(j[key], path + "." + key);
    };
    const auto set_int = [&](const char* key, int& target) {
        if (j.contains(key)) target = integer(j[key], path + "." + key);
    };
    set_num("equal_tol", p.equal_tol);
    set_num("switch_margin", p.switch_margin);
    set_num("barrier_ratio", p.barrier_ratio);
    set_int("barrier_window", p.barrier_window);
    set_num("tilt_gain", p.tilt_gain);
    set_num("min_signal", p.min_signal);
    set_num("yaw_rate", p.yaw_rate);
    set_num("approach_speed", p.approach_speed);
    set_num("near_speed", p.near_speed);
    set_num("descend_speed", p.descend_speed);
    set_num("leg_distance", p.leg_distance);
    set_num("z_land", p.z_land);
    set_int("polar_steps", p.polar_steps);
    set_int("polar_hold", p.polar_hold);
    set_num("signal_lost_timeout", p.signal_lost_timeout);
    set_int("history_capacity", p.history_capacity);
    set_int("filter_window", p.filter_window);
}

}  // namespace

RunSettings parse_config(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(origin + ": not valid JSON: " + e.what());
    }

    RunSettings out;
    out.scenario = default_scenario();

    require_keys(j, origin,
                 {"environment", "layout", "controller", "sweep", "noise", "params",
                  "interference", "start", "dt", "max_time", "seed", "range",
                  "record_traces"});

    if (j.contains("environment")) parse_environment(j["environment"], origin + ".environment", out);

    if (j.contains("layout")) {
        const json& l = j["layout"];
        const std::string path = origin + ".layout";
        require_keys(l, path, {"array_radius", "response"});
        if (l.contains("array_radius"))
            out.scenario.array_radius = num(l["array_radius"], path + ".array_radius");
        if (l.contains("response"))
            parse_response(l["response"], path + ".response", out.scenario.response);
    }
    if (j.contains("controller")) {
        const json& c = j["controller"];
        const std::string path = origin + ".controller";
        require_keys(c, path, {"kind", "pd_count"});
        if (c.contains("kind")) {
            const std::string kind = c["kind"].get<std::string>();
            if (kind == "hybrid") out.scenario.controller = ControllerKind::Hybrid;
            else if (kind == "arpd") out.scenario.controller = ControllerKind::ArPD;
            else if (kind == "spd") out.scenario.controller = ControllerKind::SPD;
            else fail(path + ".kind", "unknown controller '" + kind + "'");
        }
        if (c.contains("pd_count"))
            out.scenario.pd_count = integer(c["pd_count"], path + ".pd_count");
    }
    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        const std::string path = origin + ".sweep";
        require_keys(s, path, {"x0", "x1", "y0", "y1", "nx", "ny", "z", "success_floor"});
        StartGrid g;
        if (s.contains("x0")) g.x0 = num(s["x0"], path + ".x0");
        if (s.contains("x1")) g.x1 = num(s["x1"], path + ".x1");
        if (s.contains("y0")) g.y0 = num(s["y0"], path + ".y0");
        if (s.contains("y1")) g.y1 = num(s["y1"], path + ".y1");
        if (s.contains("nx")) g.nx = integer(s["nx"], path + ".nx");
        if (s.contains("ny")) g.ny = integer(s["ny"], path + ".ny");
        if (s.contains("z")) g.z = num(s["z"], path + ".z");
        if (s.contains("success_floor"))
            out.sweep_success_floor = num(s["success_floor"], path + ".success_floor");
        out.scenario.grid = g;
    }
    if (j.contains("noise")) {
        const json& n = j["noise"];
        const std::string path = origin + ".noise";
        require_keys(n, path, {"velocity_sigma", "yaw_sigma", "drift_sigma", "drift_interval"});
        if (n.contains("velocity_sigma"))
            out.scenario.noise.velocity_sigma = num(n["velocity_sigma"], path + ".velocity_sigma");
        if (n.contains("yaw_sigma"))
            out.scenario.noise.yaw_sigma = num(n["yaw_sigma"], path + ".yaw_sigma");
        if (n.contains("drift_sigma"))
            out.scenario.noise.drift_sigma = num(n["drift_sigma"], path + ".drift_sigma");
        if (n.contains("drift_interval"))
            out.scenario.noise.drift_interval = num(n["drift_interval"], path + ".drift_interval");
    }
    if (j.contains("params")) parse_params(j["params"], origin + ".params", out.scenario.params);
    if (j.contains("interference")) {
        const json& f = j["interference"];
        const std::string path = origin + ".interference";
        require_keys(f, path, {"amplitude", "period", "duty", "phase"});
        if (f.contains("amplitude"))
            out.scenario.interference.amplitude = num(f["amplitude"], path + ".amplitude");
        if (f.contains("period"))
            out.scenario.interference.period = num(f["period"], path + ".period");
        if (f.contains("duty")) out.scenario.interference.duty = num(f["duty"], path + ".duty");
        if (f.contains("phase")) out.scenario.interference.phase = num(f["phase"], path + ".phase");
    }
    if (j.contains("range")) {
        const json& r = j["range"];
        const std::string path = origin + ".range";
        require_keys(r, path, {"height", "r_limit"});
        if (r.contains("height")) out.range_height = num(r["height"], path + ".height");
        if (r.contains("r_limit")) out.range_limit = num(r["r_limit"], path + ".r_limit");
    }
    if (j.contains("start")) out.scenario.start = vec3(j["start"], origin + ".start");
    if (j.contains("dt")) out.scenario.dt = num(j["dt"], origin + ".dt");
    if (j.contains("max_time")) out.scenario.max_time = num(j["max_time"], origin + ".max_time");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            fail(origin + ".seed", "expected an integer");
        out.scenario.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("record_traces"))
        out.scenario.record_traces = j["record_traces"].get<bool>();

    // keep the derived min_signal consistent with an overridden response
    if (!j.contains("params") ||
        !(j["params"].is_object() && j["params"].contains("min_signal")))
        out.scenario.params.min_signal =
            GuidanceParams::default_min_signal(out.scenario.response);

    try {
        out.scenario.validate();
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(origin + ": " + e.what());
    }
    return out;
}

RunSettings load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace luxland
