#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "luxland/bulb_fit.hpp"
#include "luxland/config.hpp"
#include "luxland/export.hpp"
#include "luxland/field_io.hpp"
#include "luxland/scenario.hpp"
#include "luxland/sensing.hpp"

namespace fs = std::filesystem;
using namespace luxland;

namespace {

struct GlobalOpts {
    std::string out_dir = "out";
    bool quiet = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void say(const GlobalOpts& g, const std::string& msg) {
    if (!g.quiet) std::cout << msg << "\n";
}

int cmd_simulate(const GlobalOpts& g, const std::string& config_path) {
    RunSettings settings = load_config(config_path);
    if (g.seed_set) settings.scenario.seed = g.seed;
    settings.scenario.record_trajectory = true;
    settings.scenario.record_traces = true;

    const RunResult result = run_scenario(settings.scenario);
    atomic_write((fs::path(g.out_dir) / "trajectory.csv").string(), trajectory_csv(result));
    atomic_write((fs::path(g.out_dir) / "mode_log.csv").string(), mode_log_csv(result));
    atomic_write((fs::path(g.out_dir) / "result.json").string(), result_json(result));
    atomic_write((fs::path(g.out_dir) / "readings.csv").string(),
                 trace_csv(result.raw_traces, result.filtered_traces));

    say(g, std::string("outcome: ") + outcome_name(result.outcome) +
               (result.outcome == Outcome::Landed
                    ? " offset=" + std::to_string(result.landing_offset) +
                          "m time=" + std::to_string(result.landing_time) + "s"
                    : result.outcome == Outcome::Failed ? " (" + result.fail_reason + ")" : ""));
    switch (result.outcome) {
        case Outcome::Landed: return 0;
        case Outcome::Failed: return 2;
        case Outcome::Timeout: return 3;
    }
    return 3;
}

int cmd_sweep(const GlobalOpts& g, const std::string& config_path) {
    RunSettings settings = load_config(config_path);
    if (g.seed_set) settings.scenario.seed = g.seed;
    if (!settings.scenario.grid) {
        std::cerr << "config error: sweep requires a 'sweep' section\n";
        return 1;
    }
    const SweepResult sweep = sweep_start_grid(settings.scenario);
    atomic_write((fs::path(g.out_dir) / "heatmap.csv").string(), heatmap_csv(sweep));
    atomic_write((fs::path(g.out_dir) / "heatmap.svg").string(), heatmap_svg(sweep));
    atomic_write((fs::path(g.out_dir) / "stats.json").string(), sweep_stats_json(sweep));
    say(g, "success_rate=" + std::to_string(sweep.stats.success_rate) +
               " mean_offset=" + std::to_string(sweep.stats.mean_offset) +
               "m mean_time=" + std::to_string(sweep.stats.mean_time) + "s");
    return sweep.stats.success_rate >= settings.sweep_success_floor ? 0 : 2;
}

int cmd_field_import(const GlobalOpts& g, const std::string& path) {
    const MeasuredFieldGrid grid = load_field_grid(path);
    say(g, "loaded '" + grid.label + "': " + std::to_string(grid.nx) + "x" +
               std::to_string(grid.ny) + "x" + std::to_string(grid.nz) + " samples");
    return 0;
}

int cmd_field_fit(const GlobalOpts& g, const std::string& path) {
    const MeasuredFieldGrid grid = load_field_grid(path);
    const BulbFit fit = fit_bulb_model(grid);
    std::cout << "power=" << fit.source.power << " lambert_exponent="
              << fit.source.lambert_exponent << " position=(" << fit.source.position.x()
              << "," << fit.source.position.y() << "," << fit.source.position.z()
              << ") rms_rel_residual=" << fit.rms_rel_residual
              << (fit.degenerate ? " [degenerate]" : "")
              << (fit.converged ? "" : " [not converged]") << "\n";
    (void)g;
    return fit.converged || fit.degenerate ? 0 : 2;
}

int cmd_field_slice(const GlobalOpts& g, const std::string& path, const std::string& axis,
                    double height, double cross) {
    const MeasuredFieldGrid grid = load_field_grid(path);
    if (axis != "x" && axis != "y") {
        std::cerr << "slice axis must be 'x' or 'y'\n";
        return 1;
    }
    std::ostringstream out;
    out << axis << ",intensity\n";
    const Vec3 lo = grid.origin;
    const Vec3 hi = grid.max_corner();
    const int n = 201;
    for (int i = 0; i < n; ++i) {
        Vec3 p;
        double coord;
        if (axis == "x") {
            coord = lo.x() + (hi.x() - lo.x()) * i / (n - 1);
            p = Vec3(coord, cross, height);
        } else {
            coord = lo.y() + (hi.y() - lo.y()) * i / (n - 1);
            p = Vec3(cross, coord, height);
        }
        out << coord << ',' << grid.interpolate(p) << '\n';
    }
    const std::string out_path = (fs::path(g.out_dir) / ("slice_" + axis + ".csv")).string();
    atomic_write(out_path, out.str());
    say(g, "wrote " + out_path);
    return 0;
}

int cmd_field_synth(const GlobalOpts& g, const std::string& kind, const std::string& out_path) {
    ReferenceField f;
    if (kind == "bulb") f = ReferenceField::Bulb;
    else if (kind == "no_lens") f = ReferenceField::NoLens;
    else if (kind == "lens1") f = ReferenceField::Lens1;
    else if (kind == "lens2") f = ReferenceField::Lens2;
    else {
        std::cerr << "unknown field kind '" << kind << "' (bulb|no_lens|lens1|lens2)\n";
        return 1;
    }
    save_field_grid(reference_field_grid(f), out_path);
    say(g, "wrote " + out_path);
    return 0;
}

int cmd_range(const GlobalOpts& g, const std::string& config_path) {
    RunSettings settings = load_config(config_path);
    const Environment& env = settings.scenario.environment;
    std::cout << "variant          r_min[m]  r_max[m]\n";
    for (RangeVariant v : {RangeVariant::DownwardArray, RangeVariant::SideFacing,
                           RangeVariant::Hybrid}) {
        const OperatingRange r = compute_operating_range(v, settings.range_height, env,
                                                         settings.scenario.response,
                                                         settings.range_limit);
        std::printf("%-16s %8.2f  %8.2f%s\n", range_variant_name(v), r.r_min, r.r_max,
                    r.valid ? "" : "  (no band)");
    }
    (void)g;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IR light-field drone landing simulator"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
    app.add_flag("--quiet", g.quiet, "suppress progress output");
    auto* seed_opt = app.add_option("--seed", g.seed, "override the config seed");

    std::string config_path, field_path, synth_kind, synth_out = "field.csv";
    std::string slice_axis = "x";
    double slice_height = 1.1, slice_cross = 0.0;

    auto* sim = app.add_subcommand("simulate", "run one landing scenario");
    sim->add_option("config", config_path, "scenario config (JSON)")->required();

    auto* sweep = app.add_subcommand("sweep", "run a start-grid sweep");
    sweep->add_option("config", config_path, "scenario config (JSON)")->required();

    auto* field = app.add_subcommand("field", "field-grid utilities");
    field->require_subcommand(1);
    auto* fimport = field->add_subcommand("import", "validate a grid CSV");
    fimport->add_option("path", field_path)->required();
    auto* ffit = field->add_subcommand("fit", "fit the analytic bulb model");
    ffit->add_option("path", field_path)->required();
    auto* fslice = field->add_subcommand("slice", "emit an axis cross-section");
    fslice->add_option("path", field_path)->required();
    fslice->add_option("--axis", slice_axis, "x or y")->capture_default_str();
    fslice->add_option("--height", slice_height, "slice height z [m]")->capture_default_str();
    fslice->add_option("--cross", slice_cross, "fixed cross coordinate [m]")
        ->capture_default_str();
    auto* fsynth = field->add_subcommand("synth", "write a reference field grid");
    fsynth->add_option("kind", synth_kind, "bulb|no_lens|lens1|lens2")->required();
    fsynth->add_option("--file", synth_out, "output CSV path")->capture_default_str();

    auto* range = app.add_subcommand("range", "compute operating ranges");
    range->add_option("config", config_path, "scenario config (JSON)")->required();

    CLI11_PARSE(app, argc, argv);
    g.seed_set = seed_opt->count() > 0;

    try {
        if (sim->parsed()) return cmd_simulate(g, config_path);
        if (sweep->parsed()) return cmd_sweep(g, config_path);
        if (field->parsed()) {
            if (fimport->parsed()) return cmd_field_import(g, field_path);
            if (ffit->parsed()) return cmd_field_fit(g, field_path);
            if (fslice->parsed())
                return cmd_field_slice(g, field_path, slice_axis, slice_height, slice_cross);
            if (fsynth->parsed()) return cmd_field_synth(g, synth_kind, synth_out);
        }
        if (range->parsed()) return cmd_range(g, config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
