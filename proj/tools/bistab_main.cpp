/*
 * bistab — configuration-driven front door.
 *
 * Commands: models | check | control | simulate | stabilize | probe
 * Exit codes: 0 success, 1 mathematical failure (hypothesis violated,
 * contraction lost, moment solve rejected), 2 usage/config error.
 */

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "bistab/config.hpp"
#include "bistab/report.hpp"

namespace fs = std::filesystem;
using namespace bistab;

namespace {

struct GlobalFlags {
    std::string config_path;
    std::string out_override;
    int seed_override = -1;
    std::string precision_override;
    bool quiet = false;
};

RunConfig load_config(const GlobalFlags& flags, bool required = true) {
    RunConfig cfg;
    if (!flags.config_path.empty()) {
        cfg = parse_config(flags.config_path);
    } else if (required) {
        throw ConfigError("this command requires --config PATH");
    }
    if (!flags.out_override.empty()) cfg.out = flags.out_override;
    if (flags.seed_override >= 0) cfg.seed = static_cast<unsigned>(flags.seed_override);
    if (!flags.precision_override.empty()) {
        if (flags.precision_override == "double") cfg.precision = Precision::double_precision;
        else if (flags.precision_override == "extended") cfg.precision = Precision::extended;
        else throw ConfigError("--precision must be 'double' or 'extended'");
    }
    cfg.quiet = flags.quiet;
    fs::create_directories(cfg.out);
    return cfg;
}

IntegratorConfig integrator_config(const RunConfig& cfg) {
    IntegratorConfig icfg;
    icfg.step_count = cfg.steps;
    icfg.record_stride = std::max(1, cfg.steps / 1024);
    return icfg;
}

StabilizationOptions stabilization_options(const RunConfig& cfg) {
    StabilizationOptions opts;
    opts.floor = cfg.floor;
    opts.family_tol = cfg.family_tol;
    opts.precision = cfg.precision;
    opts.b_floor = cfg.b_floor;
    opts.hypothesis_tau = cfg.tau;
    return opts;
}

int cmd_models() {
    std::cout << "id            lambda_1      alpha         C_B\n";
    for (const auto& id : catalog_ids()) {
        const SpectralModel model = build_model(catalog_spec(id, 8));
        const double alpha = model.eigenvalues[0] >= 0.0
                                 ? gap_alpha(model)
                                 : gap_alpha(shift_to_zero_ground(model));
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-13s %-13.6g %-13.6g %-13.6g\n", id.c_str(),
                      model.eigenvalues[0], alpha, model.operator_norm);
        std::cout << buf;
    }
    return 0;
}

int cmd_check(const RunConfig& cfg) {
    const SpectralModel model = build_model(cfg.model_spec());
    const double tau = cfg.tau > 0 ? cfg.tau : cfg.window;
    const HypothesisReport rep = hypothesis_check(model, tau, cfg.b_floor >= 0
                                                                  ? cfg.b_floor
                                                                  : 1e-12 * model.operator_norm);
    json doc;
    doc["schema"] = "bistab-check/1";
    doc["timestamp"] = iso_timestamp();
    doc["config"] = config_json(cfg);
    doc["model"] = model_json(model);
    doc["hypothesis"] = hypothesis_json(rep);
    write_json(doc, cfg.out + "/check.json");
    if (!cfg.quiet)
        std::cout << (rep.pass ? "PASS" : "FAIL") << ": alpha=" << rep.alpha
                  << " min|b_k|=" << rep.min_abs_b << " (k=" << rep.min_index << ")\n";
    return rep.pass ? 0 : 1;
}

int cmd_control(const RunConfig& cfg) {
    const SpectralModel model = build_model(cfg.model_spec());
    const SpectralModel shifted = shift_to_zero_ground(model);
    const BiorthogonalFamily family =
        build_biorthogonal(shifted.eigenvalues, cfg.window, cfg.family_tol, cfg.precision);
    StateCoefficients v0{cfg.initial_deviation(), 0.0};
    const ControlSignal p = synthesize_null_control(shifted, v0, family, cfg.b_floor);
    const CertificateReport cert = control_norm_certificate(p, shifted, family, v0);

    write_control_table(p, cfg.out + "/control.tbl", cfg.samples);
    write_control_coefficients(p, cfg.out + "/control.coeff");
    json doc;
    doc["schema"] = "bistab-control/1";
    doc["timestamp"] = iso_timestamp();
    doc["config"] = config_json(cfg);
    doc["model"] = model_json(model);
    doc["family"] = family_json(family);
    doc["certificate"] = certificate_json(cert);
    write_json(doc, cfg.out + "/control.json");
    if (!cfg.quiet)
        std::cout << "control written: ||p||_L2=" << p.l2_norm << " bound=" << cert.bound << "\n";
    return 0;
}

int cmd_simulate(const RunConfig& cfg) {
    const SpectralModel model = build_model(cfg.model_spec());
    const SpectralModel shifted = shift_to_zero_ground(model);
    const BiorthogonalFamily family =
        build_biorthogonal(shifted.eigenvalues, cfg.window, cfg.family_tol, cfg.precision);
    const Eigen::VectorXd dev = cfg.initial_deviation();
    StateCoefficients v0{dev, 0.0};
    const ControlSignal p = synthesize_null_control(shifted, v0, family, cfg.b_floor);

    StateCoefficients u0{dev, 0.0};
    u0.coeffs[0] += 1.0;  // u(0) = φ₁ + v0
    const Trajectory traj =
        integrate_bilinear(model, p, u0, 0.0, cfg.window, integrator_config(cfg));
    write_trajectory(traj, cfg.out + "/trajectory.csv");

    json doc;
    doc["schema"] = "bistab-simulate/1";
    doc["timestamp"] = iso_timestamp();
    doc["config"] = config_json(cfg);
    doc["model"] = model_json(model);
    doc["family"] = family_json(family);
    doc["control_l2"] = p.l2_norm;
    doc["endpoint_norm"] = traj.samples.back().norm();
    write_json(doc, cfg.out + "/simulate.json");
    if (!cfg.quiet)
        std::cout << "trajectory written (" << traj.samples.size() << " samples)\n";
    return 0;
}

int cmd_stabilize(const RunConfig& cfg) {
    const SpectralModel model = build_model(cfg.model_spec());
    StateCoefficients u0{cfg.initial_deviation(), 0.0};
    u0.coeffs[0] += 1.0;
    const StabilizationRun run = run_stabilization(model, u0, cfg.window, cfg.windows,
                                                   integrator_config(cfg),
                                                   stabilization_options(cfg));
    FittedConstants fitted;
    StabilizationConstants constants;
    bool have_fit = false, have_constants = false;
    try {
        fitted = fit_constants(run);
        have_fit = true;
    } catch (const std::exception&) {
        // Too few above-floor windows (e.g. trivial u0 = φ₁): report without fits.
    }
    try {
        constants = constants_for_run(run);
        have_constants = true;
    } catch (const std::exception&) {
    }
    const json doc = run_report_json(run, have_fit ? &fitted : nullptr,
                                     have_constants ? &constants : nullptr, cfg);
    write_json(doc, cfg.out + "/report.json");
    write_windows_csv(run, cfg.out + "/windows.csv");
    if (!cfg.quiet) {
        std::cout << (run.succeeded ? "stabilized" : "FAILED") << ": " << run.windows.size()
                  << " windows";
        if (have_fit)
            std::cout << ", K_hat=" << fitted.K_hat << ", omega_hat=" << fitted.omega_hat
                      << " (omega_T=" << std::log(2.0) / cfg.window << ")";
        std::cout << "\n";
    }
    return run.succeeded ? 0 : 1;
}

int cmd_probe(const RunConfig& cfg) {
    const SpectralModel model = build_model(cfg.model_spec());
    double radius = 0.0;
    try {
        radius = basin_probe(model, cfg.window, integrator_config(cfg), cfg.seed,
                             stabilization_options(cfg));
    } catch (const std::invalid_argument&) {
        radius = 0.0;  // model rejected upstream (hypothesis violation)
    }
    json doc;
    doc["schema"] = "bistab-probe/1";
    doc["timestamp"] = iso_timestamp();
    doc["config"] = config_json(cfg);
    doc["model"] = model_json(model);
    doc["radius"] = radius;
    write_json(doc, cfg.out + "/probe.json");
    if (!cfg.quiet) std::cout << "empirical stabilizability radius: " << radius << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bistab — moment-method stabilizing control for bilinear parabolic systems"};
    app.require_subcommand(1);

    GlobalFlags flags;
    app.add_option("--config", flags.config_path, "run configuration file");
    app.add_option("--out", flags.out_override, "output directory (overrides config)");
    app.add_option("--seed", flags.seed_override, "RNG seed (overrides config)");
    app.add_option("--precision", flags.precision_override, "double | extended (overrides config)");
    app.add_flag("--quiet", flags.quiet, "suppress progress output");

    auto* models_cmd = app.add_subcommand("models", "list the model catalog");
    auto* check_cmd = app.add_subcommand("check", "hypothesis check for the configured model");
    auto* control_cmd = app.add_subcommand("control", "synthesize and export a null control");
    auto* simulate_cmd = app.add_subcommand("simulate", "integrate one controlled window");
    auto* stabilize_cmd = app.add_subcommand("stabilize", "run the full windowed campaign");
    auto* probe_cmd = app.add_subcommand("probe", "probe the empirical stabilizability radius");
    for (auto* sub : {models_cmd, check_cmd, control_cmd, simulate_cmd, stabilize_cmd, probe_cmd})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (models_cmd->parsed()) return cmd_models();
        if (check_cmd->parsed()) return cmd_check(load_config(flags));
        if (control_cmd->parsed()) return cmd_control(load_config(flags));
        if (simulate_cmd->parsed()) return cmd_simulate(load_config(flags));
        if (stabilize_cmd->parsed()) return cmd_stabilize(load_config(flags));
        if (probe_cmd->parsed()) return cmd_probe(load_config(flags));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
