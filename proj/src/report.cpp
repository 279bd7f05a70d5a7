#include "bistab/report.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>

namespace bistab {

std::string iso_timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

json config_json(const RunConfig& cfg) {
    json j;
    j["model"] = cfg.model;
    if (!cfg.mu_table.empty()) {
        j["mu_table"] = cfg.mu_table;
        j["kind"] = cfg.kind;
    }
    j["truncation"] = cfg.truncation;
    j["window"] = cfg.window;
    j["windows"] = cfg.windows;
    if (!cfg.perturbation.empty()) j["perturbation"] = cfg.perturbation;
    j["perturbation_radius"] = cfg.perturbation_radius;
    j["seed"] = cfg.seed;
    j["steps"] = cfg.steps;
    j["precision"] = cfg.precision == Precision::extended ? "extended" : "double";
    j["family_tol"] = cfg.family_tol;
    j["floor"] = cfg.floor;
    j["b_floor"] = cfg.b_floor;
    j["tau"] = cfg.tau;
    j["samples"] = cfg.samples;
    return j;
}

json model_json(const SpectralModel& model) {
    json j;
    j["id"] = model.id;
    j["truncation"] = model.truncation;
    j["index_offset"] = model.index_offset;
    j["lambda1"] = model.eigenvalues[0];
    j["lambda1_shift"] = model.lambda1_shift;
    j["C_B"] = model.operator_norm;
    j["eigenvalues"] = std::vector<double>(model.eigenvalues.data(),
                                           model.eigenvalues.data() + model.truncation);
    j["ground_coupling"] = std::vector<double>(model.ground_coupling.data(),
                                               model.ground_coupling.data() + model.truncation);
    return j;
}

json hypothesis_json(const HypothesisReport& rep) {
    json j;
    j["alpha"] = rep.alpha;
    j["min_abs_b"] = rep.min_abs_b;
    j["min_index"] = rep.min_index;
    j["partial_sum"] = rep.partial_sum;
    j["tail_estimate"] = rep.tail_estimate;
    j["pass"] = rep.pass;
    if (!rep.message.empty()) j["message"] = rep.message;
    return j;
}

json family_json(const BiorthogonalFamily& family) {
    json j;
    j["size"] = family.size();
    j["horizon"] = family.horizon;
    j["residual"] = family.residual;
    j["tolerance"] = family.tolerance;
    j["condition_estimate"] = family.condition_estimate;
    j["precision_digits"] = family.precision_digits;
    j["sigma_norms"] = std::vector<double>(family.sigma_norms.data(),
                                           family.sigma_norms.data() + family.size());
    return j;
}

json certificate_json(const CertificateReport& cert) {
    json j;
    j["p_norm"] = cert.p_norm;
    j["bound"] = cert.bound;
    j["lambda_hat"] = cert.lambda_hat;
    j["satisfied"] = cert.satisfied;
    return j;
}

json run_report_json(const StabilizationRun& run, const FittedConstants* fitted,
                     const StabilizationConstants* constants, const RunConfig& cfg) {
    json j;
    j["schema"] = "bistab-run/1";
    j["timestamp"] = iso_timestamp();
    j["config"] = config_json(cfg);
    j["model_id"] = run.model_id;
    j["T"] = run.T;
    j["N"] = run.N;
    j["lambda1"] = run.lambda1;
    j["succeeded"] = run.succeeded;
    if (!run.failure.empty()) j["failure"] = run.failure;
    j["floor"] = run.floor;
    j["alpha"] = run.alpha;
    j["C_B"] = run.C_B;
    j["lambda_hat"] = run.lambda_hat;
    j["C_alpha_hat"] = run.C_alpha_hat;
    j["tail_indicator"] = run.tail_indicator;
    j["family"] = {{"residual", run.family_residual},
                   {"condition_estimate", run.family_condition},
                   {"precision_digits", run.family_digits}};
    j["v_norms"] = run.v_norm_sequence;

    json windows = json::array();
    for (const auto& w : run.windows) {
        json wj;
        wj["n"] = w.index;
        wj["v_norm_start"] = w.v_norm_start;
        wj["v_norm_end"] = w.v_norm_end;
        wj["control_l2"] = w.control_l2;
        wj["certificate_bound"] = w.certificate_bound;
        wj["energy_ok"] = w.energy_ok;
        wj["sup_ratio"] = w.sup_ratio;
        wj["u_distance_start"] = w.u_distance_start;
        windows.push_back(wj);
    }
    j["windows"] = windows;

    if (fitted) {
        j["fitted"] = {{"K_hat", fitted->K_hat},
                       {"rho_hat", fitted->rho_hat},
                       {"omega_hat", fitted->omega_hat},
                       {"M_hat", fitted->M_hat},
                       {"theta_hat", fitted->theta_hat},
                       {"windows_used", fitted->windows_used},
                       // The decay model fixes ρ via θ = e^{−2ρ}; reconciliation of
                       // the free fit against that choice, reported not asserted.
                       {"rho_from_theta", fitted->theta_hat > 0
                                              ? -0.5 * std::log(fitted->theta_hat)
                                              : 0.0}};
    }
    if (constants) {
        j["constants"] = {{"omega_T", constants->omega_T},
                          {"alpha", constants->alpha},
                          {"C_alpha_T", constants->C_alpha_T},
                          {"Lambda_T", constants->Lambda_T},
                          {"C3", constants->C3},
                          {"C4", constants->C4},
                          {"K_T", std::isfinite(constants->K_T) ? json(constants->K_T)
                                                                : json("inf")},
                          {"log10_K_T", constants->log10_K_T}};
    }
    return j;
}

void write_json(const json& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_json: cannot open '" + path + "'");
    out << doc.dump(2) << "\n";
}

void write_windows_csv(const StabilizationRun& run, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_windows_csv: cannot open '" + path + "'");
    out << "n,v_norm_start,v_norm_end,control_l2,certificate_bound,energy_ok\n";
    char buf[256];
    for (const auto& w : run.windows) {
        std::snprintf(buf, sizeof buf, "%d,%.11e,%.11e,%.11e,%.11e,%d\n", w.index,
                      w.v_norm_start, w.v_norm_end, w.control_l2, w.certificate_bound,
                      w.energy_ok ? 1 : 0);
        out << buf;
    }
}

void write_trajectory(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trajectory: cannot open '" + path + "'");
    if (traj.samples.empty()) throw std::invalid_argument("write_trajectory: empty trajectory");
    const int n = static_cast<int>(traj.samples.front().coeffs.size());
    out << "t";
    for (int k = 1; k <= n; ++k) out << " a_" << k;
    out << "\n";
    char buf[32];
    for (const auto& s : traj.samples) {
        std::snprintf(buf, sizeof buf, "%.11e", s.time);
        out << buf;
        for (int k = 0; k < n; ++k) {
            std::snprintf(buf, sizeof buf, " %.11e", s.coeffs[k]);
            out << buf;
        }
        out << "\n";
    }
}

}  // namespace bistab
