#include "bistab/stabilization.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>

#include "bistab/models.hpp"

namespace bistab {

namespace {

std::string cache_key(const Eigen::VectorXd& exponents, double T, double tol,
                      Precision precision) {
    std::string key;
    key.reserve(exponents.size() * sizeof(double) + 2 * sizeof(double) + 1);
    auto append = [&key](double v) {
        char buf[sizeof(double)];
        std::memcpy(buf, &v, sizeof(double));
        key.append(buf, sizeof(double));
    };
    for (int i = 0; i < exponents.size(); ++i) append(exponents[i]);
    append(T);
    append(tol);
    key.push_back(precision == Precision::extended ? 'e' : 'd');
    return key;
}

}  // namespace

std::shared_ptr<const BiorthogonalFamily> FamilyCache::get(const Eigen::VectorXd& exponents,
                                                           double T, double tol,
                                                           Precision precision) {
    const std::string key = cache_key(exponents, T, tol, precision);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    auto fam = std::make_shared<const BiorthogonalFamily>(
        build_biorthogonal(exponents, T, tol, precision));
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.emplace(key, std::move(fam)).first->second;
}

FamilyCache& FamilyCache::global() {
    static FamilyCache cache;
    return cache;
}

StabilizationRun run_stabilization(const SpectralModel& model, const StateCoefficients& u0,
                                   double T, int n_windows, const IntegratorConfig& cfg,
                                   const StabilizationOptions& opts) {
    if (!(T > 0)) throw std::invalid_argument("run_stabilization: window length must be positive");
    if (n_windows < 1) throw std::invalid_argument("run_stabilization: need at least one window");
    if (u0.coeffs.size() != model.truncation)
        throw std::invalid_argument("run_stabilization: state size mismatch");

    const double tau = opts.hypothesis_tau > 0 ? opts.hypothesis_tau : T;
    const double b_floor = opts.b_floor >= 0 ? opts.b_floor : 1e-12 * model.operator_norm;
    const HypothesisReport hyp = hypothesis_check(model, tau, b_floor);
    if (!hyp.pass)
        throw std::invalid_argument("run_stabilization: model fails hypothesis check: " +
                                    hyp.message);

    const SpectralModel shifted = shift_to_zero_ground(model);
    const auto family = FamilyCache::global().get(shifted.eigenvalues, T, opts.family_tol,
                                                  opts.precision);

    StabilizationRun run;
    run.model_id = model.id;
    run.T = T;
    run.N = model.truncation;
    run.floor = opts.floor;
    run.lambda1 = model.eigenvalues[0];
    run.alpha = hyp.alpha;
    run.C_B = model.operator_norm;
    run.lambda_hat = lambda_T_empirical(shifted, *family, b_floor);
    run.family_residual = family->residual;
    run.family_condition = family->condition_estimate;
    run.family_digits = family->precision_digits;
    if (model.lambda_next != 0.0) run.tail_indicator = std::exp(-model.lambda_next * T);
    // Ĉ_α(T) = max_j ‖σ_j‖ e^{μ_j T}, in logs to dodge overflow.
    {
        double best_log = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < family->size(); ++j)
            if (family->sigma_norms[j] > 0)
                best_log = std::max(best_log, std::log(family->sigma_norms[j]) +
                                                  family->exponents[j] * T);
        run.C_alpha_hat = std::exp(std::min(best_log, 709.0));
    }

    // Deviation of the exponentially-rescaled state z(t) = e^{λ₁t}u(t) from
    // the ground state; at t = 0, z = u0.
    Eigen::VectorXd v = u0.coeffs;
    v[0] -= 1.0;
    run.v0 = v;
    run.succeeded = true;

    for (int n = 0; n < n_windows; ++n) {
        const double vs = v.norm();
        run.v_norm_sequence.push_back(vs);
        if (vs < opts.floor) break;  // decayed into the noise floor: done

        const StateCoefficients vn{v, n * T};
        const ControlSignal p = synthesize_null_control(shifted, vn, *family, b_floor);
        const CertificateReport cert = control_norm_certificate(p, shifted, *family, vn);

        const Trajectory traj = integrate_deviation(shifted, p, vn, T, cfg);
        double sup_norm = 0.0;
        for (const auto& s : traj.samples) sup_norm = std::max(sup_norm, s.norm());
        const double bound_sq =
            energy_bound_sq(model.operator_norm, control_l1_norm(p), p.l2_norm, T, vs);
        const Eigen::VectorXd v_next = traj.samples.back().coeffs;

        WindowRecord rec;
        rec.index = n;
        rec.v_norm_start = vs;
        rec.v_norm_end = v_next.norm();
        rec.control_l2 = p.l2_norm;
        rec.certificate_bound = cert.bound;
        rec.energy_ok = sup_norm * sup_norm <= bound_sq * (1.0 + 1e-9);
        rec.sup_ratio = sup_norm / vs;
        rec.u_distance_start = std::exp(-run.lambda1 * n * T) * vs;
        run.windows.push_back(rec);

        if (rec.v_norm_end > vs && rec.v_norm_end > opts.floor) {
            run.succeeded = false;
            run.failure = "contraction failed on window " + std::to_string(n) + ": ||v|| grew from " +
                          std::to_string(vs) + " to " + std::to_string(rec.v_norm_end) +
                          " (initial deviation outside the basin)";
            v = v_next;
            run.v_norm_sequence.push_back(v.norm());
            return run;
        }
        v = v_next;
        if (n + 1 == n_windows) run.v_norm_sequence.push_back(v.norm());
    }
    return run;
}

namespace {

// Least squares of y_n = a − ρ x_n for fixed ω (x_n = e^{ω n T}); returns SSE
// and the fitted (a, ρ).
struct InnerFit {
    double sse = 0, a = 0, rho = 0;
};

InnerFit inner_fit(const std::vector<double>& y, double omega, double T) {
    const int m = static_cast<int>(y.size());
    double sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (int n = 0; n < m; ++n) {
        const double x = std::exp(omega * n * T);
        sx += x;
        sxx += x * x;
        sy += y[n];
        sxy += x * y[n];
    }
    const double det = m * sxx - sx * sx;
    InnerFit fit;
    if (std::abs(det) < 1e-300) {
        fit.sse = std::numeric_limits<double>::infinity();
        return fit;
    }
    // y = a − ρx: normal equations for the basis {1, −x}.
    fit.a = (sxx * sy - sx * sxy) / det;
    fit.rho = (sx * sy - m * sxy) / det;
    for (int n = 0; n < m; ++n) {
        const double r = y[n] - fit.a + fit.rho * std::exp(omega * n * T);
        fit.sse += r * r;
    }
    return fit;
}

}  // namespace

FittedConstants fit_constants(const StabilizationRun& run) {
    std::vector<double> y;
    for (double v : run.v_norm_sequence) {
        if (v <= run.floor) break;
        y.push_back(std::log(v));
    }
    if (y.size() < 3)
        throw std::runtime_error("fit_constants: need at least 3 windows above the floor");
    for (size_t n = 1; n < y.size(); ++n)
        if (y[n] >= y[n - 1])
            throw std::runtime_error("fit_constants: window norms non-monotone above the floor");

    FittedConstants fc;
    fc.windows_used = static_cast<int>(y.size());

    // Windows whose endpoint fell below the floor measure integrator noise,
    // not the contraction, and would corrupt the max.
    fc.K_hat = 0.0;
    for (const auto& w : run.windows)
        if (w.v_norm_start > run.floor && w.v_norm_end > run.floor)
            fc.K_hat = std::max(fc.K_hat, w.v_norm_end / (w.v_norm_start * w.v_norm_start));
    fc.theta_hat = fc.K_hat * run.v_norm_sequence.front();

    // ω̂ by coarse log-grid scan + golden-section refinement; (M̂, ρ̂) from
    // the inner linear solve at the optimum.
    const double omega_T = std::log(2.0) / run.T;
    double best_omega = omega_T, best_sse = std::numeric_limits<double>::infinity();
    const double lo0 = omega_T / 20.0, hi0 = omega_T * 20.0;
    for (int i = 0; i <= 400; ++i) {
        const double om = lo0 * std::pow(hi0 / lo0, i / 400.0);
        const double sse = inner_fit(y, om, run.T).sse;
        if (sse < best_sse) {
            best_sse = sse;
            best_omega = om;
        }
    }
    double a = best_omega / 1.2, b = best_omega * 1.2;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc_sse = inner_fit(y, c, run.T).sse, fd_sse = inner_fit(y, d, run.T).sse;
    for (int it = 0; it < 200 && (b - a) > 1e-13 * best_omega; ++it) {
        if (fc_sse < fd_sse) {
            b = d;
            d = c;
            fd_sse = fc_sse;
            c = b - gr * (b - a);
            fc_sse = inner_fit(y, c, run.T).sse;
        } else {
            a = c;
            c = d;
            fc_sse = fd_sse;
            d = a + gr * (b - a);
            fd_sse = inner_fit(y, d, run.T).sse;
        }
    }
    fc.omega_hat = 0.5 * (a + b);
    const InnerFit fin = inner_fit(y, fc.omega_hat, run.T);
    fc.M_hat = std::exp(fin.a);
    fc.rho_hat = fin.rho;
    return fc;
}

StabilizationConstants constants_for_run(const StabilizationRun& run) {
    return formula_constants(run.T, run.alpha, run.C_B, run.C_alpha_hat, run.lambda_hat);
}

double basin_probe(const SpectralModel& model, double T, const IntegratorConfig& cfg,
                   unsigned seed, const StabilizationOptions& opts) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd dir(model.truncation);
    for (int i = 0; i < model.truncation; ++i) dir[i] = gauss(rng);
    dir.normalize();

    auto contracts = [&](double mag) -> bool {
        StateCoefficients u0;
        u0.coeffs = mag * dir;
        u0.coeffs[0] += 1.0;
        try {
            const StabilizationRun run = run_stabilization(model, u0, T, 3, cfg, opts);
            return run.succeeded;
        } catch (const std::exception&) {
            return false;
        }
    };

    double lo = 1e-3;
    if (!contracts(lo)) return 0.0;
    double hi = lo;
    while (hi < 1e6 && contracts(hi * 2.0)) hi *= 2.0;
    if (hi >= 1e6) return hi;
    hi *= 2.0;  // known-failing upper end
    lo = hi / 2.0;
    for (int it = 0; it < 40 && (hi - lo) > 1e-3 * lo; ++it) {
        const double mid = 0.5 * (lo + hi);
        (contracts(mid) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace bistab
