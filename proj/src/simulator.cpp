#include "bistab/simulator.hpp"

#include <cmath>
#include <stdexcept>

namespace bistab {

namespace {

void validate_cfg(const IntegratorConfig& cfg) {
    if (cfg.step_count < 16 || (cfg.step_count & (cfg.step_count - 1)) != 0)
        throw std::invalid_argument("IntegratorConfig: step_count must be a power of two >= 16");
    if (cfg.reference_factor < 16)
        throw std::invalid_argument("IntegratorConfig: reference scheme must use >= 16x steps");
    if (cfg.record_stride < 1)
        throw std::invalid_argument("IntegratorConfig: record_stride must be >= 1");
}

void validate_window(const ControlSignal& p, double t_start, double t_end) {
    if (!(t_end > t_start)) throw std::invalid_argument("integrate: empty window");
    if (!p.is_zero() && std::abs(p.horizon - (t_end - t_start)) > 1e-12 * std::max(1.0, p.horizon))
        throw std::invalid_argument("integrate: control horizon does not match window length");
}

// ψ(x) = (1 − e^{−x})/x with the x → 0 limit 1.
double psi(double x) {
    if (std::abs(x) < 1e-6) return 1.0 - 0.5 * x + x * x / 6.0;
    return -std::expm1(-x) / x;
}

struct StrangWorkspace {
    Eigen::MatrixXd Q;       // eigenvectors of symmetrized B
    Eigen::VectorXd beta;    // eigenvalues of B
    Eigen::VectorXd g;       // Qᵀ b (deviation forcing, when needed)
    Eigen::VectorXd half_decay;  // e^{−λ_k Δt/2}

    StrangWorkspace(const SpectralModel& model, double dt, bool with_forcing) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            0.5 * (model.coupling_matrix + model.coupling_matrix.transpose()));
        Q = es.eigenvectors();
        beta = es.eigenvalues();
        if (with_forcing) g = Q.transpose() * model.ground_coupling;
        half_decay = (-model.eigenvalues.array() * (0.5 * dt)).exp();
    }
};

struct NormGuard {
    double bound_sq;
    explicit NormGuard(double b) : bound_sq(b) {}
    void check(const Eigen::VectorXd& a, double t) const {
        if (!(a.squaredNorm() <= 100.0 * bound_sq) || !a.allFinite())
            throw std::runtime_error(
                "integrator: trajectory norm exceeded the a-priori energy bound by 10x at t=" +
                std::to_string(t) + " (step instability)");
    }
};

double guard_bound_sq(const SpectralModel& model, const ControlSignal& p, double T,
                      double u0_norm) {
    const double p_l1 = p.is_zero() ? 0.0 : control_l1_norm(p);
    double b = energy_bound_sq(model.operator_norm, p_l1, p.l2_norm, T, u0_norm);
    // Negative eigenvalues (unshifted models with λ1 < 0) add explicit growth.
    const double lam_min = model.eigenvalues.minCoeff();
    if (lam_min < 0.0) b *= std::exp(-2.0 * lam_min * T);
    return b;
}

Trajectory run_steps(const SpectralModel& model, const ControlSignal& p,
                     const StateCoefficients& u0, double t_start, double t_end,
                     const IntegratorConfig& cfg, bool deviation_form) {
    const int n = model.truncation;
    if (u0.coeffs.size() != n) throw std::invalid_argument("integrate: state size mismatch");
    const double T = t_end - t_start;

    Trajectory traj;
    traj.t_start = t_start;
    traj.t_end = t_end;
    const NormGuard guard(guard_bound_sq(model, p, T, u0.coeffs.norm()) +
                          1e-30 /* keep the zero-state case trivially inside */);

    auto record = [&](const Eigen::VectorXd& a, double t) {
        traj.samples.push_back({a, t});
    };

    if (cfg.scheme == Scheme::reference_rk4_fine) {
        // Classical 4-stage one-step method on the full right-hand side.
        const long steps = static_cast<long>(cfg.step_count) * cfg.reference_factor;
        const double dt = T / steps;
        auto rhs = [&](const Eigen::VectorXd& a, double t) -> Eigen::VectorXd {
            const double pv = p.is_zero() ? 0.0 : p.evaluate(t - t_start);
            Eigen::VectorXd r = -(model.eigenvalues.array() * a.array()).matrix();
            if (pv != 0.0) {
                r -= pv * (model.coupling_matrix * a);
                if (deviation_form) r -= pv * model.ground_coupling;
            }
            return r;
        };
        Eigen::VectorXd a = u0.coeffs;
        record(a, t_start);
        for (long s = 0; s < steps; ++s) {
            const double t = t_start + s * dt;
            const Eigen::VectorXd k1 = rhs(a, t);
            const Eigen::VectorXd k2 = rhs(a + 0.5 * dt * k1, t + 0.5 * dt);
            const Eigen::VectorXd k3 = rhs(a + 0.5 * dt * k2, t + 0.5 * dt);
            const Eigen::VectorXd k4 = rhs(a + dt * k3, t + dt);
            a += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            guard.check(a, t + dt);
            if ((s + 1) % (cfg.record_stride * static_cast<long>(cfg.reference_factor)) == 0 ||
                s + 1 == steps)
                record(a, t_start + (s + 1) * dt);
        }
        return traj;
    }

    const int steps = cfg.step_count;
    const double dt = T / steps;
    StrangWorkspace ws(model, dt, deviation_form);
    Eigen::VectorXd a = u0.coeffs;
    record(a, t_start);
    for (int s = 0; s < steps; ++s) {
        const double t_mid = t_start + (s + 0.5) * dt;
        a.array() *= ws.half_decay.array();
        if (!p.is_zero()) {
            const double theta = p.evaluate(t_mid - t_start) * dt;
            if (theta != 0.0) {
                Eigen::VectorXd w = ws.Q.transpose() * a;
                for (int i = 0; i < n; ++i) {
                    const double x = theta * ws.beta[i];
                    w[i] = std::exp(-x) * w[i];
                    if (deviation_form) w[i] -= theta * psi(x) * ws.g[i];
                }
                a = ws.Q * w;
            }
        }
        a.array() *= ws.half_decay.array();
        guard.check(a, t_start + (s + 1) * dt);
        if ((s + 1) % cfg.record_stride == 0 || s + 1 == steps)
            record(a, t_start + (s + 1) * dt);
    }
    return traj;
}

}  // namespace

ControlSignal zero_control(double T) {
    ControlSignal p;
    p.horizon = T;
    p.exponents.resize(0);
    p.coeffs.resize(0);
    return p;
}

Trajectory integrate_bilinear(const SpectralModel& model, const ControlSignal& p,
                              const StateCoefficients& u0, double t_start, double t_end,
                              const IntegratorConfig& cfg) {
    validate_cfg(cfg);
    validate_window(p, t_start, t_end);
    return run_steps(model, p, u0, t_start, t_end, cfg, /*deviation_form=*/false);
}

StateCoefficients integrate_linearized(const SpectralModel& shifted_model,
                                       const ControlSignal& p, const StateCoefficients& v0,
                                       double T) {
    const int n = shifted_model.truncation;
    if (v0.coeffs.size() != n)
        throw std::invalid_argument("integrate_linearized: state size mismatch");
    if (!p.is_zero() && p.size() != n)
        throw std::invalid_argument("integrate_linearized: control representation mismatch");

    StateCoefficients out;
    out.time = v0.time + T;
    out.coeffs.resize(n);
    for (int k = 0; k < n; ++k) {
        const double mu_k = shifted_model.eigenvalues[k];
        double v = std::exp(-mu_k * T) * v0.coeffs[k];
        if (!p.is_zero()) {
            // ∫₀^T e^{−μ_k(T−s)} ε_m(s) ds: both factors decay away from s=T,
            // so the same Gram antiderivative applies.
            double conv = 0.0;
            for (int m = 0; m < n; ++m) {
                const double s = mu_k + p.exponents[m];
                const double I = (s == 0.0) ? T : -std::expm1(-s * T) / s;
                conv += p.coeffs[m] * I;
            }
            v -= shifted_model.ground_coupling[k] * conv;
        }
        out.coeffs[k] = v;
    }
    return out;
}

Trajectory integrate_forced(const SpectralModel& model,
                            const std::function<Eigen::VectorXd(double)>& f,
                            const StateCoefficients& u0, double t_start, double t_end,
                            const IntegratorConfig& cfg) {
    validate_cfg(cfg);
    if (!(t_end > t_start)) throw std::invalid_argument("integrate_forced: empty window");
    const int n = model.truncation;
    if (u0.coeffs.size() != n) throw std::invalid_argument("integrate_forced: state size mismatch");
    const double T = t_end - t_start;

    Trajectory traj;
    traj.t_start = t_start;
    traj.t_end = t_end;

    const long steps = cfg.scheme == Scheme::reference_rk4_fine
                           ? static_cast<long>(cfg.step_count) * cfg.reference_factor
                           : cfg.step_count;
    const double dt = T / steps;
    Eigen::VectorXd a = u0.coeffs;
    traj.samples.push_back({a, t_start});

    double f_l2_sq = 0.0;  // midpoint-rule ‖f‖²_{L²}, for the accretive bound
    double sup_norm = a.norm();

    if (cfg.scheme == Scheme::reference_rk4_fine) {
        auto rhs = [&](const Eigen::VectorXd& u, double t) -> Eigen::VectorXd {
            return -(model.eigenvalues.array() * u.array()).matrix() + f(t);
        };
        for (long s = 0; s < steps; ++s) {
            const double t = t_start + s * dt;
            const Eigen::VectorXd k1 = rhs(a, t);
            const Eigen::VectorXd k2 = rhs(a + 0.5 * dt * k1, t + 0.5 * dt);
            const Eigen::VectorXd k3 = rhs(a + 0.5 * dt * k2, t + 0.5 * dt);
            const Eigen::VectorXd k4 = rhs(a + dt * k3, t + dt);
            a += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            f_l2_sq += dt * f(t + 0.5 * dt).squaredNorm();
            sup_norm = std::max(sup_norm, a.norm());
            if ((s + 1) % (cfg.record_stride * static_cast<long>(cfg.reference_factor)) == 0 ||
                s + 1 == steps)
                traj.samples.push_back({a, t_start + (s + 1) * dt});
        }
    } else {
        const Eigen::VectorXd half_decay = (-model.eigenvalues.array() * (0.5 * dt)).exp();
        for (long s = 0; s < steps; ++s) {
            const double t_mid = t_start + (s + 0.5) * dt;
            const Eigen::VectorXd fm = f(t_mid);
            a.array() *= half_decay.array();
            a += dt * fm;
            a.array() *= half_decay.array();
            f_l2_sq += dt * fm.squaredNorm();
            sup_norm = std::max(sup_norm, a.norm());
            if ((s + 1) % cfg.record_stride == 0 || s + 1 == steps)
                traj.samples.push_back({a, t_start + (s + 1) * dt});
        }
    }

    if (model.eigenvalues.minCoeff() >= 0.0) {
        const double bound = u0.coeffs.norm() + std::sqrt(T) * std::sqrt(f_l2_sq);
        if (sup_norm > bound * 1.01 + 1e-12)
            throw std::runtime_error("integrate_forced: accretive-case bound sup||u|| <= ||u0|| + sqrt(T)||f|| violated");
    }
    return traj;
}

Trajectory integrate_deviation(const SpectralModel& shifted_model, const ControlSignal& p,
                               const StateCoefficients& v0, double T,
                               const IntegratorConfig& cfg) {
    validate_cfg(cfg);
    validate_window(p, 0.0, T);
    if (std::abs(shifted_model.eigenvalues[0]) > 1e-12)
        throw std::invalid_argument("integrate_deviation: model must be shifted (mu_1 = 0)");
    return run_steps(shifted_model, p, v0, 0.0, T, cfg, /*deviation_form=*/true);
}

DeviationGap deviation_gap(const SpectralModel& shifted_model, const ControlSignal& p,
                           const StateCoefficients& v0, double T, const IntegratorConfig& cfg) {
    const Trajectory traj = integrate_deviation(shifted_model, p, v0, T, cfg);
    const Eigen::VectorXd v_end = traj.samples.back().coeffs;
    const StateCoefficients vbar = integrate_linearized(shifted_model, p, v0, T);
    DeviationGap gap;
    gap.w_norm = (v_end - vbar.coeffs).norm();
    gap.v_norm = v_end.norm();
    return gap;
}

double control_l1_norm(const ControlSignal& p, int samples) {
    if (p.is_zero()) return 0.0;
    if (samples < 2) throw std::invalid_argument("control_l1_norm: need >= 2 samples");
    const double h = p.horizon / (samples - 1);
    double sum = 0.5 * (std::abs(p.evaluate(0.0)) + std::abs(p.evaluate(p.horizon)));
    for (int i = 1; i + 1 < samples; ++i) sum += std::abs(p.evaluate(i * h));
    return h * sum;
}

double energy_bound_sq(double C_B, double p_l1, double p_l2, double T, double v0_norm) {
    return std::exp(2.0 * C_B * p_l1 + C_B * T) * (v0_norm * v0_norm + C_B * p_l2 * p_l2);
}

}  // namespace bistab
