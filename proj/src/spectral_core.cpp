#include "bistab/spectral_model.hpp"

#include <cmath>
#include <stdexcept>

namespace bistab {

SpectralModel make_spectral_model(const Eigen::VectorXd& eigenvalues,
                                  const Eigen::MatrixXd& coupling_matrix,
                                  int index_offset, std::string id) {
    const int n = static_cast<int>(eigenvalues.size());
    if (n < 1) throw std::invalid_argument("make_spectral_model: empty spectrum");
    if (coupling_matrix.rows() != n || coupling_matrix.cols() != n)
        throw std::invalid_argument("make_spectral_model: coupling matrix size mismatch");
    for (int k = 0; k + 1 < n; ++k)
        if (eigenvalues[k + 1] < eigenvalues[k])
            throw std::invalid_argument("make_spectral_model: eigenvalues must be nondecreasing");
    for (int k = 0; k < n; ++k)
        if (!std::isfinite(eigenvalues[k]))
            throw std::invalid_argument("make_spectral_model: non-finite eigenvalue");

    SpectralModel m;
    m.eigenvalues = eigenvalues;
    m.coupling_matrix = coupling_matrix;
    m.ground_coupling = coupling_matrix.col(0);
    // Spectral norm of the (symmetric) coupling matrix, floored at 1 per the
    // convention C_B >= 1 used by the constant chain.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (coupling_matrix + coupling_matrix.transpose()));
    const double spec_norm = es.eigenvalues().cwiseAbs().maxCoeff();
    m.operator_norm = std::max(1.0, spec_norm);
    m.index_offset = index_offset;
    m.truncation = n;
    m.id = std::move(id);
    return m;
}

StateCoefficients free_evolution(const SpectralModel& model,
                                 const StateCoefficients& u0, double t) {
    if (t < 0.0) throw std::domain_error("free_evolution: t must be nonnegative");
    if (u0.coeffs.size() != model.truncation)
        throw std::invalid_argument("free_evolution: state size mismatch");
    StateCoefficients out;
    out.coeffs = (u0.coeffs.array() * (-model.eigenvalues.array() * t).exp()).matrix();
    out.time = u0.time + t;
    return out;
}

StateCoefficients ground_state_solution(const SpectralModel& model, double t) {
    if (t < 0.0) throw std::domain_error("ground_state_solution: t must be nonnegative");
    StateCoefficients out;
    out.coeffs = Eigen::VectorXd::Zero(model.truncation);
    out.coeffs[0] = std::exp(-model.eigenvalues[0] * t);
    out.time = t;
    return out;
}

SpectralModel shift_to_zero_ground(const SpectralModel& model) {
    SpectralModel shifted = model;
    const double lambda1 = model.eigenvalues[0];
    shifted.eigenvalues.array() -= lambda1;
    shifted.lambda1_shift = model.lambda1_shift + lambda1;
    if (model.lambda_next != 0.0) shifted.lambda_next = model.lambda_next - lambda1;
    return shifted;
}

double gap_alpha(const SpectralModel& model) {
    const int n = model.truncation;
    if (n < 2) throw std::invalid_argument("gap_alpha: need at least two eigenvalues");
    if (model.eigenvalues[0] < 0.0)
        throw std::domain_error("gap_alpha: negative ground eigenvalue; shift to zero ground first");
    double alpha = std::numeric_limits<double>::infinity();
    for (int k = 0; k + 1 < n; ++k) {
        const double gap = std::sqrt(model.eigenvalues[k + 1]) - std::sqrt(model.eigenvalues[k]);
        alpha = std::min(alpha, gap);
    }
    if (alpha <= 0.0)
        throw std::runtime_error("gap_alpha: repeated eigenvalue, moment problem degenerate");
    return alpha;
}

double lambda_T_empirical(const SpectralModel& model, const BiorthogonalFamily& family,
                          double b_floor) {
    const int n = model.truncation;
    if (family.size() != n)
        throw std::invalid_argument("lambda_T_empirical: family/model size mismatch");
    for (int k = 0; k < n; ++k)
        if (std::abs(family.exponents[k] - model.eigenvalues[k]) >
            1e-9 * std::max(1.0, std::abs(model.eigenvalues[k])))
            throw std::invalid_argument(
                "lambda_T_empirical: family exponents do not match model eigenvalues");
    if (b_floor < 0.0) b_floor = 1e-12 * model.operator_norm;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const double bk = model.ground_coupling[k];
        if (std::abs(bk) < b_floor)
            throw std::runtime_error("lambda_T_empirical: |b_" + std::to_string(k + model.index_offset) +
                                     "| below floor; model rejected");
        const double r = family.sigma_norms[k] / bk;
        sum += r * r;
    }
    return std::sqrt(sum);
}

StabilizationConstants formula_constants(double T, double alpha, double C_B,
                                         double C_alpha_T, double Lambda_T) {
    if (T <= 0 || alpha <= 0 || C_B < 1 || C_alpha_T <= 0 || Lambda_T <= 0)
        throw std::invalid_argument("formula_constants: all inputs must be positive (C_B >= 1)");
    StabilizationConstants c;
    c.T = T;
    c.alpha = alpha;
    c.C_B = C_B;
    c.C_alpha_T = C_alpha_T;
    c.Lambda_T = Lambda_T;
    c.C3 = 2.0 * std::sqrt(T) * C_B * C_alpha_T;
    c.C4 = C_B * C_alpha_T * C_alpha_T;
    c.omega_T = std::log(2.0) / T;
    // K_T² = C_B C₄ Λ² e^{C₃+(C_B+1)T} (1 + C₄Λ²); evaluate in logs because
    // the exponential factor overflows double for realistic C₃.
    const double log_L2 = 2.0 * std::log(Lambda_T);
    const double log_K2 = std::log(C_B) + std::log(c.C4) + log_L2 + c.C3 + (C_B + 1.0) * T +
                          std::log1p(c.C4 * Lambda_T * Lambda_T);
    c.log10_K_T = 0.5 * log_K2 / std::log(10.0);
    c.K_T = (0.5 * log_K2 < 709.0) ? std::exp(0.5 * log_K2)
                                   : std::numeric_limits<double>::infinity();
    return c;
}

}  // namespace bistab
