/*
 * control.hpp — null controls for the linearized system by the moment method.
 *
 * The control p(s) = Σ_k (v0_k / b_k) σ_k(s) steers the linearized deviation
 * v̄ from v0 to 0 on [0,T]: the biorthogonality of {σ_k} makes the moment
 * equations ∫₀^T e^{μ_k s} p(s) ds = v0_k / b_k exact by construction.
 * Controls are exponential sums over the decaying basis ε_k(t) = e^{−μ_k(T−t)},
 * so their L² norm is an exact Gram quadratic form.
 */

#pragma once

#include <string>

#include "bistab/biorthogonal.hpp"
#include "bistab/spectral_model.hpp"

namespace bistab {

struct ControlSignal {
    Eigen::VectorXd exponents;  // μ_k of the window's shifted spectrum
    double horizon = 0.0;       // T (window-local time)
    Eigen::VectorXd coeffs;     // q: p(t) = Σ_m q_m e^{−μ_m(T−t)}
    double l2_norm = 0.0;       // exact ‖p‖_{L²(0,T)} = √(qᵀ G q)

    int size() const { return static_cast<int>(exponents.size()); }
    double evaluate(double t) const;  // t in [0, T]
    bool is_zero() const { return coeffs.size() == 0 || coeffs.isZero(0.0); }
};

// Builds a ControlSignal from raw coefficients (norm recomputed from the Gram).
ControlSignal make_control(const Eigen::VectorXd& exponents, double T,
                           const Eigen::VectorXd& coeffs);

// p = Σ_k (v0_k / b_k) σ_k for the shifted model.  Requires the family to be
// built for the model's eigenvalues, every |b_k| above b_floor, and the
// family residual within its stored tolerance.
ControlSignal synthesize_null_control(const SpectralModel& shifted_model,
                                      const StateCoefficients& v0,
                                      const BiorthogonalFamily& family,
                                      double b_floor = -1.0 /* default 1e-12·C_B */);

struct CertificateReport {
    double p_norm = 0.0;   // ‖p‖_{L²}
    double bound = 0.0;    // Λ̂_T ‖v0‖
    double lambda_hat = 0.0;
    bool satisfied = false;
};

// ‖p‖ ≤ Λ̂_T ‖v0‖ (the computable Cauchy–Schwarz bound from the proof of the
// null-control norm estimate).  Report-only: the flag is set, never thrown.
CertificateReport control_norm_certificate(const ControlSignal& p, const SpectralModel& shifted_model,
                                           const BiorthogonalFamily& family,
                                           const StateCoefficients& v0);

// Sampled ascii table (t, p(t)) on a uniform grid (%.17g columns).
void write_control_table(const ControlSignal& p, const std::string& path, int samples);

// Exact coefficient form: one (exponent, coefficient) pair per line, %.17g,
// bit-stable across a write/read round trip.
void write_control_coefficients(const ControlSignal& p, const std::string& path);
ControlSignal read_control_coefficients(const std::string& path);

}  // namespace bistab
