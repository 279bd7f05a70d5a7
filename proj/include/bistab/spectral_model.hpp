/*
 * spectral_model.hpp — the truncated abstract problem.
 *
 * The operator A is carried by its spectrum {λ_k} (eigenbasis coordinates
 * are the only discretization), the bounded multiplication operator B by its
 * matrix B_jk = ⟨Bφ_j, φ_k⟩.  The ground-state machinery (shift A₁ = A − λ₁I,
 * ψ₁(t) = e^{−λ₁t}φ₁) lives here, together with the gap constant
 * α = min(√λ_{k+1} − √λ_k) and the measurable control-norm surrogate Λ̂_T.
 */

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bistab/biorthogonal.hpp"

namespace bistab {

struct SpectralModel {
    Eigen::VectorXd eigenvalues;     // λ_1 <= ... <= λ_N (may start negative)
    Eigen::MatrixXd coupling_matrix; // B_jk, symmetric for multiplication operators
    Eigen::VectorXd ground_coupling; // b_k = B_k1 (first column)
    double operator_norm = 1.0;      // C_B >= max(1, ||B||_2)
    int index_offset = 1;            // 0 for Neumann (catalog counts from k=0)
    int truncation = 0;              // N
    double lambda1_shift = 0.0;      // accumulated ground shift; 0 when unshifted
    double lambda_next = 0.0;        // λ_{N+1} when the spectrum is known beyond N
                                     // (tail indicator e^{−λ_{N+1}T}); 0 = unknown
    std::string id;                  // catalog id or description (reports only)

    int size() const { return truncation; }
};

struct StateCoefficients {
    Eigen::VectorXd coeffs;  // coordinates a_k in the eigenbasis
    double time = 0.0;

    double norm() const { return coeffs.norm(); }  // Parseval
};

struct Trajectory {
    std::vector<StateCoefficients> samples;  // times strictly increasing
    double t_start = 0.0;
    double t_end = 0.0;
};

// Constants of the quantitative decay chain.  C_alpha_T is the empirical
// Ĉ_α(T) = max_j ‖σ_j‖ e^{μ_j T}; K_T follows the defining formula
// K_T² = C_B C₄ Λ_T² e^{C₃+(C_B+1)T} (1 + C₄ Λ_T²) with C₃ = 2√T C_B C_α,
// C₄ = C_B C_α².  These reported values grow so fast that K_T overflows
// double for realistic spectra; log10 companions are always finite.
struct StabilizationConstants {
    double T = 0;
    double alpha = 0;
    double C_alpha_T = 0;
    double Lambda_T = 0;
    double C3 = 0;
    double C4 = 0;
    double K_T = 0;        // may be +inf; see log10_K_T
    double log10_K_T = 0;  // always finite
    double omega_T = 0;    // log(2)/T
    double C_B = 0;
};

// Validates invariants (nondecreasing eigenvalues, ground_coupling equals the
// first column, C_B >= max(1, spectral norm)) and fills derived fields.
SpectralModel make_spectral_model(const Eigen::VectorXd& eigenvalues,
                                  const Eigen::MatrixXd& coupling_matrix,
                                  int index_offset = 1, std::string id = {});

// a_k(t) = e^{−λ_k t} u0_k (semigroup representation).  Rejects t < 0.
StateCoefficients free_evolution(const SpectralModel& model,
                                 const StateCoefficients& u0, double t);

// ψ₁(t) = e^{−λ₁ t} e₁.
StateCoefficients ground_state_solution(const SpectralModel& model, double t);

// μ_k = λ_k − λ₁ (so μ₁ = 0); records λ₁ so decay reports can reinstate the
// e^{−λ₁t} factor.  Idempotent.
SpectralModel shift_to_zero_ground(const SpectralModel& model);

// α = min over k < N of (√λ_{k+1} − √λ_k), computed numerically.  Requires
// N >= 2 and λ_1 >= 0 (shift first for negative ground eigenvalues); throws
// if α <= 0 (repeated eigenvalue — the moment problem is degenerate).
double gap_alpha(const SpectralModel& model);

// Λ̂_T = (Σ_k ‖σ_k‖²/b_k²)^{1/2}, the computable surrogate for C_α(T)Λ_T that
// bounds ‖p‖_{L²} directly.  The family must be built for this model's
// eigenvalues; any |b_k| below b_floor rejects the model.
double lambda_T_empirical(const SpectralModel& model, const BiorthogonalFamily& family,
                          double b_floor = -1.0 /* default: 1e-12 * C_B */);

// Evaluates the K_T formula chain from (T, alpha, C_B, Ĉ_α(T), Λ̂_T).
StabilizationConstants formula_constants(double T, double alpha, double C_B,
                                         double C_alpha_T, double Lambda_T);

}  // namespace bistab
