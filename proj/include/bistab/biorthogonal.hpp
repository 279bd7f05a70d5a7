/*
 * biorthogonal.hpp — minimal-norm biorthogonal families to {e^{μ_k t}} on [0,T].
 *
 * The family {σ_j} satisfies ∫₀^T σ_j(t) e^{μ_k t} dt = δ_jk and is the
 * building block of the moment-method control synthesis.  We work in the
 * decaying re-parameterization
 *
 *     ε_k(t) = e^{−μ_k(T−t)}   (same span as e^{μ_k t}, entries stay in [0,1])
 *
 * so every σ_j is stored as a coefficient row over {ε_k}.  The minimal-norm
 * family is M = diag(e^{−μ_j T}) · G⁻¹ where G is the Gram matrix of the ε
 * basis, because ∫ σ_j e^{μ_k t} dt = e^{μ_k T} ∫ σ_j ε_k dt.
 *
 * G is Cauchy-like and catastrophically ill-conditioned: for Dirichlet-type
 * spectra at T = 0.5 the biorthogonality residual is amplified by e^{μ_N T}
 * (≈ 1e75 at N = 6), so double precision cannot certify the family beyond
 * very small N.  The extended backend (MPFR software floats, digit count
 * chosen from μ_N·T and the requested tolerance) performs the solve and the
 * a-posteriori verification at sufficient precision, then snapshots the
 * damped downstream quantities (σ norms, control coefficients) to double.
 * Construction hard-fails when the verified residual exceeds the tolerance.
 */

#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace bistab {

enum class Precision { double_precision, extended };

// Opaque holder for the extended-precision coefficient matrix; only
// biorthogonal.cpp sees its definition (keeps MPFR out of public headers).
struct ExtendedFamilyData;

struct BiorthogonalFamily {
    Eigen::VectorXd exponents;      // μ_k >= 0, distinct, nondecreasing
    double horizon = 0.0;           // T
    Eigen::MatrixXd coeff_matrix;   // M: row j = coefficients of σ_j over ε_k (double snapshot)
    Eigen::VectorXd sigma_norms;    // ‖σ_j‖_{L²(0,T)}
    Eigen::MatrixXd sigma_gram;     // ⟨σ_i, σ_j⟩ = (M G Mᵀ)_{ij}, double snapshot
    double condition_estimate = 0;  // 1-norm condition estimate of the equilibrated Gram
    double residual = 0;            // verified max |∫σ_j e^{μ_k t}dt − δ_jk|
    double tolerance = 0;           // residual tolerance the build was gated on
    int precision_digits = 0;       // 0 = double build; else decimal digits of the MPFR build
    std::shared_ptr<const ExtendedFamilyData> extended;  // set iff precision_digits > 0

    int size() const { return static_cast<int>(exponents.size()); }

    // σ_j(t), t in [0,T], evaluated from the double snapshot.
    double sigma(int j, double t) const;
};

// Gram matrix of the ε basis: G_jk = (1 − e^{−(μ_j+μ_k)T})/(μ_j+μ_k),
// with the limit value T when μ_j = μ_k = 0.  Throws on duplicate exponents.
Eigen::MatrixXd gram_matrix(const Eigen::VectorXd& exponents, double T);

// Decimal digits the extended backend needs for the given spectrum/tolerance.
int extended_digits_required(const Eigen::VectorXd& exponents, double T, double tol);

// Builds the minimal-norm biorthogonal family.  The a-posteriori residual is
// measured by composite Gauss quadrature (independent of the Gram closed
// form) at the working precision; construction throws std::runtime_error if
// it exceeds `tol` — for large N or stiff spectra the remedy is
// Precision::extended.
BiorthogonalFamily build_biorthogonal(const Eigen::VectorXd& exponents, double T,
                                      double tol,
                                      Precision precision = Precision::double_precision,
                                      int digits_override = 0);

// Re-verifies biorthogonality of an existing family by composite Gauss
// quadrature on `panels` panels (points per panel chosen for the exponential
// integrand).  Runs at the family's build precision.
double verify_biorthogonality(const BiorthogonalFamily& family, int panels = 64);

// q = Mᵀ c: coefficient vector (over ε_k) of the combination Σ_j c_j σ_j,
// contracted at the family's build precision and snapshotted to double.
// This is the only way downstream code may combine σ rows: the double
// snapshot of M alone loses the cancellation structure.
Eigen::VectorXd family_combine(const BiorthogonalFamily& family, const Eigen::VectorXd& c);

}  // namespace bistab
