#include "bistab/biorthogonal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/multiprecision/mpfr.hpp>

#include "bistab/quadrature.hpp"

namespace bistab {

using BigFloat = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                               boost::multiprecision::et_off>;

struct ExtendedFamilyData {
    int digits = 0;
    std::vector<BigFloat> exponents;
    std::vector<std::vector<BigFloat>> coeff;  // M rows
};

namespace {

// boost's variable-precision default is process-global; scope changes.
struct PrecisionGuard {
    unsigned saved;
    explicit PrecisionGuard(int digits) : saved(BigFloat::default_precision()) {
        BigFloat::default_precision(static_cast<unsigned>(digits));
    }
    ~PrecisionGuard() { BigFloat::default_precision(saved); }
};

template <typename S>
using Mat = std::vector<std::vector<S>>;

template <typename S>
Mat<S> zeros(int n) {
    return Mat<S>(n, std::vector<S>(n, S(0)));
}

// Dense LU with partial pivoting; sizes here are <= 32.
template <typename S>
struct LU {
    Mat<S> a;
    std::vector<int> piv;

    explicit LU(Mat<S> m) : a(std::move(m)), piv(a.size()) {
        using std::abs;
        const int n = static_cast<int>(a.size());
        for (int i = 0; i < n; ++i) piv[i] = i;
        for (int c = 0; c < n; ++c) {
            int best = c;
            for (int r = c + 1; r < n; ++r)
                if (abs(a[r][c]) > abs(a[best][c])) best = r;
            if (a[best][c] == S(0)) throw std::runtime_error("LU: singular matrix");
            std::swap(a[c], a[best]);
            std::swap(piv[c], piv[best]);
            for (int r = c + 1; r < n; ++r) {
                a[r][c] /= a[c][c];
                for (int k = c + 1; k < n; ++k) a[r][k] -= a[r][c] * a[c][k];
            }
        }
    }

    std::vector<S> solve(const std::vector<S>& b) const {
        const int n = static_cast<int>(a.size());
        std::vector<S> x(n);
        for (int i = 0; i < n; ++i) x[i] = b[piv[i]];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j) x[i] -= a[i][j] * x[j];
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) x[i] -= a[i][j] * x[j];
            x[i] /= a[i][i];
        }
        return x;
    }
};

template <typename S>
S norm1(const Mat<S>& m) {
    using std::abs;
    const int n = static_cast<int>(m.size());
    S best(0);
    for (int c = 0; c < n; ++c) {
        S col(0);
        for (int r = 0; r < n; ++r) col += abs(m[r][c]);
        if (col > best) best = col;
    }
    return best;
}

// G_jk = ∫₀^T ε_j ε_k = (1 − e^{−(μ_j+μ_k)T})/(μ_j+μ_k), limit T at μ_j=μ_k=0.
template <typename S>
Mat<S> gram_core(const std::vector<S>& mu, const S& T) {
    using std::exp;
    const int n = static_cast<int>(mu.size());
    Mat<S> g = zeros<S>(n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            const S s = mu[j] + mu[k];
            g[j][k] = (s == S(0)) ? T : (S(1) - exp(-s * T)) / s;
        }
    return g;
}

template <typename S>
struct CoreResult {
    Mat<S> M;           // σ_j coefficients over ε
    Mat<S> sigma_gram;  // M G Mᵀ
    std::vector<S> sigma_norms;
    S cond = S(0);
    S residual = S(0);
};

// Biorthogonality residual by composite Gauss quadrature, independent of the
// Gram closed form.  Node count per panel is sized from the largest
// exponential rate 2·μ_N so the quadrature error sits below the working
// precision (`target_digits`).
template <typename S>
S verify_core(const std::vector<S>& mu, const S& T, const Mat<S>& M, int panels,
              int target_digits) {
    using std::abs;
    using std::exp;
    using std::pow;
    const int n = static_cast<int>(mu.size());
    const double mu_max = static_cast<double>(mu[n - 1]);
    const double rate = 2.0 * mu_max * static_cast<double>(T) / panels;
    int pts = 8;
    while (pts < 256 && 2.0 * pts * std::log10(8.0 * pts / std::max(rate, 1e-9)) <
                            target_digits + 10)
        ++pts;

    const S tol = pow(S(10), -(target_digits > 20 ? target_digits - 5 : 15));
    auto [xg, wg] = gauss_legendre_nodes<S>(pts, tol);

    // Precompute σ_j at all nodes, then weave in e^{μ_k t} per column.
    const int total = panels * pts;
    std::vector<S> tnodes(total), wnodes(total);
    for (int p = 0; p < panels; ++p) {
        const S a = T * S(p) / S(panels);
        const S b = T * S(p + 1) / S(panels);
        for (int q = 0; q < pts; ++q) {
            tnodes[p * pts + q] = (b - a) / S(2) * xg[q] + (a + b) / S(2);
            wnodes[p * pts + q] = (b - a) / S(2) * wg[q];
        }
    }
    Mat<S> sigma_at(n, std::vector<S>(total, S(0)));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < total; ++i) {
            S v(0);
            for (int m = 0; m < n; ++m) v += M[j][m] * exp(-mu[m] * (T - tnodes[i]));
            sigma_at[j][i] = v;
        }
    S worst(0);
    for (int k = 0; k < n; ++k) {
        std::vector<S> ek(total);
        for (int i = 0; i < total; ++i) ek[i] = wnodes[i] * exp(mu[k] * tnodes[i]);
        for (int j = 0; j < n; ++j) {
            S integral(0);
            for (int i = 0; i < total; ++i) integral += sigma_at[j][i] * ek[i];
            const S res = abs(integral - (j == k ? S(1) : S(0)));
            if (res > worst) worst = res;
        }
    }
    return worst;
}

template <typename S>
CoreResult<S> build_core(const std::vector<S>& mu, const S& T, int target_digits) {
    using std::exp;
    using std::sqrt;
    const int n = static_cast<int>(mu.size());
    const Mat<S> G = gram_core<S>(mu, T);

    // Symmetric diagonal equilibration before factorization: the raw Gram is
    // Cauchy-like and its condition number hides orders of magnitude that the
    // scaled matrix does not have.
    std::vector<S> d(n);
    for (int j = 0; j < n; ++j) d[j] = S(1) / sqrt(G[j][j]);
    Mat<S> Gt = zeros<S>(n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) Gt[j][k] = d[j] * G[j][k] * d[k];

    LU<S> lu(Gt);
    Mat<S> Gt_inv = zeros<S>(n);
    for (int c = 0; c < n; ++c) {
        std::vector<S> e(n, S(0));
        e[c] = S(1);
        auto col = lu.solve(e);
        for (int r = 0; r < n; ++r) Gt_inv[r][c] = col[r];
    }

    CoreResult<S> out;
    out.cond = norm1(Gt) * norm1(Gt_inv);

    // M = diag(e^{−μ_j T}) · G⁻¹ with G⁻¹ = D Gt⁻¹ D.
    out.M = zeros<S>(n);
    for (int j = 0; j < n; ++j) {
        const S row_scale = exp(-mu[j] * T);
        for (int k = 0; k < n; ++k) out.M[j][k] = row_scale * d[j] * Gt_inv[j][k] * d[k];
    }

    // ⟨σ_i, σ_j⟩ = (M G Mᵀ)_{ij}
    out.sigma_gram = zeros<S>(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            S acc(0);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) acc += out.M[i][a] * G[a][b] * out.M[j][b];
            out.sigma_gram[i][j] = acc;
        }
    out.sigma_norms.resize(n);
    for (int j = 0; j < n; ++j) {
        S v = out.sigma_gram[j][j];
        out.sigma_norms[j] = v > S(0) ? S(sqrt(v)) : S(0);
    }

    out.residual = verify_core<S>(mu, T, out.M, 64, target_digits);
    return out;
}

void check_exponents(const Eigen::VectorXd& mu, double T) {
    const int n = static_cast<int>(mu.size());
    if (n < 1) throw std::invalid_argument("biorthogonal: empty exponent list");
    if (!(T > 0)) throw std::invalid_argument("biorthogonal: horizon T must be positive");
    for (int k = 0; k < n; ++k) {
        if (mu[k] < 0) throw std::invalid_argument("biorthogonal: exponents must be nonnegative");
        if (k > 0 && !(mu[k] > mu[k - 1]))
            throw std::invalid_argument("biorthogonal: exponents must be strictly increasing (duplicate exponents make the Gram singular)");
    }
}

}  // namespace

Eigen::MatrixXd gram_matrix(const Eigen::VectorXd& exponents, double T) {
    check_exponents(exponents, T);
    const int n = static_cast<int>(exponents.size());
    std::vector<double> mu(exponents.data(), exponents.data() + n);
    const auto g = gram_core<double>(mu, T);
    Eigen::MatrixXd out(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) out(j, k) = g[j][k];
    return out;
}

int extended_digits_required(const Eigen::VectorXd& exponents, double T, double tol) {
    const double mu_max = exponents[exponents.size() - 1];
    // The residual is amplified by e^{mu_N T} and the equilibrated solve
    // loses further digits that also scale with mu_N T (observed ~1.25x in
    // total), hence the 1.5 safety factor on the amplification term.
    const int amplification = static_cast<int>(std::ceil(1.5 * mu_max * T / std::log(10.0)));
    const int tol_digits = static_cast<int>(std::ceil(-std::log10(std::min(tol, 1.0))));
    return std::max(50, amplification + tol_digits + 30);
}

double BiorthogonalFamily::sigma(int j, double t) const {
    if (j < 0 || j >= size()) throw std::out_of_range("BiorthogonalFamily::sigma: bad index");
    if (t < 0 || t > horizon) throw std::domain_error("BiorthogonalFamily::sigma: t outside [0,T]");
    double v = 0.0;
    for (int m = 0; m < size(); ++m)
        v += coeff_matrix(j, m) * std::exp(-exponents[m] * (horizon - t));
    return v;
}

BiorthogonalFamily build_biorthogonal(const Eigen::VectorXd& exponents, double T, double tol,
                                      Precision precision, int digits_override) {
    check_exponents(exponents, T);
    const int n = static_cast<int>(exponents.size());

    BiorthogonalFamily fam;
    fam.exponents = exponents;
    fam.horizon = T;
    fam.tolerance = tol;
    fam.coeff_matrix.resize(n, n);
    fam.sigma_gram.resize(n, n);
    fam.sigma_norms.resize(n);

    if (precision == Precision::double_precision) {
        std::vector<double> mu(exponents.data(), exponents.data() + n);
        const auto core = build_core<double>(mu, T, 16);
        for (int j = 0; j < n; ++j) {
            fam.sigma_norms[j] = core.sigma_norms[j];
            for (int k = 0; k < n; ++k) {
                fam.coeff_matrix(j, k) = core.M[j][k];
                fam.sigma_gram(j, k) = core.sigma_gram[j][k];
            }
        }
        fam.condition_estimate = core.cond;
        fam.residual = core.residual;
    } else {
        const int digits = digits_override > 0 ? digits_override
                                               : extended_digits_required(exponents, T, tol);
        PrecisionGuard guard(digits);
        auto data = std::make_shared<ExtendedFamilyData>();
        data->digits = digits;
        data->exponents.reserve(n);
        for (int k = 0; k < n; ++k) data->exponents.emplace_back(exponents[k]);
        const auto core = build_core<BigFloat>(data->exponents, BigFloat(T), digits);
        data->coeff = core.M;
        for (int j = 0; j < n; ++j) {
            fam.sigma_norms[j] = static_cast<double>(core.sigma_norms[j]);
            for (int k = 0; k < n; ++k) {
                fam.coeff_matrix(j, k) = static_cast<double>(core.M[j][k]);
                fam.sigma_gram(j, k) = static_cast<double>(core.sigma_gram[j][k]);
            }
        }
        fam.condition_estimate = static_cast<double>(core.cond);
        fam.residual = static_cast<double>(core.residual);
        fam.precision_digits = digits;
        fam.extended = std::move(data);
    }

    if (!(fam.residual <= tol)) {
        std::ostringstream os;
        os << "build_biorthogonal: verified residual " << fam.residual << " exceeds tolerance "
           << tol << " (N=" << n << ", T=" << T
           << "); reduce N or enable the extended-precision backend";
        throw std::runtime_error(os.str());
    }
    return fam;
}

double verify_biorthogonality(const BiorthogonalFamily& family, int panels) {
    const int n = family.size();
    if (family.extended) {
        PrecisionGuard guard(family.extended->digits);
        return static_cast<double>(verify_core<BigFloat>(family.extended->exponents,
                                                         BigFloat(family.horizon),
                                                         family.extended->coeff, panels,
                                                         family.extended->digits));
    }
    std::vector<double> mu(family.exponents.data(), family.exponents.data() + n);
    Mat<double> M(n, std::vector<double>(n));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) M[j][k] = family.coeff_matrix(j, k);
    return verify_core<double>(mu, family.horizon, M, panels, 16);
}

Eigen::VectorXd family_combine(const BiorthogonalFamily& family, const Eigen::VectorXd& c) {
    const int n = family.size();
    if (c.size() != n) throw std::invalid_argument("family_combine: coefficient size mismatch");
    Eigen::VectorXd q(n);
    if (family.extended) {
        PrecisionGuard guard(family.extended->digits);
        for (int m = 0; m < n; ++m) {
            BigFloat acc(0);
            for (int j = 0; j < n; ++j) acc += BigFloat(c[j]) * family.extended->coeff[j][m];
            q[m] = static_cast<double>(acc);
        }
    } else {
        q = family.coeff_matrix.transpose() * c;
    }
    return q;
}

}  // namespace bistab
