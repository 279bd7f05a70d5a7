#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "bistab/control.hpp"
#include "test_helpers.hpp"

using namespace bistab;
using namespace bistab::testing;

namespace {

// Scalar model: u' + mu u + p b u = 0 with a single mode.
SpectralModel scalar_model(double mu, double b) {
    Eigen::VectorXd lam(1);
    lam << mu;
    Eigen::MatrixXd B(1, 1);
    B << b;
    return make_spectral_model(lam, B);
}

}  // namespace

TEST_CASE("synthesize_null_control: zero deviation gives the zero control") {
    const auto fam = benchmark_family();
    const ControlSignal p = synthesize_null_control(benchmark_shifted(), benchmark_v0(0.0), *fam);
    CHECK(p.is_zero());
    CHECK(p.l2_norm == 0.0);
    CHECK(p.evaluate(0.25) == 0.0);
}

TEST_CASE("synthesize_null_control: scalar case is the constant c/(b T)") {
    const double b = 0.7, c = 0.3, T = 1.25;
    const SpectralModel m = scalar_model(0.0, b);
    const BiorthogonalFamily fam = build_biorthogonal(m.eigenvalues, T, 1e-12);
    StateCoefficients v0;
    v0.coeffs = Eigen::VectorXd::Constant(1, c);
    const ControlSignal p = synthesize_null_control(m, v0, fam);
    for (double t : {0.0, 0.3, T}) CHECK(p.evaluate(t) == doctest::Approx(c / (b * T)).epsilon(1e-13));
    CHECK(p.l2_norm == doctest::Approx(std::abs(c) / (std::abs(b) * std::sqrt(T))).epsilon(1e-13));

    // The Cauchy-Schwarz certificate is an equality in the scalar case.
    const CertificateReport cert = control_norm_certificate(p, m, fam, v0);
    CHECK(cert.satisfied);
    CHECK(cert.p_norm == doctest::Approx(cert.bound).epsilon(1e-10));
    CHECK(cert.lambda_hat == doctest::Approx(1.0 / (std::abs(b) * std::sqrt(T))).epsilon(1e-10));
}

TEST_CASE("synthesize_null_control: linear in the deviation") {
    const auto fam = benchmark_family();
    StateCoefficients a, b, sum;
    a.coeffs = Eigen::VectorXd::Zero(kBenchN);
    b.coeffs = Eigen::VectorXd::Zero(kBenchN);
    a.coeffs[0] = 0.03;
    a.coeffs[2] = -0.01;
    b.coeffs[1] = 0.02;
    b.coeffs[3] = 0.005;
    sum.coeffs = 2.0 * a.coeffs + b.coeffs;
    const ControlSignal pa = synthesize_null_control(benchmark_shifted(), a, *fam);
    const ControlSignal pb = synthesize_null_control(benchmark_shifted(), b, *fam);
    const ControlSignal ps = synthesize_null_control(benchmark_shifted(), sum, *fam);
    const Eigen::VectorXd combo = 2.0 * pa.coeffs + pb.coeffs;
    CHECK((ps.coeffs - combo).cwiseAbs().maxCoeff() <= 1e-12 * ps.coeffs.cwiseAbs().maxCoeff());
}

TEST_CASE("synthesize_null_control: matches a discretized least-norm oracle (N=4)") {
    // Independent oracle: collocate the moment equations on a composite
    // Gauss grid (128 panels x 16 nodes) and compute the discrete
    // minimum-norm solution of A p = target with Eigen.  The continuous
    // minimal-norm control lies in span{eps_k}, so the two must agree.
    const SpectralModel m = shift_to_zero_ground(build_model(catalog_spec("dirichlet-x2", 4)));
    const double T = kBenchT;
    const auto fam = FamilyCache::global().get(m.eigenvalues, T, 1e-8, Precision::extended);
    StateCoefficients v0;
    v0.coeffs.resize(4);
    v0.coeffs << 0.04, -0.01, 0.002, 0.0005;
    const ControlSignal p = synthesize_null_control(m, v0, *fam);

    const int panels = 128, nper = 16;
    const QuadratureRule base = gauss_legendre_rule(nper);
    const int total = panels * nper;
    Eigen::VectorXd t(total), w(total);
    for (int pl = 0; pl < panels; ++pl) {
        const double a = T * pl / panels, b = T * (pl + 1) / panels;
        for (int i = 0; i < nper; ++i) {
            t[pl * nper + i] = a + (b - a) * base.nodes[i];
            w[pl * nper + i] = (b - a) * base.weights[i];
        }
    }
    // Moment equations in the decaying form: sum_i w_i e^{-mu_k (T - t_i)} p_i
    // = e^{-mu_k T} v0_k / b_k.
    Eigen::MatrixXd A(4, total);
    Eigen::VectorXd target(4);
    for (int k = 0; k < 4; ++k) {
        for (int i = 0; i < total; ++i) A(k, i) = std::exp(-m.eigenvalues[k] * (T - t[i]));
        target[k] = std::exp(-m.eigenvalues[k] * T) * v0.coeffs[k] / m.ground_coupling[k];
    }
    const Eigen::MatrixXd AWAt = A * w.asDiagonal() * A.transpose();
    const Eigen::VectorXd lambda = AWAt.ldlt().solve(target);
    const Eigen::VectorXd p_disc = A.transpose() * lambda;  // least-norm samples

    double dist2 = 0.0, norm2 = 0.0;
    for (int i = 0; i < total; ++i) {
        const double diff = p.evaluate(t[i]) - p_disc[i];
        dist2 += w[i] * diff * diff;
        norm2 += w[i] * p_disc[i] * p_disc[i];
    }
    CHECK(std::sqrt(dist2) <= 1e-6 * std::sqrt(norm2));
    CHECK(p.l2_norm == doctest::Approx(std::sqrt(norm2)).epsilon(1e-8));
}

TEST_CASE("control_norm_certificate: strict inequality on the benchmark") {
    const auto fam = benchmark_family();
    StateCoefficients v0;
    v0.coeffs.resize(kBenchN);
    v0.coeffs << 0.05, -0.02, 0.01, 0.003, -0.001, 0.0004;
    const ControlSignal p = synthesize_null_control(benchmark_shifted(), v0, *fam);
    const CertificateReport cert = control_norm_certificate(p, benchmark_shifted(), *fam, v0);
    CHECK(cert.satisfied);
    CHECK(cert.p_norm < cert.bound);
    CHECK(cert.lambda_hat == doctest::Approx(5.743531).epsilon(1e-5));
}

TEST_CASE("synthesize_null_control: validation errors") {
    const auto fam = benchmark_family();
    StateCoefficients wrong;
    wrong.coeffs = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(synthesize_null_control(benchmark_shifted(), wrong, *fam),
                    std::invalid_argument);
    // Family built for a different spectrum is rejected.
    Eigen::VectorXd mu(1);
    mu << 0.0;
    const BiorthogonalFamily other = build_biorthogonal(mu, 1.0, 1e-12);
    CHECK_THROWS_AS(synthesize_null_control(benchmark_shifted(), benchmark_v0(), other),
                    std::invalid_argument);
    // Coupling below the floor is rejected.
    CHECK_THROWS_AS(
        synthesize_null_control(benchmark_shifted(), benchmark_v0(), *fam, /*b_floor=*/1.0),
        std::runtime_error);
}

TEST_CASE("control coefficients: bit-exact round trip, sampled table written") {
    const auto fam = benchmark_family();
    StateCoefficients v0;
    v0.coeffs.resize(kBenchN);
    v0.coeffs << 0.05, 0.01, -0.007, 0.002, 1e-5, -3e-7;
    const ControlSignal p = synthesize_null_control(benchmark_shifted(), v0, *fam);

    const std::string coeff_path = "control_coeffs.tmp";
    write_control_coefficients(p, coeff_path);
    const ControlSignal q = read_control_coefficients(coeff_path);
    REQUIRE(q.size() == p.size());
    CHECK(q.horizon == p.horizon);
    for (int k = 0; k < p.size(); ++k) {
        CHECK(q.exponents[k] == p.exponents[k]);
        CHECK(q.coeffs[k] == p.coeffs[k]);
    }
    CHECK(q.l2_norm == doctest::Approx(p.l2_norm).epsilon(1e-15));
    std::remove(coeff_path.c_str());

    const std::string table_path = "control_table.tmp";
    write_control_table(p, table_path, 64);
    std::FILE* f = std::fopen(table_path.c_str(), "r");
    REQUIRE(f != nullptr);
    std::fclose(f);
    std::remove(table_path.c_str());

    CHECK_THROWS_AS(read_control_coefficients("missing_control.tmp"), std::runtime_error);
}
