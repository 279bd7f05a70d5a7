#include <doctest.h>

#include <cmath>
#include <random>

#include "test_helpers.hpp"

using namespace bistab;
using namespace bistab::testing;

namespace {

ControlSignal constant_control(double value, double T) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd q = Eigen::VectorXd::Constant(1, value);
    return make_control(mu, T, q);
}

ControlSignal benchmark_control(const StateCoefficients& v0) {
    return synthesize_null_control(benchmark_shifted(), v0, *benchmark_family());
}

StateCoefficients random_state(unsigned seed, int n, double scale) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    StateCoefficients s;
    s.coeffs.resize(n);
    for (int i = 0; i < n; ++i) s.coeffs[i] = scale * gauss(rng);
    return s;
}

}  // namespace

TEST_CASE("integrate_bilinear: zero control reproduces the free flow exactly") {
    const StateCoefficients u0 = random_state(3, kBenchN, 1.0);
    const Trajectory traj = integrate_bilinear(benchmark_model(), zero_control(0.4), u0,
                                               0.0, 0.4, steps_config(64));
    REQUIRE(traj.samples.size() >= 2);
    for (const auto& s : traj.samples) {
        const StateCoefficients exact = free_evolution(benchmark_model(), u0, s.time);
        CHECK((s.coeffs - exact.coeffs).norm() <= 1e-10 * std::max(exact.norm(), 1e-30));
    }
    CHECK(traj.samples.back().time == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("integrate_bilinear: B = I with constant control has a closed form") {
    // u' + Au + c u = 0  =>  u_k(t) = e^{-(lambda_k + c) t} u0_k.
    Eigen::VectorXd lam(3);
    lam << 1.0, 4.0, 9.0;
    const SpectralModel m = make_spectral_model(lam, Eigen::MatrixXd::Identity(3, 3));
    const double c = 0.8, T = 1.3;
    StateCoefficients u0;
    u0.coeffs.resize(3);
    u0.coeffs << 1.0, -0.5, 0.25;
    const Trajectory traj =
        integrate_bilinear(m, constant_control(c, T), u0, 0.0, T, steps_config(64));
    const Eigen::VectorXd& uT = traj.samples.back().coeffs;
    for (int k = 0; k < 3; ++k)
        CHECK(uT[k] == doctest::Approx(std::exp(-(lam[k] + c) * T) * u0.coeffs[k])
                           .epsilon(1e-12));
}

TEST_CASE("integrate_bilinear: benchmark endpoint matches the refined reference") {
    StateCoefficients v0;
    v0.coeffs.resize(kBenchN);
    v0.coeffs << 0.05, -0.01, 0.004, 0.001, -0.0005, 0.0001;
    const ControlSignal p = benchmark_control(v0);
    StateCoefficients u0;
    u0.coeffs = Eigen::VectorXd::Unit(kBenchN, 0) + v0.coeffs;
    const Trajectory coarse =
        integrate_bilinear(benchmark_shifted(), p, u0, 0.0, kBenchT, steps_config(32768));

    IntegratorConfig ref = steps_config(32768);
    ref.scheme = Scheme::reference_rk4_fine;
    const Trajectory fine = integrate_bilinear(benchmark_shifted(), p, u0, 0.0, kBenchT, ref);
    CHECK((coarse.samples.back().coeffs - fine.samples.back().coeffs).norm() <= 1e-8);
}

TEST_CASE("integrate_bilinear: accretive decay under any bounded control") {
    // For the unshifted Dirichlet model and |p| C_B < lambda_1 the norm decays.
    const StateCoefficients u0 = random_state(5, kBenchN, 1.0);
    const Trajectory traj = integrate_bilinear(benchmark_model(), constant_control(2.0, 1.0),
                                               u0, 0.0, 1.0, steps_config(256));
    for (size_t i = 1; i < traj.samples.size(); ++i)
        CHECK(traj.samples[i].norm() < traj.samples[i - 1].norm());
}

TEST_CASE("integrate_bilinear: Strang splitting is second order") {
    // Time-varying control so the midpoint freezing error is active.
    const auto fam = benchmark_family();
    StateCoefficients v0;
    v0.coeffs.resize(kBenchN);
    v0.coeffs << 0.3, 0.2, -0.1, 0.05, 0.02, -0.01;
    const ControlSignal p = benchmark_control(v0);
    StateCoefficients u0;
    u0.coeffs = Eigen::VectorXd::Unit(kBenchN, 0) + v0.coeffs;

    IntegratorConfig ref = steps_config(1 << 16);
    ref.scheme = Scheme::reference_rk4_fine;
    const Eigen::VectorXd exact =
        integrate_bilinear(benchmark_shifted(), p, u0, 0.0, kBenchT, ref).samples.back().coeffs;

    // Step sizes must resolve the control's boundary layer near t = T
    // (width ~ 1/mu_N ~ 0.003) before the asymptotic order shows.
    double err[2];
    int idx = 0;
    for (int steps : {1024, 2048}) {
        const Eigen::VectorXd got =
            integrate_bilinear(benchmark_shifted(), p, u0, 0.0, kBenchT, steps_config(steps))
                .samples.back()
                .coeffs;
        err[idx++] = (got - exact).norm();
    }
    const double order = std::log2(err[0] / err[1]);
    CHECK(order >= 1.8);
    CHECK(order <= 2.2);
}

TEST_CASE("integrate_bilinear: Duhamel residual of the computed trajectory") {
    // Check u(T) = e^{-AT} u0 - int_0^T e^{-A(T-s)} p(s) B u(s) ds with the
    // integral evaluated by trapezoid on the recorded samples.
    const SpectralModel& m = benchmark_shifted();
    StateCoefficients v0;
    v0.coeffs.resize(kBenchN);
    v0.coeffs << 0.05, -0.02, 0.01, 0.0, 0.003, -0.001;
    const ControlSignal p = benchmark_control(v0);
    StateCoefficients u0;
    u0.coeffs = Eigen::VectorXd::Unit(kBenchN, 0) + v0.coeffs;
    IntegratorConfig cfg = steps_config(16384);
    cfg.record_stride = 1;
    const Trajectory traj = integrate_bilinear(m, p, u0, 0.0, kBenchT, cfg);
    const double T = kBenchT;

    auto integrand = [&](const StateCoefficients& s) -> Eigen::VectorXd {
        const Eigen::VectorXd decay =
            (-(T - s.time) * m.eigenvalues.array()).exp().matrix();
        return decay.asDiagonal() * (p.evaluate(s.time) * (m.coupling_matrix * s.coeffs));
    };
    Eigen::VectorXd integral = Eigen::VectorXd::Zero(kBenchN);
    for (size_t i = 1; i < traj.samples.size(); ++i) {
        const double h = traj.samples[i].time - traj.samples[i - 1].time;
        integral += 0.5 * h * (integrand(traj.samples[i]) + integrand(traj.samples[i - 1]));
    }
    const Eigen::VectorXd duhamel =
        ((-T * m.eigenvalues.array()).exp() * u0.coeffs.array()).matrix() - integral;
    const Eigen::VectorXd uT = traj.samples.back().coeffs;
    CHECK((uT - duhamel).norm() <= 1e-6 * std::max(uT.norm(), 1e-12));
}

TEST_CASE("integrate_linearized: null control steers the linearized deviation to zero") {
    StateCoefficients v0;
    v0.coeffs.resize(kBenchN);
    v0.coeffs << 0.05, 0.01, -0.003, 0.002, -0.0007, 0.0001;
    const ControlSignal p = benchmark_control(v0);
    const StateCoefficients vT = integrate_linearized(benchmark_shifted(), p, v0, kBenchT);
    CHECK(vT.norm() <= 1e-8 * v0.norm());

    // Zero control: plain exponential decay.
    const StateCoefficients free_vT =
        integrate_linearized(benchmark_shifted(), zero_control(kBenchT), v0, kBenchT);
    for (int k = 0; k < kBenchN; ++k)
        CHECK(free_vT.coeffs[k] ==
              doctest::Approx(std::exp(-benchmark_shifted().eigenvalues[k] * kBenchT) *
                              v0.coeffs[k])
                  .epsilon(1e-13));
}

TEST_CASE("integrate_forced: zero forcing, constant forcing, random forcing") {
    const SpectralModel& m = benchmark_shifted();
    const StateCoefficients u0 = random_state(11, kBenchN, 0.5);

    const Trajectory free_traj = integrate_forced(
        m, [](double) { return Eigen::VectorXd::Zero(kBenchN).eval(); }, u0, 0.0, 0.5,
        steps_config(128));
    const StateCoefficients exact = free_evolution(m, u0, 0.5);
    CHECK((free_traj.samples.back().coeffs - exact.coeffs).norm() <= 1e-10);

    // Mode 1 of the shifted model has mu_1 = 0: constant forcing c there
    // integrates to u_1(t) = u0_1 + c t exactly.
    Eigen::VectorXd f = Eigen::VectorXd::Zero(kBenchN);
    f[0] = 0.3;
    const Trajectory lin = integrate_forced(
        m, [&](double) { return f; }, u0, 0.0, 0.5, steps_config(128));
    CHECK(lin.samples.back().coeffs[0] ==
          doctest::Approx(u0.coeffs[0] + 0.3 * 0.5).epsilon(1e-12));

    auto noise = [&](double t) {
        return (std::sin(5 * t) * Eigen::VectorXd::LinSpaced(kBenchN, 1.0, -1.0)).eval();
    };
    const Trajectory got =
        integrate_forced(m, noise, u0, 0.0, 0.5, steps_config(32768));
    IntegratorConfig ref = steps_config(32768);
    ref.scheme = Scheme::reference_rk4_fine;
    const Trajectory want = integrate_forced(m, noise, u0, 0.0, 0.5, ref);
    CHECK((got.samples.back().coeffs - want.samples.back().coeffs).norm() <= 1e-8);
}

TEST_CASE("deviation_gap: zero deviation gives the zero gap") {
    const DeviationGap gap = deviation_gap(benchmark_shifted(), zero_control(kBenchT),
                                           benchmark_v0(0.0), kBenchT, steps_config(64));
    CHECK(gap.w_norm == 0.0);
    CHECK(gap.v_norm == 0.0);
}

TEST_CASE("deviation_gap: quadratic smallness in the deviation size") {
    // With the null control, v(T) = w(T) and halving v0 should divide the
    // gap by ~4 (the nonlinear remainder is quadratic).
    const IntegratorConfig cfg = steps_config(8192);
    double gaps[2];
    int idx = 0;
    for (double mag : {0.05, 0.025}) {
        const StateCoefficients v0 = benchmark_v0(mag);
        const ControlSignal p = benchmark_control(v0);
        const DeviationGap g = deviation_gap(benchmark_shifted(), p, v0, kBenchT, cfg);
        CHECK(g.w_norm == doctest::Approx(g.v_norm).epsilon(1e-8));
        gaps[idx++] = g.w_norm;
    }
    const double ratio = gaps[0] / gaps[1];
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
    // Frozen contraction factor: K_hat ~ 0.4668 at this magnitude.
    CHECK(gaps[0] <= 0.5 * 0.05 * 0.05);
}

TEST_CASE("integrate_deviation: agrees with the bilinear u-form") {
    const StateCoefficients v0 = benchmark_v0(0.05);
    const ControlSignal p = benchmark_control(v0);
    const IntegratorConfig cfg = steps_config(8192);
    const Trajectory vtraj = integrate_deviation(benchmark_shifted(), p, v0, kBenchT, cfg);
    // mu_1 = 0 makes phi_1 stationary for the shifted free flow, so
    // u = phi_1 + v solves the bilinear equation iff v solves the deviation
    // equation.  Both integrators must therefore agree on v(T) = u(T) - phi_1.
    StateCoefficients u0;
    u0.coeffs = Eigen::VectorXd::Unit(kBenchN, 0) + v0.coeffs;
    const Trajectory utraj =
        integrate_bilinear(benchmark_shifted(), p, u0, 0.0, kBenchT, cfg);
    Eigen::VectorXd vref = utraj.samples.back().coeffs;
    vref[0] -= 1.0;
    CHECK((vtraj.samples.back().coeffs - vref).norm() <= 1e-9);
}

TEST_CASE("integrator configuration validated, instability guarded") {
    const StateCoefficients v0 = benchmark_v0(0.05);
    IntegratorConfig bad = steps_config(100);  // not a power of two
    CHECK_THROWS_AS(
        integrate_deviation(benchmark_shifted(), zero_control(kBenchT), v0, kBenchT, bad),
        std::invalid_argument);
    bad = steps_config(8);  // below the minimum
    CHECK_THROWS_AS(
        integrate_deviation(benchmark_shifted(), zero_control(kBenchT), v0, kBenchT, bad),
        std::invalid_argument);
    CHECK_THROWS_AS(integrate_bilinear(benchmark_model(), zero_control(1.0), v0, 1.0, 0.5,
                                       steps_config(64)),
                    std::invalid_argument);

    // A huge anti-damping control overflows the state; the guard must abort
    // with a diagnostic instead of returning non-finite samples.
    Eigen::VectorXd lam(2);
    lam << 0.0, 1.0;
    Eigen::MatrixXd B(2, 2);
    B << -1.0, 0.0, 0.0, -1.0;
    const SpectralModel grow = make_spectral_model(lam, B);
    StateCoefficients one;
    one.coeffs = Eigen::VectorXd::Ones(2);
    CHECK_THROWS_AS(integrate_bilinear(grow, constant_control(1000.0, 1.0), one, 0.0, 1.0,
                                       steps_config(64)),
                    std::runtime_error);
}

TEST_CASE("control_l1_norm and energy_bound_sq: scalar oracles") {
    CHECK(control_l1_norm(constant_control(-2.0, 0.75)) ==
          doctest::Approx(1.5).epsilon(1e-10));
    CHECK(control_l1_norm(zero_control(1.0)) == 0.0);
    const double got = energy_bound_sq(2.0, 0.5, 0.25, 1.0, 0.1);
    const double want = std::exp(2 * 2.0 * 0.5 + 2.0 * 1.0) * (0.01 + 2.0 * 0.0625);
    CHECK(got == doctest::Approx(want).epsilon(1e-13));
}
