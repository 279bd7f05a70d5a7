// Shared fixtures for the test suite: the Dirichlet x² benchmark
// (N = 6, T = 0.5, v0 = 0.05·e₁) used throughout the quantitative checks.

#pragma once

#include <cmath>

#include "bistab/models.hpp"
#include "bistab/simulator.hpp"
#include "bistab/stabilization.hpp"

namespace bistab::testing {

constexpr double kPi = 3.14159265358979323846;
constexpr double kBenchT = 0.5;
constexpr int kBenchN = 6;

inline const SpectralModel& benchmark_model() {
    static const SpectralModel model = build_model(catalog_spec("dirichlet-x2", kBenchN));
    return model;
}

inline const SpectralModel& benchmark_shifted() {
    static const SpectralModel shifted = shift_to_zero_ground(benchmark_model());
    return shifted;
}

// Cached extended-precision family for the benchmark spectrum.
inline std::shared_ptr<const BiorthogonalFamily> benchmark_family(double tol = 1e-8) {
    return FamilyCache::global().get(benchmark_shifted().eigenvalues, kBenchT, tol,
                                     Precision::extended);
}

inline StateCoefficients benchmark_v0(double magnitude = 0.05) {
    StateCoefficients v0;
    v0.coeffs = Eigen::VectorXd::Zero(kBenchN);
    v0.coeffs[0] = magnitude;
    return v0;
}

inline IntegratorConfig steps_config(int steps) {
    IntegratorConfig cfg;
    cfg.step_count = steps;
    cfg.record_stride = std::max(1, steps / 1024);
    return cfg;
}

}  // namespace bistab::testing
