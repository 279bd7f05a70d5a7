/*
 * config.hpp — run configuration.
 *
 * Grammar: one `key = value` pair per line; '#' starts a comment; blank
 * lines ignored.  Vector-valued keys take whitespace-separated numbers.
 * Unknown keys are errors (configs must be self-describing, not silently
 * ignored).  Every numeric default is echoed into run reports.
 *
 * Keys:
 *   model          catalog id (dirichlet-x2 | neumann-x2 | varcoeff-x |
 *                  radial-r2) or "custom"
 *   mu_table       path to a two-column (x, mu(x)) ascii table (model=custom)
 *   kind           geometry for model=custom: dirichlet | neumann | varcoeff | radial
 *   truncation     N in [2, 32]                              (default 8)
 *   window         window length T > 0                       (default 0.5)
 *   windows        number of windows >= 1                    (default 8)
 *   perturbation   explicit deviation coefficients v0 (N numbers)
 *   perturbation_radius   ‖v0‖ along a seeded random direction
 *   seed           RNG seed for perturbation draws           (default 1)
 *   steps          integrator steps per window, power of two (default 1024)
 *   precision      double | extended                         (default extended)
 *   family_tol     biorthogonality residual gate             (default 1e-8)
 *   floor          decay noise floor                         (default 1e-12)
 *   b_floor        coefficient floor (default 1e-12·C_B; -1 keeps default)
 *   tau            hypothesis-check decay time (default: window)
 *   samples        control table sampling resolution         (default 512)
 *   out            output directory                          (default ".")
 */

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bistab/biorthogonal.hpp"
#include "bistab/models.hpp"

namespace bistab {

// Usage/config errors map to CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string model = "dirichlet-x2";
    std::string mu_table;          // model=custom only
    std::string kind = "dirichlet";  // model=custom only
    int truncation = 8;
    double window = 0.5;
    int windows = 8;
    std::vector<double> perturbation;  // explicit v0; empty -> radius + seed
    double perturbation_radius = 0.0;
    unsigned seed = 1;
    int steps = 1024;
    Precision precision = Precision::extended;
    double family_tol = 1e-8;
    double floor = 1e-12;
    double b_floor = -1.0;
    double tau = -1.0;
    int samples = 512;
    std::string out = ".";
    bool quiet = false;

    // Resolves the model descriptor (catalog id or custom table).
    ModelSpec model_spec() const;
    // Initial deviation v0 (explicit list, or seeded random direction).
    Eigen::VectorXd initial_deviation() const;
};

RunConfig parse_config(const std::string& path);

}  // namespace bistab
