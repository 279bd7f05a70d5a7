#include "bistab/control.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bistab {

double ControlSignal::evaluate(double t) const {
    if (t < 0.0 || t > horizon)
        throw std::domain_error("ControlSignal::evaluate: t outside [0,T]");
    double v = 0.0;
    for (int m = 0; m < size(); ++m)
        v += coeffs[m] * std::exp(-exponents[m] * (horizon - t));
    return v;
}

ControlSignal make_control(const Eigen::VectorXd& exponents, double T,
                           const Eigen::VectorXd& coeffs) {
    if (exponents.size() != coeffs.size())
        throw std::invalid_argument("make_control: exponent/coefficient size mismatch");
    ControlSignal p;
    p.exponents = exponents;
    p.horizon = T;
    p.coeffs = coeffs;
    if (coeffs.size() > 0) {
        const Eigen::MatrixXd G = gram_matrix(exponents, T);
        const double sq = coeffs.dot(G * coeffs);
        p.l2_norm = sq > 0.0 ? std::sqrt(sq) : 0.0;
    }
    return p;
}

ControlSignal synthesize_null_control(const SpectralModel& shifted_model,
                                      const StateCoefficients& v0,
                                      const BiorthogonalFamily& family, double b_floor) {
    const int n = shifted_model.truncation;
    if (v0.coeffs.size() != n)
        throw std::invalid_argument("synthesize_null_control: state size mismatch");
    if (family.size() != n)
        throw std::invalid_argument("synthesize_null_control: family/model size mismatch");
    for (int k = 0; k < n; ++k)
        if (std::abs(family.exponents[k] - shifted_model.eigenvalues[k]) >
            1e-9 * std::max(1.0, std::abs(shifted_model.eigenvalues[k])))
            throw std::invalid_argument(
                "synthesize_null_control: family exponents do not match model eigenvalues");
    if (!(family.residual <= family.tolerance))
        throw std::runtime_error("synthesize_null_control: family residual exceeds its tolerance");
    if (b_floor < 0.0) b_floor = 1e-12 * shifted_model.operator_norm;

    Eigen::VectorXd c(n);
    for (int k = 0; k < n; ++k) {
        const double bk = shifted_model.ground_coupling[k];
        if (std::abs(bk) < b_floor)
            throw std::runtime_error("synthesize_null_control: |b_" +
                                     std::to_string(k + shifted_model.index_offset) +
                                     "| below floor " + std::to_string(b_floor));
        c[k] = v0.coeffs[k] / bk;
    }
    // The contraction cᵀM must happen at the family's build precision; the
    // resulting ε-basis coefficients are moderate and snapshot cleanly.
    return make_control(family.exponents, family.horizon, family_combine(family, c));
}

CertificateReport control_norm_certificate(const ControlSignal& p,
                                           const SpectralModel& shifted_model,
                                           const BiorthogonalFamily& family,
                                           const StateCoefficients& v0) {
    CertificateReport rep;
    rep.p_norm = p.l2_norm;
    rep.lambda_hat = lambda_T_empirical(shifted_model, family);
    rep.bound = rep.lambda_hat * v0.coeffs.norm();
    // Tiny slack for the double-precision norm evaluations themselves.
    rep.satisfied = rep.p_norm <= rep.bound * (1.0 + 1e-12) + 1e-300;
    return rep;
}

namespace {
std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

void write_control_table(const ControlSignal& p, const std::string& path, int samples) {
    if (samples < 2) throw std::invalid_argument("write_control_table: need at least 2 samples");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_control_table: cannot open '" + path + "'");
    out << "# t p(t)\n";
    for (int i = 0; i < samples; ++i) {
        const double t = p.horizon * i / (samples - 1);
        out << fmt17(t) << " " << fmt17(p.evaluate(t)) << "\n";
    }
}

void write_control_coefficients(const ControlSignal& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_control_coefficients: cannot open '" + path + "'");
    out << "# exponential-sum control: p(t) = sum_m q_m exp(-mu_m (T - t))\n";
    out << "horizon " << fmt17(p.horizon) << "\n";
    for (int m = 0; m < p.size(); ++m)
        out << fmt17(p.exponents[m]) << " " << fmt17(p.coeffs[m]) << "\n";
}

ControlSignal read_control_coefficients(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_control_coefficients: cannot open '" + path + "'");
    std::string line;
    double horizon = -1.0;
    std::vector<double> mu, q;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "horizon") {
            if (!(ls >> horizon))
                throw std::runtime_error("read_control_coefficients: malformed horizon line");
            continue;
        }
        double e = std::stod(first), c;
        if (!(ls >> c)) throw std::runtime_error("read_control_coefficients: malformed pair line");
        mu.push_back(e);
        q.push_back(c);
    }
    if (horizon <= 0.0 || mu.empty())
        throw std::runtime_error("read_control_coefficients: incomplete file '" + path + "'");
    Eigen::VectorXd ev = Eigen::Map<Eigen::VectorXd>(mu.data(), mu.size());
    Eigen::VectorXd qv = Eigen::Map<Eigen::VectorXd>(q.data(), q.size());
    return make_control(ev, horizon, qv);
}

}  // namespace bistab
