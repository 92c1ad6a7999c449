#include "uniflux/decoherence.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "uniflux/errors.hpp"

namespace uniflux {

namespace {

constexpr double kPi = std::numbers::pi;

double omega01(const SingleModeSpectrum& s) { return 2.0 * kPi * s.f01; }

double phase01_sq(const SingleModeSpectrum& s) {
    if (s.phase_elems.rows() < 2) fail(ErrorKind::InvalidArgument, "spectrum has no phase matrix elements");
    return s.phase_elems(0, 1) * s.phase_elems(0, 1);
}

// |<0|n|1>|^2; the stored elements are <i| i n |j>, same magnitude.
double charge01_sq(const SingleModeSpectrum& s) {
    if (s.charge_elems.rows() < 2) fail(ErrorKind::InvalidArgument, "spectrum has no charge matrix elements");
    return s.charge_elems(0, 1) * s.charge_elems(0, 1);
}

}  // namespace

void NoiseEnvironment::validate() const {
    if (!(flux_line_mutual_M >= 0.0) || !(one_over_f_amp_APhi >= 0.0))
        fail(ErrorKind::InvalidArgument, "mutual inductance and flux-noise amplitude must be >= 0");
    if (!(flux_line_resistance_R > 0.0)) fail(ErrorKind::InvalidArgument, "flux-line resistance must be > 0");
    if (!(q_dielectric_QC > 0.0 && q_inductive_QL > 0.0 && q_radiative_Qrad > 0.0))
        fail(ErrorKind::InvalidArgument, "quality factors must be > 0");
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        fail(ErrorKind::InvalidArgument, "temperature must be finite and > 0");
}

const char* to_string(Channel c) {
    switch (c) {
        case Channel::OhmicFlux: return "ohmic_flux";
        case Channel::OneOverFFlux: return "one_over_f_flux";
        case Channel::Dielectric: return "dielectric";
        case Channel::Inductive: return "inductive";
        case Channel::Radiative: return "radiative";
        case Channel::Purcell: return "purcell";
    }
    return "unknown";
}

double DecoherenceBudget::t1(Channel c) const {
    const double r = rate(c);
    return r > 0.0 ? 1.0 / r : std::numeric_limits<double>::infinity();
}

double stable_coth(double x) {
    if (!(x > 0.0)) fail(ErrorKind::DomainError, "coth argument must be > 0");
    if (x > 30.0) return 1.0;
    return 1.0 / std::tanh(x);
}

double thermal_factor(double w01, double temperature) {
    if (temperature == 0.0) return 1.0;
    return stable_coth(PhysConsts::hbar * w01 / (2.0 * PhysConsts::boltzmann * temperature));
}

double rate_ohmic_flux(const SingleModeSpectrum& s, double E_L, const NoiseEnvironment& env) {
    const double w = omega01(s);
    const double p0 = PhysConsts::flux_quantum;
    const double M = env.flux_line_mutual_M;
    return 8.0 * kPi * kPi * E_L * E_L * M * M * w / (p0 * p0 * PhysConsts::hbar * env.flux_line_resistance_R) *
           phase01_sq(s) * thermal_factor(w, env.temperature);
}

double rate_one_over_f_flux(const SingleModeSpectrum& s, double E_L, const NoiseEnvironment& env) {
    const double el = E_L / PhysConsts::hbar;
    const double a = env.one_over_f_amp_APhi / PhysConsts::flux_quantum;
    return 8.0 * kPi * kPi * kPi * el * el * a * a * phase01_sq(s) / omega01(s);
}

double rate_dielectric(const SingleModeSpectrum& s, double E_C_m, const NoiseEnvironment& env) {
    return 16.0 * E_C_m / (PhysConsts::hbar * env.q_dielectric_QC) * charge01_sq(s) *
           thermal_factor(omega01(s), env.temperature);
}

double rate_inductive(const SingleModeSpectrum& s, double E_L_m, const NoiseEnvironment& env) {
    return 2.0 * E_L_m / (PhysConsts::hbar * env.q_inductive_QL) * phase01_sq(s) *
           thermal_factor(omega01(s), env.temperature);
}

double rate_radiative(const SingleModeSpectrum& s, const NoiseEnvironment& env) {
    const double w = omega01(s);
    return w / env.q_radiative_Qrad * thermal_factor(w, env.temperature) * charge01_sq(s);
}

double rate_purcell(double g01, double w01, double wr, double kappa) {
    if (!(kappa >= 0.0)) fail(ErrorKind::InvalidArgument, "kappa must be >= 0");
    const double d = w01 - wr;
    if (kappa == 0.0) return 0.0;
    if (std::abs(d) < kappa) fail(ErrorKind::ResonantDivergence, "qubit within kappa of the resonator");
    return kappa * g01 * g01 / (d * d);
}

namespace {

std::array<double, 6> channel_rates(const SingleModeSpectrum& s, const ModeSolution& mode,
                                    const CircuitParams& params, const NoiseEnvironment& env) {
    const double E_L = params.inductive_energy();
    std::array<double, 6> r{};
    r[static_cast<std::size_t>(Channel::OhmicFlux)] = rate_ohmic_flux(s, E_L, env);
    r[static_cast<std::size_t>(Channel::OneOverFFlux)] = rate_one_over_f_flux(s, E_L, env);
    r[static_cast<std::size_t>(Channel::Dielectric)] = rate_dielectric(s, mode.E_C_m, env);
    r[static_cast<std::size_t>(Channel::Inductive)] = rate_inductive(s, mode.E_L_m, env);
    r[static_cast<std::size_t>(Channel::Radiative)] = rate_radiative(s, env);
    return r;
}

}  // namespace

NoiseEnvironment scale_environment(const NoiseEnvironment& env, const CircuitParams& params,
                                   const ScaleReference& ref) {
    env.validate();
    if (!(ref.measured_T1 > 0.0)) fail(ErrorKind::InvalidArgument, "reference T1 must be > 0");
    const std::array<double, 6> r = channel_rates(ref.spectrum, ref.mode, params, env);
    auto factor = [&](Channel c) { return 1.0 / (ref.measured_T1 * r[static_cast<std::size_t>(c)]); };
    NoiseEnvironment out = env;
    // Each rate is linear in M^2/R, A_Phi^2 and 1/Q.
    if (r[0] > 0.0) out.flux_line_mutual_M *= std::sqrt(factor(Channel::OhmicFlux));
    if (r[1] > 0.0) out.one_over_f_amp_APhi *= std::sqrt(factor(Channel::OneOverFFlux));
    if (r[2] > 0.0) out.q_dielectric_QC /= factor(Channel::Dielectric);
    if (r[3] > 0.0) out.q_inductive_QL /= factor(Channel::Inductive);
    if (r[4] > 0.0) out.q_radiative_Qrad /= factor(Channel::Radiative);
    return out;
}

DecoherenceBudget t1_budget(const SingleModeSpectrum& spectrum, const ModeSolution& mode,
                            const CircuitParams& params, const NoiseEnvironment& env,
                            const ReadoutParams* readout, const ScaleReference* scale_to) {
    env.validate();
    const NoiseEnvironment used = scale_to ? scale_environment(env, params, *scale_to) : env;
    DecoherenceBudget b;
    b.rates = channel_rates(spectrum, mode, params, used);
    if (readout) {
        const CouplingTable c = coupling_strengths(spectrum, mode, *readout, params);
        b.rates[static_cast<std::size_t>(Channel::Purcell)] =
            rate_purcell(c.g(0, 1), 2.0 * kPi * spectrum.f01, readout->omega_r(), readout->linewidth_kappa);
    }
    double total = 0.0;
    for (double r : b.rates) total += r;
    b.t1_total = total > 0.0 ? 1.0 / total : std::numeric_limits<double>::infinity();
    return b;
}

double echo_dephasing_rate(double dw_dphi, double APhi, double gamma_x) {
    if (!(APhi >= 0.0) || !(gamma_x >= 0.0)) fail(ErrorKind::InvalidArgument, "A_Phi and gamma_x must be >= 0");
    return std::sqrt(std::log(2.0)) * APhi * std::abs(dw_dphi) + gamma_x;
}

double echo_t2(double gg, double ge) {
    if (!(gg >= 0.0) || !(ge >= 0.0)) fail(ErrorKind::InvalidArgument, "decay rates must be >= 0");
    if (gg == 0.0) return ge > 0.0 ? 1.0 / ge : std::numeric_limits<double>::infinity();
    return (std::sqrt(4.0 * gg * gg + ge * ge) - ge) / (2.0 * gg * gg);
}

double ramsey_rate_model(double dw_dphi, double a_coef, double b_coef) {
    return a_coef * std::abs(dw_dphi) + b_coef;
}

ParabolaFit frequency_slope(const std::vector<std::pair<double, double>>& pairs) {
    const Eigen::Index n = static_cast<Eigen::Index>(pairs.size());
    if (n < 3) fail(ErrorKind::InsufficientPoints, "parabola fit needs at least 3 points");
    // Centered and scaled abscissa for conditioning.
    double mean = 0.0;
    for (const auto& p : pairs) mean += p.first;
    mean /= static_cast<double>(n);
    double scale = 0.0;
    for (const auto& p : pairs) scale = std::max(scale, std::abs(p.first - mean));
    if (scale == 0.0) fail(ErrorKind::InsufficientPoints, "parabola fit needs distinct biases");
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = (pairs[i].first - mean) / scale;
        A.row(i) << t * t, t, 1.0;
        y(i) = pairs[i].second;
    }
    const Eigen::Vector3d q = A.colPivHouseholderQr().solve(y);
    if (A.colPivHouseholderQr().rank() < 3)
        fail(ErrorKind::InsufficientPoints, "parabola fit needs 3 distinct biases");
    ParabolaFit f;
    f.a = q(0) / (scale * scale);
    f.b = q(1) / scale - 2.0 * f.a * mean;
    f.c = q(2) - q(1) * mean / scale + f.a * mean * mean;
    for (const auto& p : pairs) f.slopes.push_back(2.0 * f.a * p.first + f.b);
    return f;
}

double coherence_limit_fidelity(double tg, double t1, double t2e) {
    if (!(tg >= 0.0) || !(t1 > 0.0) || !(t2e > 0.0))
        fail(ErrorKind::InvalidArgument, "gate time must be >= 0 and T1, T2 > 0");
    return (3.0 + std::exp(-tg / t1) + 2.0 * std::exp(-tg / t2e)) / 6.0;
}

}  // namespace uniflux
