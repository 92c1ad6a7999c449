#pragma once

#include <array>
#include <limits>
#include <optional>
#include <vector>

#include "uniflux/circuit.hpp"
#include "uniflux/modes.hpp"
#include "uniflux/readout.hpp"
#include "uniflux/spectrum1.hpp"

namespace uniflux {

// A channel is disabled by a zero coupling (M, A_Phi) or an infinite quality factor.
struct NoiseEnvironment {
    double flux_line_mutual_M = 0.0;       // H
    double flux_line_resistance_R = 50.0;  // ohm
    double one_over_f_amp_APhi = 0.0;      // Wb (amplitude at 1 Hz)
    double q_dielectric_QC = std::numeric_limits<double>::infinity();
    double q_inductive_QL = std::numeric_limits<double>::infinity();
    double q_radiative_Qrad = std::numeric_limits<double>::infinity();
    double temperature = 0.010;  // K

    void validate() const;
};

enum class Channel { OhmicFlux, OneOverFFlux, Dielectric, Inductive, Radiative, Purcell };
inline constexpr std::array<Channel, 6> kAllChannels = {Channel::OhmicFlux, Channel::OneOverFFlux,
                                                        Channel::Dielectric, Channel::Inductive,
                                                        Channel::Radiative, Channel::Purcell};
const char* to_string(Channel c);

struct DecoherenceBudget {
    std::array<double, 6> rates{};  // 1/s, indexed by Channel
    double t1_total = 0.0;          // s

    double rate(Channel c) const { return rates[static_cast<std::size_t>(c)]; }
    double t1(Channel c) const;  // infinity for a zero rate
};

// coth(x) for x >= 0, exactly 1 above x = 30 and for x = +inf.
double stable_coth(double x);
double thermal_factor(double omega01, double temperature);

double rate_ohmic_flux(const SingleModeSpectrum& s, double E_L, const NoiseEnvironment& env);
double rate_one_over_f_flux(const SingleModeSpectrum& s, double E_L, const NoiseEnvironment& env);
double rate_dielectric(const SingleModeSpectrum& s, double E_C_m, const NoiseEnvironment& env);
double rate_inductive(const SingleModeSpectrum& s, double E_L_m, const NoiseEnvironment& env);
double rate_radiative(const SingleModeSpectrum& s, const NoiseEnvironment& env);
double rate_purcell(double g01, double w01, double wr, double kappa);

struct ScaleReference {
    SingleModeSpectrum spectrum;
    ModeSolution mode;
    double measured_T1 = 0.0;  // s
};

// Rescales every enabled non-Purcell channel so that it alone gives measured_T1 at the reference.
NoiseEnvironment scale_environment(const NoiseEnvironment& env, const CircuitParams& params,
                                   const ScaleReference& ref);

DecoherenceBudget t1_budget(const SingleModeSpectrum& spectrum, const ModeSolution& mode,
                            const CircuitParams& params, const NoiseEnvironment& env,
                            const ReadoutParams* readout = nullptr,
                            const ScaleReference* scale_to = nullptr);

double echo_dephasing_rate(double dw_dphi, double APhi, double gamma_x);
double echo_t2(double gamma_gauss, double gamma_exp);
double ramsey_rate_model(double dw_dphi, double a_coef, double b_coef);

struct ParabolaFit {
    double a = 0.0, b = 0.0, c = 0.0;  // y = a x^2 + b x + c
    std::vector<double> slopes;        // 2 a x_i + b at each input x_i
};

ParabolaFit frequency_slope(const std::vector<std::pair<double, double>>& bias_freq_pairs);

double coherence_limit_fidelity(double tg, double t1, double t2e);

}  // namespace uniflux
