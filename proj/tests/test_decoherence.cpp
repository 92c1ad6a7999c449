#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "fixtures.hpp"
#include "uniflux/decoherence.hpp"
#include "uniflux/errors.hpp"
#include "uniflux/spectrum1.hpp"

using namespace uniflux;
using fixtures::rel_err;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

const QubitPoint& qubit_b_half() {
    static const QubitPoint p = solve_qubit_point(fixtures::fitted_device(fixtures::qubit_b()), {0.5});
    return p;
}

NoiseEnvironment test_environment() {
    NoiseEnvironment e;
    e.flux_line_mutual_M = 1e-12;
    e.flux_line_resistance_R = 50.0;
    e.one_over_f_amp_APhi = 15e-6 * PhysConsts::flux_quantum;
    e.q_dielectric_QC = 1.7e5;
    e.q_inductive_QL = 5e5;
    e.q_radiative_Qrad = 1e6;
    e.temperature = 0.010;
    return e;
}

NoiseEnvironment only(Channel c) {
    const NoiseEnvironment full = test_environment();
    NoiseEnvironment e;
    e.temperature = full.temperature;
    switch (c) {
        case Channel::OhmicFlux: e.flux_line_mutual_M = full.flux_line_mutual_M; break;
        case Channel::OneOverFFlux: e.one_over_f_amp_APhi = full.one_over_f_amp_APhi; break;
        case Channel::Dielectric: e.q_dielectric_QC = full.q_dielectric_QC; break;
        case Channel::Inductive: e.q_inductive_QL = full.q_inductive_QL; break;
        case Channel::Radiative: e.q_radiative_Qrad = full.q_radiative_Qrad; break;
        case Channel::Purcell: break;
    }
    return e;
}

}  // namespace

TEST_SUITE("decoherence") {

TEST_CASE("channel rates against term-by-term arithmetic") {
    const QubitPoint& p = qubit_b_half();
    const SingleModeSpectrum& s = p.spectrum;
    const CircuitParams c = fixtures::fitted_device(fixtures::qubit_b());
    const NoiseEnvironment e = test_environment();

    const long double hbar = 1.054571817646156e-34L;
    const long double kB = 1.380649e-23L;
    const long double Phi0 = 2.067833848461929e-15L;
    const long double w = 2.0L * 3.14159265358979323846L * s.f01;
    const long double x = hbar * w / (2.0L * kB * e.temperature);
    const long double coth = (1.0L + std::exp(-2.0L * x)) / (1.0L - std::exp(-2.0L * x));
    const long double phi01 = s.phase_elems(0, 1), n01 = s.charge_elems(0, 1);
    const long double EL = c.inductive_energy(), ECm = p.mode().E_C_m, ELm = p.mode().E_L_m;
    const long double pi = 3.14159265358979323846L;

    const long double ohmic = 8.0L * pi * pi * EL * EL * 1e-24L * w / (Phi0 * Phi0 * hbar * 50.0L) * phi01 * phi01 * coth;
    const long double flicker = 8.0L * pi * pi * pi * (EL / hbar) * (EL / hbar) * 15e-6L * 15e-6L * phi01 * phi01 / w;
    const long double diel = 16.0L * ECm / (hbar * 1.7e5L) * n01 * n01 * coth;
    const long double ind = 2.0L * ELm / (hbar * 5e5L) * phi01 * phi01 * coth;
    const long double rad = w / 1e6L * coth * n01 * n01;

    CHECK(rel_err(rate_ohmic_flux(s, c.inductive_energy(), e), static_cast<double>(ohmic)) < 1e-9);
    CHECK(rel_err(rate_one_over_f_flux(s, c.inductive_energy(), e), static_cast<double>(flicker)) < 1e-9);
    CHECK(rel_err(rate_dielectric(s, p.mode().E_C_m, e), static_cast<double>(diel)) < 1e-9);
    CHECK(rel_err(rate_inductive(s, p.mode().E_L_m, e), static_cast<double>(ind)) < 1e-9);
    CHECK(rel_err(rate_radiative(s, e), static_cast<double>(rad)) < 1e-9);
}

TEST_CASE("disabled channels, scaling laws and cold limit") {
    const QubitPoint& p = qubit_b_half();
    const SingleModeSpectrum& s = p.spectrum;
    const double EL = fixtures::fitted_device(fixtures::qubit_b()).inductive_energy();
    NoiseEnvironment off;
    CHECK(rate_ohmic_flux(s, EL, off) == 0.0);
    CHECK(rate_one_over_f_flux(s, EL, off) == 0.0);
    CHECK(rate_dielectric(s, p.mode().E_C_m, off) == 0.0);
    CHECK(rate_inductive(s, p.mode().E_L_m, off) == 0.0);
    CHECK(rate_radiative(s, off) == 0.0);

    NoiseEnvironment e = test_environment();
    const double r1 = rate_one_over_f_flux(s, EL, e);
    e.one_over_f_amp_APhi *= 2.0;
    CHECK(rel_err(rate_one_over_f_flux(s, EL, e), 4.0 * r1) < 1e-14);
    CHECK(rel_err(rate_dielectric(s, 2.0 * p.mode().E_C_m, e), 2.0 * rate_dielectric(s, p.mode().E_C_m, e)) < 1e-14);
    const double qi = rate_inductive(s, p.mode().E_L_m, e);
    e.q_inductive_QL *= 3.0;
    CHECK(rel_err(rate_inductive(s, p.mode().E_L_m, e), qi / 3.0) < 1e-14);

    NoiseEnvironment cold = test_environment();
    cold.temperature = 1e-6;
    NoiseEnvironment zero = cold;
    zero.temperature = 0.0;
    CHECK(rel_err(rate_ohmic_flux(s, EL, cold), rate_ohmic_flux(s, EL, zero)) < 1e-9);
}

TEST_CASE("rates are non-negative and non-increasing in their quality factor") {
    const QubitPoint& p = qubit_b_half();
    NoiseEnvironment e = test_environment();
    double prev = kInf;
    for (double q : {1e3, 1e4, 1e5, 1e6, 1e7}) {
        e.q_dielectric_QC = q;
        const double r = rate_dielectric(p.spectrum, p.mode().E_C_m, e);
        CHECK(r >= 0.0);
        CHECK(r <= prev);
        prev = r;
    }
}

TEST_CASE("stable coth") {
    for (double f = 0.1e9; f <= 20e9; f *= 1.7) {
        for (double T = 1e-3; T <= 1.0; T *= 2.3) {
            const double x = PhysConsts::hbar * 2 * kPi * f / (2 * PhysConsts::boltzmann * T);
            const double c = thermal_factor(2 * kPi * f, T);
            CHECK(std::isfinite(c));
            CHECK(c >= 1.0);
            if (x > 30.0)
                CHECK(c == 1.0);
            else
                CHECK(rel_err(c, std::cosh(x) / std::sinh(x)) < 1e-14);
        }
    }
    CHECK(stable_coth(kInf) == 1.0);
    CHECK(stable_coth(1e300) == 1.0);
    CHECK_THROWS_AS(stable_coth(0.0), Error);
}

TEST_CASE("Purcell rate") {
    const double k = 2 * kPi * 1.24e6, g = 2 * kPi * 70e6, wr = 2 * kPi * 6.198e9;
    const double w01 = wr + 2 * kPi * -1.710e9;
    CHECK(1e6 / rate_purcell(g, w01, wr, k) == doctest::Approx(76.5939712137938).epsilon(1e-12));
    CHECK(rate_purcell(g, w01, wr, 0.0) == 0.0);
    const double far = wr + 2 * kPi * -3.420e9;
    CHECK(rel_err(rate_purcell(g, far, wr, k), 0.25 * rate_purcell(g, w01, wr, k)) < 1e-14);
    CHECK_THROWS_AS(rate_purcell(g, wr + 0.5 * k, wr, k), Error);
}

TEST_CASE("budget aggregation") {
    const QubitPoint& p = qubit_b_half();
    const CircuitParams c = fixtures::fitted_device(fixtures::qubit_b());
    for (Channel ch : {Channel::OhmicFlux, Channel::OneOverFFlux, Channel::Dielectric, Channel::Inductive,
                       Channel::Radiative}) {
        const DecoherenceBudget b = t1_budget(p.spectrum, p.mode(), c, only(ch));
        CAPTURE(to_string(ch));
        CHECK(b.rate(ch) > 0.0);
        CHECK(b.t1_total == 1.0 / b.rate(ch));
        CHECK(b.t1(ch) == b.t1_total);
    }
    const DecoherenceBudget full = t1_budget(p.spectrum, p.mode(), c, test_environment());
    double sum = 0.0;
    for (Channel ch : kAllChannels) {
        CHECK(full.rate(ch) >= 0.0);
        sum += full.rate(ch);
    }
    CHECK(rel_err(1.0 / full.t1_total, sum) < 1e-12);
    CHECK(std::isinf(full.t1(Channel::Purcell)));

    // Two channels tuned to the same rate halve T1.
    NoiseEnvironment pair = only(Channel::Dielectric);
    const double rd = t1_budget(p.spectrum, p.mode(), c, pair).rate(Channel::Dielectric);
    const double ri = t1_budget(p.spectrum, p.mode(), c, only(Channel::Inductive)).rate(Channel::Inductive);
    pair.q_inductive_QL = test_environment().q_inductive_QL * ri / rd;
    const DecoherenceBudget two = t1_budget(p.spectrum, p.mode(), c, pair);
    CHECK(rel_err(two.t1_total, 0.5 / rd) < 1e-12);

    const ReadoutParams r = fixtures::fitted_readout(fixtures::qubit_b());
    const DecoherenceBudget with_p = t1_budget(p.spectrum, p.mode(), c, NoiseEnvironment{}, &r);
    const CouplingTable g = coupling_strengths(p.spectrum, p.mode(), r, c);
    CHECK(with_p.rate(Channel::Purcell) ==
          rate_purcell(g.g(0, 1), 2 * kPi * p.spectrum.f01, r.omega_r(), r.linewidth_kappa));
    CHECK(with_p.t1_total == with_p.t1(Channel::Purcell));
}

TEST_CASE("scaling to a reference makes each channel alone give the reference T1") {
    const QubitPoint& p = qubit_b_half();
    const CircuitParams c = fixtures::fitted_device(fixtures::qubit_b());
    const ScaleReference ref{p.spectrum, p.mode(), 8.6e-6};
    const NoiseEnvironment scaled = scale_environment(test_environment(), c, ref);
    const DecoherenceBudget b = t1_budget(p.spectrum, p.mode(), c, scaled);
    for (Channel ch : {Channel::OhmicFlux, Channel::OneOverFFlux, Channel::Dielectric, Channel::Inductive,
                       Channel::Radiative})
        CHECK(rel_err(b.t1(ch), 8.6e-6) < 1e-9);
    const DecoherenceBudget via = t1_budget(p.spectrum, p.mode(), c, test_environment(), nullptr, &ref);
    CHECK(rel_err(via.t1_total, 8.6e-6 / 5.0) < 1e-9);
    // A disabled channel stays disabled.
    CHECK(std::isinf(scale_environment(only(Channel::Dielectric), c, ref).q_inductive_QL));
    CHECK_THROWS_AS(scale_environment(test_environment(), c, ScaleReference{p.spectrum, p.mode(), 0.0}), Error);
}

TEST_CASE("echo and Ramsey models") {
    CHECK(echo_dephasing_rate(0.0, 1e-20, 3e4) == 3e4);
    CHECK(echo_dephasing_rate(1e15, 0.0, 3e4) == 3e4);
    CHECK(rel_err(echo_dephasing_rate(-2e15, 3e-20, 1e4), std::sqrt(std::log(2.0)) * 3e-20 * 2e15 + 1e4) < 1e-14);
    CHECK(echo_t2(0.0, 2e5) == 1.0 / 2e5);
    CHECK(rel_err(echo_t2(3e5, 0.0), 1.0 / 3e5) < 1e-14);
    CHECK(1e6 * echo_t2(0.60e6, 0.09e6) == doctest::Approx(1.54634759334429826).epsilon(1e-12));
    CHECK(ramsey_rate_model(0.0, 2.0, 7.0) == 7.0);
    CHECK(ramsey_rate_model(3.0, 2.0, 7.0) == 13.0);
    CHECK(rel_err(ramsey_rate_model(-6.0, 2.0, 7.0) - 7.0, 2.0 * (ramsey_rate_model(3.0, 2.0, 7.0) - 7.0)) < 1e-15);
}

TEST_CASE("parabola slope fit") {
    std::vector<std::pair<double, double>> exact;
    for (int i = 0; i < 7; ++i) {
        const double x = 0.40 + 0.01 * i;
        exact.push_back({x, -3e10 * x * x + 2.4e10 * x + 1e9});
    }
    const ParabolaFit f = frequency_slope(exact);
    CHECK(rel_err(f.a, -3e10) < 1e-9);
    CHECK(rel_err(f.b, 2.4e10) < 1e-9);
    CHECK(rel_err(f.c, 1e9) < 1e-9);
    for (std::size_t i = 0; i < exact.size(); ++i)
        CHECK(std::abs(f.slopes[i] - (-6e10 * exact[i].first + 2.4e10)) < 1e-6 * 2.4e10);

    std::vector<std::pair<double, double>> sym;
    for (double x : {-0.2, -0.1, 0.0, 0.1, 0.2}) sym.push_back({0.5 + x, 5e9 - 4e10 * x * x});
    CHECK(std::abs(frequency_slope(sym).slopes[2]) < 1e-5 * 4e10 * 0.2);

    CHECK_THROWS_AS(frequency_slope({{0.1, 1.0}, {0.2, 2.0}}), Error);

    // Noisy data: slope error within 4 sigma of the least-squares covariance.
    std::mt19937_64 rng(7);
    std::normal_distribution<double> noise(0.0, 2e6);
    std::vector<std::pair<double, double>> noisy;
    Eigen::MatrixXd A(21, 3);
    for (int i = 0; i < 21; ++i) {
        const double x = 0.3 + 0.01 * i;
        noisy.push_back({x, -3e10 * x * x + 2.4e10 * x + 1e9 + noise(rng)});
        A.row(i) << x * x, x, 1.0;
    }
    const ParabolaFit nf = frequency_slope(noisy);
    const Eigen::Matrix3d cov = 4e12 * (A.transpose() * A).inverse();
    const double x0 = noisy[10].first;
    const Eigen::Vector3d d(2 * x0, 1.0, 0.0);
    const double sigma = std::sqrt(d.dot(cov * d));
    CHECK(std::abs(nf.slopes[10] - (-6e10 * x0 + 2.4e10)) < 4.0 * sigma);
}

TEST_CASE("coherence-limited fidelity") {
    CHECK(coherence_limit_fidelity(0.0, 8.6e-6, 9.2e-6) == 1.0);
    CHECK(coherence_limit_fidelity(1.0, 8.6e-6, 9.2e-6) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(coherence_limit_fidelity(20e-9, 8.6e-6, 9.2e-6) == doctest::Approx(0.998889002843715).epsilon(1e-13));
}

TEST_CASE("environment validation") {
    NoiseEnvironment e;
    e.q_dielectric_QC = 0.0;
    CHECK_THROWS_AS(e.validate(), Error);
    e = NoiseEnvironment{};
    e.flux_line_resistance_R = -1.0;
    CHECK_THROWS_AS(e.validate(), Error);
    e = NoiseEnvironment{};
    e.temperature = 0.0;
    CHECK_THROWS_AS(e.validate(), Error);
}

}  // TEST_SUITE
