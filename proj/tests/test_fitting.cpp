#include <chrono>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "uniflux/errors.hpp"
#include "uniflux/fitting.hpp"
#include "uniflux/readout.hpp"
#include "uniflux/spectrum1.hpp"

using namespace uniflux;
using fixtures::rel_err;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an exception");
    return ErrorKind::InvalidArgument;
}

// Synthetic data generated with the same model options the fit uses.
SpectroscopyDataset synthetic(const CircuitParams& p, const std::vector<double>& biases, bool with_two_photon) {
    const SpectrumFitOptions o;
    SpectroscopyDataset d;
    for (double b : biases) {
        const QubitPoint q = solve_qubit_point(p, {b}, o.point);
        d.push_back({b, Transition::F01, model_transition(q, Transition::F01), 0.0});
        if (with_two_photon) d.push_back({b, Transition::F02Half, model_transition(q, Transition::F02Half), 0.0});
    }
    return d;
}

}  // namespace

TEST_SUITE("fitting") {

TEST_CASE("bounded simplex") {
    auto rosen = [](const std::vector<double>& x) {
        return 100.0 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1.0 - x[0]) * (1.0 - x[0]);
    };
    const SimplexResult r = minimize_bounded(rosen, {-1.0, 2.0}, {-2.0, -2.0}, {3.0, 3.0});
    CHECK(r.converged);
    CHECK(std::abs(r.x[0] - 1.0) < 1e-4);
    CHECK(std::abs(r.x[1] - 1.0) < 1e-4);
    CHECK(r.history.size() == static_cast<std::size_t>(r.iterations));

    // Optimum outside the box lands on the bound.
    const SimplexResult b = minimize_bounded([](const std::vector<double>& x) { return (x[0] - 5.0) * (x[0] - 5.0); },
                                             {1.0}, {0.0}, {3.0});
    CHECK(b.x[0] == doctest::Approx(3.0).epsilon(1e-6));

    SimplexOptions capped;
    capped.max_evaluations = 20;
    CHECK(minimize_bounded(rosen, {-1.0, 2.0}, {-2.0, -2.0}, {3.0, 3.0}, capped).evaluations <= 21);

    auto flat = [](const std::vector<double>&) { return 1.0; };
    CHECK_THROWS_AS(minimize_bounded(flat, {}, {}, {}), Error);
    CHECK_THROWS_AS(minimize_bounded(flat, {4.0}, {0.0}, {3.0}), Error);
    CHECK_THROWS_AS(minimize_bounded(flat, {1.0}, {3.0}, {0.0}), Error);
}

TEST_CASE("single-parameter spectrum fit recovers E_J") {
    const CircuitParams truth = fixtures::fitted_device(fixtures::qubit_b());
    const SpectroscopyDataset d = synthetic(truth, {0.30, 0.38, 0.45, 0.50, 0.55, 0.62, 0.70}, false);
    CircuitParams init = truth;
    init.josephson_energy_EJ *= 1.1;
    const FitResult f = fit_spectrum_model1(d, init, {FreeParam::EJ});
    CHECK(f.converged);
    CHECK(rel_err(f.value("EJ"), truth.josephson_energy_EJ) < 1e-4);
    CHECK(f.residual_rms < 0.1 * kDefaultSigma);
    CHECK(apply_fit(init, f).josephson_energy_EJ == f.value("EJ"));
    CHECK_THROWS_AS(f.value("Cg"), Error);
}

TEST_CASE("three-parameter round trip within 1 percent") {
    const CircuitParams truth = fixtures::fitted_device(fixtures::qubit_b());
    const SpectroscopyDataset d =
        synthetic(truth, {0.20, 0.28, 0.36, 0.43, 0.50, 0.57, 0.64, 0.72, 0.80}, true);
    CircuitParams init = truth;
    init.ind_per_len_Ll *= 1.1;
    init.cap_per_len_Cl *= 0.9;
    init.josephson_energy_EJ *= 1.1;
    const auto t0 = std::chrono::steady_clock::now();
    const FitResult f = fit_spectrum_model1(d, init, {FreeParam::Ll, FreeParam::Cl, FreeParam::EJ});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    MESSAGE("round trip: " << f.n_evaluations << " evaluations in " << secs << " s");
    CHECK(rel_err(f.value("Ll"), truth.ind_per_len_Ll) < 0.01);
    CHECK(rel_err(f.value("Cl"), truth.cap_per_len_Cl) < 0.01);
    CHECK(rel_err(f.value("EJ"), truth.josephson_energy_EJ) < 0.01);
    CHECK(f.params_out[0].lower == doctest::Approx(0.5 * init.ind_per_len_Ll));
    CHECK(f.params_out[0].upper == doctest::Approx(1.5 * init.ind_per_len_Ll));
    CHECK(secs < 300.0);
}

TEST_CASE("spectrum fit argument checks") {
    const CircuitParams p = fixtures::fitted_device(fixtures::qubit_b());
    SpectroscopyDataset few(4, {0.5, Transition::F01, 4.5e9, 0.0});
    CHECK(kind_of([&] { fit_spectrum_model1(few, p, {FreeParam::EJ}); }) == ErrorKind::InsufficientPoints);
    SpectroscopyDataset one_bias(6, {0.5, Transition::F01, 4.5e9, 0.0});
    CHECK(kind_of([&] { fit_spectrum_model1(one_bias, p, {FreeParam::EJ}); }) == ErrorKind::InsufficientPoints);
    SpectroscopyDataset ok;
    for (int i = 0; i < 5; ++i) ok.push_back({0.4 + 0.05 * i, Transition::F01, 4.5e9, 0.0});
    CHECK(kind_of([&] { fit_spectrum_model1(ok, p, {}); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([&] { fit_spectrum_model1(ok, p, {FreeParam::EJ, FreeParam::EJ}); }) == ErrorKind::InvalidArgument);
    ok[2].frequency = -1.0;
    CHECK(kind_of([&] { fit_spectrum_model1(ok, p, {FreeParam::EJ}); }) == ErrorKind::InvalidArgument);
    CHECK_THROWS_AS(parse_transition("f03"), Error);
    CHECK_THROWS_AS(parse_free_param("Cg"), Error);
    CHECK(parse_transition(to_string(Transition::F02Half)) == Transition::F02Half);
    CHECK(parse_free_param(to_string(FreeParam::Cl)) == FreeParam::Cl);
}

TEST_CASE("coupling capacitance from a synthetic avoided crossing") {
    const CircuitParams p = fixtures::fitted_device(fixtures::qubit_b());
    ReadoutParams r = fixtures::fitted_readout(fixtures::qubit_b());
    r.resonator_freq_fr = solve_qubit_point(p, {0.39}).spectrum.f01;
    const double cg_true = r.coupling_cap_Cg;
    std::vector<FluxBias> biases;
    for (int i = 0; i < 7; ++i) biases.push_back({0.375 + 0.005 * i});
    const auto rows = avoided_crossing_trace(p, r, biases);
    std::vector<CrossingPoint> data;
    for (std::size_t i = 0; i < rows.size(); ++i)
        data.push_back({biases[i].phi_diff, i % 2 == 0 ? rows[i].lower : rows[i].upper});

    CrossingFitOptions o;
    o.threads = 2;
    const FitResult f = fit_coupling_from_crossing(data, 1.3 * cg_true, p, r, o);
    CHECK(rel_err(f.value("Cg"), cg_true) < 0.02);
    CHECK(f.residual_rms < 0.02 * 70e6);

    CHECK(kind_of([&] { fit_coupling_from_crossing({data[0], data[1]}, cg_true, p, r); }) ==
          ErrorKind::InsufficientPoints);
    CHECK(kind_of([&] { fit_coupling_from_crossing(data, 0.0, p, r); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("flux-noise density least squares") {
    const double k = std::sqrt(std::log(2.0));
    const double A = 4.2e-6, gx = 3.1e4;
    std::vector<std::pair<double, double>> d;
    for (double s : {-4e9, -1e9, 0.0, 2e9, 5e9, 8e9}) d.push_back({s, k * A * std::abs(s) + gx});
    const FluxNoiseFit f = fit_flux_noise_density(d);
    CHECK(rel_err(f.APhi, A) < 1e-10);
    CHECK(rel_err(f.gamma_x, gx) < 1e-10);
    CHECK(f.residual_rms < 1e-6 * gx);
    CHECK_FALSE(f.clamped);

    // Hand-computed OLS on three points: x = k*{1,2,3}, y = {1,3,2}.
    const FluxNoiseFit h = fit_flux_noise_density({{1.0, 1.0}, {2.0, 3.0}, {3.0, 2.0}});
    CHECK(h.APhi == doctest::Approx(0.5 / k).epsilon(1e-14));
    CHECK(h.gamma_x == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(h.residual_rms == doctest::Approx(std::sqrt(1.5 / 3.0)).epsilon(1e-14));

    const FluxNoiseFit c = fit_flux_noise_density({{1.0, 3.0}, {2.0, 2.0}, {3.0, 1.0}});
    CHECK(c.clamped);
    CHECK(c.APhi == 0.0);
    CHECK(c.gamma_x == doctest::Approx(2.0));

    CHECK(kind_of([] { fit_flux_noise_density({{1.0, 1.0}, {-1.0, 2.0}, {1.0, 3.0}}); }) ==
          ErrorKind::DegenerateDesign);
    CHECK(kind_of([] { fit_flux_noise_density({{1.0, 1.0}, {2.0, 2.0}}); }) == ErrorKind::InsufficientPoints);
}

}  // TEST_SUITE
