#pragma once

#include <functional>
#include <string>
#include <vector>

#include "uniflux/circuit.hpp"
#include "uniflux/readout.hpp"
#include "uniflux/spectrum1.hpp"

namespace uniflux {

enum class Transition { F01, F02Half, F12 };
const char* to_string(Transition t);
Transition parse_transition(const std::string& s);

struct SpectroscopyRow {
    double flux_bias = 0.0;  // Phi0
    Transition transition = Transition::F01;
    double frequency = 0.0;  // Hz
    double sigma = 0.0;      // Hz, 0 selects the default weight
};

using SpectroscopyDataset = std::vector<SpectroscopyRow>;

inline constexpr double kDefaultSigma = 1e6;  // Hz

struct FitParam {
    std::string name;
    std::string unit;
    double value = 0.0;  // SI
    double lower = 0.0;
    double upper = 0.0;
};

struct FitResult {
    std::vector<FitParam> params_out;
    double objective = 0.0;     // sum of squared weighted residuals
    double residual_rms = 0.0;  // Hz
    int n_iterations = 0;
    int n_evaluations = 0;
    bool converged = false;
    std::vector<std::vector<double>> history;  // best point after each iteration

    double value(const std::string& name) const;
};

struct SimplexOptions {
    double rel_tol = 1e-10;
    double size_tol = 1e-9;  // simplex size in the unbounded coordinates
    int max_evaluations = 2000;
    double initial_step = 0.2;
    bool restart = true;
};

struct SimplexResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::vector<std::vector<double>> history;
};

// Bounded Nelder-Mead: each x_i is mapped into [lower_i, upper_i] through a sine.
SimplexResult minimize_bounded(const std::function<double(const std::vector<double>&)>& f,
                               const std::vector<double>& x0, const std::vector<double>& lower,
                               const std::vector<double>& upper, const SimplexOptions& options = {});

enum class FreeParam { Ll, Cl, EJ };
const char* to_string(FreeParam p);
FreeParam parse_free_param(const std::string& s);

struct SpectrumFitOptions {
    double bound_fraction = 0.5;  // bounds at init * (1 -+ fraction)
    SimplexOptions simplex;
    PointOptions point{3, 3, std::nullopt, GridSpec{8.0, 4095}, DiagonalizeOptions{false, false}};
    int threads = 1;
};

// Model frequency for a row, evaluated through the full model-1 pipeline.
double model_transition(const QubitPoint& p, Transition t);

FitResult fit_spectrum_model1(const SpectroscopyDataset& data, const CircuitParams& init,
                              const std::vector<FreeParam>& free,
                              const SpectrumFitOptions& options = {});

CircuitParams apply_fit(const CircuitParams& base, const FitResult& fit);

struct CrossingPoint {
    double flux_bias = 0.0;  // Phi0
    double frequency = 0.0;  // Hz
};

struct CrossingFitOptions {
    double bound_fraction = 0.5;
    SimplexOptions simplex;
    CrossingOptions crossing;
    int threads = 1;
};

FitResult fit_coupling_from_crossing(const std::vector<CrossingPoint>& data, double init_Cg,
                                     const CircuitParams& params, const ReadoutParams& readout,
                                     const CrossingFitOptions& options = {});

struct FluxNoiseFit {
    double APhi = 0.0;     // flux units reciprocal to the slope's
    double gamma_x = 0.0;  // rate units of the input
    double sigma_APhi = 0.0;
    double sigma_gamma_x = 0.0;
    double residual_rms = 0.0;
    bool clamped = false;  // negative slope coefficient replaced by 0
};

// Ordinary least squares on gamma = sqrt(ln 2) A |slope| + gamma_x.
FluxNoiseFit fit_flux_noise_density(const std::vector<std::pair<double, double>>& slope_rate_pairs);

}  // namespace uniflux
