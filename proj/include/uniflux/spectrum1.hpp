#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "uniflux/circuit.hpp"
#include "uniflux/modes.hpp"

namespace uniflux {

// H = 4 E_C n^2 + E_Lm phi^2 / 2 + E_L phi (phi_diff - phi0) - E_J cos(phi - phi0)
struct HamiltonianSpec {
    double E_C = 0.0;    // J
    double E_L_m = 0.0;  // J
    double E_L = 0.0;    // J
    double E_J = 0.0;    // J
    double phi0 = 0.0;
    double phi_diff_angle = 0.0;

    void validate() const;
    double potential(double phi) const;
};

// Uniform grid with Dirichlet walls at +-phi_max; n_points interior nodes, step 2 phi_max/(n_points+1).
// The odd default puts a node on phi = 0 and makes the step exactly 2^-10 rad.
struct GridSpec {
    double phi_max = 8.0;
    int n_points = 16383;

    double step() const { return 2.0 * phi_max / (n_points + 1); }
    double node(int i) const { return -phi_max + (i + 1) * step(); }
    // Same span, half the step.
    GridSpec refined() const { return {phi_max, 2 * n_points + 1}; }
};

struct DiagonalizeOptions {
    bool compute_elements = true;  // wavefunctions and matrix elements
    bool validate_convergence = false;
};

struct SingleModeSpectrum {
    std::vector<double> eigen_energies;  // J, ascending
    GridSpec grid;
    Eigen::MatrixXd wavefunctions;  // grid node x state, sum |psi|^2 h = 1
    double f01 = 0.0;               // Hz
    double f12 = 0.0;               // Hz
    double anharmonicity = 0.0;     // Hz, f12 - f01
    Eigen::MatrixXd charge_elems;   // <i| i n |j>, real antisymmetric
    Eigen::MatrixXd phase_elems;    // <i| phi |j>, real symmetric
};

HamiltonianSpec assemble_spec(const ModeSolution& mode, const CircuitParams& params,
                              const DcOperatingPoint& dc, const FluxBias& bias);

SingleModeSpectrum diagonalize(const HamiltonianSpec& spec, int n_states, const GridSpec& grid = {},
                               const DiagonalizeOptions& options = {});

// Everything computed at one bias point by the single-mode model.
struct QubitPoint {
    FluxBias bias;
    DcOperatingPoint dc;
    std::vector<ModeSolution> modes;
    int qubit_mode = -1;  // index into modes
    HamiltonianSpec spec;
    SingleModeSpectrum spectrum;

    const ModeSolution& mode() const { return modes.at(static_cast<std::size_t>(qubit_mode)); }
};

struct PointOptions {
    int n_modes = 3;
    int n_states = 6;
    // Fixed 1-based normal-mode index; empty selects the lowest anharmonic mode.
    std::optional<int> mode_index;
    GridSpec grid;
    DiagonalizeOptions diag;
};

QubitPoint solve_qubit_point(const CircuitParams& params, const FluxBias& bias,
                             const PointOptions& options = {});

struct SweepRow {
    double phi_diff = 0.0;  // Phi0
    double f01 = 0.0;       // Hz
    double f02_half = 0.0;  // Hz
    double anharmonicity = 0.0;
    int mode_index = 0;     // 1-based normal-mode index used as the qubit
};

std::vector<SweepRow> flux_sweep(const CircuitParams& params, const std::vector<FluxBias>& biases,
                                 const PointOptions& options = {}, int threads = 1);

struct ParityReport {
    double ratio_02 = 0.0;  // |n_02| / max|n|
    double ratio_13 = 0.0;  // |n_13| / max|n|
    bool passed = false;
};

inline constexpr double kParityTolerance = 1e-8;

// With at_half_flux set, throws ParityViolation when a ratio exceeds kParityTolerance.
ParityReport parity_check(const SingleModeSpectrum& spectrum, bool at_half_flux = true);

}  // namespace uniflux
