#include "uniflux/spectrum1.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "uniflux/errors.hpp"
#include "uniflux/linalg.hpp"
#include "uniflux/parallel.hpp"

namespace uniflux {

namespace {

constexpr double kBoundaryTol = 1e-8;
constexpr double kGridConvergenceTol = 1e-6;
constexpr int kMaxStates = 12;

EigenPairs solve_grid(const HamiltonianSpec& spec, int n_states, const GridSpec& grid,
                      bool want_vectors) {
    const int n = grid.n_points;
    const double h = grid.step();
    const double kin = 4.0 * spec.E_C / (h * h);
    std::vector<double> diag(n), off(n - 1, -kin);
    for (int i = 0; i < n; ++i) diag[i] = spec.potential(grid.node(i)) + 2.0 * kin;
    return tridiagonal_lowest(diag, off, n_states, want_vectors);
}

}  // namespace

void HamiltonianSpec::validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(E_C) || !positive(E_L_m) || !positive(E_L))
        fail(ErrorKind::InvalidArgument, "E_C, E_L_m and E_L must be finite and > 0");
    if (!(E_J >= 0.0) || !std::isfinite(E_J))
        fail(ErrorKind::InvalidArgument, "E_J must be finite and >= 0");
    if (!std::isfinite(phi0) || !std::isfinite(phi_diff_angle))
        fail(ErrorKind::InvalidArgument, "phase angles must be finite");
}

double HamiltonianSpec::potential(double phi) const {
    return 0.5 * E_L_m * phi * phi + E_L * phi * (phi_diff_angle - phi0) - E_J * std::cos(phi - phi0);
}

HamiltonianSpec assemble_spec(const ModeSolution& mode, const CircuitParams& params,
                              const DcOperatingPoint& dc, const FluxBias& bias) {
    HamiltonianSpec spec;
    spec.E_C = mode.E_C_m;
    spec.E_L_m = mode.E_L_m;
    spec.E_L = params.inductive_energy();
    spec.E_J = params.josephson_energy_EJ;
    spec.phi0 = dc.phase_phi0;
    spec.phi_diff_angle = bias.angle();
    return spec;
}

SingleModeSpectrum diagonalize(const HamiltonianSpec& spec, int n_states, const GridSpec& grid,
                               const DiagonalizeOptions& options) {
    spec.validate();
    if (n_states < 3 || n_states > kMaxStates)
        fail(ErrorKind::InvalidArgument, fmt::format("n_states must be in [3, {}]", kMaxStates));
    if (!(grid.phi_max > 0.0) || grid.n_points < 16 * n_states)
        fail(ErrorKind::InvalidArgument, "grid too coarse for the requested states");

    // Vectors are always needed for the boundary check on the ground state.
    const EigenPairs eig = solve_grid(spec, n_states, grid, true);
    const int n = grid.n_points;
    const double h = grid.step();

    const Eigen::VectorXd g = eig.vectors.col(0);
    const double peak = g.cwiseAbs().maxCoeff();
    const double edge = std::max(std::abs(g(0)), std::abs(g(n - 1)));
    if (edge > kBoundaryTol * peak)
        fail(ErrorKind::GridTooSmall,
             fmt::format("ground state reaches the grid wall (edge/peak = {:.3g}, phi_max = {})",
                         edge / peak, grid.phi_max));

    SingleModeSpectrum out;
    out.grid = grid;
    out.eigen_energies = eig.values;
    const double hplanck = PhysConsts::planck_h;
    const auto& E = out.eigen_energies;
    out.f01 = (E[1] - E[0]) / hplanck;
    out.f12 = (E[2] - E[1]) / hplanck;
    out.anharmonicity = out.f12 - out.f01;

    if (options.validate_convergence) {
        const EigenPairs fine = solve_grid(spec, 2, grid.refined(), false);
        const double coarse_gap = E[1] - E[0];
        const double fine_gap = fine.values[1] - fine.values[0];
        const double shift = std::abs(fine_gap - coarse_gap) / std::abs(fine_gap);
        if (shift > kGridConvergenceTol)
            fail(ErrorKind::ConvergenceNotReached,
                 fmt::format("halving the grid step moves E1-E0 by {:.3g} relative", shift));
    }

    if (!options.compute_elements) return out;

    Eigen::MatrixXd v = eig.vectors;
    for (int s = 0; s < n_states; ++s) {
        Eigen::Index arg = 0;
        v.col(s).cwiseAbs().maxCoeff(&arg);
        if (v(arg, s) < 0.0) v.col(s) = -v.col(s);
    }

    Eigen::VectorXd phi(n);
    for (int i = 0; i < n; ++i) phi(i) = grid.node(i);
    // Central difference with zero Dirichlet padding; antisymmetric by construction.
    Eigen::MatrixXd dv = Eigen::MatrixXd::Zero(n, n_states);
    dv.topRows(n - 1) += v.bottomRows(n - 1);
    dv.bottomRows(n - 1) -= v.topRows(n - 1);
    dv /= 2.0 * h;

    out.phase_elems = v.transpose() * phi.asDiagonal() * v;
    // The difference operator is antisymmetric; enforce it so the diagonal is exactly zero.
    const Eigen::MatrixXd nm = v.transpose() * dv;
    out.charge_elems = 0.5 * (nm - nm.transpose());
    out.wavefunctions = v / std::sqrt(h);
    return out;
}

QubitPoint solve_qubit_point(const CircuitParams& params, const FluxBias& bias,
                             const PointOptions& options) {
    QubitPoint p;
    p.bias = bias;
    p.dc = solve_dc_phase(params, bias);
    const int wanted = std::max(options.n_modes, options.mode_index.value_or(1));
    p.modes = solve_modes(params, p.dc, wanted);
    if (options.mode_index) {
        p.qubit_mode = *options.mode_index - 1;
        if (p.qubit_mode < 0 || p.qubit_mode >= static_cast<int>(p.modes.size()))
            fail(ErrorKind::InvalidArgument, "mode index out of range");
    } else {
        p.qubit_mode = select_qubit_mode(p.modes);
        if (p.qubit_mode < 0)
            fail(ErrorKind::DomainError,
                 fmt::format("no anharmonic mode among the lowest {} modes", p.modes.size()));
    }
    p.spec = assemble_spec(p.mode(), params, p.dc, bias);
    p.spectrum = diagonalize(p.spec, options.n_states, options.grid, options.diag);
    return p;
}

std::vector<SweepRow> flux_sweep(const CircuitParams& params, const std::vector<FluxBias>& biases,
                                 const PointOptions& options, int threads) {
    std::vector<SweepRow> rows(biases.size());
    PointOptions opts = options;
    opts.diag.compute_elements = false;
    parallel_for(biases.size(), threads, [&](std::size_t i) {
        try {
            const QubitPoint p = solve_qubit_point(params, biases[i], opts);
            SweepRow& r = rows[i];
            r.phi_diff = biases[i].phi_diff;
            r.f01 = p.spectrum.f01;
            r.f02_half = 0.5 * (p.spectrum.f01 + p.spectrum.f12);
            r.anharmonicity = p.spectrum.anharmonicity;
            r.mode_index = p.mode().index_m;
        } catch (const Error& e) {
            throw Error(e.kind(), fmt::format("at phi_diff = {}: {}", biases[i].phi_diff, e.detail()));
        }
    });
    return rows;
}

ParityReport parity_check(const SingleModeSpectrum& spectrum, bool at_half_flux) {
    const Eigen::MatrixXd& n = spectrum.charge_elems;
    if (n.rows() < 4) fail(ErrorKind::InvalidArgument, "parity check needs at least 4 states with elements");
    const double scale = n.cwiseAbs().maxCoeff();
    ParityReport r;
    r.ratio_02 = std::abs(n(0, 2)) / scale;
    r.ratio_13 = std::abs(n(1, 3)) / scale;
    r.passed = r.ratio_02 < kParityTolerance && r.ratio_13 < kParityTolerance;
    if (at_half_flux && !r.passed)
        fail(ErrorKind::ParityViolation,
             fmt::format("|n02|/max = {:.3g}, |n13|/max = {:.3g}", r.ratio_02, r.ratio_13));
    return r;
}

}  // namespace uniflux
