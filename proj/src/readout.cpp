#include "uniflux/readout.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "uniflux/errors.hpp"
#include "uniflux/parallel.hpp"

namespace uniflux {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLumpedTol = 1e-6;
constexpr double kPhotonTol = 1e-5;
constexpr double kDispersiveRatio = 10.0;

std::vector<double> level_omegas(const SingleModeSpectrum& spectrum, int n) {
    std::vector<double> w(n);
    for (int j = 0; j < n; ++j)
        w[j] = (spectrum.eigen_energies[j] - spectrum.eigen_energies[0]) / PhysConsts::hbar;
    return w;
}

}  // namespace

double ReadoutParams::omega_r() const { return 2.0 * kPi * resonator_freq_fr; }

void ReadoutParams::validate(const CircuitParams& params) const {
    if (!(resonator_freq_fr > 0.0) || !std::isfinite(resonator_freq_fr))
        fail(ErrorKind::InvalidArgument, "resonator_freq_fr must be > 0");
    if (!(linewidth_kappa >= 0.0)) fail(ErrorKind::InvalidArgument, "linewidth_kappa must be >= 0");
    if (!(coupling_cap_Cg >= 0.0)) fail(ErrorKind::InvalidArgument, "coupling_cap_Cg must be >= 0");
    if (!(std::abs(coupling_pos_xg) < params.half_length()))
        fail(ErrorKind::InvalidArgument, "coupling_pos_xg must satisfy |x_g| < l");
    if (!(line_impedance_Ztr > 0.0)) fail(ErrorKind::InvalidArgument, "line_impedance_Ztr must be > 0");
    const bool has_c = resonator_cap_Cr != 0.0, has_l = resonator_ind_Lr != 0.0;
    if (has_c != has_l)
        fail(ErrorKind::InvalidArgument, "resonator_cap_Cr and resonator_ind_Lr must be given together");
    if (has_c) {
        if (!(resonator_cap_Cr > 0.0 && resonator_ind_Lr > 0.0))
            fail(ErrorKind::InvalidArgument, "resonator_cap_Cr and resonator_ind_Lr must be > 0");
        const double w = 1.0 / std::sqrt(resonator_ind_Lr * (resonator_cap_Cr + coupling_cap_Cg));
        if (std::abs(w - omega_r()) > kLumpedTol * omega_r())
            fail(ErrorKind::InvalidArgument, "resonator_cap_Cr, resonator_ind_Lr inconsistent with resonator_freq_fr");
    }
}

ResonatorLumped resonator_lumped(const ReadoutParams& r) {
    ResonatorLumped out;
    if (r.resonator_cap_Cr != 0.0) {
        out.cap_Cr = r.resonator_cap_Cr;
        out.ind_Lr = r.resonator_ind_Lr;
    } else {
        const double z = 4.0 * r.line_impedance_Ztr / kPi;
        out.ind_Lr = z / r.omega_r();
        out.cap_Cr = 1.0 / (r.omega_r() * z) - r.coupling_cap_Cg;
    }
    out.z_total = std::sqrt(out.ind_Lr / (out.cap_Cr + r.coupling_cap_Cg));
    return out;
}

CouplingTable coupling_strengths(const SingleModeSpectrum& spectrum, const ModeSolution& mode,
                                 const ReadoutParams& readout, const CircuitParams& params,
                                 bool exact_impedance) {
    readout.validate(params);
    if (spectrum.charge_elems.size() == 0)
        fail(ErrorKind::InvalidArgument, "spectrum has no charge matrix elements");
    CouplingTable t;
    t.u_at_xg = envelope_value(mode, readout.coupling_pos_xg);
    t.C_u_tot = params.sigma_capacitance() + readout.coupling_cap_Cg * t.u_at_xg * t.u_at_xg;
    const double rk = PhysConsts::von_klitzing;
    const double impedance_factor = exact_impedance
                                        ? std::sqrt(resonator_lumped(readout).z_total * kPi / rk)
                                        : std::sqrt(4.0 * readout.line_impedance_Ztr / rk);
    const double pre = 2.0 * readout.omega_r() * readout.coupling_cap_Cg * t.u_at_xg * mode.delta_u /
                       t.C_u_tot * impedance_factor;
    t.g = pre * spectrum.charge_elems;
    return t;
}

DispersiveResult dispersive_shift_exact(const SingleModeSpectrum& spectrum, const CouplingTable& coupling,
                                        const ReadoutParams& readout, int n_levels) {
    const int avail = static_cast<int>(std::min<Eigen::Index>(coupling.g.rows(), spectrum.eigen_energies.size()));
    const int n = n_levels <= 0 ? avail : n_levels;
    if (n < 3 || n > avail) fail(ErrorKind::InvalidArgument, fmt::format("n_levels must be in [3, {}]", avail));

    const std::vector<double> w = level_omegas(spectrum, n);
    const double wr = readout.omega_r();
    const double kappa = readout.linewidth_kappa;
    const Eigen::MatrixXd& g = coupling.g;

    if (std::abs(g(0, 1)) > 0.0 && std::abs(w[1] - wr) < kDispersiveRatio * std::abs(g(0, 1)))
        spdlog::warn("weakly dispersive: |w01 - wr| / |g01| = {:.3g}", std::abs(w[1] - wr) / std::abs(g(0, 1)));

    Eigen::MatrixXd chi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (g(i, j) == 0.0) continue;
            const double det = w[j] - w[i] - wr;
            if (std::abs(det) <= kappa || det == 0.0)
                fail(ErrorKind::ResonantDivergence,
                     fmt::format("transition {}->{} lies within kappa of the resonator", i, j));
            chi(i, j) = g(i, j) * g(i, j) / det;
        }
    }
    DispersiveResult r;
    for (int j = 0; j < n; ++j) {
        r.lamb_shifts_Lambda_j.push_back(chi.col(j).sum());
        r.chi_j_per_level.push_back(chi.col(j).sum() - chi.row(j).sum());
    }
    r.chi_exact = 0.5 * (r.chi_j_per_level[1] - r.chi_j_per_level[0]);
    r.chi_approx = dispersive_shift_approx(spectrum.f01, spectrum.f12, g(0, 1), g(1, 2),
                                           readout.resonator_freq_fr, kappa);
    return r;
}

double dispersive_shift_approx(double f01, double f12, double g01, double g12, double fr, double kappa) {
    for (double v : {f01, f12, g01, g12, fr, kappa})
        if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "dispersive inputs must be finite");
    const double d01 = 2.0 * kPi * (f01 - fr);
    const double d12 = 2.0 * kPi * (f12 - fr);
    const bool uses12 = g12 != 0.0;
    if (std::abs(d01) <= kappa || d01 == 0.0 || (uses12 && (std::abs(d12) <= kappa || d12 == 0.0)))
        fail(ErrorKind::ResonantDivergence, "qubit transition within kappa of the resonator");
    double chi = g01 * g01 / d01;
    if (uses12) chi -= 0.5 * g12 * g12 / d12;
    return chi;
}

CrossingRow dressed_pair(const SingleModeSpectrum& spectrum, const CouplingTable& coupling,
                         double omega_r, int nq, int nph) {
    if (nq < 2 || nph < 2 || nq > coupling.g.rows() || nq > static_cast<int>(spectrum.eigen_energies.size()))
        fail(ErrorKind::InvalidArgument, "crossing truncation must satisfy 2 <= n_q <= available levels, n_ph >= 2");
    const std::vector<double> w = level_omegas(spectrum, nq);
    const int dim = nq * nph;
    auto idx = [nph](int q, int p) { return q * nph + p; };
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    for (int q = 0; q < nq; ++q)
        for (int p = 0; p < nph; ++p) H(idx(q, p), idx(q, p)) = w[q] + omega_r * p;
    // hbar sum_ij g_ij |i><j| (a^dag - a), real symmetric in this basis
    for (int i = 0; i < nq; ++i)
        for (int j = 0; j < nq; ++j)
            for (int p = 0; p + 1 < nph; ++p) {
                const double v = coupling.g(i, j) * std::sqrt(p + 1.0);
                H(idx(i, p + 1), idx(j, p)) += v;
                H(idx(j, p), idx(i, p + 1)) += v;
            }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if (es.info() != Eigen::Success) fail(ErrorKind::NonConvergence, "coupled Hamiltonian eigensolver failed");
    const Eigen::VectorXd& e = es.eigenvalues();
    const Eigen::MatrixXd& v = es.eigenvectors();

    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    auto weight = [&](int k) { return v(idx(1, 0), k) * v(idx(1, 0), k) + v(idx(0, 1), k) * v(idx(0, 1), k); };
    std::partial_sort(order.begin(), order.begin() + 2, order.end(),
                      [&](int a, int b) { return weight(a) > weight(b); });
    const double a = (e(order[0]) - e(0)) / (2.0 * kPi);
    const double b = (e(order[1]) - e(0)) / (2.0 * kPi);
    return {0.0, std::min(a, b), std::max(a, b)};
}

std::vector<CrossingRow> avoided_crossing_trace(const CircuitParams& params, const ReadoutParams& readout,
                                                const std::vector<FluxBias>& biases,
                                                const CrossingOptions& options, int threads) {
    readout.validate(params);
    PointOptions popt = options.point;
    popt.n_states = std::max(popt.n_states, options.n_qubit_levels);
    popt.diag.compute_elements = true;
    std::vector<CrossingRow> rows(biases.size());
    parallel_for(biases.size(), threads, [&](std::size_t i) {
        try {
            const QubitPoint p = solve_qubit_point(params, biases[i], popt);
            const CouplingTable c = coupling_strengths(p.spectrum, p.mode(), readout, params);
            CrossingRow r = dressed_pair(p.spectrum, c, readout.omega_r(), options.n_qubit_levels, options.n_photons);
            const CrossingRow more =
                dressed_pair(p.spectrum, c, readout.omega_r(), options.n_qubit_levels, options.n_photons + 1);
            const double shift = std::max(std::abs(more.lower - r.lower) / more.lower,
                                          std::abs(more.upper - r.upper) / more.upper);
            if (shift > kPhotonTol)
                fail(ErrorKind::TruncationNotConverged,
                     fmt::format("adding a photon level moves a branch by {:.3g} relative", shift));
            r.phi_diff = biases[i].phi_diff;
            rows[i] = r;
        } catch (const Error& e) {
            throw Error(e.kind(), fmt::format("at phi_diff = {}: {}", biases[i].phi_diff, e.detail()));
        }
    });
    return rows;
}

}  // namespace uniflux
