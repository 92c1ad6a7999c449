#include "uniflux/spectrum2.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "uniflux/errors.hpp"
#include "uniflux/linalg.hpp"

namespace uniflux {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTruncationTol = 1e-4;
constexpr double kBoundaryTol = 1e-8;
// Internal energy unit for the dense solves: h * 1 GHz.
constexpr double kEnergyUnit = PhysConsts::planck_h * 1e9;

// kron(a, I_n) + kron(I_m, b) for square a (m x m) and b (n x n)
Eigen::MatrixXd kron_sum(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const Eigen::Index m = a.rows(), n = b.rows();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m * n, m * n);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j)
            out.block(i * n, j * n, n, n).diagonal().array() += a(i, j);
        out.block(i * n, i * n, n, n) += b;
    }
    return out;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const Eigen::Index m = a.rows(), n = b.rows();
    Eigen::MatrixXd out(m * n, m * n);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) out.block(i * n, j * n, n, n) = a(i, j) * b;
    return out;
}

std::vector<double> solve_levels(const AuxModeModel& model, double EJ, const FluxBias& bias,
                                 int n_states, int ho_levels, const Model2Options& opt,
                                 int* coupled) {
    const double pq = PhysConsts::reduced_flux_quantum;
    const double EC = PhysConsts::elem_charge * PhysConsts::elem_charge / (2.0 * model.cap_C) / kEnergyUnit;
    const double EL_static = pq * pq / model.ind_Leff / kEnergyUnit;
    const double EL_psi = pq * pq / model.ind_Lpsi / kEnergyUnit;
    const double ej = EJ / kEnergyUnit;
    const double shift = 2.0 * kPi * bias.phi_diff;

    // Stage 1: single coordinate with the static inductance; the remainder of the
    // psi^2 term is added in the contracted basis.
    const int n = opt.grid_points;
    const double h = 2.0 * opt.theta_max / (n + 1);
    const double kin = 4.0 * EC / (h * h);
    std::vector<double> diag(n), off(n - 1, -kin);
    Eigen::VectorXd theta(n);
    for (int i = 0; i < n; ++i) {
        theta(i) = -opt.theta_max + (i + 1) * h;
        diag[i] = 0.5 * EL_static * theta(i) * theta(i) - ej * std::cos(theta(i) + shift) + 2.0 * kin;
    }
    const EigenPairs base = tridiagonal_lowest(diag, off, opt.psi_states, true);
    const Eigen::VectorXd g = base.vectors.col(0);
    if (std::max(std::abs(g(0)), std::abs(g(n - 1))) > kBoundaryTol * g.cwiseAbs().maxCoeff())
        fail(ErrorKind::GridTooSmall, "model-2 ground state reaches the grid wall");

    const Eigen::MatrixXd& W = base.vectors;
    Eigen::MatrixXd X = W.transpose() * theta.asDiagonal() * W;
    Eigen::MatrixXd H = W.transpose() * theta.array().square().matrix().asDiagonal() * W;
    H *= 0.5 * (EL_psi - EL_static);
    for (int s = 0; s < opt.psi_states; ++s) H(s, s) += base.values[s];

    std::vector<int> active;
    for (int k = 0; k < model.M; ++k)
        if (model.couplings_alpha_k[k] != 0.0) active.push_back(k);
    if (coupled) *coupled = static_cast<int>(active.size());
    if (active.size() > 2)
        fail(ErrorKind::InvalidArgument, "at most two coupled auxiliary modes are supported");
    // Strongest coupling first so the contraction keeps its dressing exactly.
    std::stable_sort(active.begin(), active.end(), [&](int a, int b) {
        const double ga = model.couplings_alpha_k[a] / std::sqrt(model.aux_freqs_Omega_k[a]);
        const double gb = model.couplings_alpha_k[b] / std::sqrt(model.aux_freqs_Omega_k[b]);
        return ga > gb;
    });
    if (active.empty()) return symmetric_lowest(H, n_states, false).values;

    Eigen::VectorXd levels(ho_levels);
    Eigen::MatrixXd Xc = Eigen::MatrixXd::Zero(ho_levels, ho_levels);
    for (int q = 0; q < ho_levels; ++q) levels(q) = q + 0.5;
    for (int q = 1; q < ho_levels; ++q) Xc(q, q - 1) = Xc(q - 1, q) = std::sqrt(static_cast<double>(q));

    for (std::size_t a = 0; a < active.size(); ++a) {
        const int k = active[a];
        const double Om = model.aux_freqs_Omega_k[k];
        const double zpf = std::sqrt(PhysConsts::hbar / (2.0 * model.cap_C * Om));
        const double coupling = model.couplings_alpha_k[k] * pq * zpf / kEnergyUnit;
        const Eigen::MatrixXd Hosc = (PhysConsts::hbar * Om / kEnergyUnit) * levels.asDiagonal().toDenseMatrix();
        Eigen::MatrixXd Hfull = kron_sum(H, Hosc) + coupling * kron(X, Xc);
        const bool last = a + 1 == active.size();
        if (last) return symmetric_lowest(Hfull, n_states, false).values;
        // Contract before adding the next coupled mode.
        const EigenPairs c = symmetric_lowest(Hfull, opt.contracted_states, true);
        const Eigen::MatrixXd Xfull = kron(X, Eigen::MatrixXd::Identity(ho_levels, ho_levels));
        X = c.vectors.transpose() * Xfull * c.vectors;
        H = Eigen::VectorXd::Map(c.values.data(), opt.contracted_states).asDiagonal();
    }
    return {};
}

}  // namespace

void KernelSpec::validate() const {
    if (!(ll_left > 0.0 && lr_right > 0.0 && impedance_Z > 0.0 && phase_velocity > 0.0))
        fail(ErrorKind::InvalidArgument, "kernel lengths, impedance and phase velocity must be > 0");
}

KernelSpec make_kernel_spec(const CircuitParams& params) {
    params.validate();
    KernelSpec s;
    s.ll_left = params.half_length() + params.junction_pos_xj;
    s.lr_right = params.half_length() - params.junction_pos_xj;
    s.impedance_Z = params.impedance();
    s.phase_velocity = params.phase_velocity();
    return s;
}

double exact_kernel(const KernelSpec& spec, double omega) {
    spec.validate();
    if (omega == 0.0) {
        const double l = 0.5 * (spec.ll_left + spec.lr_right);
        return spec.phase_velocity / (spec.impedance_Z * l);
    }
    const double tl = std::tanh(omega * spec.ll_left / spec.phase_velocity);
    const double tr = std::tanh(omega * spec.lr_right / spec.phase_velocity);
    return 2.0 * omega / (spec.impedance_Z * (tl + tr));
}

KernelTaylor kernel_taylor_coeffs(const CircuitParams& params) {
    params.validate();
    const double l = params.half_length();
    const double xj = params.junction_pos_xj;
    return {1.0 / (l * params.ind_per_len_Ll), params.cap_per_len_Cl * (l * l + 3.0 * xj * xj) / (3.0 * l)};
}

LumpedModel build_lumped_model(const CircuitParams& params) {
    params.validate();
    const double l = params.half_length();
    const double xj = params.junction_pos_xj;
    LumpedModel m;
    m.cap_Ceff = params.junction_cap_CJ + params.cap_per_len_Cl * (l * l + 3.0 * xj * xj) / (6.0 * l);
    m.ind_Leff = params.total_length_2l * params.ind_per_len_Ll;
    return m;
}

AuxModeModel build_aux_model(const CircuitParams& params, int M) {
    if (M < 1 || M > 3) fail(ErrorKind::InvalidArgument, "number of auxiliary modes must be 1, 2 or 3");
    const LumpedModel lumped = build_lumped_model(params);
    const double l = params.half_length();
    const double vp = params.phase_velocity();
    const double Z = params.impedance();

    AuxModeModel m;
    m.M = M;
    m.cap_Ceff = lumped.cap_Ceff;
    m.ind_Leff = lumped.ind_Leff;
    double cap = lumped.cap_Ceff;
    double inv_l = 1.0 / lumped.ind_Leff;
    for (int k = 1; k <= M; ++k) {
        const double Om = kPi * k * vp / (2.0 * l);
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        double weight = sign * std::cos(kPi * k * params.junction_pos_xj / l) + 1.0;
        if (std::abs(weight) < 1e-12) weight = 0.0;
        const double a2c = Om * Om * Om / (kPi * k * Z) * weight;
        m.aux_freqs_Omega_k.push_back(Om);
        m.alpha_sq_over_C.push_back(a2c);
        cap -= a2c / (Om * Om * Om * Om);
        inv_l += a2c / (Om * Om);
    }
    if (!(cap > 0.0))
        fail(ErrorKind::NegativeEffectiveCapacitance,
             fmt::format("C = {} F with M = {}; use fewer auxiliary modes", cap, M));
    m.cap_C = cap;
    m.ind_Lpsi = 1.0 / inv_l;
    for (double a2c : m.alpha_sq_over_C) m.couplings_alpha_k.push_back(std::sqrt(a2c * cap));
    return m;
}

Model2Spectrum diagonalize_model2(const AuxModeModel& model, double EJ, const FluxBias& bias,
                                  int n_states, const Model2Options& options) {
    if (n_states < 3 || n_states > options.psi_states)
        fail(ErrorKind::InvalidArgument, "n_states must be in [3, psi_states]");
    if (!(EJ >= 0.0) || !std::isfinite(EJ)) fail(ErrorKind::InvalidArgument, "E_J must be finite and >= 0");
    if (!std::isfinite(bias.phi_diff)) fail(ErrorKind::InvalidArgument, "flux bias must be finite");
    if (!(model.cap_C > 0.0 && model.ind_Lpsi > 0.0 && model.ind_Leff > 0.0) ||
        static_cast<int>(model.couplings_alpha_k.size()) != model.M ||
        static_cast<int>(model.aux_freqs_Omega_k.size()) != model.M)
        fail(ErrorKind::InvalidArgument, "inconsistent auxiliary-mode model");
    if (options.grid_points < 64 || options.psi_states < 4 || options.ho_levels < 4)
        fail(ErrorKind::InvalidArgument, "model-2 truncation too small");

    Model2Spectrum out;
    std::vector<double> e = solve_levels(model, EJ, bias, n_states, options.ho_levels, options, &out.coupled_modes);
    for (double& v : e) v *= kEnergyUnit;
    out.eigen_energies = e;
    const double hp = PhysConsts::planck_h;
    out.f01 = (e[1] - e[0]) / hp;
    out.f12 = (e[2] - e[1]) / hp;
    out.anharmonicity = out.f12 - out.f01;

    if (options.check_truncation && out.coupled_modes > 0) {
        const std::vector<double> more =
            solve_levels(model, EJ, bias, 2, options.ho_levels + 4, options, nullptr);
        const double f01_more = (more[1] - more[0]) * kEnergyUnit / hp;
        const double shift = std::abs(f01_more - out.f01) / std::abs(f01_more);
        if (shift > kTruncationTol)
            fail(ErrorKind::TruncationNotConverged,
                 fmt::format("adding 4 oscillator levels moves f01 by {:.3g} relative", shift));
    }
    return out;
}

}  // namespace uniflux
