#include "uniflux/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "uniflux/errors.hpp"

namespace uniflux {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kPoleTol = 1e-12;
constexpr double kSpuriousTol = 1e-10;

struct Coefficients {
    double left;
    double right;
    bool right_parameterized;
};

double bracket_term(const CircuitParams& p, const DcOperatingPoint& dc, double k) {
    const double l = p.half_length();
    const double kl = k * l;
    return p.junction_cap_CJ * kl * kl / (p.cap_per_len_Cl * l) -
           p.ind_per_len_Ll * l / p.josephson_inductance() * std::cos(dc.phase_phi0);
}

// Unit-norm solution of the two junction matching conditions at wavenumber k.
Coefficients null_vector(const CircuitParams& p, const DcOperatingPoint& dc, double k) {
    const double l = p.half_length();
    const double xj = p.junction_pos_xj;
    const double A = k * (xj + l);
    const double B = k * (xj - l);
    const double w = p.phase_velocity() * k;
    const double s = w * w * p.junction_cap_CJ - std::cos(dc.phase_phi0) / p.josephson_inductance();
    const double kL = k / p.ind_per_len_Ll;

    const double r1a = std::cos(A), r1b = -std::cos(B);
    const double scale2 = std::abs(s) + kL;
    const double r2a = (-s * std::sin(A) + kL * std::cos(A)) / scale2;
    const double r2b = s * std::sin(B) / scale2;

    const bool use_first = std::hypot(r1a, r1b) >= std::hypot(r2a, r2b);
    double left = use_first ? -r1b : -r2b;
    double right = use_first ? r1a : r2a;
    const double n = std::hypot(left, right);
    left /= n;
    right /= n;
    return {left, right, std::abs(std::cos(B)) < kPoleTol};
}

// max over [0, L] of |sin(k y)|
double segment_peak(double k, double L) {
    return (k * L >= 0.5 * kPi) ? 1.0 : std::abs(std::sin(k * L));
}

// integral_0^L sin(k y)^2 dy
double sin2_integral(double k, double L) { return 0.5 * L - std::sin(2.0 * k * L) / (4.0 * k); }

// sin(q L) / q with the q -> 0 limit
double sinq(double q, double L) {
    const double x = q * L;
    if (std::abs(x) < 1e-4) return L * (1.0 - x * x / 6.0 + x * x * x * x / 120.0);
    return std::sin(x) / q;
}

double sin_sin(double k1, double k2, double L) { return 0.5 * (sinq(k1 - k2, L) - sinq(k1 + k2, L)); }
double cos_cos(double k1, double k2, double L) { return 0.5 * (sinq(k1 - k2, L) + sinq(k1 + k2, L)); }

bool is_spurious(const CircuitParams& p, const DcOperatingPoint& dc, double k) {
    const Coefficients c = null_vector(p, dc, k);
    const double l = p.half_length();
    const double xj = p.junction_pos_xj;
    const double peak = std::max(std::abs(c.left) * segment_peak(k, l + xj),
                                 std::abs(c.right) * segment_peak(k, l - xj));
    return peak < kSpuriousTol;
}

double refine_bisect(const CircuitParams& p, const DcOperatingPoint& dc, double lo, double hi) {
    double flo = wavenumber_function(p, dc, lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = wavenumber_function(p, dc, mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo <= 2.0 * kEps * hi) break;
    }
    if (hi - lo > 1e-12 * hi)
        fail(ErrorKind::NonConvergence, "wavenumber bisection did not converge");
    return 0.5 * (lo + hi);
}

std::vector<double> scan_roots(const CircuitParams& p, const DcOperatingPoint& dc, double kmax,
                               long npts) {
    const double l = p.half_length();
    std::vector<double> ks(npts + 1), fs(npts + 1);
    for (long i = 0; i <= npts; ++i) {
        ks[i] = kmax * static_cast<double>(i) / static_cast<double>(npts);
        fs[i] = (i == 0) ? 0.0 : wavenumber_function(p, dc, ks[i]);
    }
    std::vector<double> roots;
    for (long i = 1; i < npts; ++i) {
        if (fs[i] == 0.0) {
            roots.push_back(ks[i]);
            continue;
        }
        if (fs[i + 1] != 0.0 && (fs[i] < 0.0) != (fs[i + 1] < 0.0)) {
            roots.push_back(refine_bisect(p, dc, ks[i], ks[i + 1]));
            continue;
        }
        // Tangent or closely spaced root pair: |F| has a local minimum without a sign change.
        if (i >= 2 && (fs[i - 1] < 0.0) == (fs[i] < 0.0) && (fs[i + 1] < 0.0) == (fs[i] < 0.0) &&
            std::abs(fs[i]) < std::abs(fs[i - 1]) && std::abs(fs[i]) <= std::abs(fs[i + 1])) {
            const double sgn = fs[i] < 0.0 ? -1.0 : 1.0;
            auto g = [&](double k) { return sgn * wavenumber_function(p, dc, k); };
            const auto [kstar, gmin] = boost::math::tools::brent_find_minima(g, ks[i - 1], ks[i + 1], 60);
            const double scale = kstar * l + std::abs(bracket_term(p, dc, kstar));
            if (gmin < 0.0) {
                roots.push_back(refine_bisect(p, dc, ks[i - 1], kstar));
                roots.push_back(refine_bisect(p, dc, kstar, ks[i + 1]));
            } else if (gmin <= 1e-12 * scale) {
                roots.push_back(kstar);
            }
        }
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> out;
    for (double r : roots) {
        if (!out.empty() && std::abs(r - out.back()) <= 1e-10 * r) continue;
        if (is_spurious(p, dc, r)) {
            spdlog::debug("discarding spurious wavenumber root k = {}", r);
            continue;
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace

double wavenumber_function(const CircuitParams& p, const DcOperatingPoint& dc, double k) {
    const double l = p.half_length();
    const double xj = p.junction_pos_xj;
    return k * l * std::cos(k * (xj - l)) * std::cos(k * (xj + l)) -
           bracket_term(p, dc, k) * std::sin(2.0 * k * l);
}

std::vector<double> solve_wavenumbers(const CircuitParams& params, const DcOperatingPoint& dc,
                                      int count, const WavenumberScan& scan) {
    params.validate();
    if (count < 1) fail(ErrorKind::InvalidArgument, "mode count must be >= 1");
    const double quarter = kPi / params.total_length_2l;  // pi / (2 l)
    const int span = count + scan.extra_quarter_waves;
    double kmax = span * quarter;
    long npts = static_cast<long>(scan.points_per_quarter_wave) * span;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::vector<double> roots = scan_roots(params, dc, kmax, npts);
        if (static_cast<int>(roots.size()) >= count) {
            roots.resize(count);
            return roots;
        }
        kmax *= 2.0;
        npts *= 2;
    }
    fail(ErrorKind::InsufficientScanRange,
         fmt::format("fewer than {} wavenumber roots below k = {} 1/m", count, kmax));
}

ModeSolution build_mode(const CircuitParams& p, const DcOperatingPoint& dc, double km, int index_m) {
    p.validate();
    if (!(km > 0.0)) fail(ErrorKind::InvalidArgument, "wavenumber must be > 0");

    const double l = p.half_length();
    const double xj = p.junction_pos_xj;
    const double L1 = l + xj;
    const double L2 = l - xj;
    const double c_sigma = p.sigma_capacitance();
    const double LJ = p.josephson_inductance();

    const Coefficients c = null_vector(p, dc, km);
    double a = c.left;
    double b = c.right;
    double du = b * std::sin(km * (xj - l)) - a * std::sin(km * (xj + l));
    const double norm = p.cap_per_len_Cl * (a * a * sin2_integral(km, L1) + b * b * sin2_integral(km, L2)) +
                        p.junction_cap_CJ * du * du;
    const double scale = std::sqrt(c_sigma / norm);
    a *= scale;
    b *= scale;
    du *= scale;

    ModeSolution m;
    m.index_m = index_m;
    m.wavenumber_km = km;
    m.angular_freq_wm = p.phase_velocity() * km;
    m.is_anharmonic = std::abs(du) > kAnharmonicThreshold;
    double sign = 1.0;
    if (m.is_anharmonic) {
        sign = du < 0.0 ? -1.0 : 1.0;
    } else {
        const double lead = std::abs(a) >= std::abs(b) ? a : b;
        sign = lead < 0.0 ? -1.0 : 1.0;
    }
    a *= sign;
    b *= sign;
    du = m.is_anharmonic ? du * sign : 0.0;  // residual is rounding noise

    m.coef_left = a;
    m.coef_right = b;
    m.amp_A = a;
    m.ratio_B = (a != 0.0) ? b / a : std::numeric_limits<double>::quiet_NaN();
    m.right_parameterized = c.right_parameterized;
    m.delta_u = du;
    m.half_length = l;
    m.junction_pos = xj;

    const double w = m.angular_freq_wm;
    m.eff_inductance_Lm = 1.0 / (c_sigma * w * w);
    m.tilde_Lm = 1.0 / (1.0 / m.eff_inductance_Lm - std::cos(dc.phase_phi0) * du * du / LJ);
    const double du2 = du * du;
    m.cap_Cm_prime = du2 > 0.0 ? c_sigma / du2 : std::numeric_limits<double>::infinity();
    const double e = PhysConsts::elem_charge;
    const double phi_r = PhysConsts::reduced_flux_quantum;
    m.E_C_m = e * e * du2 / (2.0 * c_sigma);
    m.E_L_m = du2 > 0.0 ? phi_r * phi_r / (m.tilde_Lm * du2) : std::numeric_limits<double>::infinity();
    return m;
}

std::vector<ModeSolution> solve_modes(const CircuitParams& params, const DcOperatingPoint& dc,
                                      int count, const WavenumberScan& scan) {
    const std::vector<double> ks = solve_wavenumbers(params, dc, count, scan);
    std::vector<ModeSolution> modes;
    modes.reserve(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i)
        modes.push_back(build_mode(params, dc, ks[i], static_cast<int>(i) + 1));
    return modes;
}

double envelope_value(const ModeSolution& mode, double x) {
    const double l = mode.half_length;
    if (!(x >= -l && x <= l)) fail(ErrorKind::OutOfDomain, fmt::format("x = {} outside [-l, l]", x));
    if (x == mode.junction_pos)
        fail(ErrorKind::OutOfDomain, "envelope is discontinuous at x_J; use the one-sided limits");
    if (x < mode.junction_pos) return mode.coef_left * std::sin(mode.wavenumber_km * (x + l));
    return mode.coef_right * std::sin(mode.wavenumber_km * (x - l));
}

double envelope_left_limit(const ModeSolution& mode) {
    return mode.coef_left * std::sin(mode.wavenumber_km * (mode.junction_pos + mode.half_length));
}

double envelope_right_limit(const ModeSolution& mode) {
    return mode.coef_right * std::sin(mode.wavenumber_km * (mode.junction_pos - mode.half_length));
}

OrthogonalityReport orthogonality_residuals(const std::vector<ModeSolution>& modes,
                                            const CircuitParams& p, const DcOperatingPoint& dc) {
    const std::size_t n = modes.size();
    const double l = p.half_length();
    const double L1 = l + p.junction_pos_xj;
    const double L2 = l - p.junction_pos_xj;
    const double c_sigma = p.sigma_capacitance();
    const double cos_phi = std::cos(dc.phase_phi0);
    const double LJ = p.josephson_inductance();

    OrthogonalityReport r;
    r.overlap.resize(n, n);
    r.stiffness.resize(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const ModeSolution& a = modes[i];
            const ModeSolution& b = modes[j];
            const double k1 = a.wavenumber_km, k2 = b.wavenumber_km;
            const double uu = p.cap_per_len_Cl * (a.coef_left * b.coef_left * sin_sin(k1, k2, L1) +
                                                  a.coef_right * b.coef_right * sin_sin(k1, k2, L2)) +
                              p.junction_cap_CJ * a.delta_u * b.delta_u;
            const double dd = k1 * k2 / p.ind_per_len_Ll *
                                  (a.coef_left * b.coef_left * cos_cos(k1, k2, L1) +
                                   a.coef_right * b.coef_right * cos_cos(k1, k2, L2)) +
                              cos_phi / LJ * a.delta_u * b.delta_u;
            r.overlap(i, j) = uu / c_sigma;
            r.stiffness(i, j) = dd * std::sqrt(a.eff_inductance_Lm * b.eff_inductance_Lm);
            if (i != j) {
                r.max_offdiag_overlap = std::max(r.max_offdiag_overlap, std::abs(r.overlap(i, j)));
                r.max_offdiag_stiffness = std::max(r.max_offdiag_stiffness, std::abs(r.stiffness(i, j)));
            }
        }
    }
    return r;
}

int select_qubit_mode(const std::vector<ModeSolution>& modes) {
    int best = -1;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (!modes[i].is_anharmonic) continue;
        if (best < 0 || modes[i].angular_freq_wm < modes[best].angular_freq_wm) best = static_cast<int>(i);
    }
    return best;
}

}  // namespace uniflux
