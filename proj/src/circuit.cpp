#include "uniflux/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "uniflux/errors.hpp"

namespace uniflux {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
        fail(ErrorKind::InvalidArgument, fmt::format("{} must be finite and > 0 (got {})", name, v));
}

}  // namespace

void CircuitParams::validate() const {
    require_positive(total_length_2l, "total_length_2l");
    require_positive(cap_per_len_Cl, "cap_per_len_Cl");
    require_positive(ind_per_len_Ll, "ind_per_len_Ll");
    require_positive(josephson_energy_EJ, "josephson_energy_EJ");
    if (!(junction_cap_CJ >= 0.0) || !std::isfinite(junction_cap_CJ))
        fail(ErrorKind::InvalidArgument, "junction_cap_CJ must be finite and >= 0");
    if (!(std::abs(junction_pos_xj) < half_length()))
        fail(ErrorKind::InvalidArgument, "junction_pos_xj must satisfy |x_J| < l");
    if (!(temperature >= 0.0) || !std::isfinite(temperature))
        fail(ErrorKind::InvalidArgument, "temperature must be finite and >= 0");
}

double CircuitParams::phase_velocity() const {
    return 1.0 / std::sqrt(ind_per_len_Ll * cap_per_len_Cl);
}

double CircuitParams::impedance() const { return std::sqrt(ind_per_len_Ll / cap_per_len_Cl); }

double CircuitParams::josephson_inductance() const {
    const double p = PhysConsts::reduced_flux_quantum;
    return p * p / josephson_energy_EJ;
}

double CircuitParams::inductive_energy() const {
    const double p = PhysConsts::reduced_flux_quantum;
    return p * p / (total_length_2l * ind_per_len_Ll);
}

double CircuitParams::sigma_capacitance() const {
    return cap_per_len_Cl * total_length_2l + junction_cap_CJ;
}

double elliptic_k(double m) {
    if (!(m >= 0.0 && m < 1.0))
        fail(ErrorKind::DomainError, fmt::format("elliptic parameter {} outside [0,1)", m));
    double a = 1.0;
    double g = std::sqrt(1.0 - m);
    for (int i = 0; i < 64 && std::abs(a - g) > 4.0 * std::numeric_limits<double>::epsilon() * a; ++i) {
        const double an = 0.5 * (a + g);
        g = std::sqrt(a * g);
        a = an;
    }
    return kPi / (2.0 * a);
}

LineConstants cpw_line_constants(double a, double b, double eta, double epsr) {
    if (!(a > 0.0 && b > a))
        fail(ErrorKind::DomainError, "CPW geometry requires 0 < a < b");
    if (!(eta > 0.0)) fail(ErrorKind::DomainError, "substrate thickness must be > 0");
    if (!(epsr >= 1.0)) fail(ErrorKind::DomainError, "relative permittivity must be >= 1");

    const double r2 = std::tanh(kPi * a / (4.0 * eta)) / std::tanh(kPi * b / (4.0 * eta));
    const double r1 = elliptic_k(r2 * r2) / elliptic_k(1.0 - r2 * r2);
    const double r4 = a / b;
    const double r3 = elliptic_k(r4 * r4) / elliptic_k(1.0 - r4 * r4);

    const double eps0 = PhysConsts::vacuum_permittivity;
    const double c = PhysConsts::speed_of_light;
    const double c_air = 2.0 * eps0 * (r1 + r3);
    LineConstants out{};
    out.Cl = 2.0 * eps0 * (epsr - 1.0) * r1 + c_air;
    out.Ll = 1.0 / (c_air * c * c);
    out.Z = std::sqrt(out.Ll / out.Cl);
    return out;
}

double check_impedance(double Cl, double Ll) {
    require_positive(Cl, "Cl");
    require_positive(Ll, "Ll");
    return std::sqrt(Ll / Cl);
}

double inductance_ratio(const CircuitParams& params) {
    const double k = 2.0 * kPi / PhysConsts::flux_quantum;
    return params.total_length_2l * params.ind_per_len_Ll * params.josephson_energy_EJ * k * k;
}

namespace {

constexpr double kDcTol = 1e-12;
constexpr int kDcMaxIter = 200;
constexpr int kDcScanPoints = 2000;
constexpr double kDcResidualTol = 1e-10;

double bisect_dc(double lo, double hi, double ratio, double target) {
    auto f = [&](double p) { return p + ratio * std::sin(p) - target; };
    double flo = f(lo);
    for (int it = 0; it < kDcMaxIter; ++it) {
        if (hi - lo <= kDcTol) break;
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    if (hi - lo > kDcTol)
        fail(ErrorKind::NonConvergence, "dc phase bisection exceeded iteration limit");
    return 0.5 * (lo + hi);
}

}  // namespace

DcOperatingPoint solve_dc_phase(const CircuitParams& params, const FluxBias& bias) {
    params.validate();
    if (!std::isfinite(bias.phi_diff)) fail(ErrorKind::InvalidArgument, "flux bias must be finite");

    const double ratio = inductance_ratio(params);
    const double target = bias.angle();
    const double lo = target - (1.0 + ratio);
    const double hi = target + (1.0 + ratio);
    auto f = [&](double p) { return p + ratio * std::sin(p) - target; };

    DcOperatingPoint dc;
    dc.inductance_ratio = ratio;
    dc.is_single_valued = ratio <= 1.0;

    if (dc.is_single_valued) {
        dc.phase_phi0 = bisect_dc(lo, hi, ratio, target);
        dc.branch_count = 1;
    } else {
        std::vector<double> roots;
        const double step = (hi - lo) / kDcScanPoints;
        double x0 = lo;
        double f0 = f(x0);
        for (int i = 1; i <= kDcScanPoints; ++i) {
            const double x1 = (i == kDcScanPoints) ? hi : lo + i * step;
            const double f1 = f(x1);
            if (f0 == 0.0) {
                roots.push_back(x0);
            } else if ((f0 < 0.0) != (f1 < 0.0) && f1 != 0.0) {
                roots.push_back(bisect_dc(x0, x1, ratio, target));
            }
            x0 = x1;
            f0 = f1;
        }
        if (f0 == 0.0) roots.push_back(x0);
        if (roots.empty()) fail(ErrorKind::NonConvergence, "no dc phase root found in bracket");

        const double EJ = params.josephson_energy_EJ;
        const double EL = params.inductive_energy();
        auto energy = [&](double p) { return -EJ * std::cos(p) + 0.5 * EL * (p - target) * (p - target); };
        double best = roots.front();
        double best_u = energy(best);
        for (double r : roots) {
            const double u = energy(r);
            const double tie = 1e-12 * std::max(std::abs(u), std::abs(best_u));
            if (u < best_u - tie ||
                (std::abs(u - best_u) <= tie && std::abs(r - target) < std::abs(best - target))) {
                best = r;
                best_u = u;
            }
        }
        dc.phase_phi0 = best;
        dc.branch_count = static_cast<int>(roots.size());
    }

    if (std::abs(f(dc.phase_phi0)) >= kDcResidualTol)
        fail(ErrorKind::NonConvergence,
             fmt::format("dc phase residual {} above tolerance", std::abs(f(dc.phase_phi0))));
    return dc;
}

}  // namespace uniflux
