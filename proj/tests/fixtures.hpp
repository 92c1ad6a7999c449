#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "uniflux/circuit.hpp"
#include "uniflux/readout.hpp"

namespace fixtures {

using uniflux::CircuitParams;
using uniflux::PhysConsts;
using uniflux::ReadoutParams;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kGHz = 1e9;
inline constexpr double kMHz = 1e6;

inline double ghz_energy(double f_ghz) { return f_ghz * kGHz * PhysConsts::planck_h; }
inline double to_ghz(double energy) { return energy / PhysConsts::planck_h / kGHz; }

// Design-table device: 8 mm, 83 pF/m, 0.83 uH/m, EJ/h = 19 GHz, CJ = 1.4 fF.
inline CircuitParams design_device() { return CircuitParams{}; }

// Fitted device parameters and half-flux measurements for the five measured qubits.
struct MeasuredQubit {
    char name;
    double EJ_GHz;
    double EL_m_GHz;
    double EC_m_GHz;
    double f01_GHz;
    double alpha_MHz;
    double Cg_fF;
    double g01_MHz;
    double chi_MHz;
    double fr_GHz;
    double kappa_MHz;
};

inline constexpr std::array<MeasuredQubit, 5> kQubits = {{
    {'A', 23.3, 24.9, 0.318, 3.547, 744.0, 9.0, 53.5, 0.74, 5.826, 0.43},
    {'B', 19.0, 25.2, 0.297, 4.488, 434.0, 10.0, 70.0, 1.2, 6.198, 1.24},
    {'C', 17.4, 25.3, 0.290, 4.781, 343.0, 12.5, 79.7, 9.20, 5.522, 9.2},
    {'D', 14.8, 25.7, 0.278, 5.257, 214.0, 12.5, 85.7, 20.2, 5.699, 10.0},
    {'E', 15.0, 25.7, 0.279, 5.224, 257.0, 12.5, 92.3, 4.1, 6.156, 1.8},
}};

inline constexpr double kFittedLl = 0.821e-6;
inline constexpr double kFittedCl = 87.1e-12;
inline constexpr double kCouplingPosXg = 0.596e-3;

inline CircuitParams fitted_device(const MeasuredQubit& q) {
    CircuitParams p;
    p.total_length_2l = 8e-3;
    p.cap_per_len_Cl = kFittedCl;
    p.ind_per_len_Ll = kFittedLl;
    p.josephson_energy_EJ = ghz_energy(q.EJ_GHz);
    p.junction_cap_CJ = 1.4e-15;
    return p;
}

inline ReadoutParams fitted_readout(const MeasuredQubit& q) {
    ReadoutParams r;
    r.resonator_freq_fr = q.fr_GHz * kGHz;
    r.linewidth_kappa = kTwoPi * q.kappa_MHz * kMHz;
    r.coupling_cap_Cg = q.Cg_fF * 1e-15;
    r.coupling_pos_xg = kCouplingPosXg;
    r.line_impedance_Ztr = 50.0;
    return r;
}

inline const MeasuredQubit& qubit_b() { return kQubits[1]; }

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace fixtures
