#pragma once

#include <vector>

#include "uniflux/circuit.hpp"

namespace uniflux {

struct KernelSpec {
    double ll_left = 0.0;   // m, l + x_J
    double lr_right = 0.0;  // m, l - x_J
    double impedance_Z = 0.0;
    double phase_velocity = 0.0;

    void validate() const;
};

KernelSpec make_kernel_spec(const CircuitParams& params);

// 2 w / (Z [tanh(w l_l / v_p) + tanh(w l_r / v_p)]), with the analytic value at w = 0.
double exact_kernel(const KernelSpec& spec, double omega);

struct KernelTaylor {
    double c0 = 0.0;  // 1/H
    double c2 = 0.0;  // F
};

// Low-frequency expansion K(w) ~ c0 + c2 w^2.
KernelTaylor kernel_taylor_coeffs(const CircuitParams& params);

struct LumpedModel {
    double cap_Ceff = 0.0;  // F
    double ind_Leff = 0.0;  // H
};

LumpedModel build_lumped_model(const CircuitParams& params);

struct AuxModeModel {
    int M = 2;
    double cap_C = 0.0;     // F
    double ind_Lpsi = 0.0;  // H
    std::vector<double> aux_freqs_Omega_k;  // rad/s
    std::vector<double> couplings_alpha_k;  // alpha_k, so that alpha_k chi_k psi is an energy
    std::vector<double> alpha_sq_over_C;    // alpha_k^2 / C, independent of C
    double cap_Ceff = 0.0;
    double ind_Leff = 0.0;
};

AuxModeModel build_aux_model(const CircuitParams& params, int M = 2);

struct Model2Options {
    double theta_max = 8.0;  // rad, grid half-span for 2 pi psi / Phi0
    int grid_points = 4096;
    int psi_states = 24;     // contracted single-coordinate states kept
    int ho_levels = 24;      // oscillator levels per coupled auxiliary mode
    int contracted_states = 60;  // kept after the first of two coupled modes
    bool check_truncation = true;
};

struct Model2Spectrum {
    std::vector<double> eigen_energies;  // J, ascending
    double f01 = 0.0;
    double f12 = 0.0;
    double anharmonicity = 0.0;
    int coupled_modes = 0;  // auxiliary modes with nonzero coupling
};

Model2Spectrum diagonalize_model2(const AuxModeModel& model, double EJ, const FluxBias& bias,
                                  int n_states = 4, const Model2Options& options = {});

}  // namespace uniflux
