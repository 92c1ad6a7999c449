#pragma once

#include <vector>

#include <Eigen/Dense>

#include "uniflux/circuit.hpp"

namespace uniflux {

// |delta_u| above this marks a mode as anharmonic.
inline constexpr double kAnharmonicThreshold = 1e-6;

struct ModeSolution {
    int index_m = 1;
    double wavenumber_km = 0.0;   // 1/m
    double angular_freq_wm = 0.0; // rad/s
    double amp_A = 0.0;           // left-segment amplitude
    double ratio_B = 0.0;         // right/left amplitude ratio (NaN when amp_A == 0)
    double delta_u = 0.0;         // u(x_J+) - u(x_J-)
    bool is_anharmonic = false;
    bool right_parameterized = false;  // B pole: envelope built from the right segment
    double eff_inductance_Lm = 0.0;    // H
    double tilde_Lm = 0.0;             // H
    double cap_Cm_prime = 0.0;         // F
    double E_C_m = 0.0;                // J
    double E_L_m = 0.0;                // J

    // Geometry the envelope lives on.
    double half_length = 0.0;
    double junction_pos = 0.0;
    double coef_left = 0.0;   // u = coef_left  * sin(k (x + l)),  x < x_J
    double coef_right = 0.0;  // u = coef_right * sin(k (x - l)),  x > x_J
};

struct WavenumberScan {
    int points_per_quarter_wave = 4096;
    int extra_quarter_waves = 4;
};

// Left side of the wavenumber equation in its dimensionless form.
double wavenumber_function(const CircuitParams& params, const DcOperatingPoint& dc, double k);

std::vector<double> solve_wavenumbers(const CircuitParams& params, const DcOperatingPoint& dc,
                                      int count, const WavenumberScan& scan = {});

ModeSolution build_mode(const CircuitParams& params, const DcOperatingPoint& dc, double km,
                        int index_m = 1);

std::vector<ModeSolution> solve_modes(const CircuitParams& params, const DcOperatingPoint& dc,
                                      int count, const WavenumberScan& scan = {});

double envelope_value(const ModeSolution& mode, double x);
double envelope_left_limit(const ModeSolution& mode);
double envelope_right_limit(const ModeSolution& mode);

struct OrthogonalityReport {
    Eigen::MatrixXd overlap;    // <u_m,u_n> / C_Sigma
    Eigen::MatrixXd stiffness;  // <du_m,du_n> * sqrt(L_m L_n)
    double max_offdiag_overlap = 0.0;
    double max_offdiag_stiffness = 0.0;
};

OrthogonalityReport orthogonality_residuals(const std::vector<ModeSolution>& modes,
                                            const CircuitParams& params,
                                            const DcOperatingPoint& dc);

// Index into `modes` of the lowest-frequency anharmonic mode, or -1.
int select_qubit_mode(const std::vector<ModeSolution>& modes);

}  // namespace uniflux
