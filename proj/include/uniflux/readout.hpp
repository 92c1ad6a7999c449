#pragma once

#include <vector>

#include <Eigen/Dense>

#include "uniflux/circuit.hpp"
#include "uniflux/modes.hpp"
#include "uniflux/spectrum1.hpp"

namespace uniflux {

struct ReadoutParams {
    double resonator_freq_fr = 6.198e9;  // Hz
    double linewidth_kappa = 0.0;        // rad/s
    double coupling_cap_Cg = 0.0;        // F
    double coupling_pos_xg = 0.0;        // m, from resonator center
    double line_impedance_Ztr = 50.0;    // ohm
    // Lumped resonator; when both are zero they follow from fr and a quarter-wave
    // impedance 4 Z_tr / pi (see resonator_lumped).
    double resonator_cap_Cr = 0.0;  // F
    double resonator_ind_Lr = 0.0;  // H

    void validate(const CircuitParams& params) const;
    double omega_r() const;
};

struct ResonatorLumped {
    double cap_Cr = 0.0;
    double ind_Lr = 0.0;
    double z_total = 0.0;  // sqrt(Lr / (Cr + Cg))
};

ResonatorLumped resonator_lumped(const ReadoutParams& readout);

struct CouplingTable {
    Eigen::MatrixXd g;  // rad/s, g_ij
    double u_at_xg = 0.0;
    double C_u_tot = 0.0;  // F
};

CouplingTable coupling_strengths(const SingleModeSpectrum& spectrum, const ModeSolution& mode,
                                 const ReadoutParams& readout, const CircuitParams& params,
                                 bool exact_impedance = false);

struct DispersiveResult {
    double chi_exact = 0.0;   // rad/s
    double chi_approx = 0.0;  // rad/s
    std::vector<double> lamb_shifts_Lambda_j;
    std::vector<double> chi_j_per_level;
};

// n_levels <= 0 uses every level in the spectrum.
DispersiveResult dispersive_shift_exact(const SingleModeSpectrum& spectrum, const CouplingTable& coupling,
                                        const ReadoutParams& readout, int n_levels = 0);

// Throws ResonantDivergence when a detuning is not larger than kappa (rad/s).
double dispersive_shift_approx(double f01, double f12, double g01, double g12, double fr,
                               double kappa = 0.0);

struct CrossingOptions {
    int n_qubit_levels = 6;
    int n_photons = 6;  // photon states 0..n_photons-1
    PointOptions point;
};

struct CrossingRow {
    double phi_diff = 0.0;
    double lower = 0.0;  // Hz
    double upper = 0.0;  // Hz
};

// Dressed frequency of the two eigenstates with most weight on |1,0> and |0,1>.
CrossingRow dressed_pair(const SingleModeSpectrum& spectrum, const CouplingTable& coupling,
                         double omega_r, int n_qubit_levels, int n_photons);

std::vector<CrossingRow> avoided_crossing_trace(const CircuitParams& params, const ReadoutParams& readout,
                                                const std::vector<FluxBias>& biases,
                                                const CrossingOptions& options = {}, int threads = 1);

}  // namespace uniflux
