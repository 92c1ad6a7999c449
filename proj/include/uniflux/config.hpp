#pragma once

#include <optional>
#include <string>

#include "uniflux/circuit.hpp"
#include "uniflux/decoherence.hpp"
#include "uniflux/readout.hpp"
#include "uniflux/spectrum1.hpp"
#include "uniflux/spectrum2.hpp"

namespace uniflux {

// Values are kept in the file's units so that emit -> parse -> emit is byte-identical;
// conversion to SI happens in the to_* accessors.
struct CircuitSection {
    double total_length_mm = 8.0;
    double junction_pos_mm = 0.0;
    double cap_per_len_pF_per_m = 83.0;
    double ind_per_len_uH_per_m = 0.83;
    double EJ_GHz = 19.0;
    double CJ_fF = 1.4;
    double temperature_K = 0.010;
};

struct ReadoutSection {
    double fr_GHz = 6.198;
    double kappa_MHz = 0.0;  // kappa / 2 pi, full linewidth
    double Cg_fF = 0.0;
    double xg_mm = 0.0;
    double Ztr_ohm = 50.0;
    double Cr_fF = 0.0;  // 0 with Lr_nH = 0: derived from fr and Ztr
    double Lr_nH = 0.0;
};

struct EnvironmentSection {
    double mutual_pH = 0.0;
    double resistance_ohm = 50.0;
    double APhi_uPhi0 = 0.0;  // flux-noise amplitude, micro Phi0 per sqrt(Hz)
    double QC = 0.0;          // 0 disables the channel
    double QL = 0.0;
    double Qrad = 0.0;
};

struct SolverSection {
    double phi_max = 8.0;
    int grid_points = 16383;
    int n_modes = 3;
    int n_states = 6;
    int m2_aux_modes = 2;
    double m2_theta_max = 8.0;
    int m2_grid_points = 4096;
    int m2_psi_states = 24;
    int m2_ho_levels = 24;
};

struct DeviceConfig {
    CircuitSection circuit;
    std::optional<ReadoutSection> readout;
    std::optional<EnvironmentSection> environment;
    std::optional<SolverSection> solver;

    CircuitParams to_circuit() const;
    std::optional<ReadoutParams> to_readout() const;
    NoiseEnvironment to_environment() const;
    PointOptions point_options() const;
    Model2Options model2_options() const;
    int aux_modes() const;

    void validate() const;  // ConfigError naming the field path
};

DeviceConfig parse_config(const std::string& text);
DeviceConfig load_config(const std::string& path);
std::string emit_config(const DeviceConfig& cfg);
// SHA-256 of the canonical emitted text, lowercase hex.
std::string config_hash(const DeviceConfig& cfg);

// Shortest decimal text that parses back to the same double.
std::string format_shortest(double v);

// Reverse of the accessors: overwrite circuit fields from SI values.
void store_circuit(DeviceConfig& cfg, const CircuitParams& p);

}  // namespace uniflux
