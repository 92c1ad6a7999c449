#pragma once

#include <numbers>

namespace uniflux {

// Exact SI values (2019 redefinition) plus derived constants.
struct PhysConsts {
    static constexpr double planck_h = 6.62607015e-34;
    static constexpr double elem_charge = 1.602176634e-19;
    static constexpr double boltzmann = 1.380649e-23;
    static constexpr double speed_of_light = 299792458.0;
    static constexpr double vacuum_permittivity = 8.8541878128e-12;
    static constexpr double hbar = planck_h / (2.0 * std::numbers::pi);
    static constexpr double flux_quantum = planck_h / (2.0 * elem_charge);
    static constexpr double reduced_flux_quantum = flux_quantum / (2.0 * std::numbers::pi);
    static constexpr double von_klitzing = planck_h / (elem_charge * elem_charge);
};

struct CircuitParams {
    double total_length_2l = 8e-3;     // m
    double junction_pos_xj = 0.0;      // m, from resonator center
    double cap_per_len_Cl = 83e-12;    // F/m
    double ind_per_len_Ll = 0.83e-6;   // H/m
    double josephson_energy_EJ = 19.0e9 * PhysConsts::planck_h;  // J
    double junction_cap_CJ = 1.4e-15;  // F
    double temperature = 0.010;        // K

    // Throws InvalidArgument naming the offending field.
    void validate() const;

    double half_length() const { return 0.5 * total_length_2l; }
    double phase_velocity() const;
    double impedance() const;
    double josephson_inductance() const;
    // E_L = (Phi0/2pi)^2 / (2 l Ll)
    double inductive_energy() const;
    // C_Sigma = 2 Cl l + C_J
    double sigma_capacitance() const;
};

struct FluxBias {
    double phi_diff = 0.0;  // in units of Phi0
    double angle() const { return 2.0 * std::numbers::pi * phi_diff; }
};

struct DcOperatingPoint {
    double phase_phi0 = 0.0;
    double inductance_ratio = 0.0;
    int branch_count = 1;
    bool is_single_valued = true;
    // Set when more than one root of the flux quantization condition exists.
    bool multivalued_regime() const { return branch_count > 1; }
};

struct LineConstants {
    double Cl;  // F/m
    double Ll;  // H/m
    double Z;   // ohm
};

// Complete elliptic integral of the first kind K(m), parameter m = k^2, via AGM.
double elliptic_k(double m);

LineConstants cpw_line_constants(double center_width_a, double total_width_b,
                                 double substrate_thickness_eta, double rel_permittivity_epsr);

double check_impedance(double Cl, double Ll);

double inductance_ratio(const CircuitParams& params);

DcOperatingPoint solve_dc_phase(const CircuitParams& params, const FluxBias& bias);

}  // namespace uniflux
