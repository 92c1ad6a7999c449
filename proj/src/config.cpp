#include "uniflux/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "uniflux/errors.hpp"

namespace uniflux {

namespace {

namespace pt = boost::property_tree;

struct Field {
    const char* key;
    double* d = nullptr;
    int* i = nullptr;
};

std::vector<Field> fields(CircuitSection& s) {
    return {{"total_length_mm", &s.total_length_mm}, {"junction_pos_mm", &s.junction_pos_mm},
            {"cap_per_len_pF_per_m", &s.cap_per_len_pF_per_m}, {"ind_per_len_uH_per_m", &s.ind_per_len_uH_per_m},
            {"EJ_GHz", &s.EJ_GHz}, {"CJ_fF", &s.CJ_fF}, {"temperature_K", &s.temperature_K}};
}

std::vector<Field> fields(ReadoutSection& s) {
    return {{"fr_GHz", &s.fr_GHz}, {"kappa_MHz", &s.kappa_MHz}, {"Cg_fF", &s.Cg_fF}, {"xg_mm", &s.xg_mm},
            {"Ztr_ohm", &s.Ztr_ohm}, {"Cr_fF", &s.Cr_fF}, {"Lr_nH", &s.Lr_nH}};
}

std::vector<Field> fields(EnvironmentSection& s) {
    return {{"mutual_pH", &s.mutual_pH}, {"resistance_ohm", &s.resistance_ohm}, {"APhi_uPhi0", &s.APhi_uPhi0},
            {"QC", &s.QC}, {"QL", &s.QL}, {"Qrad", &s.Qrad}};
}

std::vector<Field> fields(SolverSection& s) {
    return {{"phi_max", &s.phi_max},
            {"grid_points", nullptr, &s.grid_points},
            {"n_modes", nullptr, &s.n_modes},
            {"n_states", nullptr, &s.n_states},
            {"m2_aux_modes", nullptr, &s.m2_aux_modes},
            {"m2_theta_max", &s.m2_theta_max},
            {"m2_grid_points", nullptr, &s.m2_grid_points},
            {"m2_psi_states", nullptr, &s.m2_psi_states},
            {"m2_ho_levels", nullptr, &s.m2_ho_levels}};
}

void read_section(const pt::ptree& tree, const std::string& name, std::vector<Field> fs) {
    std::set<std::string> known;
    for (const Field& f : fs) known.insert(f.key);
    for (const auto& [key, node] : tree) {
        if (!node.empty()) fail(ErrorKind::ConfigError, fmt::format("{}.{}: nested values are not allowed", name, key));
        if (!known.count(key)) fail(ErrorKind::ConfigError, fmt::format("{}.{}: unknown key", name, key));
    }
    for (const Field& f : fs) {
        const auto v = tree.get_optional<std::string>(f.key);
        if (!v) continue;
        const std::string& s = *v;
        const char* end = s.data() + s.size();
        std::from_chars_result r{};
        if (f.d) r = std::from_chars(s.data(), end, *f.d);
        else r = std::from_chars(s.data(), end, *f.i);
        if (r.ec != std::errc() || r.ptr != end || s.empty())
            fail(ErrorKind::ConfigError,
                 fmt::format("{}.{}: '{}' is not a valid {}", name, f.key, s, f.d ? "number" : "integer"));
        if (f.d && !std::isfinite(*f.d))
            fail(ErrorKind::ConfigError, fmt::format("{}.{}: value must be finite", name, f.key));
    }
}

void write_section(std::ostringstream& out, const std::string& name, const std::vector<Field>& fs) {
    out << '[' << name << "]\n";
    for (const Field& f : fs)
        out << f.key << " = " << (f.d ? format_shortest(*f.d) : std::to_string(*f.i)) << '\n';
}

void check(bool ok, const char* path, const char* what) {
    if (!ok) fail(ErrorKind::ConfigError, fmt::format("{}: {}", path, what));
}

double q_or_inf(double q) { return q == 0.0 ? std::numeric_limits<double>::infinity() : q; }

}  // namespace

std::string format_shortest(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

CircuitParams DeviceConfig::to_circuit() const {
    CircuitParams p;
    p.total_length_2l = circuit.total_length_mm * 1e-3;
    p.junction_pos_xj = circuit.junction_pos_mm * 1e-3;
    p.cap_per_len_Cl = circuit.cap_per_len_pF_per_m * 1e-12;
    p.ind_per_len_Ll = circuit.ind_per_len_uH_per_m * 1e-6;
    p.josephson_energy_EJ = circuit.EJ_GHz * 1e9 * PhysConsts::planck_h;
    p.junction_cap_CJ = circuit.CJ_fF * 1e-15;
    p.temperature = circuit.temperature_K;
    return p;
}

void store_circuit(DeviceConfig& cfg, const CircuitParams& p) {
    cfg.circuit.total_length_mm = p.total_length_2l * 1e3;
    cfg.circuit.junction_pos_mm = p.junction_pos_xj * 1e3;
    cfg.circuit.cap_per_len_pF_per_m = p.cap_per_len_Cl * 1e12;
    cfg.circuit.ind_per_len_uH_per_m = p.ind_per_len_Ll * 1e6;
    cfg.circuit.EJ_GHz = p.josephson_energy_EJ / PhysConsts::planck_h * 1e-9;
    cfg.circuit.CJ_fF = p.junction_cap_CJ * 1e15;
    cfg.circuit.temperature_K = p.temperature;
}

std::optional<ReadoutParams> DeviceConfig::to_readout() const {
    if (!readout) return std::nullopt;
    ReadoutParams r;
    r.resonator_freq_fr = readout->fr_GHz * 1e9;
    r.linewidth_kappa = 2.0 * std::numbers::pi * readout->kappa_MHz * 1e6;
    r.coupling_cap_Cg = readout->Cg_fF * 1e-15;
    r.coupling_pos_xg = readout->xg_mm * 1e-3;
    r.line_impedance_Ztr = readout->Ztr_ohm;
    r.resonator_cap_Cr = readout->Cr_fF * 1e-15;
    r.resonator_ind_Lr = readout->Lr_nH * 1e-9;
    return r;
}

NoiseEnvironment DeviceConfig::to_environment() const {
    NoiseEnvironment e;
    e.temperature = circuit.temperature_K;
    if (!environment) return e;
    e.flux_line_mutual_M = environment->mutual_pH * 1e-12;
    e.flux_line_resistance_R = environment->resistance_ohm;
    e.one_over_f_amp_APhi = environment->APhi_uPhi0 * 1e-6 * PhysConsts::flux_quantum;
    e.q_dielectric_QC = q_or_inf(environment->QC);
    e.q_inductive_QL = q_or_inf(environment->QL);
    e.q_radiative_Qrad = q_or_inf(environment->Qrad);
    return e;
}

PointOptions DeviceConfig::point_options() const {
    PointOptions o;
    if (!solver) return o;
    o.grid = GridSpec{solver->phi_max, solver->grid_points};
    o.n_modes = solver->n_modes;
    o.n_states = solver->n_states;
    return o;
}

Model2Options DeviceConfig::model2_options() const {
    Model2Options o;
    if (!solver) return o;
    o.theta_max = solver->m2_theta_max;
    o.grid_points = solver->m2_grid_points;
    o.psi_states = solver->m2_psi_states;
    o.ho_levels = solver->m2_ho_levels;
    return o;
}

int DeviceConfig::aux_modes() const { return solver ? solver->m2_aux_modes : 2; }

void DeviceConfig::validate() const {
    const CircuitSection& c = circuit;
    check(c.total_length_mm > 0, "circuit.total_length_mm", "must be > 0");
    check(std::abs(c.junction_pos_mm) < 0.5 * c.total_length_mm, "circuit.junction_pos_mm", "must satisfy |x_J| < l");
    check(c.cap_per_len_pF_per_m > 0, "circuit.cap_per_len_pF_per_m", "must be > 0");
    check(c.ind_per_len_uH_per_m > 0, "circuit.ind_per_len_uH_per_m", "must be > 0");
    check(c.EJ_GHz > 0, "circuit.EJ_GHz", "must be > 0");
    check(c.CJ_fF >= 0, "circuit.CJ_fF", "must be >= 0");
    check(c.temperature_K > 0, "circuit.temperature_K", "must be > 0");
    if (readout) {
        const ReadoutSection& r = *readout;
        check(r.fr_GHz > 0, "readout.fr_GHz", "must be > 0");
        check(r.kappa_MHz >= 0, "readout.kappa_MHz", "must be >= 0");
        check(r.Cg_fF >= 0, "readout.Cg_fF", "must be >= 0");
        check(std::abs(r.xg_mm) < 0.5 * c.total_length_mm, "readout.xg_mm", "must satisfy |x_g| < l");
        check(r.xg_mm != c.junction_pos_mm, "readout.xg_mm", "must differ from the junction position");
        check(r.Ztr_ohm > 0, "readout.Ztr_ohm", "must be > 0");
        check((r.Cr_fF == 0) == (r.Lr_nH == 0), "readout.Cr_fF", "Cr_fF and Lr_nH must be given together");
        check(r.Cr_fF >= 0 && r.Lr_nH >= 0, "readout.Cr_fF", "must be >= 0");
        if (r.Cr_fF > 0) {
            try {
                to_readout()->validate(to_circuit());
            } catch (const Error& e) {
                fail(ErrorKind::ConfigError, fmt::format("readout.Lr_nH: {}", e.detail()));
            }
        }
    }
    if (environment) {
        const EnvironmentSection& e = *environment;
        check(e.mutual_pH >= 0, "environment.mutual_pH", "must be >= 0");
        check(e.resistance_ohm > 0, "environment.resistance_ohm", "must be > 0");
        check(e.APhi_uPhi0 >= 0, "environment.APhi_uPhi0", "must be >= 0");
        check(e.QC >= 0, "environment.QC", "must be >= 0 (0 disables)");
        check(e.QL >= 0, "environment.QL", "must be >= 0 (0 disables)");
        check(e.Qrad >= 0, "environment.Qrad", "must be >= 0 (0 disables)");
    }
    if (solver) {
        const SolverSection& s = *solver;
        check(s.phi_max > 0, "solver.phi_max", "must be > 0");
        check(s.grid_points >= 256, "solver.grid_points", "must be >= 256");
        check(s.n_modes >= 1 && s.n_modes <= 20, "solver.n_modes", "must be in [1, 20]");
        check(s.n_states >= 4 && s.n_states <= 12, "solver.n_states", "must be in [4, 12]");
        check(s.m2_aux_modes >= 1 && s.m2_aux_modes <= 3, "solver.m2_aux_modes", "must be 1, 2 or 3");
        check(s.m2_theta_max > 0, "solver.m2_theta_max", "must be > 0");
        check(s.m2_grid_points >= 64, "solver.m2_grid_points", "must be >= 64");
        check(s.m2_psi_states >= 6 && s.m2_psi_states <= 80, "solver.m2_psi_states", "must be in [6, 80]");
        check(s.m2_ho_levels >= 4 && s.m2_ho_levels <= 60, "solver.m2_ho_levels", "must be in [4, 60]");
    }
}

DeviceConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        fail(ErrorKind::ConfigError, fmt::format("line {}: {}", e.line(), e.message()));
    }
    DeviceConfig cfg;
    bool has_circuit = false;
    // The INI reader drops sections without keys; an empty section still selects defaults.
    std::string line;
    for (std::istringstream scan(text); std::getline(scan, line);) {
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] != '[') continue;
        const std::string name = line.substr(first + 1, line.find(']') - first - 1);
        if (tree.find(name) != tree.not_found()) continue;
        if (name == "circuit") has_circuit = true;
        else if (name == "readout") cfg.readout.emplace();
        else if (name == "environment") cfg.environment.emplace();
        else if (name == "solver") cfg.solver.emplace();
        else fail(ErrorKind::ConfigError, fmt::format("{}: unknown section", name));
    }
    for (const auto& [name, node] : tree) {
        if (node.empty()) fail(ErrorKind::ConfigError, fmt::format("{}: keys must belong to a section", name));
        if (name == "circuit") {
            has_circuit = true;
            read_section(node, name, fields(cfg.circuit));
        } else if (name == "readout") {
            cfg.readout.emplace();
            read_section(node, name, fields(*cfg.readout));
        } else if (name == "environment") {
            cfg.environment.emplace();
            read_section(node, name, fields(*cfg.environment));
        } else if (name == "solver") {
            cfg.solver.emplace();
            read_section(node, name, fields(*cfg.solver));
        } else {
            fail(ErrorKind::ConfigError, fmt::format("{}: unknown section", name));
        }
    }
    if (!has_circuit) fail(ErrorKind::ConfigError, "circuit: section is required");
    cfg.validate();
    return cfg;
}

DeviceConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ConfigError, fmt::format("cannot open config '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(const DeviceConfig& cfg) {
    DeviceConfig c = cfg;
    std::ostringstream out;
    write_section(out, "circuit", fields(c.circuit));
    if (c.readout) {
        out << '\n';
        write_section(out, "readout", fields(*c.readout));
    }
    if (c.environment) {
        out << '\n';
        write_section(out, "environment", fields(*c.environment));
    }
    if (c.solver) {
        out << '\n';
        write_section(out, "solver", fields(*c.solver));
    }
    return out.str();
}

std::string config_hash(const DeviceConfig& cfg) {
    const std::string text = emit_config(cfg);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        fail(ErrorKind::IoError, "SHA-256 digest failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

}  // namespace uniflux
