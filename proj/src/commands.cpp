#include "uniflux/commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "uniflux/decoherence.hpp"
#include "uniflux/errors.hpp"
#include "uniflux/parallel.hpp"
#include "uniflux/readout.hpp"
#include "uniflux/spectrum2.hpp"

namespace uniflux {

namespace {

constexpr double kGHz = 1e9;
constexpr double kMHz = 1e6;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
double energy_GHz(double joules) { return joules / PhysConsts::planck_h / kGHz; }

ResultTable stamped(const CommandContext& ctx, const std::string& command) {
    ResultTable t;
    t.stamp(command, config_hash(ctx.config), ctx.timestamp);
    return t;
}

ReadoutParams require_readout(const CommandContext& ctx) {
    const auto r = ctx.config.to_readout();
    if (!r) fail(ErrorKind::ConfigError, "readout: section is required for this command");
    return *r;
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& path, const std::string& header,
                                                  std::size_t ncols, std::vector<std::string>* text_col) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, fmt::format("cannot open dataset '{}'", path));
    std::string line;
    bool seen_header = false;
    int lineno = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!seen_header) {
            if (line != header)
                fail(ErrorKind::ConfigError, fmt::format("{}:{}: expected header '{}'", path, lineno, header));
            seen_header = true;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() == ncols - 1 && line.back() == ',') cells.emplace_back();
        if (cells.size() != ncols)
            fail(ErrorKind::ConfigError, fmt::format("{}:{}: expected {} columns", path, lineno, ncols));
        std::vector<double> row;
        for (std::size_t c = 0; c < ncols; ++c) {
            if (text_col && c == 1) {
                text_col->push_back(cells[c]);
                row.push_back(0.0);
                continue;
            }
            double v = 0.0;
            const std::string& s = cells[c];
            if (s.empty() && text_col && c == 3) {
                row.push_back(0.0);  // optional sigma
                continue;
            }
            const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
            if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
                fail(ErrorKind::ConfigError, fmt::format("{}:{}: '{}' is not a number", path, lineno, s));
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (!seen_header) fail(ErrorKind::ConfigError, fmt::format("{}: missing header '{}'", path, header));
    return rows;
}

}  // namespace

std::vector<FluxBias> FluxRange::biases() const {
    if (steps < 1) fail(ErrorKind::InvalidArgument, "steps must be >= 1");
    if (!std::isfinite(from) || !std::isfinite(to)) fail(ErrorKind::InvalidArgument, "flux range must be finite");
    std::vector<FluxBias> out;
    for (int i = 0; i < steps; ++i)
        out.push_back({steps == 1 ? from : from + (to - from) * i / (steps - 1)});
    return out;
}

ResultTable cmd_dc_phase(const CommandContext& ctx, const FluxRange& range) {
    const CircuitParams p = ctx.config.to_circuit();
    const auto biases = range.biases();
    std::vector<DcOperatingPoint> dc(biases.size());
    parallel_for(biases.size(), ctx.threads, [&](std::size_t i) { dc[i] = solve_dc_phase(p, biases[i]); });
    ResultTable t = stamped(ctx, "dc-phase");
    t.columns = {{"phi_diff", "Phi0"}, {"phi0", "rad"}, {"inductance_ratio", "1"}, {"branch_count", "1"}};
    for (std::size_t i = 0; i < biases.size(); ++i)
        t.add_row({biases[i].phi_diff, dc[i].phase_phi0, dc[i].inductance_ratio, double(dc[i].branch_count)});
    return t;
}

ResultTable cmd_modes(const CommandContext& ctx, double flux, int count) {
    if (count < 1) fail(ErrorKind::InvalidArgument, "mode count must be >= 1");
    const CircuitParams p = ctx.config.to_circuit();
    const DcOperatingPoint dc = solve_dc_phase(p, {flux});
    const auto modes = solve_modes(p, dc, count);
    ResultTable t = stamped(ctx, "modes");
    t.set_meta("phi_diff_phi0", format_number(flux));
    t.columns = {{"index_m", "1"},  {"k_m", "1/m"},     {"f_m", "GHz"},    {"delta_u", "1"},
                 {"anharmonic", "1"}, {"E_C_m", "GHz"}, {"E_L_m", "GHz"}, {"L_m", "nH"},
                 {"tilde_L_m", "nH"}};
    for (const auto& m : modes)
        t.add_row({double(m.index_m), m.wavenumber_km, m.angular_freq_wm / kTwoPi / kGHz, m.delta_u,
                   m.is_anharmonic ? 1.0 : 0.0, energy_GHz(m.E_C_m), energy_GHz(m.E_L_m),
                   m.eff_inductance_Lm * 1e9, m.tilde_Lm * 1e9});
    return t;
}

ResultTable cmd_spectrum(const CommandContext& ctx, const FluxRange& range, int model) {
    const CircuitParams p = ctx.config.to_circuit();
    const auto biases = range.biases();
    ResultTable t = stamped(ctx, "spectrum");
    t.set_meta("model", std::to_string(model));
    if (model == 1) {
        const auto rows = flux_sweep(p, biases, ctx.config.point_options(), ctx.threads);
        t.columns = {{"phi_diff", "Phi0"}, {"f01", "GHz"}, {"f02_half", "GHz"}, {"alpha", "MHz"}, {"mode_index", "1"}};
        for (const auto& r : rows)
            t.add_row({r.phi_diff, r.f01 / kGHz, r.f02_half / kGHz, r.anharmonicity / kMHz, double(r.mode_index)});
    } else if (model == 2) {
        const AuxModeModel aux = build_aux_model(p, ctx.config.aux_modes());
        const Model2Options opt = ctx.config.model2_options();
        std::vector<Model2Spectrum> out(biases.size());
        parallel_for(biases.size(), ctx.threads, [&](std::size_t i) {
            try {
                out[i] = diagonalize_model2(aux, p.josephson_energy_EJ, biases[i], 4, opt);
            } catch (const Error& e) {
                throw Error(e.kind(), fmt::format("at phi_diff = {}: {}", biases[i].phi_diff, e.detail()));
            }
        });
        t.columns = {{"phi_diff", "Phi0"}, {"f01", "GHz"}, {"f02_half", "GHz"}, {"alpha", "MHz"}};
        for (std::size_t i = 0; i < biases.size(); ++i)
            t.add_row({biases[i].phi_diff, out[i].f01 / kGHz, 0.5 * (out[i].f01 + out[i].f12) / kGHz,
                       out[i].anharmonicity / kMHz});
    } else {
        fail(ErrorKind::InvalidArgument, "model must be 1 or 2");
    }
    return t;
}

ResultTable cmd_dispersive(const CommandContext& ctx, double flux) {
    const CircuitParams p = ctx.config.to_circuit();
    const ReadoutParams ro = require_readout(ctx);
    const QubitPoint q = solve_qubit_point(p, {flux}, ctx.config.point_options());
    const CouplingTable c = coupling_strengths(q.spectrum, q.mode(), ro, p);
    const DispersiveResult d = dispersive_shift_exact(q.spectrum, c, ro);
    ResultTable t = stamped(ctx, "dispersive");
    t.columns = {{"phi_diff", "Phi0"}, {"f01", "GHz"},        {"f12", "GHz"},        {"g01", "MHz"},
                 {"g12", "MHz"},       {"chi_exact", "MHz"},  {"chi_approx", "MHz"}, {"abs_chi_exact", "MHz"}};
    const double m = kTwoPi * kMHz;
    t.add_row({flux, q.spectrum.f01 / kGHz, q.spectrum.f12 / kGHz, c.g(0, 1) / m, c.g(1, 2) / m, d.chi_exact / m,
               d.chi_approx / m, std::abs(d.chi_exact) / m});
    return t;
}

ResultTable cmd_t1_budget(const CommandContext& ctx, const FluxRange& range, const std::optional<T1Reference>& scale) {
    const CircuitParams p = ctx.config.to_circuit();
    const auto ro = ctx.config.to_readout();
    const NoiseEnvironment env0 = ctx.config.to_environment();
    const PointOptions popt = ctx.config.point_options();
    NoiseEnvironment env = env0;
    if (scale) {
        const QubitPoint ref = solve_qubit_point(p, {scale->flux}, popt);
        env = scale_environment(env0, p, {ref.spectrum, ref.mode(), scale->t1_us * 1e-6});
    }
    const auto biases = range.biases();
    std::vector<std::pair<double, DecoherenceBudget>> out(biases.size());
    parallel_for(biases.size(), ctx.threads, [&](std::size_t i) {
        try {
            const QubitPoint q = solve_qubit_point(p, biases[i], popt);
            out[i] = {q.spectrum.f01, t1_budget(q.spectrum, q.mode(), p, env, ro ? &*ro : nullptr)};
        } catch (const Error& e) {
            throw Error(e.kind(), fmt::format("at phi_diff = {}: {}", biases[i].phi_diff, e.detail()));
        }
    });
    ResultTable t = stamped(ctx, "t1-budget");
    if (scale) {
        t.set_meta("scale_reference_phi0", format_number(scale->flux));
        t.set_meta("scale_reference_t1_us", format_number(scale->t1_us));
    }
    t.columns = {{"phi_diff", "Phi0"}, {"f01", "GHz"}};
    for (Channel c : kAllChannels) t.columns.push_back({std::string("T1_") + to_string(c), "us"});
    t.columns.push_back({"T1_total", "us"});
    for (std::size_t i = 0; i < biases.size(); ++i) {
        std::vector<Cell> row{biases[i].phi_diff, out[i].first / kGHz};
        for (Channel c : kAllChannels) row.emplace_back(out[i].second.t1(c) * 1e6);
        row.emplace_back(out[i].second.t1_total * 1e6);
        t.add_row(std::move(row));
    }
    return t;
}

ResultTable cmd_coherence(double t1_us, double t2e_us, const std::vector<double>& gate_ns, bool timestamp) {
    if (gate_ns.empty()) fail(ErrorKind::InvalidArgument, "at least one gate time is required");
    ResultTable t;
    t.stamp("coherence", "", timestamp);
    t.set_meta("t1_us", format_number(t1_us));
    t.set_meta("t2e_us", format_number(t2e_us));
    t.columns = {{"gate_time", "ns"}, {"fidelity", "1"}};
    for (double g : gate_ns) t.add_row({g, coherence_limit_fidelity(g * 1e-9, t1_us * 1e-6, t2e_us * 1e-6)});
    return t;
}

namespace {

ResultTable fit_table(const FitResult& f) {
    ResultTable t;
    t.columns = {{"parameter", "-"}, {"value", "-"}, {"unit", "-"}, {"lower", "-"}, {"upper", "-"}};
    for (const auto& p : f.params_out) {
        double scale = 1.0;
        std::string unit = p.unit;
        if (p.name == "Ll") scale = 1e6, unit = "uH/m";
        else if (p.name == "Cl") scale = 1e12, unit = "pF/m";
        else if (p.name == "EJ") scale = 1.0 / (PhysConsts::planck_h * kGHz), unit = "GHz";
        else if (p.name == "Cg") scale = 1e15, unit = "fF";
        t.add_row({p.name, format_number(p.value * scale), unit, format_number(p.lower * scale),
                   format_number(p.upper * scale)});
    }
    t.set_meta("residual_rms_MHz", format_number(f.residual_rms / kMHz));
    t.set_meta("objective", format_number(f.objective));
    t.set_meta("iterations", std::to_string(f.n_iterations));
    t.set_meta("evaluations", std::to_string(f.n_evaluations));
    t.set_meta("converged", f.converged ? "true" : "false");
    return t;
}

}  // namespace

SpectrumFitOutput cmd_fit_spectrum(const CommandContext& ctx, const std::string& path,
                                   const std::vector<FreeParam>& free) {
    const SpectroscopyDataset data = read_spectroscopy_csv(path);
    SpectrumFitOptions opt;
    opt.threads = ctx.threads;
    const FitResult f = fit_spectrum_model1(data, ctx.config.to_circuit(), free, opt);
    SpectrumFitOutput out;
    out.updated = ctx.config;
    store_circuit(out.updated, apply_fit(ctx.config.to_circuit(), f));
    ResultTable t = fit_table(f);
    std::vector<std::pair<std::string, std::string>> meta = t.metadata;
    t.metadata.clear();
    t.stamp("fit-spectrum", config_hash(ctx.config), ctx.timestamp);
    for (const auto& [k, v] : meta) t.set_meta(k, v);
    out.table = std::move(t);
    return out;
}

ResultTable cmd_fit_crossing(const CommandContext& ctx, const std::string& path) {
    const auto data = read_crossing_csv(path);
    const ReadoutParams ro = require_readout(ctx);
    if (!(ro.coupling_cap_Cg > 0.0))
        fail(ErrorKind::ConfigError, "readout.Cg_fF: a positive initial value is required for the fit");
    CrossingFitOptions opt;
    opt.threads = ctx.threads;
    opt.crossing.point = ctx.config.point_options();
    const FitResult f = fit_coupling_from_crossing(data, ro.coupling_cap_Cg, ctx.config.to_circuit(), ro, opt);
    ResultTable t = fit_table(f);
    auto meta = t.metadata;
    t.metadata.clear();
    t.stamp("fit-crossing", config_hash(ctx.config), ctx.timestamp);
    for (const auto& [k, v] : meta) t.set_meta(k, v);
    return t;
}

ResultTable cmd_fit_fluxnoise(const std::string& path, bool timestamp) {
    auto pairs = read_fluxnoise_csv(path);
    for (auto& pr : pairs) pr.second *= 1e6;  // 1/us -> 1/s
    const FluxNoiseFit f = fit_flux_noise_density(pairs);
    ResultTable t;
    t.stamp("fit-fluxnoise", "", timestamp);
    t.set_meta("residual_rms_per_us", format_number(f.residual_rms * 1e-6));
    t.set_meta("clamped", f.clamped ? "true" : "false");
    t.columns = {{"APhi", "uPhi0/sqrt(Hz)"}, {"sigma_APhi", "uPhi0/sqrt(Hz)"}, {"gamma_x", "1/us"},
                 {"sigma_gamma_x", "1/us"}};
    t.add_row({f.APhi * 1e6, f.sigma_APhi * 1e6, f.gamma_x * 1e-6, f.sigma_gamma_x * 1e-6});
    return t;
}

ResultTable cmd_cpw(double a_um, double b_um, double eta_um, double epsr, bool timestamp) {
    const LineConstants lc = cpw_line_constants(a_um * 1e-6, b_um * 1e-6, eta_um * 1e-6, epsr);
    ResultTable t;
    t.stamp("cpw", "", timestamp);
    t.columns = {{"a", "um"}, {"b", "um"}, {"eta", "um"}, {"epsr", "1"}, {"Cl", "pF/m"}, {"Ll", "uH/m"}, {"Z", "ohm"}};
    t.add_row({a_um, b_um, eta_um, epsr, lc.Cl * 1e12, lc.Ll * 1e6, lc.Z});
    return t;
}

SpectroscopyDataset read_spectroscopy_csv(const std::string& path) {
    std::vector<std::string> labels;
    const auto rows = read_numeric_csv(path, "flux_phi0,transition,freq_ghz,sigma_ghz", 4, &labels);
    SpectroscopyDataset out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Transition tr;
        try {
            tr = parse_transition(labels[i]);
        } catch (const Error& e) {
            fail(ErrorKind::ConfigError, fmt::format("{}: {}", path, e.detail()));
        }
        out.push_back({rows[i][0], tr, rows[i][2] * kGHz, rows[i][3] * kGHz});
    }
    return out;
}

std::vector<CrossingPoint> read_crossing_csv(const std::string& path) {
    std::vector<CrossingPoint> out;
    for (const auto& r : read_numeric_csv(path, "flux_phi0,freq_ghz", 2, nullptr)) out.push_back({r[0], r[1] * kGHz});
    return out;
}

std::vector<std::pair<double, double>> read_fluxnoise_csv(const std::string& path) {
    std::vector<std::pair<double, double>> out;
    for (const auto& r : read_numeric_csv(path, "slope_radps_per_phi0,gamma_echo_per_us", 2, nullptr))
        out.emplace_back(r[0], r[1]);
    return out;
}

}  // namespace uniflux
