// uniflux command-line interface. Exit codes: 0 ok, 1 usage, 2 config/input, 3 numerical.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uniflux/commands.hpp"
#include "uniflux/errors.hpp"

namespace {

using namespace uniflux;

int default_threads() {
    if (const char* env = std::getenv("UNIFLUX_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (...) {
        }
        std::cerr << "warning: ignoring invalid UNIFLUX_THREADS='" << env << "'\n";
    }
    return 1;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ConfigError:
        case ErrorKind::IoError:
        case ErrorKind::InvalidArgument:
        case ErrorKind::InsufficientPoints:
            return 2;
        default:
            return 3;
    }
}

struct Output {
    std::string out_path;
    std::string json_path;
    bool no_timestamp = false;

    void emit(const ResultTable& t) const {
        const std::string csv = to_csv(t);
        if (out_path.empty()) std::cout << csv;
        else write_text_file(out_path, csv);
        if (!json_path.empty()) write_text_file(json_path, to_json(t));
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uniflux: single-junction distributed-resonator qubit models"};
    app.require_subcommand(1);
    app.fallthrough();

    int threads = default_threads();
    Output output;
    std::string config_path;
    app.add_option("--threads", threads, "Worker threads for sweeps (default: UNIFLUX_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    app.add_option("-o,--out", output.out_path, "Write CSV here instead of stdout");
    app.add_option("--json", output.json_path, "Also write a JSON mirror of the table");
    app.add_flag("--no-timestamp", output.no_timestamp, "Omit the timestamp metadata line");

    FluxRange range;
    auto add_config = [&](CLI::App* sub) { sub->add_option("-c,--config", config_path, "Device config (INI)")->required(); };
    auto add_range = [&](CLI::App* sub) {
        sub->add_option("--from", range.from, "First flux bias [Phi0]");
        sub->add_option("--to", range.to, "Last flux bias [Phi0]");
        sub->add_option("--steps", range.steps, "Number of biases")->check(CLI::PositiveNumber);
    };

    auto* dc = app.add_subcommand("dc-phase", "Static junction phase over a flux range");
    add_config(dc);
    add_range(dc);

    double flux = 0.5;
    int count = 3;
    auto* modes = app.add_subcommand("modes", "Normal modes at one flux bias");
    add_config(modes);
    modes->add_option("--flux", flux, "Flux bias [Phi0]");
    modes->add_option("--count", count, "Number of modes")->check(CLI::PositiveNumber);

    int model = 1;
    auto* spectrum = app.add_subcommand("spectrum", "Qubit frequency and anharmonicity sweep");
    add_config(spectrum);
    add_range(spectrum);
    spectrum->add_option("--model", model, "1 (single mode) or 2 (auxiliary modes)")->check(CLI::IsMember({1, 2}));

    auto* disp = app.add_subcommand("dispersive", "Coupling strengths and dispersive shift");
    add_config(disp);
    disp->add_option("--flux", flux, "Flux bias [Phi0]");

    std::optional<double> scale_flux, scale_t1;
    auto* t1 = app.add_subcommand("t1-budget", "Relaxation budget over a flux range");
    add_config(t1);
    add_range(t1);
    t1->add_option("--scale-flux", scale_flux, "Reference bias for channel scaling [Phi0]");
    t1->add_option("--scale-t1", scale_t1, "Measured T1 at the reference bias [us]");

    double t1_us = 0.0, t2e_us = 0.0;
    std::vector<double> gates;
    auto* coh = app.add_subcommand("coherence", "Coherence-limited single-qubit gate fidelity");
    coh->add_option("--t1", t1_us, "T1 [us]")->required();
    coh->add_option("--t2e", t2e_us, "Echo T2 [us]")->required();
    coh->add_option("--gate-ns", gates, "Gate durations [ns]")->required();

    std::string dataset;
    std::vector<std::string> free = {"Ll", "Cl", "EJ"};
    std::string config_out;
    auto* fits = app.add_subcommand("fit-spectrum", "Fit Ll, Cl, EJ to spectroscopy data");
    add_config(fits);
    fits->add_option("-d,--data", dataset, "CSV: flux_phi0,transition,freq_ghz,sigma_ghz")->required();
    fits->add_option("--free", free, "Free parameters among Ll, Cl, EJ");
    fits->add_option("--config-out", config_out, "Write the config with fitted values here");

    auto* fitc = app.add_subcommand("fit-crossing", "Fit the coupling capacitance to an avoided crossing");
    add_config(fitc);
    fitc->add_option("-d,--data", dataset, "CSV: flux_phi0,freq_ghz")->required();

    auto* fitn = app.add_subcommand("fit-fluxnoise", "Fit the 1/f flux-noise amplitude to echo rates");
    fitn->add_option("-d,--data", dataset, "CSV: slope_radps_per_phi0,gamma_echo_per_us")->required();

    double a_um = 10.0, b_um = 30.0, eta_um = 525.0, epsr = 11.45;
    auto* cpw = app.add_subcommand("cpw", "Coplanar-waveguide line constants");
    cpw->add_option("--a", a_um, "Center conductor width [um]");
    cpw->add_option("--b", b_um, "Total width [um]");
    cpw->add_option("--eta", eta_um, "Substrate thickness [um]");
    cpw->add_option("--epsr", epsr, "Relative permittivity");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        CommandContext ctx;
        ctx.threads = threads;
        ctx.timestamp = !output.no_timestamp;
        if (!config_path.empty()) ctx.config = load_config(config_path);

        if (dc->parsed()) output.emit(cmd_dc_phase(ctx, range));
        else if (modes->parsed()) output.emit(cmd_modes(ctx, flux, count));
        else if (spectrum->parsed()) output.emit(cmd_spectrum(ctx, range, model));
        else if (disp->parsed()) output.emit(cmd_dispersive(ctx, flux));
        else if (t1->parsed()) {
            if (scale_flux.has_value() != scale_t1.has_value()) {
                std::cerr << "error: --scale-flux and --scale-t1 must be given together\n";
                return 1;
            }
            std::optional<T1Reference> ref;
            if (scale_t1) ref = T1Reference{*scale_flux, *scale_t1};
            output.emit(cmd_t1_budget(ctx, range, ref));
        } else if (coh->parsed()) output.emit(cmd_coherence(t1_us, t2e_us, gates, ctx.timestamp));
        else if (fits->parsed()) {
            std::vector<FreeParam> fp;
            for (const auto& s : free) fp.push_back(parse_free_param(s));
            const SpectrumFitOutput r = cmd_fit_spectrum(ctx, dataset, fp);
            output.emit(r.table);
            if (!config_out.empty()) write_text_file(config_out, emit_config(r.updated));
        } else if (fitc->parsed()) output.emit(cmd_fit_crossing(ctx, dataset));
        else if (fitn->parsed()) output.emit(cmd_fit_fluxnoise(dataset, ctx.timestamp));
        else if (cpw->parsed()) output.emit(cmd_cpw(a_um, b_um, eta_um, epsr, ctx.timestamp));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
