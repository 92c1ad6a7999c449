#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uniflux/config.hpp"
#include "uniflux/fitting.hpp"
#include "uniflux/table.hpp"

namespace uniflux {

struct FluxRange {
    double from = 0.0;  // Phi0
    double to = 1.0;
    int steps = 101;

    std::vector<FluxBias> biases() const;
};

struct CommandContext {
    DeviceConfig config;
    int threads = 1;
    bool timestamp = true;
};

struct T1Reference {
    double flux = 0.5;   // Phi0
    double t1_us = 0.0;  // measured T1 at that bias
};

ResultTable cmd_dc_phase(const CommandContext& ctx, const FluxRange& range);
ResultTable cmd_modes(const CommandContext& ctx, double flux, int count);
ResultTable cmd_spectrum(const CommandContext& ctx, const FluxRange& range, int model);
ResultTable cmd_dispersive(const CommandContext& ctx, double flux);
ResultTable cmd_t1_budget(const CommandContext& ctx, const FluxRange& range,
                          const std::optional<T1Reference>& scale);
ResultTable cmd_coherence(double t1_us, double t2e_us, const std::vector<double>& gate_ns, bool timestamp);

struct SpectrumFitOutput {
    ResultTable table;
    DeviceConfig updated;
};

SpectrumFitOutput cmd_fit_spectrum(const CommandContext& ctx, const std::string& dataset_path,
                                   const std::vector<FreeParam>& free);
ResultTable cmd_fit_crossing(const CommandContext& ctx, const std::string& dataset_path);
ResultTable cmd_fit_fluxnoise(const std::string& dataset_path, bool timestamp);
ResultTable cmd_cpw(double a_um, double b_um, double eta_um, double epsr, bool timestamp);

// Dataset readers; '#' lines are comments and the header must match exactly.
SpectroscopyDataset read_spectroscopy_csv(const std::string& path);
std::vector<CrossingPoint> read_crossing_csv(const std::string& path);
std::vector<std::pair<double, double>> read_fluxnoise_csv(const std::string& path);

}  // namespace uniflux
