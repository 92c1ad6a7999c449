#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "uniflux/config.hpp"
#include "uniflux/fitting.hpp"
#include "uniflux/spectrum1.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path scratch() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "uniflux_cli_test";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path put(const std::string& name, const std::string& body) {
    const fs::path p = scratch() / name;
    std::ofstream(p) << body;
    return p;
}

Run cli(const std::string& args) {
    const fs::path out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
    const std::string cmd = std::string(UNIFLUX_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

const char* kDevice = "[circuit]\nEJ_GHz = 19\n\n[solver]\ngrid_points = 4095\n";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 1") {
    CHECK(cli("--help").code == 0);
    CHECK(cli("").code == 1);
    CHECK(cli("spectrum --bogus").code == 1);
    CHECK(cli("spectrum").code == 1);
    const auto cfg = put("device.ini", kDevice);
    CHECK(cli("spectrum -c " + cfg.string() + " --model 3").code == 1);
    CHECK(cli("t1-budget -c " + cfg.string() + " --scale-flux 0.5").code == 1);
}

TEST_CASE("input errors exit with 2 and name the problem") {
    Run r = cli("spectrum -c /nonexistent/device.ini");
    CHECK(r.code == 2);
    CHECK(r.err.find("cannot open config") != std::string::npos);

    const auto bad = put("bad.ini", "[circuit]\nCJ_fF = -2\n");
    r = cli("spectrum -c " + bad.string());
    CHECK(r.code == 2);
    CHECK(r.err.find("circuit.CJ_fF") != std::string::npos);

    r = cli("fit-fluxnoise -d /nonexistent/data.csv");
    CHECK(r.code == 2);
    const auto hdr = put("hdr.csv", "slope,gamma\n1,2\n");
    CHECK(cli("fit-fluxnoise -d " + hdr.string()).code == 2);

    const auto cfg = put("device.ini", kDevice);
    r = cli("dispersive -c " + cfg.string() + " --flux 0.5");
    CHECK(r.code == 2);
    CHECK(r.err.find("readout") != std::string::npos);
}

TEST_CASE("numerical failures exit with 3") {
    const auto cfg = put("wide.ini",
                         "[circuit]\nEJ_GHz = 19\n\n[readout]\nkappa_MHz = 1e5\nCg_fF = 10\nxg_mm = 0.596\n\n"
                         "[solver]\ngrid_points = 4095\n");
    const Run r = cli("dispersive -c " + cfg.string() + " --flux 0.5");
    CHECK(r.code == 3);
    CHECK(r.err.find("ResonantDivergence") != std::string::npos);
}

TEST_CASE("sweep output is byte-identical across thread counts") {
    const auto cfg = put("device.ini", kDevice);
    const std::string base = "spectrum -c " + cfg.string() + " --from 0.3 --to 0.5 --steps 5 --no-timestamp";
    const Run a = cli(base + " --threads 1");
    const Run b = cli(base + " --threads 2");
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("phi_diff[Phi0],f01[GHz],f02_half[GHz],alpha[MHz],mode_index[1]") != std::string::npos);
    CHECK(a.out.find("timestamp") == std::string::npos);

    const fs::path csv = scratch() / "sweep.csv", json = scratch() / "sweep.json";
    REQUIRE(cli(base + " -o " + csv.string() + " --json " + json.string()).code == 0);
    CHECK(slurp(csv) == a.out);
    const auto j = nlohmann::json::parse(slurp(json));
    CHECK(j["rows"].size() == 5);
    CHECK(j["metadata"]["command"] == "spectrum");
}

TEST_CASE("stand-alone commands") {
    Run r = cli("coherence --t1 8.6 --t2e 9.2 --gate-ns 20 --no-timestamp");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("20,0.998889002844") != std::string::npos);

    r = cli("cpw --a 10 --b 30 --eta 525 --epsr 11.45 --no-timestamp");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("59.0054421") != std::string::npos);

    const auto data = put("fn.csv", "slope_radps_per_phi0,gamma_echo_per_us\n1e9,0.05\n2e9,0.08\n4e9,0.14\n");
    r = cli("fit-fluxnoise -d " + data.string() + " --no-timestamp");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("clamped: false") != std::string::npos);
}

TEST_CASE("fit-spectrum writes an updated config") {
    using namespace uniflux;
    const DeviceConfig truth_cfg = parse_config(kDevice);
    const SpectrumFitOptions fo;
    std::string csv = "flux_phi0,transition,freq_ghz,sigma_ghz\n";
    for (double b : {0.35, 0.42, 0.5, 0.58, 0.65}) {
        const QubitPoint q = solve_qubit_point(truth_cfg.to_circuit(), {b}, fo.point);
        csv += format_shortest(b) + ",f01," + format_shortest(q.spectrum.f01 / 1e9) + ",\n";
    }
    const auto data = put("spec.csv", csv);
    const auto init = put("init.ini", "[circuit]\nEJ_GHz = 20.5\n\n[solver]\ngrid_points = 4095\n");
    const fs::path out_cfg = scratch() / "fitted.ini";
    const Run r = cli("fit-spectrum -c " + init.string() + " -d " + data.string() + " --free EJ --config-out " +
                      out_cfg.string() + " --no-timestamp");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("EJ,") != std::string::npos);
    const DeviceConfig fitted = load_config(out_cfg.string());
    CHECK(fitted.circuit.EJ_GHz == doctest::Approx(19.0).epsilon(1e-4));
    CHECK(fitted.solver.has_value());
}

}  // TEST_SUITE
