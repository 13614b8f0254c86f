// End-to-end checks of the vnmeas binary: exit codes, file output, determinism.

#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CommandResult {
    int exit_code;
};

CommandResult run_cli(const std::string& args) {
    const std::string cmd = std::string(VNMEAS_BIN) + " " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return {WEXITSTATUS(raw)};
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const char* tag) {
    const fs::path dir = fs::temp_directory_path() / (std::string("vnmeas_") + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const std::string kPresets = VNMEAS_PRESETS_DIR;

} // namespace

TEST_CASE("run: preset executes, exit 0, byte-identical reruns") {
    const fs::path out1 = fresh_dir("run1");
    const fs::path out2 = fresh_dir("run2");
    const std::string preset = kPresets + "/aav.json";

    CHECK(run_cli("run " + preset + " --out " + out1.string() +
                  " --grid-points 512")
              .exit_code == 0);
    CHECK(run_cli("run " + preset + " --out " + out2.string() +
                  " --grid-points 512 --threads 4 --seed 99")
              .exit_code == 0);

    REQUIRE(fs::exists(out1 / "aav_results.csv"));
    REQUIRE(fs::exists(out1 / "aav_plot.csv"));
    CHECK(slurp(out1 / "aav_results.csv") == slurp(out2 / "aav_results.csv"));
    CHECK(slurp(out1 / "aav_plot.csv") == slurp(out2 / "aav_plot.csv"));
}

TEST_CASE("run: json format and config errors") {
    const fs::path out = fresh_dir("runjson");
    const std::string preset = kPresets + "/identity.json";
    CHECK(run_cli("run " + preset + " --out " + out.string() +
                  " --grid-points 512 --format json")
              .exit_code == 0);
    CHECK(fs::exists(out / "identity_results.json"));

    CHECK(run_cli("run /nonexistent/config.json").exit_code == 2);

    const fs::path bad = out / "bad.json";
    std::ofstream(bad) << "{\"schema_version\": 1}";
    CHECK(run_cli("run " + bad.string()).exit_code == 2);

    CHECK(run_cli("frobnicate").exit_code == 2);
}

TEST_CASE("validate: exit codes and report file") {
    const fs::path out = fresh_dir("validate");
    CHECK(run_cli("validate --suite bohmian --seed 3 --out " + out.string())
              .exit_code == 0);
    const std::string report = slurp(out / "validation_report.json");
    CHECK(report.find("\"failures\": 0") != std::string::npos);
    CHECK(report.find("\"seed\": 3") != std::string::npos);

    CHECK(run_cli("validate --suite bohmian --seed 3 --inject-failure").exit_code == 1);
    CHECK(run_cli("validate --suite nonsense").exit_code == 2);
}

TEST_CASE("presets list") {
    CHECK(run_cli("presets list --presets-dir " + kPresets).exit_code == 0);
    CHECK(run_cli("presets list --presets-dir /nonexistent").exit_code == 2);
}
