// main.cpp - vnmeas CLI: scenario runner, invariant validation, preset listing

#include "vnmeas/scenario.hpp"
#include "vnmeas/validation.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

namespace {

// exit codes: 0 success, 1 validation failure, 2 config error
constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kConfigError = 2;

std::string with_extension(const std::string& name, const char* ext) {
    fs::path p(name);
    p.replace_extension(ext);
    return p.string();
}

int run_command(const std::string& config_path, const std::string& out_dir,
                const std::string& format, int grid_points, int threads) {
    vnmeas::ScenarioConfig config = vnmeas::load_scenario(config_path);
    config.grid_points = grid_points;

    const vnmeas::ResultTable table = vnmeas::run_scenario(config, threads);

    fs::create_directories(out_dir);
    const fs::path results_path =
        fs::path(out_dir) / (format == "json" ? with_extension(config.results_file, ".json")
                                              : config.results_file);
    {
        std::ofstream out(results_path);
        if (!out) throw vnmeas::ConfigError("cannot write " + results_path.string());
        if (format == "json") vnmeas::write_results_json(table, out);
        else vnmeas::write_results_csv(table, out);
    }
    const fs::path plot_path = fs::path(out_dir) / config.plot_file;
    {
        std::ofstream out(plot_path);
        if (!out) throw vnmeas::ConfigError("cannot write " + plot_path.string());
        vnmeas::write_plot_csv(table, out);
    }

    int degenerate = 0;
    for (const auto& row : table.rows)
        if (row.status != "ok") ++degenerate;
    std::cout << "wrote " << table.rows.size() << " rows to " << results_path.string()
              << " and plot data to " << plot_path.string();
    if (degenerate > 0) std::cout << " (" << degenerate << " rows flagged)";
    std::cout << '\n';
    return kOk;
}

int validate_command(const std::string& suite, std::uint64_t seed,
                     const std::string& out_dir, const std::string& format,
                     bool inject_failure) {
    const vnmeas::ValidationReport report =
        vnmeas::run_validation(suite, seed, inject_failure);

    if (out_dir.empty()) {
        if (format == "csv") vnmeas::write_report_csv(report, std::cout);
        else vnmeas::write_report_json(report, std::cout);
    } else {
        fs::create_directories(out_dir);
        const fs::path path = fs::path(out_dir) / (format == "csv"
                                                       ? "validation_report.csv"
                                                       : "validation_report.json");
        std::ofstream out(path);
        if (!out) throw vnmeas::ConfigError("cannot write " + path.string());
        if (format == "csv") vnmeas::write_report_csv(report, out);
        else vnmeas::write_report_json(report, out);
        std::cout << report.checks.size() << " checks, " << report.failures()
                  << " failures; report at " << path.string() << '\n';
    }
    return report.failures() == 0 ? kOk : kValidationFailure;
}

int presets_list_command(const std::string& presets_dir) {
    if (!fs::is_directory(presets_dir))
        throw vnmeas::ConfigError("presets directory '" + presets_dir + "' not found");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(presets_dir))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& file : files) {
        std::ifstream in(file);
        std::string name = file.stem().string(), description;
        try {
            nlohmann::json doc = nlohmann::json::parse(in);
            if (doc.contains("name") && doc.at("name").is_string())
                name = doc.at("name").get<std::string>();
            if (doc.contains("description") && doc.at("description").is_string())
                description = doc.at("description").get<std::string>();
        } catch (const nlohmann::json::parse_error&) {
            description = "(unparsable)";
        }
        std::cout << name << '\t' << file.string();
        if (!description.empty()) std::cout << '\t' << description;
        std::cout << '\n';
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"post-selected von Neumann measurement simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", run_format = "csv";
    std::string suite = "all", validate_out, validate_format = "json";
    std::string presets_dir = "presets";
    std::uint64_t run_seed = 20120, validate_seed = 20120;
    int grid_points = 1024, threads = 1;
    bool inject_failure = false;

    CLI::App* run = app.add_subcommand("run", "run a scenario config, write result tables");
    run->add_option("config", config_path, "path to a scenario JSON file")->required();
    run->add_option("--out", out_dir, "output directory")->capture_default_str();
    run->add_option("--format", run_format, "table format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    run->add_option("--seed", run_seed, "seed (recorded; runs are deterministic)")
        ->capture_default_str();
    run->add_option("--grid-points", grid_points, "detector grid points")
        ->check(CLI::Range(16, 1 << 20))
        ->capture_default_str();
    run->add_option("--threads", threads, "worker threads for sweep points")
        ->check(CLI::Range(1, 256))
        ->capture_default_str();

    CLI::App* validate =
        app.add_subcommand("validate", "run the randomized invariant checks");
    validate->add_option("--suite", suite,
                         "all|povm|weakvalue|qubit|gaussian|bohmian|retro")
        ->capture_default_str();
    validate->add_option("--seed", validate_seed, "seed for the randomized cases")
        ->capture_default_str();
    validate->add_option("--out", validate_out, "directory for the report file");
    validate->add_option("--format", validate_format, "report format: json|csv")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    validate->add_flag("--inject-failure", inject_failure,
                       "append a failing check (harness self-test)");

    CLI::App* presets = app.add_subcommand("presets", "preset scenario management");
    CLI::App* presets_list = presets->add_subcommand("list", "list shipped presets");
    presets_list->add_option("--presets-dir", presets_dir, "preset directory")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (run->parsed())
            return run_command(config_path, out_dir, run_format, grid_points, threads);
        if (validate->parsed())
            return validate_command(suite, validate_seed, validate_out, validate_format,
                                    inject_failure);
        if (presets->parsed() && presets_list->parsed())
            return presets_list_command(presets_dir);
        std::cerr << "missing subcommand\n";
        return kConfigError;
    } catch (const vnmeas::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
}
