// scenario.hpp - JSON scenario configs, the sweep runner, and table output

#pragma once

#include "vnmeas/detector.hpp"
#include "vnmeas/operators.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vnmeas {

// Configuration problems carry the offending field path in the message.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Method { Oracle, QubitExact, GaussianExact, LinearResponse };
const char* method_name(Method m);

struct DetectorConfig {
    bool gaussian = true;
    double sigma = 1.0; // gaussian only
    double x0 = 0.0;
    double p0 = 0.0;
    double hbar = 1.0;
    // custom-grid only
    PositionGrid grid;
    Vector amplitudes;
};

struct ScenarioConfig {
    int schema_version = 1;
    std::string name;
    std::string description;

    int dimension = 2;
    Matrix observable;
    Matrix initial_state;  // validated density matrix
    Matrix post_selection; // POVM element
    DetectorConfig detector;
    std::vector<double> couplings; // expanded sweep, ascending
    std::vector<Method> methods;   // in output order

    std::string results_file = "results.csv";
    std::string plot_file = "plot.csv";
    int grid_points = 1024;
};

ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& json_text);

struct ResultRow {
    double g = 0.0;
    Method method = Method::Oracle;
    std::string status = "ok"; // or the failure kind; never fatal to the sweep
    double post_prob = 0.0;
    double mean_x = 0.0;
    double mean_p = 0.0;
    double re_weak_value = 0.0;
    double two_im_weak_value = 0.0;
};

struct ResultTable {
    std::vector<ResultRow> rows; // ordered by g, then by method
};

ResultTable run_scenario(const ScenarioConfig& config, int threads = 1);

// Deterministic writers: fixed %.17g formatting, units in every numeric header.
void write_results_csv(const ResultTable& table, std::ostream& out);
void write_results_json(const ResultTable& table, std::ostream& out);
// long-format plot data: one series per method/quantity pair
void write_plot_csv(const ResultTable& table, std::ostream& out);

} // namespace vnmeas
