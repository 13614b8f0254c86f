// scenario.cpp - config parsing, sweep execution, table writers

#include "vnmeas/scenario.hpp"

#include "vnmeas/errors.hpp"
#include "vnmeas/gaussian_exact.hpp"
#include "vnmeas/qubit_exact.hpp"
#include "vnmeas/vonneumann.hpp"
#include "vnmeas/weak_values.hpp"

#include "json.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace vnmeas {

using nlohmann::json;

const char* method_name(Method m) {
    switch (m) {
        case Method::Oracle: return "oracle";
        case Method::QubitExact: return "qubit-exact";
        case Method::GaussianExact: return "gaussian-exact";
        case Method::LinearResponse: return "linear-response";
    }
    return "?";
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

const json& require_field(const json& node, const std::string& path, const char* key) {
    if (!node.is_object() || !node.contains(key)) fail(path + "." + key, "missing field");
    return node.at(key);
}

double as_number(const json& node, const std::string& path) {
    if (!node.is_number()) fail(path, "expected a number");
    return node.get<double>();
}

int as_integer(const json& node, const std::string& path) {
    if (!node.is_number_integer()) fail(path, "expected an integer");
    return node.get<int>();
}

Complex as_complex(const json& node, const std::string& path) {
    if (node.is_number()) return {node.get<double>(), 0.0};
    if (node.is_array() && node.size() == 2 && node[0].is_number() && node[1].is_number())
        return {node[0].get<double>(), node[1].get<double>()};
    fail(path, "expected a number or an [re, im] pair");
}

Matrix as_matrix(const json& node, const std::string& path) {
    if (!node.is_array() || node.empty()) fail(path, "expected a non-empty array of rows");
    const Eigen::Index n = static_cast<Eigen::Index>(node.size());
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const json& row = node[i];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
            fail(path, "expected a square matrix");
        for (Eigen::Index j = 0; j < n; ++j)
            m(i, j) = as_complex(row[j], path + "[" + std::to_string(i) + "][" +
                                             std::to_string(j) + "]");
    }
    return m;
}

Vector as_ket(const json& node, const std::string& path) {
    if (!node.is_array() || node.empty()) fail(path, "expected a non-empty array");
    Vector v(static_cast<Eigen::Index>(node.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = as_complex(node[i], path + "[" + std::to_string(i) + "]");
    if (v.norm() <= 0.0) fail(path, "ket must be nonzero");
    return v / v.norm();
}

Matrix parse_observable(const json& node, const std::string& path, int dim) {
    Matrix obs;
    if (node.is_string()) {
        const std::string name = node.get<std::string>();
        if (name == "sigma1") obs = sigma1();
        else if (name == "sigma2") obs = sigma2();
        else if (name == "sigma3") obs = sigma3();
        else fail(path, "unknown observable preset '" + name + "'");
    } else {
        obs = as_matrix(node, path);
    }
    if (obs.rows() != dim) fail(path, "dimension does not match system.dimension");
    const double scale = std::max(1.0, obs.cwiseAbs().maxCoeff());
    if (!is_hermitian(obs, 1e-10 * scale)) fail(path, "observable must be Hermitian");
    return obs;
}

Matrix parse_initial_state(const json& node, const std::string& path, int dim) {
    try {
        if (node.is_object() && node.contains("bloch")) {
            if (dim != 2) fail(path + ".bloch", "Bloch vectors require dimension 2");
            const json& b = node.at("bloch");
            if (!b.is_array() || b.size() != 3) fail(path + ".bloch", "expected [r1, r2, r3]");
            return DensityOperator::from_bloch({as_number(b[0], path + ".bloch[0]"),
                                                as_number(b[1], path + ".bloch[1]"),
                                                as_number(b[2], path + ".bloch[2]")})
                .mat();
        }
        if (node.is_object() && node.contains("ket")) {
            const Vector v = as_ket(node.at("ket"), path + ".ket");
            if (v.size() != dim) fail(path + ".ket", "dimension mismatch");
            return DensityOperator::pure(v).mat();
        }
        if (node.is_object() && node.contains("density")) {
            Matrix rho = as_matrix(node.at("density"), path + ".density");
            if (rho.rows() != dim) fail(path + ".density", "dimension mismatch");
            return DensityOperator(std::move(rho)).mat();
        }
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    fail(path, "expected one of {bloch, ket, density}");
}

Matrix parse_post_selection(const json& node, const std::string& path, int dim) {
    if (node.is_string()) {
        if (node.get<std::string>() == "identity") return identity(dim);
        fail(path, "unknown post-selection preset");
    }
    Matrix p;
    if (node.is_object() && node.contains("bloch")) {
        if (dim != 2) fail(path + ".bloch", "Bloch vectors require dimension 2");
        const json& b = node.at("bloch");
        if (!b.is_array() || b.size() != 3) fail(path + ".bloch", "expected [n1, n2, n3]");
        const double n1 = as_number(b[0], path), n2 = as_number(b[1], path),
                     n3 = as_number(b[2], path);
        const double norm = std::sqrt(n1 * n1 + n2 * n2 + n3 * n3);
        if (std::abs(norm - 1.0) > 1e-6)
            fail(path + ".bloch", "projector axis must be a unit vector");
        p = 0.5 * (identity(2) + (n1 / norm) * sigma1() + (n2 / norm) * sigma2() +
                   (n3 / norm) * sigma3());
    } else if (node.is_object() && node.contains("ket")) {
        const Vector v = as_ket(node.at("ket"), path + ".ket");
        if (v.size() != dim) fail(path + ".ket", "dimension mismatch");
        p = v * v.adjoint();
    } else if (node.is_object() && node.contains("matrix")) {
        p = as_matrix(node.at("matrix"), path + ".matrix");
        if (p.rows() != dim) fail(path + ".matrix", "dimension mismatch");
    } else {
        fail(path, "expected 'identity' or one of {bloch, ket, matrix}");
    }
    if (!is_hermitian(p, 1e-10)) fail(path, "post-selection must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(p);
    if (es.eigenvalues().minCoeff() < -1e-10 || es.eigenvalues().maxCoeff() > 1.0 + 1e-10)
        fail(path, "post-selection must satisfy 0 <= P_f <= 1");
    return p;
}

DetectorConfig parse_detector(const json& node, const std::string& path) {
    DetectorConfig det;
    const std::string type =
        require_field(node, path, "type").is_string()
            ? node.at("type").get<std::string>()
            : (fail(path + ".type", "expected a string"), "");
    det.hbar = node.contains("hbar") ? as_number(node.at("hbar"), path + ".hbar") : 1.0;
    if (!(det.hbar > 0.0)) fail(path + ".hbar", "hbar must be > 0");

    if (type == "gaussian") {
        det.gaussian = true;
        det.sigma = as_number(require_field(node, path, "sigma"), path + ".sigma");
        if (!(det.sigma > 0.0)) fail(path + ".sigma", "sigma must be > 0");
        if (node.contains("x0")) det.x0 = as_number(node.at("x0"), path + ".x0");
        if (node.contains("p0")) det.p0 = as_number(node.at("p0"), path + ".p0");
        return det;
    }
    if (type == "custom-grid") {
        det.gaussian = false;
        det.grid.n_points = as_integer(require_field(node, path, "n_points"), path + ".n_points");
        det.grid.dx = as_number(require_field(node, path, "dx"), path + ".dx");
        det.grid.center =
            node.contains("center") ? as_number(node.at("center"), path + ".center") : 0.0;
        try {
            det.grid.validate();
        } catch (const std::invalid_argument& e) {
            fail(path, e.what());
        }
        const json& amps = require_field(node, path, "amplitudes");
        if (!amps.is_array() || static_cast<int>(amps.size()) != det.grid.n_points)
            fail(path + ".amplitudes", "expected n_points amplitudes");
        det.amplitudes.resize(det.grid.n_points);
        for (int j = 0; j < det.grid.n_points; ++j)
            det.amplitudes(j) =
                as_complex(amps[j], path + ".amplitudes[" + std::to_string(j) + "]");
        const double norm2 = det.amplitudes.squaredNorm() * det.grid.dx;
        if (std::abs(norm2 - 1.0) > 1e-6)
            fail(path + ".amplitudes", "state norm deviates from 1 by more than 1e-6");
        det.amplitudes /= std::sqrt(norm2);
        return det;
    }
    fail(path + ".type", "expected 'gaussian' or 'custom-grid'");
}

std::vector<double> parse_coupling(const json& node, const std::string& path) {
    if (node.is_object() && node.contains("g"))
        return {as_number(node.at("g"), path + ".g")};
    if (node.is_object() && node.contains("sweep")) {
        const json& sweep = node.at("sweep");
        const std::string p = path + ".sweep";
        const double from = as_number(require_field(sweep, p, "from"), p + ".from");
        const double to = as_number(require_field(sweep, p, "to"), p + ".to");
        const int points = as_integer(require_field(sweep, p, "points"), p + ".points");
        if (points < 2) fail(p + ".points", "sweep needs at least 2 points");
        std::string scale = "log"; // weak-to-strong spans decades
        if (sweep.contains("scale")) {
            if (!sweep.at("scale").is_string()) fail(p + ".scale", "expected a string");
            scale = sweep.at("scale").get<std::string>();
        }
        std::vector<double> gs(points);
        if (scale == "log") {
            if (!(from > 0.0) || !(to > 0.0))
                fail(p, "log-scale sweeps require positive endpoints");
            const double step = std::log(to / from) / (points - 1);
            for (int i = 0; i < points; ++i) gs[i] = from * std::exp(step * i);
        } else if (scale == "linear") {
            const double step = (to - from) / (points - 1);
            for (int i = 0; i < points; ++i) gs[i] = from + step * i;
        } else {
            fail(p + ".scale", "expected 'log' or 'linear'");
        }
        std::sort(gs.begin(), gs.end());
        return gs;
    }
    fail(path, "expected {g} or {sweep}");
}

Method method_from_name(const std::string& name, const std::string& path) {
    if (name == "oracle") return Method::Oracle;
    if (name == "qubit-exact") return Method::QubitExact;
    if (name == "gaussian-exact") return Method::GaussianExact;
    if (name == "linear-response") return Method::LinearResponse;
    fail(path, "unknown method '" + name + "'");
}

} // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be an object");

    ScenarioConfig cfg;
    const int version = as_integer(require_field(root, "config", "schema_version"),
                                   "config.schema_version");
    if (version != 1) fail("config.schema_version", "unsupported schema version");
    cfg.schema_version = version;
    if (root.contains("name") && root.at("name").is_string())
        cfg.name = root.at("name").get<std::string>();
    if (root.contains("description") && root.at("description").is_string())
        cfg.description = root.at("description").get<std::string>();

    const json& system = require_field(root, "config", "system");
    cfg.dimension =
        as_integer(require_field(system, "config.system", "dimension"),
                   "config.system.dimension");
    if (cfg.dimension < 2 || cfg.dimension > 256)
        fail("config.system.dimension", "dimension must be in [2, 256]");
    cfg.observable = parse_observable(require_field(system, "config.system", "observable"),
                                      "config.system.observable", cfg.dimension);

    cfg.initial_state =
        parse_initial_state(require_field(root, "config", "initial_state"),
                            "config.initial_state", cfg.dimension);
    cfg.post_selection =
        parse_post_selection(require_field(root, "config", "post_selection"),
                             "config.post_selection", cfg.dimension);
    cfg.detector = parse_detector(require_field(root, "config", "detector"),
                                  "config.detector");
    cfg.couplings = parse_coupling(require_field(root, "config", "coupling"),
                                   "config.coupling");

    if (root.contains("methods")) {
        const json& methods = root.at("methods");
        if (!methods.is_array() || methods.empty())
            fail("config.methods", "expected a non-empty array");
        for (std::size_t i = 0; i < methods.size(); ++i) {
            if (!methods[i].is_string()) fail("config.methods", "expected strings");
            cfg.methods.push_back(method_from_name(
                methods[i].get<std::string>(),
                "config.methods[" + std::to_string(i) + "]"));
        }
    } else {
        cfg.methods = {Method::Oracle, Method::LinearResponse};
        if (cfg.dimension == 2) cfg.methods.push_back(Method::QubitExact);
        if (cfg.detector.gaussian && cfg.detector.p0 == 0.0)
            cfg.methods.push_back(Method::GaussianExact);
    }
    for (Method m : cfg.methods) {
        if (m == Method::QubitExact && cfg.dimension != 2)
            fail("config.methods", "qubit-exact requires dimension 2");
        if (m == Method::GaussianExact &&
            (!cfg.detector.gaussian || cfg.detector.p0 != 0.0))
            fail("config.methods",
                 "gaussian-exact requires a gaussian detector with p0 = 0");
    }

    if (root.contains("outputs")) {
        const json& outputs = root.at("outputs");
        if (outputs.contains("results") && outputs.at("results").is_string())
            cfg.results_file = outputs.at("results").get<std::string>();
        if (outputs.contains("plot") && outputs.at("plot").is_string())
            cfg.plot_file = outputs.at("plot").get<std::string>();
    }
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PointContext {
    DetectorWavefunction psi;
    CouplingConfig cfg;
};

PointContext detector_for(const ScenarioConfig& config, double g) {
    PointContext ctx;
    ctx.cfg = {g, config.detector.hbar};
    if (config.detector.gaussian) {
        const double reach =
            config.observable.cwiseAbs().rowwise().sum().maxCoeff() * std::abs(g) +
            std::abs(config.detector.x0);
        const PositionGrid grid =
            default_grid(config.detector.sigma, reach, config.grid_points);
        ctx.psi = gaussian_state(grid, config.detector.sigma, config.detector.x0,
                                 config.detector.p0, config.detector.hbar);
    } else {
        ctx.psi.grid = config.detector.grid;
        ctx.psi.amplitudes = config.detector.amplitudes;
        ctx.psi.hbar = config.detector.hbar;
    }
    return ctx;
}

std::string status_of(const std::exception& e) {
    if (dynamic_cast<const DegeneratePostSelection*>(&e)) return "degenerate-post-selection";
    if (dynamic_cast<const WrapGuardViolation*>(&e)) return "wrap-guard";
    if (dynamic_cast<const SeriesNotConverged*>(&e)) return "series-not-converged";
    return "error";
}

DetectorMoments moments_for(const ScenarioConfig& config,
                            const DetectorWavefunction& psi, int order) {
    if (config.detector.gaussian)
        return gaussian_moments(config.detector.sigma, config.detector.hbar, order,
                                config.detector.x0, config.detector.p0);
    return moments(psi, std::min(order, 8));
}

std::vector<ResultRow> evaluate_point(const ScenarioConfig& config, double g) {
    std::vector<ResultRow> rows;
    const DensityOperator rho{config.initial_state};

    double re_wv = kNaN, two_im_wv = kNaN;
    try {
        const WeakValue wv = weak_value(config.observable, rho, config.post_selection);
        re_wv = wv.re();
        two_im_wv = wv.two_im();
    } catch (const std::exception&) {
        // orthogonal selection: the weak value itself diverges but finite-g
        // rows may still be well-defined
    }

    for (Method method : config.methods) {
        ResultRow row;
        row.g = g;
        row.method = method;
        row.re_weak_value = re_wv;
        row.two_im_weak_value = two_im_wv;
        try {
            const PointContext ctx = detector_for(config, g);
            ConditionedResponse resp;
            switch (method) {
                case Method::Oracle:
                    resp = conditioned_response(rho, ctx.psi, config.observable,
                                                config.post_selection, ctx.cfg);
                    break;
                case Method::QubitExact:
                    resp = qubit_exact_response(config.observable, rho,
                                                config.post_selection,
                                                moments_for(config, ctx.psi, 83),
                                                ctx.cfg);
                    break;
                case Method::GaussianExact: {
                    resp = gaussian_conditioned_means(
                        config.observable, rho, config.post_selection,
                        DecoherenceParams{g, config.detector.sigma,
                                          config.detector.hbar});
                    resp.mean_x += config.detector.x0;
                    break;
                }
                case Method::LinearResponse: {
                    const LinearResponsePrediction lr =
                        linear_response(config.observable, rho, config.post_selection,
                                        moments_for(config, ctx.psi, 2), ctx.cfg);
                    resp.mean_x = lr.mean_x;
                    resp.mean_p = lr.mean_p;
                    resp.post_prob =
                        (config.post_selection * rho.mat()).trace().real();
                    break;
                }
            }
            row.post_prob = resp.post_prob;
            row.mean_x = resp.mean_x;
            row.mean_p = resp.mean_p;
        } catch (const std::exception& e) {
            row.status = status_of(e);
            row.post_prob = row.mean_x = row.mean_p = kNaN;
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace

ResultTable run_scenario(const ScenarioConfig& config, int threads) {
    const int n_points = static_cast<int>(config.couplings.size());
    std::vector<std::vector<ResultRow>> per_point(n_points);

    const int workers = std::max(1, std::min(threads, n_points));
    if (workers == 1) {
        for (int i = 0; i < n_points; ++i)
            per_point[i] = evaluate_point(config, config.couplings[i]);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < n_points; i = next.fetch_add(1))
                    per_point[i] = evaluate_point(config, config.couplings[i]);
            });
        for (std::thread& t : pool) t.join();
    }

    ResultTable table; // ordered by parameter value, not completion order
    for (const auto& rows : per_point)
        table.rows.insert(table.rows.end(), rows.begin(), rows.end());
    return table;
}

namespace {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void write_results_csv(const ResultTable& table, std::ostream& out) {
    out << "g[len/A],method,status,post_prob[1],mean_x[len],mean_p[hbar/len],"
           "re_weak_value[A],two_im_weak_value[A]\n";
    for (const ResultRow& r : table.rows) {
        out << format_double(r.g) << ',' << method_name(r.method) << ',' << r.status
            << ',' << format_double(r.post_prob) << ',' << format_double(r.mean_x)
            << ',' << format_double(r.mean_p) << ',' << format_double(r.re_weak_value)
            << ',' << format_double(r.two_im_weak_value) << '\n';
    }
}

void write_results_json(const ResultTable& table, std::ostream& out) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const ResultRow& r : table.rows) {
        nlohmann::ordered_json row;
        row["g"] = r.g;
        row["method"] = method_name(r.method);
        row["status"] = r.status;
        row["post_prob"] = std::isnan(r.post_prob) ? nlohmann::ordered_json()
                                                   : nlohmann::ordered_json(r.post_prob);
        row["mean_x"] = std::isnan(r.mean_x) ? nlohmann::ordered_json()
                                             : nlohmann::ordered_json(r.mean_x);
        row["mean_p"] = std::isnan(r.mean_p) ? nlohmann::ordered_json()
                                             : nlohmann::ordered_json(r.mean_p);
        row["re_weak_value"] = std::isnan(r.re_weak_value)
                                   ? nlohmann::ordered_json()
                                   : nlohmann::ordered_json(r.re_weak_value);
        row["two_im_weak_value"] = std::isnan(r.two_im_weak_value)
                                       ? nlohmann::ordered_json()
                                       : nlohmann::ordered_json(r.two_im_weak_value);
        rows.push_back(row);
    }
    nlohmann::ordered_json doc;
    doc["schema_version"] = 1;
    doc["units"] = {{"g", "len/A"},    {"post_prob", "1"},
                    {"mean_x", "len"}, {"mean_p", "hbar/len"},
                    {"re_weak_value", "A"}, {"two_im_weak_value", "A"}};
    doc["rows"] = rows;
    out << doc.dump(2) << '\n';
}

void write_plot_csv(const ResultTable& table, std::ostream& out) {
    out << "g[len/A],value[see series],series\n";
    const char* quantities[] = {"post_prob[1]", "mean_x[len]", "mean_p[hbar/len]"};
    for (const ResultRow& r : table.rows) {
        if (r.status != "ok") continue;
        const double values[] = {r.post_prob, r.mean_x, r.mean_p};
        for (int q = 0; q < 3; ++q)
            out << format_double(r.g) << ',' << format_double(values[q]) << ','
                << method_name(r.method) << '/' << quantities[q] << '\n';
    }
}

} // namespace vnmeas
