#include "trackfuse/report_io.hpp"

#include "trackfuse/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace trackfuse {

using nlohmann::ordered_json;

namespace {

Matrix matrix_from(const ordered_json& j, const std::string& key)
{
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
        throw ConfigError("'" + key + "' must be an array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ConfigError("'" + key + "' has ragged rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

Vector vector_from(const ordered_json& j, const std::string& key)
{
    if (!j.is_array()) {
        throw ConfigError("'" + key + "' must be an array");
    }
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

ordered_json to_json(const Matrix& m)
{
    ordered_json out = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        out.push_back(row);
    }
    return out;
}

ordered_json to_json(const Vector& v)
{
    ordered_json out = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

Geodetic geodetic_from(const ordered_json& j, const std::string& key)
{
    if (j.is_array() && j.size() == 2) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    if (j.is_object() && j.contains("lat") && j.contains("lon")) {
        return {j["lat"].get<double>(), j["lon"].get<double>()};
    }
    throw ConfigError("'" + key + "' must be [lat, lon] or {\"lat\": .., \"lon\": ..} in degrees");
}

ordered_json to_json(const Geodetic& g)
{
    return ordered_json::array({g.lat_deg, g.lon_deg});
}

template <class T>
void read(const ordered_json& j, const char* key, T& out)
{
    if (j.contains(key)) {
        out = j[key].get<T>();
    }
}

void read_consistency(const ordered_json& j, ConsistencyParams& c)
{
    if (j.contains("prior_mean")) c.prior_mean = vector_from(j["prior_mean"], "prior_mean");
    if (j.contains("prior_cov")) c.prior_cov = matrix_from(j["prior_cov"], "prior_cov");
    if (j.contains("F")) c.F = matrix_from(j["F"], "F");
    if (j.contains("Q")) c.Q = matrix_from(j["Q"], "Q");
    read(j, "steps", c.steps);
    read(j, "predict_first", c.predict_first);
    if (j.contains("nodes")) {
        c.nodes.clear();
        c.graph.names.clear();
        int i = 0;
        for (const auto& n : j["nodes"]) {
            ++i;
            if (!n.contains("H") || !n.contains("R")) {
                throw ConfigError("every node needs 'H' and 'R'");
            }
            c.nodes.push_back({matrix_from(n["H"], "H"), matrix_from(n["R"], "R")});
            c.graph.names.push_back(n.value("name", "S" + std::to_string(i)));
        }
    }
    if (j.contains("edges")) {
        // 1-based node numbers, as in the figures
        c.graph.edges.clear();
        for (const auto& e : j["edges"]) {
            if (!e.is_array() || e.size() != 2) {
                throw ConfigError("edges must be [from, to] pairs");
            }
            c.graph.edges.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1);
        }
    }
}

void read_surveillance(const ordered_json& j, SurveillanceParams& s)
{
    if (j.contains("radars")) {
        s.radars.clear();
        for (const auto& r : j["radars"]) {
            s.radars.push_back(geodetic_from(r, "radars"));
        }
    }
    if (j.contains("targets")) {
        s.targets.clear();
        for (const auto& t : j["targets"]) {
            if (!t.contains("start") || !t.contains("end")) {
                throw ConfigError("every target needs 'start' and 'end'");
            }
            s.targets.push_back({geodetic_from(t["start"], "start"), geodetic_from(t["end"], "end")});
        }
    }
    read(j, "q", s.q);
    read(j, "sigma_r", s.sigma_r);
    read(j, "sigma_theta_deg", s.sigma_theta_deg);
    read(j, "coverage", s.coverage);
    read(j, "p_detect", s.p_detect);
    read(j, "clutter_density", s.clutter_density);
    read(j, "gate_mass", s.gate_mass);
    read(j, "init_gate_mass", s.init_gate_mass);
    read(j, "t2t_gate_mass", s.t2t_gate_mass);
    read(j, "fusion_period", s.fusion_period);
    read(j, "scan_period", s.scan_period);
    read(j, "duration", s.duration);
    read(j, "max_speed", s.max_speed);
    read(j, "loss_threshold", s.loss_threshold);
    read(j, "truth_gate", s.truth_gate);
    read(j, "max_misses", s.max_misses);
    read(j, "excluded_targets", s.excluded_targets);
}

ordered_json config_json(const ScenarioConfig& cfg)
{
    ordered_json j;
    j["scenario"] = to_string(cfg.kind);
    j["mc_runs"] = cfg.mc_runs;
    j["seed"] = cfg.seed;
    ordered_json fusers = ordered_json::array();
    for (Method m : cfg.fusers) {
        fusers.push_back(to_string(m));
    }
    j["fusers"] = fusers;
    j["objective"] = to_string(cfg.objective);
    switch (cfg.kind) {
    case ScenarioKind::consistency1:
    case ScenarioKind::consistency2: {
        const auto& c = cfg.consistency;
        ordered_json cj;
        cj["prior_mean"] = to_json(c.prior_mean);
        cj["prior_cov"] = to_json(c.prior_cov);
        cj["F"] = to_json(c.F);
        cj["Q"] = to_json(c.Q);
        cj["steps"] = c.steps;
        cj["predict_first"] = c.predict_first;
        ordered_json nodes = ordered_json::array();
        for (std::size_t i = 0; i < c.nodes.size(); ++i) {
            nodes.push_back({{"name", c.graph.names[i]}, {"H", to_json(c.nodes[i].H)}, {"R", to_json(c.nodes[i].R)}});
        }
        cj["nodes"] = nodes;
        ordered_json edges = ordered_json::array();
        for (const auto& [a, b] : c.graph.edges) {
            edges.push_back({a + 1, b + 1});
        }
        cj["edges"] = edges;
        j["consistency"] = cj;
        break;
    }
    case ScenarioKind::scalar_weight:
        j["scalar"] = {{"rho", cfg.scalar.rho},
                       {"q", cfg.scalar.q},
                       {"r", cfg.scalar.r},
                       {"p0", cfg.scalar.p0},
                       {"steps", cfg.scalar.steps}};
        break;
    case ScenarioKind::surveillance: {
        const auto& s = cfg.surveillance;
        ordered_json sj;
        ordered_json radars = ordered_json::array();
        for (const auto& r : s.radars) {
            radars.push_back(to_json(r));
        }
        sj["radars"] = radars;
        ordered_json targets = ordered_json::array();
        for (const auto& t : s.targets) {
            targets.push_back({{"start", to_json(t.start)}, {"end", to_json(t.end)}});
        }
        sj["targets"] = targets;
        sj["q"] = s.q;
        sj["sigma_r"] = s.sigma_r;
        sj["sigma_theta_deg"] = s.sigma_theta_deg;
        sj["coverage"] = s.coverage;
        sj["p_detect"] = s.p_detect;
        sj["clutter_density"] = s.clutter_density;
        sj["gate_mass"] = s.gate_mass;
        sj["init_gate_mass"] = s.init_gate_mass;
        sj["t2t_gate_mass"] = s.t2t_gate_mass;
        sj["fusion_period"] = s.fusion_period;
        sj["scan_period"] = s.scan_period;
        sj["duration"] = s.duration;
        sj["max_speed"] = s.max_speed;
        sj["loss_threshold"] = s.loss_threshold;
        sj["truth_gate"] = s.truth_gate;
        sj["max_misses"] = s.max_misses;
        sj["excluded_targets"] = s.excluded_targets;
        j["surveillance"] = sj;
        break;
    }
    }
    return j;
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    out << text;
    if (!out) {
        throw Error("failed writing '" + path.string() + "'");
    }
}

std::string file_stem(const RunReport& report, const FuserReport& fuser)
{
    return to_string(report.config.kind) + "_" + fuser.fuser;
}

} // namespace

ScenarioConfig config_from_json(const std::string& text)
{
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("scenario")) {
        throw ConfigError("config must be an object with a 'scenario' key");
    }
    static const std::set<std::string> known = {"scenario", "mc_runs", "seed",        "fusers", "objective",
                                                "threads",  "consistency", "scalar", "surveillance"};
    for (const auto& item : j.items()) {
        if (!known.contains(item.key())) {
            throw ConfigError("unknown config key '" + item.key() + "'");
        }
    }
    try {
        ScenarioConfig cfg = build_scenario(parse_scenario(j["scenario"].get<std::string>()));
        read(j, "mc_runs", cfg.mc_runs);
        read(j, "seed", cfg.seed);
        read(j, "threads", cfg.threads);
        if (j.contains("fusers")) {
            cfg.fusers.clear();
            for (const auto& f : j["fusers"]) {
                cfg.fusers.push_back(parse_method(f.get<std::string>()));
            }
        }
        if (j.contains("objective")) cfg.objective = parse_objective(j["objective"].get<std::string>());
        if (j.contains("consistency")) read_consistency(j["consistency"], cfg.consistency);
        if (j.contains("scalar")) {
            const auto& s = j["scalar"];
            read(s, "rho", cfg.scalar.rho);
            read(s, "q", cfg.scalar.q);
            read(s, "r", cfg.scalar.r);
            read(s, "p0", cfg.scalar.p0);
            read(s, "steps", cfg.scalar.steps);
        }
        if (j.contains("surveillance")) read_surveillance(j["surveillance"], cfg.surveillance);
        cfg.validate();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config type error: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

ScenarioConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

std::string config_to_json(const ScenarioConfig& cfg)
{
    return config_json(cfg).dump();
}

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

std::string metric_csv(const RunReport& report, const FuserReport& fuser, const std::string& metric)
{
    std::string out;
    out += "# schema ";
    out += kReportSchema;
    out += "\n# config ";
    out += config_to_json(report.config);
    out += "\n# fuser " + fuser.fuser + "\n";
    out += "target,step,time_s,metric,value,lower_bound,upper_bound\n";
    for (const auto& row : fuser.rows) {
        if (row.metric != metric) continue;
        out += row.target + "," + std::to_string(row.step) + "," + format_double(row.time_s) + "," + row.metric + ","
               + format_double(row.value) + "," + (row.lower ? format_double(*row.lower) : "") + ","
               + (row.upper ? format_double(*row.upper) : "") + "\n";
    }
    return out;
}

std::vector<std::filesystem::path> write_report(const RunReport& report, const std::filesystem::path& out_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw Error("cannot create output directory '" + out_dir.string() + "': " + ec.message());
    }
    std::vector<std::filesystem::path> written;
    const std::string scenario = to_string(report.config.kind);
    ordered_json summary;
    summary["schema"] = kReportSchema;
    summary["config"] = config_json(report.config);
    ordered_json ellipses = ordered_json::array();
    for (const auto& f : report.fusers) {
        std::vector<std::string> metrics;
        for (const auto& row : f.rows) {
            if (std::find(metrics.begin(), metrics.end(), row.metric) == metrics.end()) {
                metrics.push_back(row.metric);
            }
        }
        for (const auto& m : metrics) {
            const auto path = out_dir / (file_stem(report, f) + "_" + m + ".csv");
            write_file(path, metric_csv(report, f, m));
            written.push_back(path);
        }
        ordered_json fj;
        fj["failures"] = f.failures;
        fj["wall_seconds"] = f.wall_seconds;
        ordered_json values;
        for (const auto& [k, v] : f.summary) {
            values[k] = v;
        }
        fj["summary"] = values;
        if (f.consistency) {
            fj["sample_cov"] = to_json(f.consistency->sample_cov);
            fj["reported_cov"] = to_json(f.consistency->reported_cov);
            fj["mean_error"] = to_json(f.consistency->mean_error);
            fj["mean_nees"] = f.consistency->mean_nees;
        }
        summary["fusers"][f.fuser] = fj;
        for (const auto& e : f.ellipses) {
            ellipses.push_back({{"fuser", f.fuser},
                                {"label", e.label},
                                {"target", e.target},
                                {"step", e.step},
                                {"center", {e.ellipse.center.x(), e.ellipse.center.y()}},
                                {"a", e.ellipse.a},
                                {"b", e.ellipse.b},
                                {"orientation", e.ellipse.orientation},
                                {"confidence", e.ellipse.confidence}});
        }
    }
    if (!ellipses.empty()) {
        const auto path = out_dir / (scenario + "_ellipses.json");
        write_file(path, ordered_json({{"schema", kReportSchema}, {"ellipses", ellipses}}).dump(2) + "\n");
        written.push_back(path);
    }
    const auto path = out_dir / (scenario + "_summary.json");
    write_file(path, summary.dump(2) + "\n");
    written.push_back(path);
    return written;
}

} // namespace trackfuse
