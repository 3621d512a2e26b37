#include "trackfuse/scenarios.hpp"

#include "trackfuse/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace trackfuse {

std::string to_string(ScenarioKind k)
{
    switch (k) {
    case ScenarioKind::consistency1: return "consistency1";
    case ScenarioKind::consistency2: return "consistency2";
    case ScenarioKind::surveillance: return "surveillance";
    case ScenarioKind::scalar_weight: return "scalar_weight";
    }
    return "unknown";
}

ScenarioKind parse_scenario(std::string_view name)
{
    if (name == "consistency1") return ScenarioKind::consistency1;
    if (name == "consistency2") return ScenarioKind::consistency2;
    if (name == "surveillance") return ScenarioKind::surveillance;
    if (name == "scalar_weight" || name == "scalar-weight" || name == "scalar") return ScenarioKind::scalar_weight;
    throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

void NodeGraph::validate() const
{
    const int n = static_cast<int>(names.size());
    if (n == 0) {
        throw ConfigError("node graph has no nodes");
    }
    for (const auto& [a, b] : edges) {
        if (a < 0 || a >= n || b < 0 || b >= n || a == b) {
            throw ConfigError("node graph edge (" + std::to_string(a) + ", " + std::to_string(b) + ") is invalid");
        }
    }
    (void)topological_order();
    (void)sink();
}

std::vector<int> NodeGraph::topological_order() const
{
    const int n = static_cast<int>(names.size());
    std::vector<int> indeg(static_cast<std::size_t>(n), 0);
    for (const auto& e : edges) {
        ++indeg[static_cast<std::size_t>(e.second)];
    }
    // Kahn's algorithm, always taking the lowest ready index for a stable order
    std::set<int> ready;
    for (int i = 0; i < n; ++i) {
        if (indeg[static_cast<std::size_t>(i)] == 0) ready.insert(i);
    }
    std::vector<int> order;
    while (!ready.empty()) {
        const int v = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(v);
        for (const auto& e : edges) {
            if (e.first == v && --indeg[static_cast<std::size_t>(e.second)] == 0) {
                ready.insert(e.second);
            }
        }
    }
    if (static_cast<int>(order.size()) != n) {
        throw ConfigError("node graph contains a cycle");
    }
    return order;
}

std::vector<int> NodeGraph::inbound(int node) const
{
    std::vector<int> in;
    for (const auto& e : edges) {
        if (e.second == node) in.push_back(e.first);
    }
    return in;
}

int NodeGraph::sink() const
{
    const int n = static_cast<int>(names.size());
    std::vector<bool> has_out(static_cast<std::size_t>(n), false);
    for (const auto& e : edges) {
        has_out[static_cast<std::size_t>(e.first)] = true;
    }
    int sink = -1;
    for (int i = 0; i < n; ++i) {
        if (!has_out[static_cast<std::size_t>(i)]) {
            if (sink >= 0) {
                throw ConfigError("node graph has more than one sink (" + names[static_cast<std::size_t>(sink)]
                                  + ", " + names[static_cast<std::size_t>(i)] + ")");
            }
            sink = i;
        }
    }
    if (sink < 0) {
        throw ConfigError("node graph has no sink");
    }
    return sink;
}

void ScenarioConfig::validate() const
{
    if (mc_runs < 1) {
        throw ConfigError("mc_runs must be at least 1");
    }
    if (fusers.empty()) {
        throw ConfigError("at least one fuser is required");
    }
    if (threads < 1) {
        throw ConfigError("threads must be at least 1");
    }
    for (Method m : fusers) {
        if (m == Method::known_prior) {
            throw ConfigError("known-prior fusion needs the common information and cannot run in scenarios");
        }
        if (m == Method::centralized && kind != ScenarioKind::consistency1 && kind != ScenarioKind::consistency2) {
            throw ConfigError("centralized fusion is only available in the consistency scenarios");
        }
    }
    switch (kind) {
    case ScenarioKind::consistency1:
    case ScenarioKind::consistency2: {
        const auto& c = consistency;
        const Eigen::Index n = c.prior_mean.size();
        if (n == 0 || c.prior_cov.rows() != n || c.F.rows() != n || c.Q.rows() != n) {
            throw ConfigError("consistency model matrices do not match the prior dimension");
        }
        if (c.steps < 1) {
            throw ConfigError("consistency scenario needs at least one step");
        }
        if (c.nodes.size() != c.graph.names.size()) {
            throw ConfigError("node specs and graph node names differ in count");
        }
        for (const auto& node : c.nodes) {
            if (node.H.cols() != n || node.R.rows() != node.H.rows()) {
                throw ConfigError("node measurement model does not match the state dimension");
            }
            (void)make_spd(node.R, "node measurement covariance");
        }
        c.graph.validate();
        break;
    }
    case ScenarioKind::scalar_weight:
        if (!(scalar.rho > -1.0 && scalar.rho < 1.0) || !(scalar.q > 0.0) || !(scalar.r > 0.0) || scalar.steps < 1) {
            throw ConfigError("scalar scenario needs |rho| < 1, q > 0, r > 0 and steps >= 1");
        }
        break;
    case ScenarioKind::surveillance: {
        const auto& s = surveillance;
        if (s.radars.empty() || s.targets.empty()) {
            throw ConfigError("surveillance scenario needs radars and targets");
        }
        if (!(s.scan_period > 0.0) || !(s.fusion_period >= s.scan_period) || !(s.duration > s.fusion_period)) {
            throw ConfigError("surveillance timing must satisfy 0 < scan period <= fusion period < duration");
        }
        const double ratio = s.fusion_period / s.scan_period;
        if (std::abs(ratio - std::round(ratio)) > 1e-9) {
            throw ConfigError("fusion period must be a multiple of the scan period");
        }
        break;
    }
    }
}

ScenarioConfig build_consistency1()
{
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::consistency1;
    cfg.mc_runs = 5000;
    cfg.fusers = {Method::naive, Method::ci, Method::ici, Method::hmd_ga, Method::centralized};
    auto& c = cfg.consistency;
    c.prior_mean = Vector::Zero(2);
    c.prior_cov = 2.0 * Matrix::Identity(2, 2);
    c.F = Matrix::Identity(2, 2);
    c.Q = Matrix::Zero(2, 2);
    c.steps = 1;
    c.predict_first = false;
    for (int i = 1; i <= 10; ++i) {
        const double a = std::numbers::pi / 2.0 * (i / 10.0);
        Matrix h(2, 2);
        h << std::sin(a), std::cos(a), std::cos(a), std::sin(a);
        c.nodes.push_back({h, 0.2 * Matrix::Identity(2, 2)});
        c.graph.names.push_back("S" + std::to_string(i));
    }
    // 1-based node numbers as drawn: three layers feeding the sink S10
    const std::vector<std::pair<int, int>> edges = {{1, 4}, {2, 4}, {2, 5}, {3, 5}, {1, 6}, {3, 6}, {4, 7}, {5, 7},
                                                    {5, 8}, {6, 8}, {4, 9}, {6, 9}, {7, 10}, {8, 10}, {9, 10}};
    for (const auto& [a, b] : edges) {
        c.graph.edges.emplace_back(a - 1, b - 1);
    }
    return cfg;
}

ScenarioConfig build_consistency2()
{
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::consistency2;
    cfg.mc_runs = 5000;
    cfg.fusers = {Method::naive, Method::ci, Method::ici, Method::hmd_ga, Method::centralized};
    auto& c = cfg.consistency;
    c.prior_mean = Vector::Zero(2);
    c.prior_cov.resize(2, 2);
    c.prior_cov << 2.0, 1.0, 1.0, 2.0;
    c.F.resize(2, 2);
    c.F << 1.0, 0.5, 0.0, 1.0;
    c.Q = 0.5 * Matrix::Identity(2, 2);
    c.steps = 5;
    c.predict_first = true;
    Matrix ra = Matrix::Zero(2, 2);
    ra.diagonal() << 0.5, 0.2;
    Matrix rb = Matrix::Zero(2, 2);
    rb.diagonal() << 0.1, 0.5;
    for (int i = 1; i <= 5; ++i) {
        c.nodes.push_back({Matrix::Identity(2, 2), i % 2 == 1 ? ra : rb});
        c.graph.names.push_back("S" + std::to_string(i));
    }
    const std::vector<std::pair<int, int>> edges = {{1, 3}, {2, 3}, {2, 4}, {3, 5}, {4, 5}};
    for (const auto& [a, b] : edges) {
        c.graph.edges.emplace_back(a - 1, b - 1);
    }
    return cfg;
}

ScenarioConfig build_scalar_weight()
{
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::scalar_weight;
    cfg.mc_runs = 500;
    cfg.fusers = {Method::ci, Method::ici, Method::hmd_ga};
    return cfg;
}

ScenarioConfig build_surveillance()
{
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::surveillance;
    cfg.mc_runs = 25;
    cfg.fusers = {Method::ci, Method::ici, Method::hmd_ga};
    auto& s = cfg.surveillance;
    s.radars = {{59.7138694, -55.2676093}, {57.5399008, -57.6551522}, {56.6320564, -52.104272}};
    s.targets = {
        {{59.6104, -52.6939}, {59.9352, -52.7611}}, {{57.7699, -59.1922}, {58.0822, -58.7635}},
        {{60.7648, -55.762}, {60.8607, -56.3676}},  {{57.7025, -54.7059}, {57.3769, -54.7036}},
        {{59.4254, -54.4498}, {59.7284, -54.5691}}, {{59.1483, -51.2977}, {59.4869, -51.3718}},
        {{58.8561, -58.484}, {58.6288, -58.495}},   {{59.831, -58.3974}, {59.6367, -58.0819}},
        {{59.5306, -53.1629}, {59.5036, -53.5418}}, {{58.8028, -54.3803}, {58.6656, -53.5222}},
        {{57.8132, -52.6504}, {57.676, -51.8147}},  {{57.4636, -58.9469}, {57.5906, -59.8504}},
        {{57.2096, -52.6824}, {57.7325, -52.5499}}, {{59.9093, -56.8477}, {59.8108, -57.9123}},
        {{57.5181, -56.2302}, {58.1104, -56.6123}}, {{58.3548, -56.4447}, {58.0948, -56.8321}},
        {{57.8268, -49.5721}, {57.55, -50.3705}},   {{60.2969, -49.9242}, {60.6296, -49.3978}},
        {{57.6451, -59.8337}, {57.988, -59.1956}},  {{60.6533, -51.4683}, {61.1832, -51.9363}},
    };
    return cfg;
}

ScenarioConfig build_scenario(ScenarioKind kind)
{
    switch (kind) {
    case ScenarioKind::consistency1: return build_consistency1();
    case ScenarioKind::consistency2: return build_consistency2();
    case ScenarioKind::surveillance: return build_surveillance();
    case ScenarioKind::scalar_weight: return build_scalar_weight();
    }
    throw ConfigError("unknown scenario kind");
}

namespace {

Matrix mat2(double a, double b, double c, double d)
{
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

Vector vec2(double a, double b)
{
    Vector v(2);
    v << a, b;
    return v;
}

} // namespace

std::pair<GaussianEstimate, GaussianEstimate> demo_gaussian_pair()
{
    return {GaussianEstimate(vec2(0.5, 1.0), mat2(2.5, -1.0, -1.0, 1.2)),
            GaussianEstimate(vec2(2.0, 1.0), mat2(0.8, -0.5, -0.5, 4.0))};
}

std::pair<GaussianMixture, GaussianMixture> demo_mixture_pair()
{
    const Matrix ca = mat2(2.5, -1.0, -1.0, 1.2);
    const Matrix cb = mat2(0.8, -0.5, -0.5, 4.0);
    GaussianMixture m1(std::vector<MixtureComponent>{{0.3, GaussianEstimate(vec2(-0.5, 3.0), ca)}, {0.7, GaussianEstimate(vec2(2.0, 0.3), cb)}});
    GaussianMixture m2(std::vector<MixtureComponent>{{0.4, GaussianEstimate(vec2(-1.5, 1.0), ca)}, {0.6, GaussianEstimate(vec2(3.0, -4.0), cb)}});
    return {std::move(m1), std::move(m2)};
}

const FuserReport& RunReport::fuser(std::string_view name) const
{
    for (const auto& f : fusers) {
        if (f.fuser == name) return f;
    }
    throw InvalidArgument("report has no fuser '" + std::string(name) + "'");
}

} // namespace trackfuse
