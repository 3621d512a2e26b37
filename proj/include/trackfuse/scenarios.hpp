#pragma once

// Experiment descriptions and the Monte-Carlo harness that runs them.

#include "trackfuse/fusion.hpp"
#include "trackfuse/gaussian.hpp"
#include "trackfuse/geodetic.hpp"
#include "trackfuse/metrics.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace trackfuse {

enum class ScenarioKind { consistency1, consistency2, surveillance, scalar_weight };

[[nodiscard]] std::string to_string(ScenarioKind k);
[[nodiscard]] ScenarioKind parse_scenario(std::string_view name);

/// Directed acyclic fusion-flow graph over named nodes (0-based indices).
struct NodeGraph {
    std::vector<std::string> names;
    std::vector<std::pair<int, int>> edges;  // (from, to)

    void validate() const;
    [[nodiscard]] std::vector<int> topological_order() const;
    [[nodiscard]] std::vector<int> inbound(int node) const;
    /// The unique node without outbound edges.
    [[nodiscard]] int sink() const;
};

struct LinearNodeSpec {
    Matrix H;
    Matrix R;
};

/// Linear-Gaussian multi-node test: every node starts from the common prior,
/// processes its own measurements for `steps` steps, and the local estimates
/// are fused along the graph at every step (no feedback to the nodes).
struct ConsistencyParams {
    Vector prior_mean;
    Matrix prior_cov;
    Matrix F;
    Matrix Q;
    int steps = 1;
    bool predict_first = false;  // predict before every update (including the first)
    std::vector<LinearNodeSpec> nodes;
    NodeGraph graph;
};

/// Scalar random walk fused with a measurement whose noise is correlated
/// with the process noise.
struct ScalarParams {
    double rho = 0.5;
    double q = 1.0;
    double r = 1.0;
    double p0 = 1.0;
    int steps = 50;
};

struct TargetSpec {
    Geodetic start;
    Geodetic end;
};

struct SurveillanceParams {
    std::vector<Geodetic> radars;  // the fusion center sits at radars[0]
    std::vector<TargetSpec> targets;
    double q = 0.15;               // m^2/s^3
    double sigma_r = 50.0;         // m
    double sigma_theta_deg = 2.0;
    double coverage = 300000.0;    // m
    double p_detect = 0.99;
    double clutter_density = 1e-5; // false alarms per (m * rad)
    double gate_mass = 0.95;
    double init_gate_mass = 0.99;
    double t2t_gate_mass = 0.99;
    double fusion_period = 10.0;   // s
    double scan_period = 2.0;      // s
    double duration = 4537.0;      // s
    double max_speed = 30.0;       // m/s
    double loss_threshold = 500.0; // m, position errors above this are excluded from RMSE
    double truth_gate = 5000.0;    // m, target-to-global-track association for metrics
    int max_misses = 6;
    std::vector<int> excluded_targets{18};  // 1-based
};

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::consistency1;
    int mc_runs = 1;
    std::uint64_t seed = 42;
    std::vector<Method> fusers;
    Objective objective = Objective::trace;
    int threads = 1;
    ConsistencyParams consistency;
    ScalarParams scalar;
    SurveillanceParams surveillance;

    void validate() const;
};

[[nodiscard]] ScenarioConfig build_consistency1();
[[nodiscard]] ScenarioConfig build_consistency2();
[[nodiscard]] ScenarioConfig build_surveillance();
[[nodiscard]] ScenarioConfig build_scalar_weight();
[[nodiscard]] ScenarioConfig build_scenario(ScenarioKind kind);

/// One CSV row: step, time, metric value and optional bounds.
struct MetricRow {
    std::string target;
    int step = 0;
    double time_s = 0.0;
    std::string metric;
    double value = 0.0;
    std::optional<double> lower;
    std::optional<double> upper;
};

struct EllipseRecord {
    std::string label;  // "reported" or "sample"
    std::string target;
    int step = 0;
    EllipseSummary ellipse;
};

/// End-of-run consistency figures at the sink node.
struct ConsistencySummary {
    Matrix sample_cov;    // mean of e e^T over runs (about the truth)
    Matrix reported_cov;  // mean reported covariance
    Vector mean_error;
    double mean_nees = 0.0;
};

struct FuserReport {
    std::string fuser;
    std::vector<MetricRow> rows;
    std::map<std::string, double> summary;
    std::optional<ConsistencySummary> consistency;
    std::vector<EllipseRecord> ellipses;
    std::size_t failures = 0;
    double wall_seconds = 0.0;  // not written to CSV
};

struct RunReport {
    ScenarioConfig config;
    std::vector<FuserReport> fusers;

    [[nodiscard]] const FuserReport& fuser(std::string_view name) const;
};

/// Runs the scenario. Deterministic for a given seed regardless of thread
/// count: run r draws from the stream derived from (seed, r). Throws
/// ScenarioAborted when more than 1% of runs fail for a fuser.
[[nodiscard]] RunReport run(const ScenarioConfig& config);

/// Truth state [e, n, ve, vn] of a surveillance target at time t, in the
/// east-north frame of the fusion center.
[[nodiscard]] Vector surveillance_truth(const SurveillanceParams& p, std::size_t target, double t);

/// Two-dimensional Gaussian pair used by the density-level demos and checks.
[[nodiscard]] std::pair<GaussianEstimate, GaussianEstimate> demo_gaussian_pair();

/// Two-component Gaussian mixture pair used by the mixture demo.
[[nodiscard]] std::pair<GaussianMixture, GaussianMixture> demo_mixture_pair();

/// Radar positions in the fusion-center frame.
[[nodiscard]] std::vector<Eigen::Vector2d> radar_positions(const SurveillanceParams& p);

} // namespace trackfuse
