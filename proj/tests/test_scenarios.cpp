#include "test_util.hpp"

#include "trackfuse/error.hpp"
#include "trackfuse/report_io.hpp"
#include "trackfuse/scenarios.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace trackfuse;
using namespace tftest;

namespace {

std::size_t position(const std::vector<int>& order, int v)
{
    return static_cast<std::size_t>(std::find(order.begin(), order.end(), v) - order.begin());
}

void expect_topological(const NodeGraph& g)
{
    const std::vector<int> order = g.topological_order();
    ASSERT_EQ(order.size(), g.names.size());
    for (const auto& [a, b] : g.edges) EXPECT_LT(position(order, a), position(order, b));
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST(Builders, FirstConsistencyScenario)
{
    const ScenarioConfig c = build_consistency1();
    ASSERT_EQ(c.consistency.nodes.size(), 10U);
    EXPECT_LT((c.consistency.nodes[9].H - Matrix::Identity(2, 2)).norm(), 1e-12);
    const double s = std::sqrt(0.5);
    EXPECT_LT((c.consistency.nodes[4].H - mat({s, s, s, s})).norm(), 1e-12);
    EXPECT_EQ(c.consistency.graph.names[static_cast<std::size_t>(c.consistency.graph.sink())], "S10");
    EXPECT_EQ(c.consistency.graph.edges.size(), 15U);
    expect_topological(c.consistency.graph);
    EXPECT_NO_THROW(c.validate());
}

TEST(Builders, SecondConsistencyScenario)
{
    const ScenarioConfig c = build_consistency2();
    ASSERT_EQ(c.consistency.nodes.size(), 5U);
    EXPECT_DOUBLE_EQ(c.consistency.nodes[1].R(0, 0), 0.1);
    EXPECT_DOUBLE_EQ(c.consistency.nodes[1].R(1, 1), 0.5);
    EXPECT_DOUBLE_EQ(c.consistency.nodes[0].R(0, 0), 0.5);
    EXPECT_EQ(c.consistency.graph.sink(), 4);
    EXPECT_EQ(c.consistency.graph.inbound(2), (std::vector<int>{0, 1}));
    expect_topological(c.consistency.graph);
}

TEST(Builders, Surveillance)
{
    const ScenarioConfig c = build_surveillance();
    const auto& s = c.surveillance;
    ASSERT_EQ(s.targets.size(), 20U);
    ASSERT_EQ(s.radars.size(), 3U);
    EXPECT_DOUBLE_EQ(s.targets[17].start.lat_deg, 60.2969);
    EXPECT_DOUBLE_EQ(s.radars[2].lon_deg, -52.104272);
    EXPECT_EQ(s.excluded_targets, (std::vector<int>{18}));
    const auto pos = radar_positions(s);
    EXPECT_LT(pos[0].norm(), 1e-6);
    for (std::size_t i = 0; i < pos.size(); ++i)
        EXPECT_LT((pos[i] - geodetic_to_enu(s.radars[i], s.radars[0])).norm(), 1e-6);
    EXPECT_NEAR(pos[1].norm(), 2.8e5, 0.1e5);
}

TEST(Surveillance, TruthMovesAtConstantSpeedBetweenEndpoints)
{
    const SurveillanceParams s = build_surveillance().surveillance;
    const Vector a = surveillance_truth(s, 0, 0.0);
    const Vector b = surveillance_truth(s, 0, s.duration);
    const Eigen::Vector2d start = geodetic_to_enu(s.targets[0].start, s.radars[0]);
    const Eigen::Vector2d end = geodetic_to_enu(s.targets[0].end, s.radars[0]);
    EXPECT_LT((a.head<2>() - start).norm(), 1.0);
    EXPECT_LT((b.head<2>() - end).norm(), 1.0);
    const Vector m = surveillance_truth(s, 0, s.duration / 2.0);
    EXPECT_NEAR(a.tail<2>().norm(), m.tail<2>().norm(), 0.05);
    EXPECT_LT(a.tail<2>().norm(), s.max_speed);
}

TEST(Graph, DetectsCycle)
{
    NodeGraph g;
    g.names = {"a", "b", "c"};
    g.edges = {{0, 1}, {1, 2}, {2, 0}};
    EXPECT_THROW(g.validate(), ConfigError);
}

TEST(Graph, RejectsTwoSinksAndSelfLoops)
{
    NodeGraph g;
    g.names = {"a", "b", "c"};
    g.edges = {{0, 1}, {0, 2}};
    EXPECT_THROW(g.validate(), ConfigError);
    g.edges = {{0, 0}};
    EXPECT_THROW(g.validate(), ConfigError);
}

TEST(Validate, RejectsUnusableFusers)
{
    ScenarioConfig s = build_surveillance();
    s.fusers = {Method::centralized};
    EXPECT_THROW(s.validate(), ConfigError);
    ScenarioConfig c = build_consistency1();
    c.fusers = {Method::known_prior};
    EXPECT_THROW(c.validate(), ConfigError);
    c.fusers = {};
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_THROW((void)parse_scenario("nonsense"), ConfigError);
}

TEST(ConfigJson, RoundTrip)
{
    for (ScenarioKind k : {ScenarioKind::consistency1, ScenarioKind::consistency2, ScenarioKind::surveillance,
                           ScenarioKind::scalar_weight}) {
        const ScenarioConfig a = build_scenario(k);
        const std::string text = config_to_json(a);
        const ScenarioConfig b = config_from_json(text);
        EXPECT_EQ(config_to_json(b), text) << to_string(k);
    }
}

TEST(ConfigJson, OverridesDefaults)
{
    const ScenarioConfig c = config_from_json(
        R"({"scenario": "consistency2", "mc_runs": 7, "seed": 3, "fusers": ["ci", "hmd-ga"],
            "consistency": {"steps": 2, "edges": [[1, 3], [2, 3], [2, 4], [3, 5], [4, 5]]}})");
    EXPECT_EQ(c.mc_runs, 7);
    EXPECT_EQ(c.seed, 3U);
    EXPECT_EQ(c.fusers, (std::vector<Method>{Method::ci, Method::hmd_ga}));
    EXPECT_EQ(c.consistency.steps, 2);
    EXPECT_EQ(c.consistency.graph.edges.front(), (std::pair<int, int>{0, 2}));
    EXPECT_EQ(c.consistency.nodes.size(), 5U);
}

TEST(ConfigJson, Rejections)
{
    EXPECT_THROW((void)config_from_json("{}"), ConfigError);
    EXPECT_THROW((void)config_from_json("not json"), ConfigError);
    EXPECT_THROW((void)config_from_json(R"({"scenario": "consistency1", "bogus": 1})"), ConfigError);
    EXPECT_THROW((void)config_from_json(R"({"scenario": "consistency1", "fusers": ["magic"]})"), ConfigError);
    EXPECT_THROW((void)config_from_json(R"({"scenario": "consistency1", "mc_runs": 0})"), ConfigError);
    EXPECT_THROW((void)config_from_json(R"({"scenario": "consistency1", "mc_runs": "many"})"), ConfigError);
    EXPECT_THROW((void)config_from_json(
                     R"({"scenario": "consistency2", "consistency": {"edges": [[1, 2], [2, 1], [2, 5]]}})"),
                 ConfigError);
    EXPECT_THROW((void)config_from_json(R"({"scenario": "surveillance", "fusers": ["centralized"]})"), ConfigError);
}

TEST(FormatDouble, ShortestRoundTrip)
{
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(2.0), "2");
    const double v = 1.0 / 3.0;
    EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(Run, SmallConsistencyRunIsSane)
{
    ScenarioConfig c = build_consistency1();
    c.mc_runs = 200;
    const RunReport r = run(c);
    ASSERT_EQ(r.fusers.size(), 5U);
    const FuserReport& cen = r.fuser("centralized");
    EXPECT_NEAR(cen.summary.at("trace_ratio"), 1.0, 0.25);
    EXPECT_GT(r.fuser("naive").summary.at("trace_ratio"), 2.0);
    const std::string csv = metric_csv(r, cen, "nees");
    EXPECT_EQ(csv.rfind(std::string("# schema ") + kReportSchema, 0), 0U);
    EXPECT_NE(csv.find("target,step,time_s,metric,value,lower_bound,upper_bound"), std::string::npos);
}

TEST(Run, DeterministicAcrossThreadCounts)
{
    ScenarioConfig c = build_consistency2();
    c.mc_runs = 40;
    c.threads = 1;
    const RunReport a = run(c);
    c.threads = 2;
    const RunReport b = run(c);
    for (const auto& f : a.fusers) {
        for (const char* m : {"rmse", "nees"}) {
            EXPECT_EQ(metric_csv(a, f, m), metric_csv(b, b.fuser(f.fuser), m)) << f.fuser << " " << m;
        }
    }
    c.seed = 43;
    const RunReport d = run(c);
    EXPECT_NE(metric_csv(a, a.fusers[0], "rmse"), metric_csv(d, d.fusers[0], "rmse"));
}

TEST(Run, WritesReportFiles)
{
    ScenarioConfig c = build_scalar_weight();
    c.mc_runs = 20;
    const RunReport r = run(c);
    const auto dir = std::filesystem::temp_directory_path() / "trackfuse_test_report";
    std::filesystem::remove_all(dir);
    const auto paths = write_report(r, dir);
    ASSERT_FALSE(paths.empty());
    for (const auto& p : paths) EXPECT_TRUE(std::filesystem::exists(p)) << p;
    const auto csv = dir / "scalar_weight_hmd-ga_rmse.csv";
    ASSERT_TRUE(std::filesystem::exists(csv));
    const std::string text = slurp(csv);
    EXPECT_NE(text.find("# fuser hmd-ga"), std::string::npos);
    EXPECT_EQ(text.find("threads"), std::string::npos);
    std::filesystem::remove_all(dir);
}
