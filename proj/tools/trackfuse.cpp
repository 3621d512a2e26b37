// Command-line front end: scenario runs, fuser benchmark, single-pair fusion
// and the mixture demo.

#include "trackfuse/error.hpp"
#include "trackfuse/fusion.hpp"
#include "trackfuse/grid.hpp"
#include "trackfuse/metrics.hpp"
#include "trackfuse/report_io.hpp"
#include "trackfuse/sampling.hpp"
#include "trackfuse/scenarios.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

using namespace trackfuse;

namespace {

std::string default_out_dir()
{
    const char* env = std::getenv("TRACKFUSE_OUT");
    return env != nullptr && *env != '\0' ? env : "results";
}

std::vector<double> parse_list(const std::string& text, const std::string& what)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw InvalidArgument("cannot parse '" + item + "' in " + what);
        }
    }
    return out;
}

// "mean=a,b,.. cov=c11,c12,..,cnn" (row-major covariance)
GaussianEstimate parse_estimate(const std::vector<std::string>& tokens, const std::string& name)
{
    std::optional<std::vector<double>> mean;
    std::optional<std::vector<double>> cov;
    for (const auto& t : tokens) {
        const auto eq = t.find('=');
        const std::string key = t.substr(0, eq);
        if (eq == std::string::npos || (key != "mean" && key != "cov")) {
            throw InvalidArgument(name + " expects 'mean=..' and 'cov=..', got '" + t + "'");
        }
        (key == "mean" ? mean : cov) = parse_list(t.substr(eq + 1), name + " " + key);
    }
    if (!mean || !cov) {
        throw InvalidArgument(name + " needs both mean= and cov=");
    }
    const auto n = static_cast<Eigen::Index>(mean->size());
    if (static_cast<Eigen::Index>(cov->size()) != n * n) {
        throw DimensionMismatch(name + " covariance needs " + std::to_string(n * n) + " entries");
    }
    Vector m = Eigen::Map<const Vector>(mean->data(), n);
    Matrix c = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(cov->data(), n, n);
    return {m, c};
}

std::string fmt(const Vector& v)
{
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out += (i ? ", " : "") + format_double(v(i));
    }
    return out + "]";
}

std::string fmt(const Matrix& m)
{
    std::string out = "[";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out += (r ? ", " : "") + fmt(Vector(m.row(r).transpose()));
    }
    return out + "]";
}

void print_estimate(const GaussianEstimate& e, double confidence)
{
    std::cout << "mean: " << fmt(e.mean()) << "\n";
    std::cout << "cov: " << fmt(e.cov()) << "\n";
    std::cout << "trace: " << format_double(e.cov().trace()) << "\n";
    if (e.dim() >= 2) {
        const EllipseSummary el = ellipse_from_cov(e, confidence);
        std::cout << "ellipse(" << format_double(100.0 * confidence) << "%): center " << fmt(Vector(el.center))
                  << " a " << format_double(el.a) << " b " << format_double(el.b) << " orientation_deg "
                  << format_double(el.orientation * 180.0 / std::numbers::pi) << "\n";
    }
}

std::vector<Method> parse_fusers(const std::vector<std::string>& names)
{
    std::vector<Method> out;
    for (const auto& n : names) {
        out.push_back(parse_method(n));
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Harmonic-mean-density track fusion and scenario simulator"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "Run a Monte-Carlo scenario and write CSV/JSON reports");
    std::string scenario;
    std::string config_path;
    std::vector<std::string> fuser_names;
    std::optional<int> mc_runs;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> objective;
    std::string out_dir = default_out_dir();
    auto* scen_opt = run_cmd->add_option("--scenario", scenario,
                                         "consistency1 | consistency2 | surveillance | scalar_weight");
    run_cmd->add_option("--config", config_path, "JSON scenario file")->check(CLI::ExistingFile)->excludes(scen_opt);
    run_cmd->add_option("--fusers", fuser_names, "comma-separated: naive,ci,ici,hmd-ga,centralized")->delimiter(',');
    run_cmd->add_option("--mc-runs", mc_runs, "Monte-Carlo runs")->check(CLI::PositiveNumber);
    run_cmd->add_option("--seed", seed, "master seed");
    run_cmd->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    run_cmd->add_option("--objective", objective, "weight objective: trace | determinant");
    run_cmd->add_option("--out", out_dir, "output directory (env TRACKFUSE_OUT)");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Relative runtime of the closed-form fusers");
    std::size_t bench_calls = 10000;
    Eigen::Index bench_dim = 4;
    std::uint64_t bench_seed = 42;
    std::vector<std::string> bench_fusers_names = {"naive", "ci", "ici", "hmd-ga"};
    bench_cmd->add_option("--calls", bench_calls, "fusion calls per fuser")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--dim", bench_dim, "state dimension")->check(CLI::Range(1, 12));
    bench_cmd->add_option("--seed", bench_seed, "seed of the random input pairs");
    bench_cmd->add_option("--fusers", bench_fusers_names, "fusers; the first is the reference")->delimiter(',');

    // fuse
    auto* fuse_cmd = app.add_subcommand("fuse", "Fuse one pair of Gaussian estimates");
    std::vector<std::string> e1_tokens;
    std::vector<std::string> e2_tokens;
    std::string method_name = "hmd-ga";
    std::optional<double> omega;
    std::size_t samples = 5000;
    double alpha = 1.0;
    std::string source = "adaptive";
    std::uint64_t fuse_seed = 42;
    double confidence = 0.865;
    fuse_cmd->add_option("--e1", e1_tokens, "mean=a,b cov=c11,c12,c21,c22")->expected(2)->required();
    fuse_cmd->add_option("--e2", e2_tokens, "mean=a,b cov=c11,c12,c21,c22")->expected(2)->required();
    fuse_cmd->add_option("--method", method_name, "naive | ci | ici | hmd-ga | hmd-s | gmd-s");
    fuse_cmd->add_option("--omega", omega, "fusion weight (default: optimized; 0.5 for sampling)")
        ->check(CLI::Range(0.0, 1.0));
    fuse_cmd->add_option("--samples", samples, "sample count for hmd-s / gmd-s")->check(CLI::PositiveNumber);
    fuse_cmd->add_option("--alpha", alpha, "sampling covariance inflation (>= 1)");
    fuse_cmd->add_option("--source", source, "sample source rule: adaptive | p1 | p2");
    fuse_cmd->add_option("--seed", fuse_seed, "sampling seed");
    fuse_cmd->add_option("--confidence", confidence, "ellipse confidence")->check(CLI::Range(0.01, 0.9999));

    // demo-mixture
    auto* demo_cmd = app.add_subcommand("demo-mixture", "Fuse the two-component mixture pair and write grid data");
    std::size_t demo_samples = 5000;
    double demo_alpha = 1.0;
    double demo_omega = 0.5;
    std::uint64_t demo_seed = 42;
    std::size_t demo_points = 161;
    std::string demo_out = default_out_dir();
    demo_cmd->add_option("--samples", demo_samples, "total sample count")->check(CLI::PositiveNumber);
    demo_cmd->add_option("--alpha", demo_alpha, "sampling covariance inflation (>= 1)");
    demo_cmd->add_option("--omega", demo_omega, "fusion weight")->check(CLI::Range(0.0, 1.0));
    demo_cmd->add_option("--seed", demo_seed, "sampling seed");
    demo_cmd->add_option("--grid-points", demo_points, "grid points per axis")->check(CLI::Range(11, 1001));
    demo_cmd->add_option("--out", demo_out, "output directory (env TRACKFUSE_OUT)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            if (scenario.empty() && config_path.empty()) {
                throw ConfigError("run needs --scenario or --config");
            }
            ScenarioConfig cfg = config_path.empty() ? build_scenario(parse_scenario(scenario)) : load_config(config_path);
            if (!fuser_names.empty()) cfg.fusers = parse_fusers(fuser_names);
            if (mc_runs) cfg.mc_runs = *mc_runs;
            if (seed) cfg.seed = *seed;
            if (threads) cfg.threads = *threads;
            if (objective) cfg.objective = parse_objective(*objective);
            const RunReport report = run(cfg);
            for (const auto& f : report.fusers) {
                std::cout << f.fuser << ": failures " << f.failures << ", fusion time " << f.wall_seconds << " s\n";
                for (const auto& [k, v] : f.summary) {
                    if (k.find('/') == std::string::npos) {
                        std::cout << "  " << k << " = " << format_double(v) << "\n";
                    }
                }
            }
            for (const auto& p : write_report(report, out_dir)) {
                std::cout << "wrote " << p.string() << "\n";
            }
        } else if (bench_cmd->parsed()) {
            const auto pairs = random_estimate_pairs(bench_seed, 256, bench_dim);
            const BenchResult res = bench_fusers(pairs, parse_fusers(bench_fusers_names), bench_calls);
            std::cout << "fuser,median_ns_per_call,relative\n";
            for (std::size_t i = 0; i < res.fusers.size(); ++i) {
                std::cout << res.fusers[i] << "," << format_double(res.median_ns[i]) << ","
                          << format_double(res.relative[i]) << "\n";
            }
        } else if (fuse_cmd->parsed()) {
            const GaussianEstimate e1 = parse_estimate(e1_tokens, "--e1");
            const GaussianEstimate e2 = parse_estimate(e2_tokens, "--e2");
            if (method_name == "hmd-s" || method_name == "gmd-s") {
                SampleFusionConfig sc;
                sc.samples = samples;
                sc.inflation = alpha;
                sc.source = parse_source_rule(source);
                sc.seed = fuse_seed;
                const double w = omega.value_or(0.5);
                const MeanRule rule = method_name == "hmd-s" ? MeanRule::hmd : MeanRule::gmd;
                const WeightedSampleSet set = fused_samples(GaussianMixture(e1), GaussianMixture(e2), w, rule, sc);
                std::cout << "method: " << method_name << "\nomega: " << format_double(w) << "\n";
                print_estimate(set.estimate(), confidence);
                std::cout << "zeta: " << format_double(set.zeta) << " (stderr " << format_double(set.zeta_stderr())
                          << ")\nmean_stderr: " << fmt(set.mean_stderr()) << "\n";
            } else {
                const Method m = parse_method(method_name);
                if (m == Method::centralized || m == Method::known_prior) {
                    throw InvalidArgument("fuse supports naive, ci, ici, hmd-ga, hmd-s and gmd-s");
                }
                const FusedResult r = omega ? fuse_with(m, e1, e2, *omega) : fuse(m, e1, e2);
                std::cout << "method: " << to_string(m) << "\nomega: " << format_double(r.weight.omega) << "\n";
                print_estimate(r.estimate, confidence);
            }
        } else if (demo_cmd->parsed()) {
            const auto [m1, m2] = demo_mixture_pair();
            SampleFusionConfig sc;
            sc.samples = demo_samples;
            sc.inflation = demo_alpha;
            sc.seed = demo_seed;
            const MixtureFusion fused = hmd_s_mixture_detailed(m1, m2, demo_omega, sc);

            std::vector<GaussianEstimate> comps;
            for (const auto& c : m1.components()) comps.push_back(c.estimate);
            for (const auto& c : m2.components()) comps.push_back(c.estimate);
            const auto axes = envelope_axes(comps, demo_points);
            const GridDensity g1 = grid_eval(m1, axes);
            const GridDensity g2 = grid_eval(m2, axes);
            const GridFusion gh = grid_hmd(g1, g2, demo_omega);
            const GridFusion gg = grid_gmd(g1, g2, demo_omega);
            const GridDensity gs = grid_eval(fused.mixture, axes);

            std::filesystem::create_directories(demo_out);
            const auto grid_path = std::filesystem::path(demo_out) / "demo_mixture_grid.csv";
            std::ofstream grid_csv(grid_path, std::ios::binary);
            grid_csv << "# schema " << kReportSchema << "\nx,y,p1,p2,hmd_grid,gmd_grid,hmd_s_mixture\n";
            for (Eigen::Index k = 0; k < gh.density.values().size(); ++k) {
                const Vector x = gh.density.point(k);
                grid_csv << format_double(x(0)) << "," << format_double(x(1)) << "," << format_double(g1.values()(k))
                         << "," << format_double(g2.values()(k)) << "," << format_double(gh.density.values()(k)) << ","
                         << format_double(gg.density.values()(k)) << "," << format_double(gs.values()(k)) << "\n";
            }

            nlohmann::ordered_json j;
            j["schema"] = kReportSchema;
            j["omega"] = demo_omega;
            j["samples"] = demo_samples;
            j["alpha"] = demo_alpha;
            j["seed"] = demo_seed;
            nlohmann::ordered_json comps_json = nlohmann::ordered_json::array();
            for (const auto& c : fused.mixture.components()) {
                comps_json.push_back({{"weight", c.weight},
                                      {"mean", {c.estimate.mean()(0), c.estimate.mean()(1)}},
                                      {"cov",
                                       {{c.estimate.cov()(0, 0), c.estimate.cov()(0, 1)},
                                        {c.estimate.cov()(1, 0), c.estimate.cov()(1, 1)}}}});
            }
            j["hmd_s_components"] = comps_json;
            j["pair_zeta"] = fused.pair_zeta;
            j["dropped_pairs"] = fused.dropped;
            const GaussianEstimate mm = moment_match(fused.mixture);
            const Vector gmean = gh.density.mean();
            j["hmd_s_moment_mean"] = {mm.mean()(0), mm.mean()(1)};
            j["hmd_grid_mean"] = {gmean(0), gmean(1)};
            j["hmd_grid_zeta"] = gh.zeta;
            const auto json_path = std::filesystem::path(demo_out) / "demo_mixture_fused.json";
            std::ofstream(json_path, std::ios::binary) << j.dump(2) << "\n";

            std::cout << "HMD-S mixture: " << fused.mixture.size() << " components (" << fused.dropped
                      << " dropped)\n";
            std::cout << "moment-matched mean " << fmt(mm.mean()) << ", grid HMD mean " << fmt(gmean) << "\n";
            std::cout << "wrote " << grid_path.string() << "\nwrote " << json_path.string() << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ScenarioAborted& e) {
        std::cerr << "scenario aborted: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
