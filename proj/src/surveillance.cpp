// Three-radar multi-target scenario: local PDA trackers feed a fusion center
// with memory that associates and fuses track lists every fusion period.

#include "harness_internal.hpp"

#include "trackfuse/assignment.hpp"
#include "trackfuse/stats.hpp"
#include "trackfuse/tracker.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace trackfuse {

namespace {

Eigen::Vector3d on_ellipsoid(const Eigen::Vector3d& p)
{
    const double a2 = wgs84::a * wgs84::a;
    const double b = wgs84::a * (1.0 - wgs84::f);
    const double k = 1.0 / std::sqrt((p.x() * p.x() + p.y() * p.y()) / a2 + p.z() * p.z() / (b * b));
    return k * p;
}

Eigen::Vector2d truth_position(const SurveillanceParams& p, std::size_t target, double t)
{
    const TargetSpec& ts = p.targets.at(target);
    const double s = t / p.duration;
    const Eigen::Vector3d a = geodetic_to_ecef(ts.start);
    const Eigen::Vector3d b = geodetic_to_ecef(ts.end);
    return ecef_to_enu(on_ellipsoid((1.0 - s) * a + s * b), p.radars.front()).head<2>();
}

} // namespace

Vector surveillance_truth(const SurveillanceParams& p, std::size_t target, double t)
{
    constexpr double h = 0.5;
    const Eigen::Vector2d pos = truth_position(p, target, t);
    const Eigen::Vector2d vel = (truth_position(p, target, t + h) - truth_position(p, target, t - h)) / (2.0 * h);
    Vector x(4);
    x << pos, vel;
    return x;
}

std::vector<Eigen::Vector2d> radar_positions(const SurveillanceParams& p)
{
    std::vector<Eigen::Vector2d> out;
    for (const auto& r : p.radars) {
        out.push_back(geodetic_to_enu(r, p.radars.front()));
    }
    return out;
}

namespace detail {

namespace {

using clock = std::chrono::steady_clock;

struct GlobalTrack {
    GaussianEstimate estimate;
    double time = 0.0;
    int misses = 0;
};

struct Sample {
    bool valid = false;
    double pos_err2 = 0.0;
    double vel_err2 = 0.0;
    double nees = 0.0;
    double trace = 0.0;
    double pos_trace = 0.0;
};

// samples[fuser][target][step]
using RunSamples = std::vector<std::vector<std::vector<Sample>>>;

class FusionCenter {
public:
    FusionCenter(Method m, Objective obj, const SurveillanceParams& p)
        : method_(m)
        , objective_(obj)
        , q_(p.q)
        , max_misses_(p.max_misses)
        , gate_(chi2_quantile(4.0, p.t2t_gate_mass))
    {
    }

    void cycle(double t, const std::vector<std::vector<Track>>& node_lists)
    {
        for (auto& g : globals_) {
            if (t > g.time) {
                const MotionModel m = MotionModel::ncv(t - g.time, q_);
                g.estimate = kf_predict(g.estimate, m.F, m.Q);
                g.time = t;
            }
        }
        std::vector<bool> hit(globals_.size(), false);
        for (const auto& locals : node_lists) {
            const std::size_t ng = globals_.size();
            AssignmentProblem prob{Matrix(ng, locals.size()), gate_};
            for (std::size_t i = 0; i < ng; ++i) {
                for (std::size_t j = 0; j < locals.size(); ++j) {
                    prob.cost(i, j) = t2t_cost(globals_[i].estimate, locals[j].estimate);
                }
            }
            const Matching match = solve_assignment(prob);
            for (std::size_t i = 0; i < ng; ++i) {
                const int j = match.row_to_col[i];
                if (j < 0) continue;
                globals_[i].estimate =
                    fuse(method_, globals_[i].estimate, locals[static_cast<std::size_t>(j)].estimate, objective_).estimate;
                hit[i] = true;
            }
            for (std::size_t j = 0; j < locals.size(); ++j) {
                if (match.col_to_row[j] < 0) {
                    globals_.push_back({locals[j].estimate, t, 0});
                    hit.push_back(true);
                }
            }
        }
        std::vector<GlobalTrack> kept;
        for (std::size_t i = 0; i < globals_.size(); ++i) {
            GlobalTrack& g = globals_[i];
            g.misses = hit[i] ? 0 : g.misses + 1;
            if (g.misses < max_misses_) kept.push_back(std::move(g));
        }
        globals_ = std::move(kept);
    }

    [[nodiscard]] const std::vector<GlobalTrack>& globals() const { return globals_; }

private:
    Method method_;
    Objective objective_;
    double q_;
    int max_misses_;
    double gate_;
    std::vector<GlobalTrack> globals_;
};

} // namespace

RunReport run_surveillance(const ScenarioConfig& cfg)
{
    const SurveillanceParams& p = cfg.surveillance;
    const std::size_t nf = cfg.fusers.size();
    const std::size_t nt = p.targets.size();
    const int ratio = static_cast<int>(std::lround(p.fusion_period / p.scan_period));
    const int scans = static_cast<int>(std::floor(p.duration / p.scan_period + 1e-9));
    const int fusion_steps = scans / ratio;

    std::vector<bool> excluded(nt, false);
    for (int e : p.excluded_targets) {
        if (e >= 1 && static_cast<std::size_t>(e) <= nt) excluded[static_cast<std::size_t>(e - 1)] = true;
    }

    // truth is identical in every run
    std::vector<std::vector<Vector>> truth(static_cast<std::size_t>(scans + 1), std::vector<Vector>(nt));
    for (int k = 0; k <= scans; ++k) {
        for (std::size_t j = 0; j < nt; ++j) {
            truth[static_cast<std::size_t>(k)][j] = surveillance_truth(p, j, k * p.scan_period);
        }
    }
    const std::vector<Eigen::Vector2d> radars = radar_positions(p);
    std::vector<RangeBearingSensor> sensors;
    for (const auto& pos : radars) {
        RangeBearingSensor s;
        s.position = pos;
        s.sigma_r = p.sigma_r;
        s.sigma_theta = p.sigma_theta_deg * std::numbers::pi / 180.0;
        s.coverage = p.coverage;
        s.p_detect = p.p_detect;
        s.clutter_density = p.clutter_density;
        sensors.push_back(s);
    }
    TrackerConfig tcfg;
    tcfg.model = MotionModel::ncv(p.scan_period, p.q);
    tcfg.gate_mass = p.gate_mass;
    tcfg.init_gate_mass = p.init_gate_mass;
    tcfg.max_speed = p.max_speed;
    tcfg.lifecycle.confirmed_max_misses = p.max_misses;

    std::vector<RunSamples> runs(static_cast<std::size_t>(cfg.mc_runs));
    std::vector<std::vector<char>> failed(static_cast<std::size_t>(cfg.mc_runs), std::vector<char>(nf, 0));
    std::vector<std::vector<double>> seconds(static_cast<std::size_t>(cfg.mc_runs), std::vector<double>(nf, 0.0));

    parallel_runs(cfg.mc_runs, cfg.threads, [&](int r) {
        const auto ru = static_cast<std::size_t>(r);
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
        RunSamples& samples = runs[ru];
        samples.assign(nf, std::vector<std::vector<Sample>>(nt, std::vector<Sample>(static_cast<std::size_t>(fusion_steps))));
        std::vector<LocalTracker> trackers;
        for (std::size_t i = 0; i < sensors.size(); ++i) {
            trackers.emplace_back(sensors[i], tcfg, static_cast<std::uint64_t>(i) << 40);
        }
        std::vector<FusionCenter> centers;
        for (Method m : cfg.fusers) {
            centers.emplace_back(m, cfg.objective, p);
        }
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> normal(0.0, 1.0);

        try {
            for (int k = 0; k <= scans; ++k) {
                const double t = k * p.scan_period;
                const auto& xs = truth[static_cast<std::size_t>(k)];
                for (std::size_t i = 0; i < sensors.size(); ++i) {
                    const RangeBearingSensor& s = sensors[i];
                    std::vector<Vector> zs;
                    for (std::size_t j = 0; j < nt; ++j) {
                        if (!s.covers(xs[j].head<2>()) || unit(rng) >= s.p_detect) continue;
                        Vector z = range_bearing(xs[j], s);
                        z(0) += s.sigma_r * normal(rng);
                        z(1) = wrap_angle(z(1) + s.sigma_theta * normal(rng));
                        zs.push_back(std::move(z));
                    }
                    std::poisson_distribution<int> clutter(s.expected_clutter());
                    const int nc = clutter(rng);
                    for (int c = 0; c < nc; ++c) {
                        Vector z(2);
                        z << s.coverage * unit(rng), wrap_angle(std::numbers::pi * (2.0 * unit(rng) - 1.0));
                        zs.push_back(std::move(z));
                    }
                    trackers[i].process_scan(t, zs);
                }
                if (k == 0 || k % ratio != 0) continue;
                const auto step = static_cast<std::size_t>(k / ratio - 1);
                std::vector<std::vector<Track>> lists;
                for (const auto& tr : trackers) {
                    lists.push_back(tr.confirmed());
                }
                for (std::size_t f = 0; f < nf; ++f) {
                    if (failed[ru][f]) continue;
                    const auto t0 = clock::now();
                    try {
                        centers[f].cycle(t, lists);
                        const auto& g = centers[f].globals();
                        AssignmentProblem prob{Matrix(nt, g.size()), p.truth_gate};
                        for (std::size_t j = 0; j < nt; ++j) {
                            for (std::size_t i = 0; i < g.size(); ++i) {
                                prob.cost(j, i) = excluded[j] ? std::numeric_limits<double>::infinity()
                                                              : (g[i].estimate.mean().head<2>() - xs[j].head<2>()).norm();
                            }
                        }
                        const Matching match = solve_assignment(prob);
                        for (std::size_t j = 0; j < nt; ++j) {
                            const int i = match.row_to_col[j];
                            if (i < 0) continue;
                            const GaussianEstimate& e = g[static_cast<std::size_t>(i)].estimate;
                            const Vector err = e.mean() - xs[j];
                            Sample& smp = samples[f][j][step];
                            smp.valid = true;
                            smp.pos_err2 = err.head<2>().squaredNorm();
                            smp.vel_err2 = err.tail<2>().squaredNorm();
                            smp.nees = nees(err, e.cov());
                            smp.trace = e.cov().trace();
                            smp.pos_trace = e.cov().topLeftCorner<2, 2>().trace();
                        }
                    } catch (const Error&) {
                        failed[ru][f] = 1;
                    }
                    seconds[ru][f] += std::chrono::duration<double>(clock::now() - t0).count();
                }
            }
        } catch (const Error&) {
            std::fill(failed[ru].begin(), failed[ru].end(), 1);
        }
    });

    RunReport report;
    report.config = cfg;
    const double loss2 = p.loss_threshold * p.loss_threshold;
    for (std::size_t f = 0; f < nf; ++f) {
        FuserReport fr;
        fr.fuser = to_string(cfg.fusers[f]);
        for (std::size_t r = 0; r < runs.size(); ++r) {
            fr.failures += failed[r][f] ? 1 : 0;
            fr.wall_seconds += seconds[r][f];
        }
        check_failure_rate(fr.fuser, fr.failures, cfg.mc_runs);
        double nees_all = 0.0;
        int nees_steps = 0;
        int above_all = 0;
        for (std::size_t j = 0; j < nt; ++j) {
            if (excluded[j]) continue;
            const std::string name = "T" + std::to_string(j + 1);
            double rmse_sum = 0.0;
            double nees_sum = 0.0;
            double trace_sum = 0.0;
            double pos_trace_sum = 0.0;
            int covered = 0;
            int above = 0;
            for (int s = 0; s < fusion_steps; ++s) {
                int m = 0;
                double pe = 0.0;
                double ve = 0.0;
                double ne = 0.0;
                double tr = 0.0;
                double ptr = 0.0;
                for (std::size_t r = 0; r < runs.size(); ++r) {
                    if (failed[r][f]) continue;
                    const Sample& smp = runs[r][f][j][static_cast<std::size_t>(s)];
                    if (!smp.valid || smp.pos_err2 > loss2) continue;
                    ++m;
                    pe += smp.pos_err2;
                    ve += smp.vel_err2;
                    ne += smp.nees;
                    tr += smp.trace;
                    ptr += smp.pos_trace;
                }
                if (m == 0) continue;
                const int step = s + 1;
                const double t = step * p.fusion_period;
                const NeesBounds b = nees_bounds(m, 4);
                const double rm = std::sqrt(pe / m);
                const double nm = ne / m;
                fr.rows.push_back({name, step, t, "rmse", rm, std::nullopt, std::nullopt});
                fr.rows.push_back({name, step, t, "velocity_rmse", std::sqrt(ve / m), std::nullopt, std::nullopt});
                fr.rows.push_back({name, step, t, "nees", nm, b.lower, b.upper});
                fr.rows.push_back({name, step, t, "reported_trace", tr / m, std::nullopt, std::nullopt});
                fr.rows.push_back({name, step, t, "track_fraction", static_cast<double>(m) / cfg.mc_runs,
                                   std::nullopt, std::nullopt});
                rmse_sum += rm;
                nees_sum += nm;
                trace_sum += tr / m;
                pos_trace_sum += ptr / m;
                above += nm > b.upper ? 1 : 0;
                ++covered;
            }
            if (covered == 0) continue;
            fr.summary["rmse_mean/" + name] = rmse_sum / covered;
            fr.summary["nees_mean/" + name] = nees_sum / covered;
            fr.summary["reported_trace_mean/" + name] = trace_sum / covered;
            fr.summary["reported_pos_trace_mean/" + name] = pos_trace_sum / covered;
            fr.summary["nees_above_upper_frac/" + name] = static_cast<double>(above) / covered;
            fr.summary["tracked_steps_frac/" + name] = static_cast<double>(covered) / fusion_steps;
            nees_all += nees_sum;
            nees_steps += covered;
            above_all += above;
        }
        if (nees_steps > 0) {
            fr.summary["nees_mean"] = nees_all / nees_steps;
            fr.summary["nees_above_upper_frac"] = static_cast<double>(above_all) / nees_steps;
        }
        report.fusers.push_back(std::move(fr));
    }
    return report;
}

} // namespace detail

} // namespace trackfuse
