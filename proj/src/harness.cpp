#include "harness_internal.hpp"

#include "trackfuse/kalman.hpp"
#include "trackfuse/metrics.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace trackfuse {

namespace detail {

namespace {

using clock = std::chrono::steady_clock;

Vector draw_gaussian(Rng& rng, const Vector& mean, const Matrix& cov)
{
    if (cov.isZero(0.0)) {
        return mean;
    }
    const Matrix l = Eigen::LLT<Matrix>(make_spd(cov, "sampling covariance")).matrixL();
    return mean + l * standard_normal(rng, mean.size());
}

struct StepSample {
    Vector error;
    Matrix cov;
    double omega = std::numeric_limits<double>::quiet_NaN();
};

struct FuserRun {
    bool failed = false;
    std::vector<StepSample> steps;
    double seconds = 0.0;
};

bool weighted(Method m)
{
    return m == Method::ci || m == Method::ici || m == Method::hmd_ga;
}

// Fuses the local estimates along the graph; returns the sink estimate and
// the weight of the last fusion performed at the sink.
std::pair<GaussianEstimate, double> fuse_graph(const NodeGraph& g, const std::vector<GaussianEstimate>& locals,
                                               Method m, Objective obj)
{
    std::vector<std::optional<GaussianEstimate>> out(locals.size());
    const int sink = g.sink();
    double sink_omega = std::numeric_limits<double>::quiet_NaN();
    for (int v : g.topological_order()) {
        GaussianEstimate est = locals[static_cast<std::size_t>(v)];
        for (int u : g.inbound(v)) {
            const FusedResult f = fuse(m, est, *out[static_cast<std::size_t>(u)], obj);
            est = f.estimate;
            if (v == sink && weighted(m)) {
                sink_omega = f.weight.omega;
            }
        }
        out[static_cast<std::size_t>(v)] = std::move(est);
    }
    return {*out[static_cast<std::size_t>(sink)], sink_omega};
}

MetricRow row(const std::string& target, int step, double t, const std::string& metric, double value,
              std::optional<double> lo = std::nullopt, std::optional<double> hi = std::nullopt)
{
    return MetricRow{target, step, t, metric, value, lo, hi};
}

} // namespace

RunReport run_linear(const ScenarioConfig& cfg)
{
    const ConsistencyParams& c = cfg.consistency;
    const std::size_t nf = cfg.fusers.size();
    const auto nodes = c.nodes.size();
    std::vector<std::vector<FuserRun>> runs(static_cast<std::size_t>(cfg.mc_runs), std::vector<FuserRun>(nf));

    parallel_runs(cfg.mc_runs, cfg.threads, [&](int r) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
        auto& slot = runs[static_cast<std::size_t>(r)];
        const GaussianEstimate prior(c.prior_mean, c.prior_cov);
        Vector x = draw_gaussian(rng, c.prior_mean, c.prior_cov);
        std::vector<GaussianEstimate> locals(nodes, prior);
        GaussianEstimate central = prior;
        for (int k = 1; k <= c.steps; ++k) {
            if (c.predict_first || k > 1) {
                x = c.F * x + draw_gaussian(rng, Vector::Zero(x.size()), c.Q);
                for (auto& l : locals) {
                    l = kf_predict(l, c.F, c.Q);
                }
                central = kf_predict(central, c.F, c.Q);
            }
            std::vector<LinearMeasurement> meas;
            meas.reserve(nodes);
            for (std::size_t i = 0; i < nodes; ++i) {
                const auto& spec = c.nodes[i];
                Vector z = spec.H * x + draw_gaussian(rng, Vector::Zero(spec.R.rows()), spec.R);
                meas.push_back({std::move(z), spec.H, spec.R});
                locals[i] = kf_update(locals[i], meas.back());
            }
            central = centralized(central, meas);
            for (std::size_t f = 0; f < nf; ++f) {
                FuserRun& fr = slot[f];
                if (fr.failed) continue;
                const auto t0 = clock::now();
                try {
                    StepSample s;
                    if (cfg.fusers[f] == Method::centralized) {
                        s.error = central.mean() - x;
                        s.cov = central.cov();
                    } else {
                        const auto [est, w] = fuse_graph(c.graph, locals, cfg.fusers[f], cfg.objective);
                        s.error = est.mean() - x;
                        s.cov = est.cov();
                        s.omega = w;
                    }
                    fr.steps.push_back(std::move(s));
                } catch (const Error&) {
                    fr.failed = true;
                }
                fr.seconds += std::chrono::duration<double>(clock::now() - t0).count();
            }
        }
    });

    RunReport report;
    report.config = cfg;
    const std::string sink = c.graph.names[static_cast<std::size_t>(c.graph.sink())];
    const auto n = c.prior_mean.size();
    for (std::size_t f = 0; f < nf; ++f) {
        FuserReport fr;
        fr.fuser = to_string(cfg.fusers[f]);
        for (const auto& run : runs) {
            fr.failures += run[f].failed ? 1 : 0;
            fr.wall_seconds += run[f].seconds;
        }
        check_failure_rate(fr.fuser, fr.failures, cfg.mc_runs);
        const int m = cfg.mc_runs - static_cast<int>(fr.failures);
        const NeesBounds bounds = nees_bounds(m, static_cast<int>(n));
        for (int k = 0; k < c.steps; ++k) {
            Matrix mse = Matrix::Zero(n, n);
            Matrix rep = Matrix::Zero(n, n);
            Vector mean_err = Vector::Zero(n);
            double nees_sum = 0.0;
            double w_sum = 0.0;
            double w_lo = std::numeric_limits<double>::infinity();
            double w_hi = -w_lo;
            int w_count = 0;
            for (const auto& run : runs) {
                if (run[f].failed) continue;
                const StepSample& s = run[f].steps[static_cast<std::size_t>(k)];
                mse += s.error * s.error.transpose();
                rep += s.cov;
                mean_err += s.error;
                nees_sum += nees(s.error, s.cov);
                if (!std::isnan(s.omega)) {
                    w_sum += s.omega;
                    w_lo = std::min(w_lo, s.omega);
                    w_hi = std::max(w_hi, s.omega);
                    ++w_count;
                }
            }
            mse /= m;
            rep /= m;
            mean_err /= m;
            const double t = static_cast<double>(k + 1);
            const int step = k + 1;
            fr.rows.push_back(row(sink, step, t, "rmse", std::sqrt(mse.trace())));
            fr.rows.push_back(row(sink, step, t, "sample_trace", mse.trace()));
            fr.rows.push_back(row(sink, step, t, "reported_trace", rep.trace()));
            fr.rows.push_back(row(sink, step, t, "nees", nees_sum / m, bounds.lower, bounds.upper));
            if (w_count > 0) {
                fr.rows.push_back(row(sink, step, t, "omega", w_sum / w_count, w_lo, w_hi));
            }
            if (k + 1 == c.steps) {
                ConsistencySummary cs;
                cs.sample_cov = mse;
                cs.reported_cov = rep;
                cs.mean_error = mean_err;
                cs.mean_nees = nees_sum / m;
                fr.summary["sample_trace"] = mse.trace();
                fr.summary["reported_trace"] = rep.trace();
                fr.summary["trace_ratio"] = mse.trace() / rep.trace();
                fr.summary["min_eig_reported_minus_sample"] = min_eigenvalue(rep - mse);
                fr.summary["mean_nees"] = cs.mean_nees;
                if (n >= 2) {
                    const Vector centre = Vector::Zero(n);
                    fr.ellipses.push_back({"reported", sink, step, ellipse_from_cov(GaussianEstimate(centre, rep))});
                    fr.ellipses.push_back({"sample", sink, step, ellipse_from_cov(GaussianEstimate(centre, mse))});
                }
                fr.consistency = std::move(cs);
            }
        }
        report.fusers.push_back(std::move(fr));
    }
    return report;
}

RunReport run_scalar(const ScenarioConfig& cfg)
{
    const ScalarParams& p = cfg.scalar;
    const std::size_t nf = cfg.fusers.size();
    std::vector<std::vector<FuserRun>> runs(static_cast<std::size_t>(cfg.mc_runs), std::vector<FuserRun>(nf));
    Matrix noise(2, 2);
    const double cross = p.rho * std::sqrt(p.q * p.r);
    noise << p.q, cross, cross, p.r;

    parallel_runs(cfg.mc_runs, cfg.threads, [&](int r) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
        auto& slot = runs[static_cast<std::size_t>(r)];
        double x = 0.0;
        std::vector<GaussianEstimate> est(nf, GaussianEstimate(Vector::Zero(1), Matrix::Constant(1, 1, p.p0)));
        for (int k = 0; k < p.steps; ++k) {
            const Vector wv = draw_gaussian(rng, Vector::Zero(2), noise);
            x += wv(0);
            const double z = x + wv(1);
            const GaussianEstimate meas(Vector::Constant(1, z), Matrix::Constant(1, 1, p.r));
            for (std::size_t f = 0; f < nf; ++f) {
                FuserRun& fr = slot[f];
                if (fr.failed) continue;
                const auto t0 = clock::now();
                try {
                    const auto& cur = est[f];
                    const GaussianEstimate predicted(cur.mean(), cur.cov() + Matrix::Constant(1, 1, p.q));
                    const FusedResult res = fuse(cfg.fusers[f], predicted, meas, cfg.objective);
                    est[f] = res.estimate;
                    StepSample s;
                    s.error = res.estimate.mean() - Vector::Constant(1, x);
                    s.cov = res.estimate.cov();
                    if (weighted(cfg.fusers[f])) s.omega = res.weight.omega;
                    fr.steps.push_back(std::move(s));
                } catch (const Error&) {
                    fr.failed = true;
                }
                fr.seconds += std::chrono::duration<double>(clock::now() - t0).count();
            }
        }
    });

    RunReport report;
    report.config = cfg;
    for (std::size_t f = 0; f < nf; ++f) {
        FuserReport fr;
        fr.fuser = to_string(cfg.fusers[f]);
        for (const auto& run : runs) {
            fr.failures += run[f].failed ? 1 : 0;
            fr.wall_seconds += run[f].seconds;
        }
        check_failure_rate(fr.fuser, fr.failures, cfg.mc_runs);
        const int m = cfg.mc_runs - static_cast<int>(fr.failures);
        const NeesBounds bounds = nees_bounds(m, 1);
        double w_all = 0.0;
        double w_min = std::numeric_limits<double>::infinity();
        double w_max = -w_min;
        int w_count = 0;
        for (int k = 0; k < p.steps; ++k) {
            double se = 0.0;
            double ne = 0.0;
            double ws = 0.0;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            int wc = 0;
            for (const auto& run : runs) {
                if (run[f].failed) continue;
                const StepSample& s = run[f].steps[static_cast<std::size_t>(k)];
                se += s.error.squaredNorm();
                ne += nees(s.error, s.cov);
                if (!std::isnan(s.omega)) {
                    ws += s.omega;
                    lo = std::min(lo, s.omega);
                    hi = std::max(hi, s.omega);
                    ++wc;
                }
            }
            const int step = k + 1;
            const double t = step;
            fr.rows.push_back(row("x", step, t, "rmse", std::sqrt(se / m)));
            fr.rows.push_back(row("x", step, t, "nees", ne / m, bounds.lower, bounds.upper));
            if (wc > 0) {
                fr.rows.push_back(row("x", step, t, "omega", ws / wc, lo, hi));
                w_all += ws;
                w_count += wc;
                w_min = std::min(w_min, lo);
                w_max = std::max(w_max, hi);
            }
        }
        if (w_count > 0) {
            fr.summary["omega_mean"] = w_all / w_count;
            fr.summary["omega_min"] = w_min;
            fr.summary["omega_max"] = w_max;
        }
        report.fusers.push_back(std::move(fr));
    }
    return report;
}

} // namespace detail

RunReport run(const ScenarioConfig& config)
{
    config.validate();
    switch (config.kind) {
    case ScenarioKind::consistency1:
    case ScenarioKind::consistency2: return detail::run_linear(config);
    case ScenarioKind::scalar_weight: return detail::run_scalar(config);
    case ScenarioKind::surveillance: return detail::run_surveillance(config);
    }
    throw ConfigError("unknown scenario kind");
}

} // namespace trackfuse
