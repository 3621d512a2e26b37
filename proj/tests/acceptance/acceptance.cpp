// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "trackfuse/assignment.hpp"
#include "trackfuse/fusion.hpp"
#include "trackfuse/grid.hpp"
#include "trackfuse/metrics.hpp"
#include "trackfuse/report_io.hpp"
#include "trackfuse/sampling.hpp"
#include "trackfuse/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace trackfuse;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(double v, int prec = 4)
{
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

int threads()
{
    return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

int failures = 0;

void criterion(int id, const std::string& title, double limit_s, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0.0 && secs > limit_s) {
        o.pass = false;
        o.note("runtime above " + fmt(limit_s) + " s");
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %s [%.1f s] %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
}

// checks (a)-(d) shared by both consistency scenarios
void consistency_checks(const RunReport& r, Outcome& o)
{
    const auto& cen = r.fuser("centralized").summary;
    const auto& nai = r.fuser("naive").summary;
    o.check(std::abs(cen.at("trace_ratio") - 1.0) < 0.10, "centralized ratio " + fmt(cen.at("trace_ratio")));
    o.check(nai.at("trace_ratio") > 1.5, "naive ratio " + fmt(nai.at("trace_ratio")));
    for (const char* f : {"ci", "ici", "hmd-ga"}) {
        const auto& s = r.fuser(f).summary;
        const double tol = -0.02 * s.at("reported_trace");
        o.check(s.at("min_eig_reported_minus_sample") >= tol,
                std::string(f) + " min eig " + fmt(s.at("min_eig_reported_minus_sample")));
    }
    const double h = r.fuser("hmd-ga").summary.at("reported_trace");
    const double i = r.fuser("ici").summary.at("reported_trace");
    const double c = r.fuser("ci").summary.at("reported_trace");
    o.check(h <= 1.01 * i && i <= 1.01 * c, "trace ordering " + fmt(h) + " " + fmt(i) + " " + fmt(c));
    o.note("centralized " + fmt(cen.at("trace_ratio")) + ", naive " + fmt(nai.at("trace_ratio")) +
           ", traces hmd-ga/ici/ci " + fmt(h) + "/" + fmt(i) + "/" + fmt(c));
}

SampleFusionConfig sample_config(SourceRule rule, double inflation = 1.0)
{
    SampleFusionConfig c;
    c.samples = 5000;
    c.source = rule;
    c.inflation = inflation;
    c.seed = 42;
    return c;
}

double brute_force(const Matrix& c)
{
    std::vector<int> perm(static_cast<std::size_t>(c.rows()));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i) s += c(static_cast<Eigen::Index>(i), perm[i]);
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

bool deterministic(ScenarioConfig cfg, std::string& why)
{
    cfg.threads = 1;
    const RunReport a = run(cfg);
    cfg.threads = 2;
    const RunReport b = run(cfg);
    for (const auto& f : a.fusers) {
        for (const auto& row : f.rows) {
            const std::string& m = row.metric;
            if (metric_csv(a, f, m) != metric_csv(b, b.fuser(f.fuser), m)) {
                why = to_string(cfg.kind) + "/" + f.fuser + "/" + m;
                return false;
            }
        }
    }
    return true;
}

} // namespace

int main()
{
    const auto [g1, g2] = demo_gaussian_pair();

    criterion(1, "scalar weight degeneracy", 10.0, [] {
        Outcome o;
        ScenarioConfig cfg = build_scalar_weight();
        cfg.threads = threads();
        const RunReport r = run(cfg);
        const auto& c = r.fuser("ci").summary;
        const auto& i = r.fuser("ici").summary;
        const auto& h = r.fuser("hmd-ga").summary;
        o.check(c.at("omega_min") == 0.0 && c.at("omega_max") == 0.0, "ci weight not always 0");
        o.check(i.at("omega_min") == 1.0 && i.at("omega_max") == 1.0, "ici weight not always 1");
        o.check(h.at("omega_mean") >= 0.1 && h.at("omega_mean") <= 0.4, "hmd-ga mean weight");
        o.note("ci [" + fmt(c.at("omega_min")) + "," + fmt(c.at("omega_max")) + "], ici [" + fmt(i.at("omega_min")) +
               "," + fmt(i.at("omega_max")) + "], hmd-ga mean " + fmt(h.at("omega_mean")));
        return o;
    });

    criterion(2, "consistency test 1 (10 nodes, 5000 runs)", 120.0, [] {
        Outcome o;
        ScenarioConfig cfg = build_consistency1();
        cfg.threads = threads();
        consistency_checks(run(cfg), o);
        return o;
    });

    criterion(3, "consistency test 2 (5 nodes, 5 steps, 5000 runs)", 120.0, [] {
        Outcome o;
        ScenarioConfig cfg = build_consistency2();
        cfg.threads = threads();
        const RunReport r = run(cfg);
        consistency_checks(r, o);
        const double h = r.fuser("hmd-ga").summary.at("sample_trace");
        const double c = r.fuser("centralized").summary.at("sample_trace");
        o.check(std::abs(h / c - 1.0) <= 0.25, "hmd-ga sample trace " + fmt(h) + " vs centralized " + fmt(c) +
                                                   " (ratio " + fmt(h / c) + ")");
        return o;
    });

    criterion(4, "sampling matches grid oracle and closed-form CI", 30.0, [&] {
        Outcome o;
        const double w = 0.5;
        const auto axes = envelope_axes({g1, g2}, 401, 8.0);
        const GaussianEstimate oracle = grid_hmd(grid_eval(g1, axes), grid_eval(g2, axes), w).density.moments();
        const auto cfg = sample_config(SourceRule::from_p1);
        const GaussianMixture m1(g1), m2(g2);
        const WeightedSampleSet h = fused_samples(m1, m2, w, MeanRule::hmd, cfg);
        const WeightedSampleSet g = fused_samples(m1, m2, w, MeanRule::gmd, cfg);
        const GaussianEstimate c = ci(g1, g2, w).estimate;
        double worst_h = 0.0, worst_g = 0.0;
        auto z = [](double a, double b, double se) { return std::abs(a - b) / se; };
        for (int i = 0; i < 2; ++i) {
            worst_h = std::max(worst_h, z(h.mean()(i), oracle.mean()(i), h.mean_stderr()(i)));
            worst_g = std::max(worst_g, z(g.mean()(i), c.mean()(i), g.mean_stderr()(i)));
            for (int j = 0; j < 2; ++j) {
                worst_h = std::max(worst_h, z(h.cov()(i, j), oracle.cov()(i, j), h.cov_stderr()(i, j)));
                worst_g = std::max(worst_g, z(g.cov()(i, j), c.cov()(i, j), g.cov_stderr()(i, j)));
            }
        }
        o.check(worst_h <= 3.0, "hmd-s deviation " + fmt(worst_h) + " SE");
        o.check(worst_g <= 3.0, "gmd-s deviation " + fmt(worst_g) + " SE");
        o.note("max |z| hmd-s " + fmt(worst_h) + ", gmd-s " + fmt(worst_g));
        return o;
    });

    criterion(5, "covariance ordering naive < hmd-ga <= hmd-s <= gmd-s", 0.0, [&] {
        Outcome o;
        const auto cfg = sample_config(SourceRule::adaptive);
        const double n = naive(g1, g2).estimate.cov().trace();
        const double ga = hmd_ga(g1, g2, 0.5).estimate.cov().trace();
        const double hs = hmd_s_gaussian(g1, g2, 0.5, cfg).cov().trace();
        const double gs = gmd_s_gaussian(g1, g2, 0.5, cfg).cov().trace();
        o.check(n < ga && ga <= hs && hs <= gs, "ordering");
        o.note("traces " + fmt(n) + " < " + fmt(ga) + " <= " + fmt(hs) + " <= " + fmt(gs));
        return o;
    });

    criterion(6, "inflation monotonicity", 0.0, [&] {
        Outcome o;
        double prev = 0.0;
        std::string trail;
        for (double a : {1.0, 1.25, 1.5, 2.0}) {
            const double tr = hmd_s_gaussian(g1, g2, 0.5, sample_config(SourceRule::adaptive, a)).cov().trace();
            o.check(tr >= prev, "decrease at alpha " + fmt(a));
            trail += (trail.empty() ? "" : " ") + fmt(tr);
            prev = tr;
        }
        const double gs = gmd_s_gaussian(g1, g2, 0.5, sample_config(SourceRule::adaptive)).cov().trace();
        o.check(prev > gs, "alpha=2 not above gmd-s");
        o.note("traces " + trail + ", gmd-s " + fmt(gs));
        return o;
    });

    criterion(7, "eigenvalue interlacing hmd-ga vs ici", 0.0, [] {
        Outcome o;
        Rng rng(7);
        int bad = 0, total = 0;
        for (int k = 0; k < 100; ++k) {
            const Eigen::Index n = 2 + k % 4;
            const GaussianEstimate e1(standard_normal(rng, n), random_spd(rng, n));
            const GaussianEstimate e2(standard_normal(rng, n), random_spd(rng, n));
            for (double w : {0.3, 0.5, 0.7}) {
                ++total;
                bad += !hmd_vs_ici_eigen_compare(e1, e2, w, 1e-9).interlaced;
            }
        }
        o.check(bad == 0, std::to_string(bad) + " cases not interlaced");
        o.note(std::to_string(total - bad) + "/" + std::to_string(total) + " interlaced");
        return o;
    });

    criterion(8, "grid hmd minimizes weighted pearson divergence", 0.0, [&] {
        Outcome o;
        const double w = 0.5;
        const auto axes = envelope_axes({g1, g2}, 201, 8.0);
        const GridDensity p1 = grid_eval(g1, axes);
        const GridDensity p2 = grid_eval(g2, axes);
        const GridDensity h = grid_hmd(p1, p2, w).density;
        const double base = pearson_objective(h.values(), p1, p2, w);
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double worst = std::numeric_limits<double>::infinity();
        for (int d = 0; d < 5; ++d) {
            // bounded random shape times the density, centred to zero mass
            const double a = u(rng), b = u(rng), fx = 2.0 * u(rng), fy = 2.0 * u(rng);
            Eigen::ArrayXd g(h.size());
            for (Eigen::Index k = 0; k < h.size(); ++k) {
                const Vector x = h.point(k);
                g(k) = a * std::sin(fx * x(0) + b) + (1.0 - std::abs(a)) * std::cos(fy * x(1));
            }
            const Eigen::ArrayXd hw = h.values() * h.quadrature();
            const double gbar = (g * hw).sum() / hw.sum();
            const Eigen::ArrayXd dir = h.values() * (g - gbar);
            for (double eps : {-0.1, -0.01, 0.01, 0.1}) {
                const Eigen::ArrayXd q = h.values() + eps * dir;
                worst = std::min(worst, pearson_objective(q, p1, p2, w) - base);
            }
        }
        o.check(worst >= -1e-8, "objective decreased by " + fmt(-worst));
        o.note("min increase " + fmt(worst));
        return o;
    });

    criterion(9, "normalized hmd dominates pointwise minimum", 0.0, [] {
        Outcome o;
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> mu(-3.0, 3.0), var(0.2, 4.0), om(0.05, 0.95);
        double worst = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 20; ++k) {
            const GaussianEstimate a(Vector::Constant(1, mu(rng)), Matrix::Constant(1, 1, var(rng)));
            const GaussianEstimate b(Vector::Constant(1, mu(rng)), Matrix::Constant(1, 1, var(rng)));
            const auto axes = envelope_axes({a, b}, 4001, 10.0);
            const GridDensity p1 = grid_eval(a, axes);
            const GridDensity p2 = grid_eval(b, axes);
            const GridFusion f = grid_hmd(p1, p2, om(rng));
            worst = std::min(worst, (f.density.values() - p1.values().min(p2.values())).minCoeff());
        }
        o.check(worst >= -1e-8, "violation " + fmt(worst));
        o.note("min margin " + fmt(worst));
        return o;
    });

    criterion(10, "surveillance scenario (25 runs)", 1800.0, [] {
        Outcome o;
        ScenarioConfig cfg = build_surveillance();
        cfg.threads = threads();
        const RunReport r = run(cfg);
        auto sum = [&](const char* f, const std::string& key) { return r.fuser(f).summary.at(key); };
        for (int t : {4, 10, 15}) {
            const std::string k = "rmse_mean/T" + std::to_string(t);
            const double h = sum("hmd-ga", k), c = sum("ci", k), i = sum("ici", k);
            o.check(h <= 1.05 * std::min(c, i), "(a) T" + std::to_string(t) + " rmse hmd-ga " + fmt(h) + " vs ci " +
                                                    fmt(c) + ", ici " + fmt(i));
        }
        double spread = 0.0;
        for (int t : {3, 6, 9, 17, 20}) {
            const std::string k = "reported_trace_mean/T" + std::to_string(t);
            const double a = sum("ci", k), b = sum("ici", k), c = sum("hmd-ga", k);
            const double s = std::max({a, b, c}) / std::min({a, b, c}) - 1.0;
            spread = std::max(spread, s);
            o.check(s <= 0.10, "(b) T" + std::to_string(t) + " trace spread " + fmt(s));
        }
        const double above = sum("hmd-ga", "nees_above_upper_frac");
        o.check(above < 0.20, "(c) hmd-ga above bound on " + fmt(above) + " of steps");
        const double nc = sum("ci", "nees_mean"), ni = sum("ici", "nees_mean"), nh = sum("hmd-ga", "nees_mean");
        o.check(nc <= ni && nc <= nh, "(d) ci nees not lowest");
        o.note("category-C max trace spread " + fmt(spread) + ", hmd-ga above-bound fraction " + fmt(above) +
               ", mean nees ci/ici/hmd-ga " + fmt(nc) + "/" + fmt(ni) + "/" + fmt(nh));
        return o;
    });

    criterion(11, "assignment solver optimality", 0.0, [] {
        Outcome o;
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(0.0, 100.0);
        int bad = 0;
        for (int k = 0; k < 100; ++k) {
            const Eigen::Index n = 1 + k % 7;
            Matrix c(n, n);
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j) c(i, j) = u(rng);
            const Matching m = solve_assignment(AssignmentProblem{c});
            bad += std::abs(m.total - brute_force(c)) > 1e-9 * (1.0 + std::abs(m.total));
        }
        o.check(bad == 0, std::to_string(bad) + " suboptimal");
        o.note("100 instances up to 7x7");
        return o;
    });

    criterion(12, "bench ordering", 0.0, [] {
        Outcome o;
        const auto pairs = random_estimate_pairs(42, 256, 4);
        const BenchResult b =
            bench_fusers(pairs, {Method::naive, Method::ci, Method::ici, Method::hmd_ga}, 10000);
        const double ci_ = b.median_ns[1], ici_ = b.median_ns[2], hmd = b.median_ns[3];
        o.check(b.median_ns[0] < std::min({ci_, ici_, hmd}), "naive not fastest");
        o.check(ici_ > ci_ && ici_ > hmd, "ici not slowest");
        o.check(hmd <= 1.2 * ci_, "hmd-ga above ci + 20%");
        o.note("relative naive/ci/ici/hmd-ga " + fmt(b.relative[0]) + "/" + fmt(b.relative[1]) + "/" +
               fmt(b.relative[2]) + "/" + fmt(b.relative[3]));
        return o;
    });

    criterion(13, "determinism across reruns and thread counts", 0.0, [] {
        Outcome o;
        std::string why;
        ScenarioConfig s = build_scalar_weight();
        s.mc_runs = 50;
        o.check(deterministic(s, why), why);
        ScenarioConfig c1 = build_consistency1();
        c1.mc_runs = 200;
        o.check(deterministic(c1, why), why);
        ScenarioConfig c2 = build_consistency2();
        c2.mc_runs = 200;
        o.check(deterministic(c2, why), why);
        ScenarioConfig sv = build_surveillance();
        sv.mc_runs = 2;
        sv.surveillance.duration = 600.0;
        o.check(deterministic(sv, why), why);
        o.note("scalar, consistency 1/2, surveillance CSVs identical");
        return o;
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
