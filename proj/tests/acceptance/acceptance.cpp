// One PASS/FAIL line per acceptance criterion. Tolerances and time limits are
// the constants at the top of each check.

#include "wsnc/cli.hpp"
#include "wsnc/config.hpp"
#include "wsnc/errors.hpp"
#include "wsnc/kernel.hpp"
#include "wsnc/mellin.hpp"
#include "wsnc/optimize.hpp"
#include "wsnc/scenario.hpp"
#include "wsnc/sim.hpp"
#include "wsnc/special.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace wsnc;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

double db(double v) { return std::pow(10.0, v / 10.0); }

int failures = 0;

void report(int id, const char* title, double limit_s, const std::function<Verdict()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = check();
    } catch (const std::exception& e) {
        v.pass = false;
        v.detail = std::string("exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (elapsed >= limit_s) v.require(false, fmt("runtime %.1f s over the %.0f s limit", elapsed, limit_s));
    if (!v.pass) ++failures;
    std::printf("criterion %2d %s  %s [%.2f s / %.0f s]%s%s\n", id, v.pass ? "PASS" : "FAIL", title, elapsed, limit_s,
                v.detail.empty() ? "" : "  ", v.detail.c_str());
    std::fflush(stdout);
}

// Γ(a, x) = x^a ∫_0^∞ e^{a u} e^{-x e^u} du after t = x e^u, by adaptive
// Gauss-Kronrod on a range cut where the integrand is below e^-800 of its peak.
double upper_gamma_by_quadrature(double a, double x) {
    auto f = [a, x](double u) { return std::exp(a * u - x * std::exp(u)); };
    const double upper = std::log((x + 800.0 + std::abs(a) * 40.0) / x) + 2.0;
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, upper, 30, 1e-14, &err);
    return std::exp(a * std::log(x)) * v;
}

double bruteforce(const PathModel& p, double s, int w) {
    for (int horizon = 256;; horizon *= 2) {
        const auto r = kernel_path_bruteforce(p, s, w, horizon);
        if (r.tail_ok) return r.value;
        if (horizon > (1 << 22)) throw NumericError("brute force horizon exhausted");
    }
}

PathModel shannon_path(const std::vector<double>& snr_db, double rate) {
    PathModel p;
    for (double g : snr_db) p.links.push_back(LinkService::shannon({db(g), 20.0}));
    p.arrival = {rate, 1};
    return p;
}

Scenario table_path(const std::vector<double>& lengths) {
    Scenario sc;
    sc.name = fmt("R%g", path_norm(lengths));
    sc.geometry.link_lengths_m = lengths;
    return sc;
}

Scenario whart_path(const std::vector<double>& lengths) {
    Scenario sc = table_path(lengths);
    sc.service.kind = ServiceKind::WirelessHart;
    sc.arrival = {80.0, 1};
    return sc;
}

const std::vector<std::pair<std::vector<double>, double>> kTable{
    {{20, 19, 21}, 4}, {{20, 30, 10}, 40}, {{5, 28, 27}, 46},
    {{20, 35, 5}, 60}, {{5, 40, 15}, 70}, {{5, 50.5, 4.5}, 92},
};

Verdict mellin_identities() {
    constexpr double kTol = 1e-10;
    Verdict v;
    double worst = 0.0;
    for (double snr_db : {-10.0, 0.0, 5.0, 15.0, 30.0}) {
        const double g = db(snr_db);
        worst = std::max(worst, std::abs(mellin_service_shannon({g, 20.0}, 1.0).value() - 1.0));
        worst = std::max(worst, std::abs(mellin_service_whart({1016, frame_success_prob(g, 1016)}, 1.0).value() - 1.0));
        // c = 1 nat per symbol, u = 2: E[1 + γ].
        worst = std::max(worst, rel_err(mellin_service_shannon({g, std::numbers::ln2}, 2.0).value(), 1.0 + g));
    }
    for (double rate : {0.0, 20.0, 80.0}) worst = std::max(worst, std::abs(mellin_arrival({rate, 1}, 0.0).value() - 1.0));
    v.require(worst <= kTol, fmt("worst deviation %.3g", worst));
    v.detail += fmt("%sworst relative deviation %.2g (tol %.0e)", v.detail.empty() ? "" : "; ", worst, kTol);
    return v;
}

Verdict incomplete_gamma() {
    constexpr double kTol = 1e-9;
    Verdict v;
    std::mt19937_64 rng(20151);
    std::uniform_real_distribution<double> a_dist(-3.0, 5.0);
    std::uniform_real_distribution<double> x_dist(0.0, 20.0);
    double worst = 0.0;
    int bad = 0;
    for (int i = 0; i < 200; ++i) {
        const double a = a_dist(rng);
        double x = x_dist(rng);
        if (x == 0.0) x = 20.0;
        const double e = rel_err(special::upper_incomplete_gamma(a, x), upper_gamma_by_quadrature(a, x));
        worst = std::max(worst, e);
        if (!(e <= kTol)) ++bad;
    }
    v.require(bad == 0, fmt("%d of 200 points above tolerance", bad));
    v.detail += fmt("%s200 points, worst relative error %.2g (tol %.0e)", v.detail.empty() ? "" : "; ", worst, kTol);
    return v;
}

Verdict recursion() {
    constexpr double kBruteTol = 1e-8;
    constexpr double kInvariantTol = 1e-10;
    constexpr double kWorked = 60.1428571429;
    Verdict v;
    std::mt19937_64 rng(2015);
    std::uniform_real_distribution<double> snr(0.0, 25.0);
    std::uniform_real_distribution<double> frac(0.05, 0.9);
    std::uniform_real_distribution<double> load(0.2, 0.9);
    std::uniform_int_distribution<int> w_dist(0, 12);
    double worst_brute = 0.0;
    for (int hops : {2, 3}) {
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> snrs(hops);
            for (auto& g : snrs) g = snr(rng);
            // Rate below the weakest link's mean Shannon rate.
            const double weakest = *std::min_element(snrs.begin(), snrs.end());
            auto p = shannon_path(snrs, 0.0);
            const double ergodic = 20.0 * std::log2(1.0 + db(weakest)) * 0.5;
            p.arrival.rate_bits = load(rng) * ergodic;
            const double s = frac(rng) * stability_boundary(p);
            const int w = w_dist(rng);
            worst_brute = std::max(worst_brute, rel_err(kernel_path(p, s, w).value, bruteforce(p, s, w)));
        }
    }
    v.require(worst_brute <= kBruteTol, fmt("brute-force deviation %.3g", worst_brute));

    // Worked two-hop value on constant transforms 0.8 and 0.6 with arrival 1.2.
    PathModel worked;
    worked.links = {LinkService::constant(0.8), LinkService::constant(0.6)};
    worked.arrival = {std::log(1.2) / 0.05, 1};
    const double k2 = kernel_path(worked, 0.05, 2).value;
    v.require(std::abs(k2 - kWorked) <= 5e-11, fmt("worked value %.12g", k2));

    // Pivot and permutation invariance on separated links.
    double worst_invariant = 0.0;
    std::uniform_real_distribution<double> sep(1.5, 6.0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> snrs{snr(rng)};
        for (int n = 1; n < 4; ++n) snrs.push_back(snrs.back() + sep(rng));
        std::shuffle(snrs.begin(), snrs.end(), rng);
        auto p = shannon_path(snrs, 0.0);
        p.arrival.rate_bits = load(rng) * 20.0 * std::log2(1.0 + db(*std::min_element(snrs.begin(), snrs.end()))) * 0.5;
        const double s = frac(rng) * stability_boundary(p);
        KernelOptions rec;
        rec.route = KernelRoute::Recursion;
        const double ref = kernel_path(p, s, 6, rec).value;
        for (int m = 0; m + 1 < static_cast<int>(p.links.size()); ++m) {
            KernelOptions opts = rec;
            opts.pivot = m;
            worst_invariant = std::max(worst_invariant, rel_err(kernel_path(p, s, 6, opts).value, ref));
        }
        std::vector<int> order(p.links.size());
        std::iota(order.begin(), order.end(), 0);
        while (std::next_permutation(order.begin(), order.end())) {
            PathModel q;
            q.arrival = p.arrival;
            for (int i : order) q.links.push_back(p.links[i]);
            worst_invariant = std::max(worst_invariant, rel_err(kernel_path(q, s, 6).value, ref));
        }
    }
    v.require(worst_invariant <= kInvariantTol, fmt("invariance deviation %.3g", worst_invariant));
    v.detail += fmt("%s100 brute-force instances worst %.2g (tol %.0e); worked value %.10f; pivot/permutation worst %.2g (tol %.0e)",
                    v.detail.empty() ? "" : "; ", worst_brute, kBruteTol, k2, worst_invariant, kInvariantTol);
    return v;
}

Verdict convexity() {
    constexpr double kSlack = 1e-9;
    Verdict v;
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> snr(0.0, 25.0);
    std::uniform_real_distribution<double> load(0.2, 0.9);
    std::uniform_real_distribution<double> q_dist(0.6, 1.0);
    std::uniform_int_distribution<int> hops_dist(1, 4);
    std::uniform_int_distribution<int> w_dist(0, 15);
    int violations = 0;
    double worst = 0.0;  // most negative second difference over |K|
    auto scan = [&](const PathModel& p, int w) {
        const double b = stability_boundary(p);
        std::vector<double> k;
        for (int i = 1; i <= 100; ++i) k.push_back(kernel_path(p, b * i / 101.0, w).value);
        for (std::size_t i = 1; i + 1 < k.size(); ++i) {
            const double d2 = k[i - 1] - 2.0 * k[i] + k[i + 1];
            worst = std::min(worst, d2 / std::abs(k[i]));
            if (d2 < -kSlack * std::abs(k[i])) ++violations;
        }
    };
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> snrs(hops_dist(rng));
        for (auto& g : snrs) g = snr(rng);
        auto p = shannon_path(snrs, 0.0);
        p.arrival.rate_bits = load(rng) * 20.0 * std::log2(1.0 + db(*std::min_element(snrs.begin(), snrs.end()))) * 0.5;
        scan(p, w_dist(rng));
    }
    for (int trial = 0; trial < 20; ++trial) {
        PathModel p;
        double q_min = 1.0;
        for (int n = hops_dist(rng); n > 0; --n) {
            const double q = q_dist(rng);
            q_min = std::min(q_min, q);
            p.links.push_back(LinkService::whart({1016, q}, 0.0));
        }
        p.arrival = {load(rng) * 1016.0 * q_min, 1};
        scan(p, w_dist(rng));
    }
    v.require(violations == 0, fmt("%d negative second differences", violations));
    v.detail += fmt("%s40 instances x 98 second differences, most negative relative %.2g (slack %.0e)",
                    v.detail.empty() ? "" : "; ", worst, kSlack);
    return v;
}

// Least-squares slope of ln(y) against w.
double log_slope(const std::vector<int>& w, const std::vector<double>& y) {
    const double n = static_cast<double>(w.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double ly = std::log(y[i]);
        sx += w[i];
        sy += ly;
        sxx += static_cast<double>(w[i]) * w[i];
        sxy += w[i] * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Verdict bound_dominance(const std::string& scenario_dir) {
    constexpr double kSlopeTol = 0.15;
    constexpr std::int64_t kMinViolations = 10;
    Verdict v;
    std::vector<int> grid;
    for (int w = 2; w <= 12; ++w) grid.push_back(w);
    for (const char* name : {"single_hop_5db.ini", "three_hop_15_20_5db.ini"}) {
        const auto file = load_scenario(scenario_dir + "/" + name);
        const Scenario& sc = file.paths.front();
        const std::vector<double> powers(sc.hops(), sc.transceiver.p_max_w);
        const auto stats = simulate_path(sc, powers, grid, file.sim);
        const auto path = build_path(sc, powers);
        v.require(stats.slots_run == 10'000'000 && !stats.diverged, fmt("%s: run incomplete", name));
        std::vector<int> fit_w;
        std::vector<double> fit_emp, fit_bound;
        // The point estimate must not exceed the bound. The CI upper edge is
        // also compared, but with zero violations it is about 3.8/n, above the
        // bound at large w, so it is only counted.
        int dominated = 0;
        int resolved = 0;
        for (const auto& p : stats.points) {
            const double bound = violation_bound(path, p.w, file.optimizer.bound).epsilon;
            if (p.estimate <= bound) {
                ++dominated;
            } else {
                v.require(false, fmt("%s w=%d: estimate %.3g above bound %.3g", name, p.w, p.estimate, bound));
            }
            if (p.ci_high <= bound) ++resolved;
            if (p.violations >= kMinViolations) {
                fit_w.push_back(p.w);
                fit_emp.push_back(p.estimate);
                fit_bound.push_back(bound);
            }
        }
        if (fit_w.size() < 2) {
            v.require(false, fmt("%s: fewer than two w with %lld violations", name, static_cast<long long>(kMinViolations)));
            continue;
        }
        const double emp = log_slope(fit_w, fit_emp);
        const double bnd = log_slope(fit_w, fit_bound);
        const double mismatch = std::abs(emp / bnd - 1.0);
        v.require(mismatch <= kSlopeTol, fmt("%s: slope mismatch %.3f", name, mismatch));
        v.detail += fmt("%s%s: estimate <= bound at %d/%zu w (CI upper edge too at %d), slopes over w=%d..%d empirical %.4f bound %.4f (mismatch %.1f%%, tol %.0f%%), Little ratio %.4f",
                        v.detail.empty() ? "" : "; ", name, dominated, stats.points.size(), resolved, fit_w.front(), fit_w.back(),
                        emp, bnd, 100.0 * mismatch, 100.0 * kSlopeTol, stats.mean_backlog_bits / (stats.arrival_rate_bits * stats.mean_bit_delay));
    }
    return v;
}

Verdict baseline_identity() {
    constexpr double kWant = 7.5357e-3;
    constexpr double kTol = 1e-3;
    Verdict v;
    const auto base = qos_agnostic_baseline(table_path({20, 19, 21}), {});
    const double e = rel_err(base.total_w(), kWant);
    v.require(e <= kTol, "total off");
    v.detail += fmt("%stotal %.6f mW (relative deviation %.2g, tol %.0e)", v.detail.empty() ? "" : "; ", base.total_w() * 1e3, e, kTol);
    return v;
}

Verdict optimizer_contracts() {
    const QoSTarget base{10, 1e-3, 1e-5};
    Verdict v;
    std::string summary;
    for (const auto& [lengths, norm] : kTable) {
        const Scenario sc = table_path(lengths);
        double last_saving = -INFINITY;
        std::string savings;
        for (int w : {5, 10, 20}) {
            QoSTarget qos = base;
            qos.target_delay = w;
            const auto opt = minimize_power(sc, qos);
            const auto aware = qos_aware_baseline(sc, qos);
            const auto agnostic = qos_agnostic_baseline(sc, qos);
            const std::string where = fmt("R%g w=%d", norm, w);
            if (opt.status == AllocationStatus::Fail) {
                v.require(!opt.note.empty(), where + ": fail without a note");
                v.require(evaluate_allocation(sc, agnostic.powers_w, w).epsilon > qos.target_eps,
                          where + ": failed although p_max meets eps");
                savings += fmt(" %d:fail", w);
                continue;
            }
            v.require(opt.converged(), where + ": neither converged nor failed (" + opt.note + ")");
            // Recompute the bound from the returned powers rather than trusting the report.
            const double eps = evaluate_allocation(sc, opt.powers_w, w).epsilon;
            v.require(eps <= qos.target_eps && eps > qos.target_eps - qos.eps_tolerance,
                      where + fmt(": recomputed bound %.6g outside the window", eps));
            v.require(rel_err(eps, opt.achieved_eps) < 1e-9, where + ": reported bound differs from recomputed");
            v.require(aware.feasible() && opt.total_w() <= aware.total_w(), where + ": minimize above aware");
            v.require(aware.total_w() <= agnostic.total_w(), where + ": aware above agnostic");
            const double saving = saving_gain_percent(opt.total_w(), agnostic.total_w());
            v.require(saving > 0.0, where + ": saving not positive");
            v.require(saving >= last_saving, where + ": saving decreased in w");
            last_saving = saving;
            savings += fmt(" %d:%.1f%%", w, saving);
        }
        summary += fmt("%sR%g%s", summary.empty() ? "" : ";", norm, savings.c_str());
    }
    v.detail += (v.detail.empty() ? "" : "; ") + std::string("saving vs agnostic by w: ") + summary;
    return v;
}

Verdict path_norms() {
    Verdict v;
    for (const auto& [lengths, norm] : kTable) {
        const double r = path_norm(lengths);
        v.require(r == norm, fmt("R%g computed as %.17g", norm, r));
    }
    if (v.pass) v.detail = "6/6 exact";
    return v;
}

// Extension of the shortest battery duration over the QoS-agnostic baseline, percent.
double lifetime_extension(const std::vector<double>& lengths, BatteryPreset preset, int w) {
    Scenario sc = whart_path(lengths);
    const auto charges = battery_presets(preset, sc.geometry, mah_to_joule(3000.0, 3.0));
    const QoSTarget qos{w, 1e-3, 1e-5};
    const auto [life, state] = maximize_lifetime(sc, charges, qos);
    if (!life.feasible()) throw InfeasibleError(InfeasibleError::Reason::Target, "lifetime: " + life.note);
    const auto agnostic = qos_agnostic_baseline(sc, qos);
    const auto base = battery_durations(sc, charges, agnostic.powers_w);
    return 100.0 * (state.min_duration() / *std::min_element(base.begin(), base.end()) - 1.0);
}

Verdict lifetime_trends() {
    constexpr int kDelay = 10;
    Verdict v;
    std::vector<double> equal;
    std::string listed;
    for (const auto& [lengths, norm] : kTable) {
        equal.push_back(lifetime_extension(lengths, BatteryPreset::Equal, kDelay));
        listed += fmt("%sR%g %.2f%%", listed.empty() ? "" : ", ", norm, equal.back());
    }
    for (std::size_t i = 1; i < equal.size(); ++i) {
        v.require(equal[i] < equal[i - 1], fmt("equal batteries: R%g not below R%g", kTable[i].second, kTable[i - 1].second));
    }
    const double low = lifetime_extension(kTable.front().first, BatteryPreset::Proportional, kDelay);
    const double high = lifetime_extension(kTable.back().first, BatteryPreset::Proportional, kDelay);
    v.require(high > low, "proportional batteries: highest norm does not benefit more");
    v.detail += fmt("%sequal batteries, w=%d: %s; proportional: R92 %.2f%% vs R4 %.2f%%", v.detail.empty() ? "" : "; ",
                    kDelay, listed.c_str(), high, low);
    return v;
}

Verdict sim_gap() {
    constexpr double kMaxLifetimeGain = 15.0;
    Verdict v;
    const QoSTarget qos{10, 1e-3, 1e-5};
    const SimOptimizerConfig cfg;  // 1e6-slot evaluations
    std::string listed;
    // Every reference path that is feasible at w = 10 under the bound.
    for (const auto& lengths : {std::vector<double>{20, 19, 21}, std::vector<double>{20, 30, 10},
                                std::vector<double>{5, 28, 27}, std::vector<double>{20, 35, 5},
                                std::vector<double>{5, 40, 15}}) {
        const Scenario sc = table_path(lengths);
        const auto start = minimize_power(sc, qos);
        const auto refined = sim_minimize_power(sc, qos, start, cfg);
        const bool ok = refined.feasible() && refined.total_w() <= start.total_w();
        v.require(ok, sc.name + ": simulated total above the bound-based total");
        v.require(refined.achieved_eps <= qos.target_eps, sc.name + ": simulated eps above target");
        listed += fmt("%sminimize %s %.4f -> %.4f mW (sim eps %.3g)", listed.empty() ? "" : "; ", sc.name.c_str(),
                      start.total_w() * 1e3, refined.total_w() * 1e3, refined.achieved_eps);
    }
    for (const auto& lengths : {std::vector<double>{20, 19, 21}, std::vector<double>{20, 35, 5},
                                std::vector<double>{5, 50.5, 4.5}}) {
        const Scenario sc = whart_path(lengths);
        const auto charges = battery_presets(BatteryPreset::Equal, sc.geometry, mah_to_joule(3000.0, 3.0));
        const auto [start, state] = maximize_lifetime(sc, charges, qos);
        const auto [refined, theta] = sim_maximize_lifetime(sc, charges, qos, start, cfg);
        const double gain = 100.0 * (theta / state.min_duration() - 1.0);
        v.require(refined.feasible() && theta >= state.min_duration(), sc.name + ": simulated lifetime below bound-based");
        v.require(gain <= kMaxLifetimeGain, sc.name + fmt(": lifetime gain %.2f%% above %.0f%%", gain, kMaxLifetimeGain));
        v.require(refined.achieved_eps <= qos.target_eps, sc.name + ": simulated eps above target");
        listed += fmt("; lifetime %s +%.2f%% (sim eps %.3g)", sc.name.c_str(), gain, refined.achieved_eps);
    }
    v.detail += (v.detail.empty() ? "" : "; ") + listed;
    return v;
}

Verdict determinism(const std::string& scenario_dir) {
    Verdict v;
    const std::string three = scenario_dir + "/three_hop_15_20_5db.ini";
    const std::vector<std::vector<std::string>> commands{
        {"simulate", "--scenario", three, "--w", "0..8", "--slots", "200000", "--seed", "11"},
        {"validate", "--scenario", scenario_dir + "/single_hop_5db.ini", "--w", "1..6", "--slots", "200000"},
        {"minimize", "--scenario", scenario_dir + "/table1_shannon.ini", "--w", "5,10"},
        {"sweep", "--scenario", three, "--run", "simulate", "--w", "2..4", "--slots", "50000", "--vary",
         "sim.seed=1,2,3", "--vary", "service.arrival_bits=10,20", "--threads", "4"},
    };
    for (const auto& cmd : commands) {
        std::ostringstream a, b, ea, eb;
        const int ca = cli::run(cmd, a, ea);
        const int cb = cli::run(cmd, b, eb);
        v.require(ca == cb && a.str() == b.str() && !a.str().empty(), cmd.front() + ": outputs differ");
    }
    // Thread count must not change a sweep.
    auto single = commands.back();
    single.back() = "1";
    std::ostringstream a, b, e;
    cli::run(commands.back(), a, e);
    cli::run(single, b, e);
    v.require(a.str() == b.str(), "sweep output depends on the thread count");
    if (v.pass) v.detail = fmt("%zu commands repeated byte-identical; sweep identical at 1 and 4 threads", commands.size());
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string scenario_dir = argc > 1 ? argv[1] : WSNC_SCENARIO_DIR;
    report(1, "Mellin identities", 1, mellin_identities);
    report(2, "incomplete gamma vs quadrature", 10, incomplete_gamma);
    report(3, "kernel recursion correctness", 30, recursion);
    report(4, "kernel convexity in s", 30, convexity);
    report(5, "bound dominance and decay slope", 600, [&] { return bound_dominance(scenario_dir); });
    report(6, "QoS-agnostic baseline total", 1, baseline_identity);
    report(7, "optimizer contracts on the reference paths", 300, optimizer_contracts);
    report(8, "path norms", 1, path_norms);
    report(9, "lifetime extension trends", 600, lifetime_trends);
    report(10, "simulation vs bound gap", 1800, sim_gap);
    report(11, "deterministic CSV", 60, [&] { return determinism(scenario_dir); });
    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
