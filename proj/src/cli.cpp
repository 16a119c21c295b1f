#include "wsnc/cli.hpp"

#include "wsnc/config.hpp"
#include "wsnc/errors.hpp"
#include "wsnc/kernel.hpp"
#include "wsnc/optimize.hpp"
#include "wsnc/sim.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace wsnc::cli {
namespace {

const std::vector<std::string> kVerbs{"bound", "invert", "minimize", "lifetime",
                                      "simulate", "validate", "sweep", "norm"};

struct Options {
    std::string verb;
    std::string scenario;
    std::vector<std::string> sets;
    std::string w_spec;
    std::string baseline = "agnostic";
    std::string out;
    std::string format = "csv";
    bool timing = false;
    bool refine = false;
    std::vector<std::string> vary;
    std::string sweep_verb = "bound";
    int threads = 0;
};

// One output line; fields are pre-formatted strings in column order.
struct Row {
    std::string verb, scenario, path, params, method, w, target_eps, value, bound, ci_low, ci_high, s_star, status,
        powers_mw, total_mw, gain_pct, min_theta_sf, note, pathloss_exponent, reference_gain, noise_w,
        tx_overhead_w, runtime_s;

    std::vector<std::string> fields(bool timing) const {
        std::vector<std::string> f{std::to_string(kCsvSchema),
                                   verb, scenario, path, params, method, w, target_eps, value, bound, ci_low,
                                   ci_high, s_star, status, powers_mw, total_mw, gain_pct, min_theta_sf, note,
                                   pathloss_exponent, reference_gain, noise_w, tx_overhead_w};
        if (timing) f.push_back(runtime_s);
        return f;
    }
};

std::vector<std::string> header(bool timing) {
    std::vector<std::string> h{"schema", "verb", "scenario", "path", "params", "method", "w", "target_eps",
                               "value", "bound", "ci_low", "ci_high", "s_star", "status", "powers_mw",
                               "total_mw", "gain_pct", "min_theta_sf", "note", "pathloss_exponent",
                               "reference_gain", "noise_w", "tx_overhead_w"};
    if (timing) h.emplace_back("runtime_s");
    return h;
}

struct Outcome {
    bool infeasible = false;
    std::vector<std::string> messages;

    void flag(const std::string& message) {
        infeasible = true;
        messages.push_back(message);
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string fmt_powers_mw(const std::vector<double>& powers_w) {
    std::string out;
    for (std::size_t i = 0; i < powers_w.size(); ++i) {
        if (i > 0) out += ';';
        out += fmt(powers_w[i] * 1e3);
    }
    return out;
}

const char* status_name(AllocationStatus s) {
    switch (s) {
        case AllocationStatus::Converged: return "converged";
        case AllocationStatus::NotConverged: return "not-converged";
        case AllocationStatus::Fail: return "fail";
    }
    return "fail";
}

// "10", "2..12", "5,10,20" or mixtures such as "1..3,10".
std::vector<int> parse_w_grid(const std::string& spec) {
    std::vector<int> out;
    std::stringstream items(spec);
    for (std::string item; std::getline(items, item, ',');) {
        try {
            const auto dots = item.find("..");
            std::size_t used = 0;
            if (dots == std::string::npos) {
                out.push_back(std::stoi(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
                continue;
            }
            const std::string lo_text = item.substr(0, dots);
            const std::string hi_text = item.substr(dots + 2);
            const int lo = std::stoi(lo_text, &used);
            if (used != lo_text.size()) throw std::invalid_argument(item);
            const int hi = std::stoi(hi_text, &used);
            if (used != hi_text.size() || hi < lo) throw std::invalid_argument(item);
            for (int w = lo; w <= hi; ++w) out.push_back(w);
        } catch (const std::logic_error&) {
            throw DomainError("--w expects INT, LO..HI or a comma list, got '" + spec + "'");
        }
    }
    if (out.empty()) throw DomainError("--w lists no delays");
    for (int w : out) {
        if (w < 0) throw DomainError("target delays must be >= 0");
    }
    return out;
}

class Runner {
public:
    Runner(const ScenarioFile& file, const Options& opts, std::string params)
        : file_(file), opts_(opts), params_(std::move(params)) {
        grid_ = opts.w_spec.empty() ? std::vector<int>{file.qos.target_delay} : parse_w_grid(opts.w_spec);
    }

    std::vector<Row> run(const std::string& verb, Outcome& outcome) {
        verb_ = verb;
        std::vector<Row> rows;
        for (std::size_t i = 0; i < file_.paths.size(); ++i) {
            const Scenario& sc = file_.paths[i];
            if (verb == "norm") {
                norm(sc, rows);
            } else if (verb == "bound") {
                bound(sc, rows, outcome);
            } else if (verb == "invert") {
                invert(sc, rows, outcome);
            } else if (verb == "minimize") {
                minimize(sc, rows, outcome);
            } else if (verb == "lifetime") {
                lifetime(sc, rows, outcome);
            } else if (verb == "simulate") {
                simulate(sc, rows, outcome, false);
            } else if (verb == "validate") {
                simulate(sc, rows, outcome, true);
            } else {
                throw DomainError("verb '" + verb + "' cannot run inside a sweep");
            }
        }
        return rows;
    }

private:
    using Clock = std::chrono::steady_clock;

    Row base(const Scenario& sc) const {
        Row r;
        r.verb = verb_;
        r.scenario = file_.name;
        r.path = sc.name;
        r.params = params_;
        r.pathloss_exponent = fmt(sc.geometry.pathloss_exponent);
        r.reference_gain = fmt(sc.geometry.reference_gain);
        r.noise_w = fmt(sc.noise_power_w);
        r.tx_overhead_w = fmt(sc.transceiver.tx_overhead_w);
        return r;
    }

    static std::string since(Clock::time_point t0) {
        return fmt(std::chrono::duration<double>(Clock::now() - t0).count());
    }

    QoSTarget qos_at(int w) const {
        QoSTarget q = file_.qos;
        q.target_delay = w;
        return q;
    }

    std::vector<double> full_power(const Scenario& sc) const {
        return std::vector<double>(sc.hops(), sc.transceiver.p_max_w);
    }

    void norm(const Scenario& sc, std::vector<Row>& rows) const {
        if (sc.geometry.link_lengths_m.empty()) throw DomainError("norm needs link lengths, path '" + sc.name + "' gives gains");
        Row r = base(sc);
        r.method = "norm";
        r.value = fmt(path_norm(sc.geometry.link_lengths_m));
        r.status = "ok";
        rows.push_back(std::move(r));
    }

    void bound(const Scenario& sc, std::vector<Row>& rows, Outcome& outcome) const {
        const auto powers = full_power(sc);
        const auto path = build_path(sc, powers);
        for (int w : grid_) {
            const auto t0 = Clock::now();
            Row r = base(sc);
            r.method = "bound";
            r.w = std::to_string(w);
            r.target_eps = fmt(file_.qos.target_eps);
            r.powers_mw = fmt_powers_mw(powers);
            try {
                const auto vb = violation_bound(path, w, file_.optimizer.bound);
                r.value = fmt(vb.epsilon);
                r.bound = r.value;
                r.s_star = fmt(vb.s_star);
                r.status = vb.epsilon <= file_.qos.target_eps ? "meets" : "exceeds";
            } catch (const InfeasibleError& e) {
                r.status = "unstable";
                r.note = e.what();
                outcome.flag("path " + sc.name + ": " + e.what());
            }
            r.runtime_s = since(t0);
            const bool unstable = r.status == "unstable";
            rows.push_back(std::move(r));
            if (unstable) break;
        }
    }

    void invert(const Scenario& sc, std::vector<Row>& rows, Outcome& outcome) const {
        const auto t0 = Clock::now();
        const auto powers = full_power(sc);
        Row r = base(sc);
        r.method = "invert";
        r.target_eps = fmt(file_.qos.target_eps);
        r.powers_mw = fmt_powers_mw(powers);
        try {
            const auto path = build_path(sc, powers);
            const int w = delay_bound_for_eps(path, file_.qos.target_eps, file_.optimizer.bound);
            r.w = std::to_string(w);
            r.value = r.w;
            const auto vb = violation_bound(path, w, file_.optimizer.bound);
            r.bound = fmt(vb.epsilon);
            r.s_star = fmt(vb.s_star);
            r.status = "ok";
        } catch (const InfeasibleError& e) {
            r.status = e.reason() == InfeasibleError::Reason::Stability ? "unstable" : "unreachable";
            r.note = e.what();
            outcome.flag("path " + sc.name + ": " + e.what());
        }
        r.runtime_s = since(t0);
        rows.push_back(std::move(r));
    }

    // Defense in depth: every feasible allocation must still meet eps.
    void recheck(const Scenario& sc, const PowerAllocation& a, int w, const std::string& method) const {
        if (!a.feasible()) return;
        const double eps = evaluate_allocation(sc, a.powers_w, w, file_.optimizer).epsilon;
        if (!(eps <= file_.qos.target_eps)) {
            throw NumericError(method + " on path " + sc.name + " returned an allocation whose bound " + fmt(eps) +
                               " exceeds eps " + fmt(file_.qos.target_eps));
        }
    }

    Row allocation_row(const Scenario& sc, const std::string& method, int w, const PowerAllocation& a) const {
        Row r = base(sc);
        r.method = method;
        r.w = std::to_string(w);
        r.target_eps = fmt(file_.qos.target_eps);
        r.value = fmt(a.achieved_eps);
        if (a.s_star > 0.0) r.s_star = fmt(a.s_star);
        r.status = status_name(a.status);
        r.powers_mw = fmt_powers_mw(a.powers_w);
        r.total_mw = fmt(a.total_w() * 1e3);
        r.note = a.note;
        return r;
    }

    void minimize(const Scenario& sc, std::vector<Row>& rows, Outcome& outcome) const {
        for (int w : grid_) {
            const auto t0 = Clock::now();
            const auto qos = qos_at(w);
            const auto opt = minimize_power(sc, qos, file_.optimizer);
            const auto aware = qos_aware_baseline(sc, qos, file_.optimizer);
            const auto agnostic = qos_agnostic_baseline(sc, qos, file_.optimizer);
            recheck(sc, opt, w, "minimize");
            recheck(sc, aware, w, "aware");
            recheck(sc, agnostic, w, "agnostic");
            if (!opt.feasible()) outcome.flag("path " + sc.name + ", w=" + std::to_string(w) + ": " + opt.note);
            const auto& reference = opts_.baseline == "aware" ? aware : agnostic;
            std::vector<std::pair<std::string, PowerAllocation>> results{
                {"minimize", opt}, {"aware", aware}, {"agnostic", agnostic}};
            if (opts_.refine && opt.feasible()) {
                results.emplace_back("sim-minimize",
                                     sim_minimize_power(sc, qos, opt, file_.sim_optimizer_config()));
            }
            const std::string runtime = since(t0);
            for (const auto& [method, a] : results) {
                Row r = allocation_row(sc, method, w, a);
                if (a.feasible() && reference.feasible()) r.gain_pct = fmt(saving_gain_percent(a.total_w(), reference.total_w()));
                r.runtime_s = runtime;
                rows.push_back(std::move(r));
            }
        }
    }

    std::vector<double> batteries(const Scenario& sc) const {
        if (!sc.batteries_j.empty()) return sc.batteries_j;
        return std::vector<double>(sc.hops(), mah_to_joule(1000.0, sc.transceiver.supply_v));
    }

    void lifetime(const Scenario& sc, std::vector<Row>& rows, Outcome& outcome) const {
        const auto charges = batteries(sc);
        auto shortest = [&](const PowerAllocation& a) {
            const auto t = battery_durations(sc, charges, a.powers_w, file_.optimizer.lifetime_model);
            return *std::min_element(t.begin(), t.end());
        };
        for (int w : grid_) {
            const auto t0 = Clock::now();
            const auto qos = qos_at(w);
            const auto [life, state] = maximize_lifetime(sc, charges, qos, file_.optimizer);
            const auto opt = minimize_power(sc, qos, file_.optimizer);
            const auto aware = qos_aware_baseline(sc, qos, file_.optimizer);
            const auto agnostic = qos_agnostic_baseline(sc, qos, file_.optimizer);
            recheck(sc, life, w, "lifetime");
            recheck(sc, opt, w, "minimize");
            recheck(sc, aware, w, "aware");
            if (!life.feasible()) outcome.flag("path " + sc.name + ", w=" + std::to_string(w) + ": " + life.note);
            const auto& reference = opts_.baseline == "aware" ? aware : agnostic;
            std::vector<std::pair<std::string, PowerAllocation>> results{
                {"lifetime", life}, {"minimize", opt}, {"aware", aware}, {"agnostic", agnostic}};
            if (opts_.refine && life.feasible()) {
                results.emplace_back("sim-lifetime",
                                     sim_maximize_lifetime(sc, charges, qos, life, file_.sim_optimizer_config()).first);
            }
            const std::string runtime = since(t0);
            for (const auto& [method, a] : results) {
                Row r = allocation_row(sc, method, w, a);
                const double theta = shortest(a);
                r.min_theta_sf = fmt(theta);
                if (a.feasible() && reference.feasible()) r.gain_pct = fmt(100.0 * (theta / shortest(reference) - 1.0));
                r.runtime_s = runtime;
                rows.push_back(std::move(r));
            }
        }
    }

    void simulate(const Scenario& sc, std::vector<Row>& rows, Outcome& outcome, bool with_bound) const {
        const auto t0 = Clock::now();
        const auto powers = full_power(sc);
        const auto stats = simulate_path(sc, powers, grid_, file_.sim);
        if (stats.diverged) outcome.flag("path " + sc.name + ": " + stats.warning);
        std::optional<PathModel> path;
        if (with_bound) path = build_path(sc, powers);
        bool dominates = true;
        const std::string runtime = since(t0);
        for (const auto& p : stats.points) {
            Row r = base(sc);
            r.method = with_bound ? "validate" : "sim";
            r.w = std::to_string(p.w);
            r.target_eps = fmt(file_.qos.target_eps);
            r.value = fmt(p.estimate);
            r.ci_low = fmt(p.ci_low);
            r.ci_high = fmt(p.ci_high);
            r.powers_mw = fmt_powers_mw(powers);
            r.note = stats.warning;
            r.status = stats.diverged ? "diverged" : "ok";
            if (with_bound && !stats.diverged) {
                try {
                    const auto vb = violation_bound(*path, p.w, file_.optimizer.bound);
                    r.bound = fmt(vb.epsilon);
                    r.s_star = fmt(vb.s_star);
                    const bool ok = p.ci_low <= vb.epsilon;
                    dominates = dominates && ok;
                    r.status = ok ? "dominates" : "violated";
                } catch (const InfeasibleError& e) {
                    r.status = "unstable";
                    r.note = e.what();
                    outcome.flag("path " + sc.name + ": " + e.what());
                    dominates = false;
                }
            }
            r.runtime_s = runtime;
            rows.push_back(std::move(r));
        }
        if (with_bound) {
            outcome.messages.push_back("path " + sc.name + ": bound dominates: " + (dominates ? "true" : "false"));
        }
    }

    const ScenarioFile& file_;
    const Options& opts_;
    std::string params_;
    std::vector<int> grid_;
    std::string verb_;
};

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_rows(std::ostream& os, const std::vector<Row>& rows, const Options& opts) {
    std::vector<std::vector<std::string>> table{header(opts.timing)};
    for (const auto& r : rows) table.push_back(r.fields(opts.timing));
    if (opts.format == "csv") {
        for (const auto& line : table) {
            for (std::size_t i = 0; i < line.size(); ++i) os << (i ? "," : "") << csv_field(line[i]);
            os << "\n";
        }
        return;
    }
    std::vector<std::size_t> width(table.front().size(), 0);
    for (const auto& line : table) {
        for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
    }
    for (const auto& line : table) {
        std::string text;
        for (std::size_t i = 0; i < line.size(); ++i) {
            text += line[i];
            if (i + 1 < line.size()) text += std::string(width[i] - line[i].size() + 2, ' ');
        }
        os << text.substr(0, text.find_last_not_of(' ') + 1) << "\n";
    }
}

// "section.key=a,b,c" or, for list values, "section.key=1,2|3,4".
std::pair<std::string, std::vector<std::string>> parse_vary(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw DomainError("--vary expects section.key=v1,v2,..., got '" + spec + "'");
    const std::string key = spec.substr(0, eq);
    const std::string rest = spec.substr(eq + 1);
    const char sep = rest.find('|') != std::string::npos ? '|' : ',';
    std::vector<std::string> values;
    std::stringstream items(rest);
    for (std::string v; std::getline(items, v, sep);) values.push_back(v);
    if (values.empty()) throw DomainError("--vary '" + key + "' lists no values");
    return {key, values};
}

struct Job {
    std::vector<std::string> overrides;
    std::string params;
    std::vector<Row> rows;
    Outcome outcome;
    std::string error;
    bool parse_error = false;
};

std::string describe(const ParseError& e, const std::string& source) {
    std::ostringstream msg;
    msg << (source.empty() ? "<overrides>" : source);
    if (e.line() > 0) msg << ":" << e.line() << ":" << e.column();
    msg << ": " << e.what();
    return msg.str();
}

int execute(const Options& opts, std::ostream& out, std::ostream& err) {
    std::vector<std::string> base_overrides = opts.sets;
    std::vector<Job> jobs;
    std::string verb = opts.verb;
    if (verb == "sweep") {
        verb = opts.sweep_verb;
        if (verb == "sweep" || std::find(kVerbs.begin(), kVerbs.end(), verb) == kVerbs.end()) {
            throw DomainError("--run must name a verb other than sweep");
        }
        jobs.push_back({base_overrides, "", {}, {}, {}, false});
        for (const auto& spec : opts.vary) {
            const auto [key, values] = parse_vary(spec);
            std::vector<Job> next;
            for (const auto& job : jobs) {
                for (const auto& v : values) {
                    Job j = job;
                    j.overrides.push_back(key + "=" + v);
                    j.params += (j.params.empty() ? "" : ";") + key + "=" + v;
                    next.push_back(std::move(j));
                }
            }
            jobs = std::move(next);
        }
    } else {
        if (!opts.vary.empty()) throw DomainError("--vary is only valid with the sweep verb");
        jobs.push_back({base_overrides, "", {}, {}, {}, false});
    }

    auto work = [&](Job& job) {
        try {
            const auto file = load_scenario(opts.scenario, job.overrides);
            Runner runner(file, opts, job.params);
            job.rows = runner.run(verb, job.outcome);
        } catch (const ParseError& e) {
            job.error = describe(e, opts.scenario);
            job.parse_error = true;
        } catch (const std::exception& e) {
            job.error = e.what();
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers =
        std::min<std::size_t>(jobs.size(), opts.threads > 0 ? static_cast<std::size_t>(opts.threads) : hw);
    if (workers <= 1) {
        for (auto& job : jobs) work(job);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < jobs.size(); i = next++) work(jobs[i]);
            });
        }
        for (auto& th : pool) th.join();
    }

    // Merge in job order, independent of thread timing.
    std::vector<Row> rows;
    bool failed = false;
    bool infeasible = false;
    for (const auto& job : jobs) {
        if (!job.error.empty()) {
            err << "error: " << (job.params.empty() ? "" : "[" + job.params + "] ") << job.error << "\n";
            failed = true;
            continue;
        }
        rows.insert(rows.end(), job.rows.begin(), job.rows.end());
        for (const auto& m : job.outcome.messages) {
            err << (job.params.empty() ? "" : "[" + job.params + "] ") << m << "\n";
        }
        infeasible = infeasible || job.outcome.infeasible;
    }
    if (!rows.empty() || !failed) {
        if (opts.out.empty()) {
            write_rows(out, rows, opts);
        } else {
            std::ofstream file(opts.out);
            if (!file) throw DomainError("cannot write '" + opts.out + "'");
            write_rows(file, rows, opts);
        }
    }
    if (failed) return kExitError;
    if (infeasible) {
        err << "infeasible: see the messages above\n";
        return kExitInfeasible;
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Delay bounds, power allocation and simulation for multi-hop fading paths", "wsnc"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opts;
    std::string eps, slots, seed;
    app.add_option("--scenario", opts.scenario, "Scenario INI file (default: built-in defaults)");
    app.add_option("--set", opts.sets, "Override section.key=value (repeatable)");
    app.add_option("--w", opts.w_spec, "Target delay(s): INT, LO..HI or a comma list");
    app.add_option("--eps", eps, "Target violation probability (same as --set qos.eps=...)");
    app.add_option("--slots", slots, "Simulated slots (same as --set sim.slots=...)");
    app.add_option("--seed", seed, "Simulation seed (same as --set sim.seed=...)");
    app.add_option("--baseline", opts.baseline, "Reference for gain_pct")->check(CLI::IsMember({"agnostic", "aware"}));
    app.add_option("--out", opts.out, "Write rows to FILE instead of stdout");
    app.add_option("--format", opts.format, "Output format")->check(CLI::IsMember({"csv", "table"}));
    app.add_flag("--timing", opts.timing, "Append a runtime_s column (breaks byte-identical output)");
    app.add_flag("--refine", opts.refine, "minimize/lifetime: add the simulation-driven refinement");
    app.add_option("--vary", opts.vary, "sweep: section.key=v1,v2,... (repeatable; '|' separates list values)");
    app.add_option("--run", opts.sweep_verb, "sweep: verb run at every grid point");
    app.add_option("--threads", opts.threads, "sweep: worker threads (default: hardware)")->check(CLI::NonNegativeNumber);

    const std::map<std::string, std::string> help{
        {"bound", "Violation bound over the w grid at p_max"},
        {"invert", "Smallest w meeting eps at p_max"},
        {"minimize", "Minimum total power meeting (w, eps), with baselines"},
        {"lifetime", "Maximum shortest battery duration meeting (w, eps), with baselines"},
        {"simulate", "Monte-Carlo violation estimates over the w grid at p_max"},
        {"validate", "Simulation paired with the bound, with a dominance verdict"},
        {"sweep", "Cartesian parameter sweep of another verb"},
        {"norm", "Heterogeneity norm of every path"},
    };
    for (const auto& verb : kVerbs) {
        app.add_subcommand(verb, help.at(verb))->callback([&opts, verb] { opts.verb = verb; });
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return kExitError;
    }
    if (!eps.empty()) opts.sets.push_back("qos.eps=" + eps);
    if (!slots.empty()) opts.sets.push_back("sim.slots=" + slots);
    if (!seed.empty()) opts.sets.push_back("sim.seed=" + seed);

    try {
        return execute(opts, out, err);
    } catch (const ParseError& e) {
        err << "error: " << describe(e, opts.scenario) << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return kExitError;
}

}  // namespace wsnc::cli
