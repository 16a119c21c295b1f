#include "wsnc/optimize.hpp"

#include "wsnc/errors.hpp"
#include "wsnc/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace wsnc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_window(double eps_hat, const QoSTarget& qos) {
    return eps_hat <= qos.target_eps && eps_hat > qos.target_eps - qos.eps_tolerance;
}

// Shared state of the step-halving loops.
struct Search {
    const Scenario& scenario;
    const QoSTarget& qos;
    const OptimizerConfig& cfg;
    std::vector<double> floors;
    PowerAllocation current;
    double step;

    Search(const Scenario& sc, const QoSTarget& q, const OptimizerConfig& c)
        : scenario(sc), qos(q), cfg(c), floors(power_floors(sc)), step(c.delta_p_init_w) {}

    ViolationBound eval(const std::vector<double>& powers) const {
        return evaluate_allocation(scenario, powers, qos.target_delay, cfg);
    }

    // Start at p_max; false if eps is already out of reach there.
    bool start() {
        current.powers_w.assign(scenario.hops(), scenario.transceiver.p_max_w);
        const auto vb = eval(current.powers_w);
        current.achieved_eps = vb.epsilon;
        current.s_star = vb.s_star;
        if (!(vb.epsilon <= qos.target_eps)) {
            std::ostringstream msg;
            msg << (std::isinf(vb.epsilon) ? "path unstable at p_max" : "bound exceeds eps at p_max")
                << " (bound " << vb.epsilon << ", eps " << qos.target_eps << ")";
            current.status = AllocationStatus::Fail;
            current.note = msg.str();
            return false;
        }
        current.status = AllocationStatus::NotConverged;
        return true;
    }

    void accept(std::vector<double> powers, const ViolationBound& vb) {
        current.powers_w = std::move(powers);
        current.achieved_eps = vb.epsilon;
        current.s_star = vb.s_star;
    }

    // After a rejected step: halve, or report that the step is exhausted.
    bool halve() {
        if (step <= cfg.delta_p_min_w) {
            current.note = "step size reached its minimum before the eps window";
            return false;
        }
        step /= 2.0;
        ++current.halvings;
        return true;
    }

    bool converged_now() {
        if (!in_window(current.achieved_eps, qos)) return false;
        current.status = AllocationStatus::Converged;
        current.note.clear();
        return true;
    }

    void cap_reached() {
        std::ostringstream msg;
        msg << "iteration cap " << cfg.max_iterations << " reached";
        current.note = msg.str();
    }
};

}  // namespace

void QoSTarget::validate() const {
    if (target_delay < 0) throw DomainError("target delay must be >= 0");
    if (!(target_eps > 0.0 && target_eps < 1.0)) throw DomainError("target eps must lie in (0, 1)");
    if (!(eps_tolerance > 0.0 && eps_tolerance < target_eps)) {
        throw DomainError("eps tolerance must lie in (0, eps)");
    }
}

void OptimizerConfig::validate() const {
    if (!(delta_p_min_w > 0.0 && delta_p_min_w <= delta_p_init_w)) {
        throw DomainError("power steps need 0 < delta_p_min <= delta_p_init");
    }
    if (!(s_interval_min > 0.0)) throw DomainError("s_interval_min must be > 0");
    if (max_iterations < 1) throw DomainError("max_iterations must be >= 1");
}

double PowerAllocation::total_w() const { return std::accumulate(powers_w.begin(), powers_w.end(), 0.0); }

double BatteryState::min_duration() const {
    if (durations.empty()) return 0.0;
    return *std::min_element(durations.begin(), durations.end());
}

double search_s(const PathModel& path, int w, double b, double delta_min, const KernelOptions& opts) {
    return five_point_search([&](double s) { return kernel_path(path, s, w, opts).value; }, 0.0, b, delta_min).x;
}

double min_feasible_power(double link_gain, const ArrivalModel& arrival, const ServiceSpec& service,
                          double noise_w, const Transceiver& trx) {
    if (!(link_gain > 0.0) || !(noise_w > 0.0)) throw DomainError("link gain and noise must be > 0");
    if (service.kind == ServiceKind::WirelessHart) return trx.p_min_w;
    return noise_w * std::expm1(arrival.rate_bits / service.symbols_per_slot * std::log(2.0)) / link_gain;
}

std::vector<double> power_floors(const Scenario& scenario) {
    scenario.validate();
    std::vector<double> out;
    for (double g : scenario.geometry.link_gains()) {
        const double capacity = min_feasible_power(g, scenario.arrival, scenario.service, scenario.noise_power_w,
                                                   scenario.transceiver);
        out.push_back(std::max(capacity, scenario.transceiver.p_min_w));
    }
    return out;
}

ViolationBound evaluate_allocation(const Scenario& scenario, std::span<const double> powers_w, int w,
                                   const OptimizerConfig& cfg) {
    BoundConfig bound = cfg.bound;
    bound.search_delta_min = cfg.s_interval_min;
    try {
        return violation_bound(build_path(scenario, powers_w), w, bound);
    } catch (const InfeasibleError&) {
        return {};
    }
}

PowerAllocation minimize_power(const Scenario& scenario, const QoSTarget& qos, const OptimizerConfig& cfg) {
    qos.validate();
    cfg.validate();
    Search run(scenario, qos, cfg);
    if (!run.start()) return run.current;
    const std::size_t hops = scenario.hops();

    while (!run.converged_now()) {
        if (run.current.iterations >= cfg.max_iterations) {
            run.cap_reached();
            break;
        }
        ++run.current.iterations;
        // Trial step on every link that can still go down.
        int best = -1;
        double best_gradient = kInf;
        std::vector<double> best_powers;
        ViolationBound best_bound;
        for (std::size_t n = 0; n < hops; ++n) {
            const double p = run.current.powers_w[n];
            if (p <= run.floors[n]) continue;
            auto trial = run.current.powers_w;
            trial[n] = std::max(p - run.step, run.floors[n]);
            const auto vb = run.eval(trial);
            const double gradient = std::abs(run.current.achieved_eps - vb.epsilon) / (p - trial[n]);
            if (gradient < best_gradient || best < 0) {
                best = static_cast<int>(n);
                best_gradient = gradient;
                best_powers = std::move(trial);
                best_bound = vb;
            }
        }
        if (best < 0) {
            run.current.note = "every link is at its power floor";
            break;
        }
        if (best_bound.epsilon <= qos.target_eps) {
            run.accept(std::move(best_powers), best_bound);
        } else if (!run.halve()) {
            break;
        }
    }
    return run.current;
}

std::pair<PowerAllocation, BatteryState> maximize_lifetime(const Scenario& scenario,
                                                           std::span<const double> charges_j,
                                                           const QoSTarget& qos, const OptimizerConfig& cfg) {
    qos.validate();
    cfg.validate();
    if (charges_j.size() != scenario.hops()) {
        throw DomainError("battery list length must equal the number of transmitters");
    }
    Search run(scenario, qos, cfg);
    BatteryState batteries{{charges_j.begin(), charges_j.end()}, {}};
    auto durations = [&](const std::vector<double>& p) {
        return battery_durations(scenario, batteries.charges_j, p, cfg.lifetime_model);
    };
    if (!run.start()) {
        batteries.durations = durations(run.current.powers_w);
        return {run.current, batteries};
    }
    const std::size_t hops = scenario.hops();

    while (!run.converged_now()) {
        if (run.current.iterations >= cfg.max_iterations) {
            run.cap_reached();
            break;
        }
        ++run.current.iterations;
        const auto theta = durations(run.current.powers_w);
        const double shortest = *std::min_element(theta.begin(), theta.end());
        std::vector<std::size_t> weakest;
        for (std::size_t n = 0; n < hops; ++n) {
            if (theta[n] <= shortest * (1.0 + 1e-12)) weakest.push_back(n);
        }
        auto trial = run.current.powers_w;
        bool moved = false;
        for (std::size_t n : weakest) {
            const double lowered = std::max(trial[n] - run.step / static_cast<double>(weakest.size()), run.floors[n]);
            moved = moved || lowered < trial[n];
            trial[n] = lowered;
        }
        if (!moved) {
            run.current.note = "shortest-lived transmitter is at its power floor";
            break;
        }
        const auto vb = run.eval(trial);
        if (vb.epsilon <= qos.target_eps) {
            run.accept(std::move(trial), vb);
        } else if (!run.halve()) {
            break;
        }
    }
    batteries.durations = durations(run.current.powers_w);
    return {run.current, batteries};
}

PowerAllocation qos_agnostic_baseline(const Scenario& scenario, const QoSTarget& qos, const OptimizerConfig& cfg) {
    scenario.validate();
    PowerAllocation out;
    out.powers_w.assign(scenario.hops(), scenario.transceiver.p_max_w);
    const auto vb = evaluate_allocation(scenario, out.powers_w, qos.target_delay, cfg);
    out.achieved_eps = vb.epsilon;
    out.s_star = vb.s_star;
    out.status = vb.epsilon <= qos.target_eps ? AllocationStatus::NotConverged : AllocationStatus::Fail;
    if (!out.feasible()) out.note = "bound exceeds eps at p_max";
    return out;
}

PowerAllocation qos_aware_baseline(const Scenario& scenario, const QoSTarget& qos, const OptimizerConfig& cfg) {
    qos.validate();
    cfg.validate();
    Search run(scenario, qos, cfg);
    if (!run.start()) return run.current;
    const double floor = *std::max_element(run.floors.begin(), run.floors.end());
    const std::size_t hops = scenario.hops();

    while (!run.converged_now()) {
        if (run.current.iterations >= cfg.max_iterations) {
            run.cap_reached();
            break;
        }
        ++run.current.iterations;
        const double level = run.current.powers_w.front();
        const double lowered = std::max(level - run.step, floor);
        if (lowered >= level) {
            run.current.note = "shared power is at the largest link floor";
            break;
        }
        std::vector<double> trial(hops, lowered);
        const auto vb = run.eval(trial);
        if (vb.epsilon <= qos.target_eps) {
            run.accept(std::move(trial), vb);
        } else if (!run.halve()) {
            break;
        }
    }
    return run.current;
}

double path_norm(std::span<const double> lengths) {
    double sum = 0.0;
    for (std::size_t n = 0; n < lengths.size(); ++n) {
        for (std::size_t m = n + 1; m < lengths.size(); ++m) sum += std::abs(lengths[n] - lengths[m]);
    }
    return sum;
}

double saving_gain_percent(double total_w, double baseline_total_w) {
    if (!(baseline_total_w > 0.0)) throw DomainError("baseline total power must be > 0");
    return 100.0 * (1.0 - total_w / baseline_total_w);
}

}  // namespace wsnc
