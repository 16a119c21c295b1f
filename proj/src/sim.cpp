#include "wsnc/sim.hpp"

#include "wsnc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <sstream>
#include <tuple>

namespace wsnc {
namespace {

constexpr double kZ95 = 1.959963984540054;
// Chunk remainders below this many bits are treated as gone.
constexpr double kBitSlack = 1e-9;

// splitmix64 finalizer.
std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Uniform on (0, 1], a pure function of (seed, link, slot, lane).
double keyed_uniform(std::uint64_t seed, std::uint64_t link, std::uint64_t slot, std::uint64_t lane) {
    std::uint64_t z = mix(seed + 0x9E3779B97F4A7C15ULL * (lane + 1));
    z = mix(z ^ (link * 0xD1B54A32D192ED03ULL));
    z = mix(z ^ slot);
    return static_cast<double>((z >> 11) + 1) * 0x1.0p-53;
}

struct Chunk {
    std::int64_t arrival;
    double bits;
};

class Tandem {
public:
    explicit Tandem(std::size_t hops) : queues_(hops), in_(hops, 0.0), out_(hops, 0.0) {}

    void arrive(std::int64_t t, double bits) {
        if (bits <= 0.0) return;
        queues_[0].push_back({t, bits});
        in_[0] += bits;
        backlog_ += bits;
    }

    // Move up to `capacity` bits FCFS from queue n to the next (or out).
    void serve(std::size_t n, double capacity, std::int64_t t, bool sampling) {
        auto& q = queues_[n];
        const bool last = n + 1 == queues_.size();
        while (capacity > 0.0 && !q.empty()) {
            Chunk& front = q.front();
            const double moved = front.bits - capacity <= kBitSlack ? front.bits : capacity;
            capacity -= moved;
            out_[n] += moved;
            if (last) {
                backlog_ -= moved;
                if (sampling) bit_delay_sum_ += moved * static_cast<double>(t - front.arrival);
                if (sampling) departed_bits_ += moved;
            } else {
                queues_[n + 1].push_back({front.arrival, moved});
                in_[n + 1] += moved;
            }
            if (moved == front.bits) {
                q.pop_front();
            } else {
                front.bits -= moved;
            }
        }
        if (last && q.empty() && std::all_of(queues_.begin(), queues_.end(), [](const auto& d) { return d.empty(); })) {
            backlog_ = 0.0;
        }
    }

    // Arrival interval of the oldest bit still in the system.
    std::int64_t oldest(std::int64_t none) const {
        for (auto it = queues_.rbegin(); it != queues_.rend(); ++it) {
            if (!it->empty()) return it->front().arrival;
        }
        return none;
    }

    bool conserved() const {
        for (std::size_t n = 0; n < queues_.size(); ++n) {
            if (out_[n] > in_[n] * (1.0 + 1e-12) + kBitSlack) return false;
        }
        return true;
    }

    double backlog() const { return std::max(backlog_, 0.0); }
    double bit_delay_sum() const { return bit_delay_sum_; }
    double departed_bits() const { return departed_bits_; }

private:
    std::vector<std::deque<Chunk>> queues_;
    std::vector<double> in_;
    std::vector<double> out_;
    double backlog_ = 0.0;
    double bit_delay_sum_ = 0.0;
    double departed_bits_ = 0.0;
};

DelayPoint make_point(int w, std::int64_t violations, std::int64_t samples) {
    DelayPoint p;
    p.w = w;
    p.samples = samples;
    p.violations = violations;
    if (samples > 0) {
        p.estimate = static_cast<double>(violations) / static_cast<double>(samples);
        std::tie(p.ci_low, p.ci_high) = wilson_interval(violations, samples);
    }
    return p;
}

}  // namespace

void SimConfig::validate() const {
    if (slots <= 0) throw DomainError("sim slots must be > 0");
    if (warmup_slots < 0) throw DomainError("warmup slots must be >= 0");
    if (slots <= warmup_slots) throw DomainError("sim slots must exceed the warmup");
    if (divergence_backlog <= 0) throw DomainError("divergence threshold must be > 0");
    if (early_stop && early_stop->check_every <= 0) throw DomainError("early-stop check interval must be > 0");
}

Scheduling SimConfig::scheduling_for(const Scenario& scenario) const {
    const bool whart = scenario.service.kind == ServiceKind::WirelessHart;
    const Scheduling chosen =
        scheduling.value_or(whart ? Scheduling::RoundRobinSuperframe : Scheduling::PerSlotAllLinks);
    if (whart && chosen != Scheduling::RoundRobinSuperframe) {
        throw DomainError("WirelessHART links are simulated with round-robin superframe scheduling only");
    }
    return chosen;
}

const DelayPoint& DelayStats::at(int w) const {
    for (const auto& p : points) {
        if (p.w == w) return p;
    }
    throw DomainError("no simulated target for w = " + std::to_string(w));
}

std::pair<double, double> wilson_interval(std::int64_t violations, std::int64_t samples) {
    if (samples <= 0 || violations < 0 || violations > samples) {
        throw DomainError("wilson_interval needs 0 <= violations <= samples and samples > 0");
    }
    const double n = static_cast<double>(samples);
    const double p = static_cast<double>(violations) / n;
    const double z2 = kZ95 * kZ95;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = kZ95 / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return {std::max(0.0, std::min(p, centre - half)), std::min(1.0, std::max(p, centre + half))};
}

DelayStats simulate_path(const Scenario& scenario, std::span<const double> powers_w, std::span<const int> targets,
                         const SimConfig& cfg) {
    scenario.validate();
    cfg.validate();
    const Scheduling scheduling = cfg.scheduling_for(scenario);
    for (int w : targets) {
        if (w < 0) throw DomainError("target delays must be >= 0");
    }
    const auto snrs = link_snrs(scenario, powers_w);
    const std::size_t hops = snrs.size();
    const bool whart = scenario.service.kind == ServiceKind::WirelessHart;
    const double bits_per_log = scenario.service.symbols_per_slot / std::numbers::ln2;
    const double frame_bits = static_cast<double>(scenario.service.frame_bits);
    const double arrival_bits = scenario.arrival.rate_bits;

    auto service_bits = [&](std::size_t n, std::uint64_t slot) {
        const double gamma = -snrs[n] * std::log(keyed_uniform(cfg.seed, n, slot, 0));
        double bits;
        if (whart) {
            const double success = frame_success_at(gamma, scenario.service.frame_bits);
            bits = keyed_uniform(cfg.seed, n, slot, 1) <= success ? frame_bits : 0.0;
        } else {
            bits = bits_per_log * std::log1p(gamma);
        }
        if (!scenario.cross_traffic_bits.empty()) bits = std::max(0.0, bits - scenario.cross_traffic_bits[n]);
        return bits;
    };

    Tandem tandem(hops);
    std::vector<std::int64_t> histogram;
    std::int64_t next_batch = 0;  // oldest arrival interval whose delay is not yet recorded
    double backlog_sum = 0.0;
    std::int64_t sampled = 0;
    DelayStats out;
    out.arrival_rate_bits = arrival_bits;

    auto record_completed = [&](std::int64_t t) {
        const std::int64_t oldest = tandem.oldest(t + 1);
        for (; next_batch < oldest; ++next_batch) {
            if (next_batch < cfg.warmup_slots) continue;
            const auto delay = static_cast<std::size_t>(t - next_batch);
            if (histogram.size() <= delay) histogram.resize(delay + 1, 0);
            ++histogram[delay];
        }
    };

    // Counts over completed batches plus censored ones whose delay already exceeds w.
    auto point_for = [&](int w, std::int64_t end) {
        std::int64_t samples = 0;
        std::int64_t violations = 0;
        for (std::size_t d = 0; d < histogram.size(); ++d) {
            samples += histogram[d];
            if (static_cast<int>(d) > w) violations += histogram[d];
        }
        for (std::int64_t a = std::max(next_batch, cfg.warmup_slots); a < end; ++a) {
            if (end - a > w) {
                ++samples;
                ++violations;
            }
        }
        return make_point(w, violations, samples);
    };

    std::int64_t t = 0;
    for (; t < cfg.slots; ++t) {
        tandem.arrive(t, arrival_bits);
        const bool sampling = t >= cfg.warmup_slots;
        for (std::size_t n = 0; n < hops; ++n) {
            const auto slot = scheduling == Scheduling::PerSlotAllLinks
                                  ? static_cast<std::uint64_t>(t)
                                  : static_cast<std::uint64_t>(t) * hops + n;
            tandem.serve(n, service_bits(n, slot), t, sampling);
        }
        record_completed(t);
        if (sampling) {
            backlog_sum += tandem.backlog();
            ++sampled;
        }
        if (t - next_batch > cfg.divergence_backlog) {
            out.diverged = true;
            std::ostringstream msg;
            msg << "queue diverging: " << t - next_batch << " arrival batches pending at interval " << t;
            out.warning = msg.str();
            ++t;
            break;
        }
        if (cfg.early_stop && sampling && (t + 1 - cfg.warmup_slots) % cfg.early_stop->check_every == 0) {
            const auto& stop = *cfg.early_stop;
            const auto p = point_for(stop.target_delay, t + 1);
            if (p.samples > 0 && p.ci_low > stop.eps) {
                out.stopped_early = true;
                ++t;
                break;
            }
        }
    }
    out.slots_run = t;
    out.flow_conserved = tandem.conserved();
    for (int w : targets) out.points.push_back(point_for(w, t));

    std::int64_t completed = 0;
    double delay_sum = 0.0;
    for (std::size_t d = 0; d < histogram.size(); ++d) {
        completed += histogram[d];
        delay_sum += static_cast<double>(d) * static_cast<double>(histogram[d]);
    }
    if (completed > 0) out.mean_delay = delay_sum / static_cast<double>(completed);
    if (tandem.departed_bits() > 0.0) out.mean_bit_delay = tandem.bit_delay_sum() / tandem.departed_bits();
    if (sampled > 0) out.mean_backlog_bits = backlog_sum / static_cast<double>(sampled);
    for (const auto& p : out.points) {
        if (p.samples == 0 && out.warning.empty()) out.warning = "no sampled arrivals after warmup";
    }
    return out;
}

void SimOptimizerConfig::validate() const {
    sim.validate();
    if (!(delta_p_init_w > 0.0)) throw DomainError("sim power step must be > 0");
    if (max_halvings < 0) throw DomainError("max_halvings must be >= 0");
    if (max_iterations < 1) throw DomainError("max_iterations must be >= 1");
}

namespace {

// Step-halving loop shared by both simulation-driven optimizers.
class SimSearch {
public:
    SimSearch(const Scenario& sc, const QoSTarget& q, const SimOptimizerConfig& c)
        : scenario_(sc), qos_(q), cfg_(c), floors_(power_floors(sc)), step_(c.delta_p_init_w) {
        screening_ = cfg_.sim;
        screening_.early_stop = EarlyStop{q.target_delay, q.target_eps, std::min<std::int64_t>(100'000, cfg_.sim.slots)};
    }

    double estimate(const std::vector<double>& powers) const {
        const int w = qos_.target_delay;
        const auto stats = simulate_path(scenario_, powers, std::span<const int>(&w, 1), screening_);
        if (stats.diverged) return std::numeric_limits<double>::infinity();
        return stats.points.front().estimate;
    }

    bool start(const PowerAllocation& from) {
        if (from.powers_w.size() != scenario_.hops()) {
            throw DomainError("start allocation must have one power per transmitter");
        }
        current_.powers_w = from.powers_w;
        current_.achieved_eps = estimate(current_.powers_w);
        if (!(current_.achieved_eps <= qos_.target_eps)) {
            current_.status = AllocationStatus::Fail;
            current_.note = "start allocation violates eps in simulation";
            return false;
        }
        current_.status = AllocationStatus::NotConverged;
        return true;
    }

    bool in_window() const {
        return current_.achieved_eps <= qos_.target_eps &&
               current_.achieved_eps > qos_.target_eps - qos_.eps_tolerance;
    }

    bool next_iteration() {
        if (in_window()) return false;
        if (current_.iterations >= cfg_.max_iterations) {
            current_.note = "iteration cap reached";
            return false;
        }
        ++current_.iterations;
        return true;
    }

    // Accept the trial if it meets eps; otherwise halve. False when the
    // halving budget is spent.
    bool offer(std::vector<double> trial, double eps_hat) {
        if (eps_hat <= qos_.target_eps) {
            current_.powers_w = std::move(trial);
            current_.achieved_eps = eps_hat;
            return true;
        }
        if (current_.halvings >= cfg_.max_halvings) {
            current_.note = "halving budget spent before the eps window";
            return false;
        }
        step_ /= 2.0;
        ++current_.halvings;
        return true;
    }

    // Full-length run of the final allocation for the reported estimate.
    PowerAllocation finish() {
        const int w = qos_.target_delay;
        const auto stats = simulate_path(scenario_, current_.powers_w, std::span<const int>(&w, 1), cfg_.sim);
        const auto& p = stats.points.front();
        current_.achieved_eps = stats.diverged ? std::numeric_limits<double>::infinity() : p.estimate;
        if (current_.status != AllocationStatus::Fail) {
            current_.status = in_window() ? AllocationStatus::Converged : AllocationStatus::NotConverged;
        }
        if (p.ci_high - p.ci_low > 2.0 * qos_.eps_tolerance) {
            std::ostringstream msg;
            if (!current_.note.empty()) msg << current_.note << "; ";
            msg << "simulation noise exceeds the eps tolerance: 95% CI [" << p.ci_low << ", " << p.ci_high << "]";
            current_.note = msg.str();
        }
        return current_;
    }

    PowerAllocation& current() { return current_; }
    const std::vector<double>& floors() const { return floors_; }
    double step() const { return step_; }

private:
    const Scenario& scenario_;
    const QoSTarget& qos_;
    const SimOptimizerConfig& cfg_;
    SimConfig screening_;
    std::vector<double> floors_;
    PowerAllocation current_;
    double step_;
};

}  // namespace

PowerAllocation sim_minimize_power(const Scenario& scenario, const QoSTarget& qos, const PowerAllocation& start,
                                   const SimOptimizerConfig& cfg) {
    qos.validate();
    cfg.validate();
    SimSearch run(scenario, qos, cfg);
    if (!run.start(start)) return run.finish();
    auto& cur = run.current();

    while (run.next_iteration()) {
        int best = -1;
        double best_gradient = std::numeric_limits<double>::infinity();
        std::vector<double> best_powers;
        double best_eps = 0.0;
        for (std::size_t n = 0; n < cur.powers_w.size(); ++n) {
            const double p = cur.powers_w[n];
            if (p <= run.floors()[n]) continue;
            auto trial = cur.powers_w;
            trial[n] = std::max(p - run.step(), run.floors()[n]);
            const double eps_hat = run.estimate(trial);
            const double gradient = std::abs(cur.achieved_eps - eps_hat) / (p - trial[n]);
            if (best < 0 || gradient < best_gradient) {
                best = static_cast<int>(n);
                best_gradient = gradient;
                best_powers = std::move(trial);
                best_eps = eps_hat;
            }
        }
        if (best < 0) {
            cur.note = "every link is at its power floor";
            break;
        }
        if (!run.offer(std::move(best_powers), best_eps)) break;
    }
    return run.finish();
}

std::pair<PowerAllocation, double> sim_maximize_lifetime(const Scenario& scenario, std::span<const double> charges_j,
                                                         const QoSTarget& qos, const PowerAllocation& start,
                                                         const SimOptimizerConfig& cfg) {
    qos.validate();
    cfg.validate();
    if (charges_j.size() != scenario.hops()) {
        throw DomainError("battery list length must equal the number of transmitters");
    }
    auto shortest = [&](const std::vector<double>& p) {
        const auto theta = battery_durations(scenario, charges_j, p, cfg.lifetime_model);
        return *std::min_element(theta.begin(), theta.end());
    };
    SimSearch run(scenario, qos, cfg);
    if (!run.start(start)) {
        auto result = run.finish();
        return {result, shortest(result.powers_w)};
    }
    auto& cur = run.current();

    while (run.next_iteration()) {
        const auto theta = battery_durations(scenario, charges_j, cur.powers_w, cfg.lifetime_model);
        const double low = *std::min_element(theta.begin(), theta.end());
        std::vector<std::size_t> weakest;
        for (std::size_t n = 0; n < theta.size(); ++n) {
            if (theta[n] <= low * (1.0 + 1e-12)) weakest.push_back(n);
        }
        auto trial = cur.powers_w;
        bool moved = false;
        for (std::size_t n : weakest) {
            const double lowered =
                std::max(trial[n] - run.step() / static_cast<double>(weakest.size()), run.floors()[n]);
            moved = moved || lowered < trial[n];
            trial[n] = lowered;
        }
        if (!moved) {
            cur.note = "shortest-lived transmitter is at its power floor";
            break;
        }
        const double eps_hat = run.estimate(trial);
        if (!run.offer(std::move(trial), eps_hat)) break;
    }
    auto result = run.finish();
    return {result, shortest(result.powers_w)};
}

}  // namespace wsnc
