#pragma once

#include "wsnc/optimize.hpp"
#include "wsnc/scenario.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wsnc {

enum class Scheduling {
    PerSlotAllLinks,       // every link serves in every slot; r_a bits arrive per slot
    RoundRobinSuperframe,  // link n serves in slot n of each superframe; r_a bits per superframe
};

/// Stop a run once the 95% interval at `target_delay` lies entirely above
/// eps. There is no early stop on the low side: violations arrive in bursts,
/// so a partial run can look feasible and still fail over the full budget.
struct EarlyStop {
    int target_delay = 0;
    double eps = 1e-3;
    std::int64_t check_every = 100'000;
};

/// `slots` and `warmup_slots` count arrival intervals: slots under
/// PerSlotAllLinks, superframes under RoundRobinSuperframe.
struct SimConfig {
    std::int64_t slots = 10'000'000;
    std::uint64_t seed = 1;
    std::int64_t warmup_slots = 10'000;
    std::optional<Scheduling> scheduling;  // unset: per-slot for Shannon, round-robin for WirelessHART
    std::int64_t divergence_backlog = 1'000'000;  // pending arrival batches that flag a diverging queue
    std::optional<EarlyStop> early_stop;

    void validate() const;
    Scheduling scheduling_for(const Scenario& scenario) const;
};

struct DelayPoint {
    int w = 0;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::int64_t samples = 0;
    std::int64_t violations = 0;
};

struct DelayStats {
    std::vector<DelayPoint> points;  // one per requested target, in request order
    std::int64_t slots_run = 0;
    bool diverged = false;
    bool stopped_early = false;
    bool flow_conserved = true;
    std::string warning;
    double mean_delay = 0.0;         // virtual delay of completed arrival batches
    double mean_bit_delay = 0.0;     // per-bit sojourn, in arrival intervals
    double mean_backlog_bits = 0.0;  // time average over sampled intervals
    double arrival_rate_bits = 0.0;

    const DelayPoint& at(int w) const;
};

/// 95% Wilson score interval for `violations` out of `samples`.
std::pair<double, double> wilson_interval(std::int64_t violations, std::int64_t samples);

/// Monte-Carlo run of the tandem with block Rayleigh fading per link and
/// interval. The delay of an arrival batch is the number of intervals until its
/// last bit leaves the last link (0 if it clears within its own interval).
DelayStats simulate_path(const Scenario& scenario, std::span<const double> powers_w, std::span<const int> targets,
                         const SimConfig& cfg = {});

struct SimOptimizerConfig {
    SimConfig sim = [] {
        SimConfig c;
        c.slots = 1'000'000;
        return c;
    }();
    double delta_p_init_w = 0.01e-3;
    int max_halvings = 15;
    int max_iterations = 10000;
    LifetimeModel lifetime_model = LifetimeModel::Full;

    void validate() const;
};

/// Greedy power search with the simulated violation in place of the bound,
/// started from `start` (normally minimize_power's result).
PowerAllocation sim_minimize_power(const Scenario& scenario, const QoSTarget& qos, const PowerAllocation& start,
                                   const SimOptimizerConfig& cfg = {});

/// Lifetime loop with the simulated violation; returns the allocation and its
/// shortest battery duration in superframes.
std::pair<PowerAllocation, double> sim_maximize_lifetime(const Scenario& scenario, std::span<const double> charges_j,
                                                         const QoSTarget& qos, const PowerAllocation& start,
                                                         const SimOptimizerConfig& cfg = {});

}  // namespace wsnc
