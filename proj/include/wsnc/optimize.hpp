#pragma once

#include "wsnc/kernel.hpp"
#include "wsnc/scenario.hpp"

#include <string>
#include <utility>
#include <vector>

namespace wsnc {

/// Delay target w (slots or superframes) violated with probability at most
/// eps. The optimizers stop once the bound lands in (eps - eps_tolerance, eps].
struct QoSTarget {
    int target_delay = 10;
    double target_eps = 1e-3;
    double eps_tolerance = 1e-5;

    void validate() const;
};

/// Power search settings. The upper power limit is the scenario transceiver's p_max.
struct OptimizerConfig {
    double delta_p_init_w = 0.05e-3;
    double delta_p_min_w = 1e-8;
    double s_interval_min = 1e-9;
    int max_iterations = 10000;
    LifetimeModel lifetime_model = LifetimeModel::Full;
    BoundConfig bound;

    void validate() const;
};

enum class AllocationStatus {
    Converged,     // bound in (eps - tolerance, eps]
    NotConverged,  // bound <= eps, but the window was not reached
    Fail,          // eps not met even at p_max (or unstable there)
};

struct PowerAllocation {
    std::vector<double> powers_w;
    double achieved_eps = 0.0;
    double s_star = 0.0;
    AllocationStatus status = AllocationStatus::Fail;
    int iterations = 0;
    int halvings = 0;
    std::string note;

    bool converged() const noexcept { return status == AllocationStatus::Converged; }
    bool feasible() const noexcept { return status != AllocationStatus::Fail; }
    double total_w() const;
};

struct BatteryState {
    std::vector<double> charges_j;
    std::vector<double> durations;  // superframes
    double min_duration() const;
};

/// Smallest kernel value over (0, b) by five-point search.
double search_s(const PathModel& path, int w, double b, double delta_min, const KernelOptions& opts = {});

/// Shannon: smallest p with C log2(1 + p h̄²/σ²) >= r_a. WirelessHART: the
/// transceiver minimum.
double min_feasible_power(double link_gain, const ArrivalModel& arrival, const ServiceSpec& service,
                          double noise_w, const Transceiver& trx);

/// Per-link lower power limit: the larger of min_feasible_power and the transceiver minimum.
std::vector<double> power_floors(const Scenario& scenario);

/// Violation bound at delay w for the given powers; +inf if unstable.
ViolationBound evaluate_allocation(const Scenario& scenario, std::span<const double> powers_w, int w,
                                   const OptimizerConfig& cfg = {});

/// Greedy gradient search: lower, one link at a time, the power whose step
/// raises the bound least; halve the step when that would break eps.
PowerAllocation minimize_power(const Scenario& scenario, const QoSTarget& qos, const OptimizerConfig& cfg = {});

/// Same loop, but each step lowers the transmitters with the shortest
/// battery duration (split evenly among ties).
std::pair<PowerAllocation, BatteryState> maximize_lifetime(const Scenario& scenario,
                                                           std::span<const double> charges_j,
                                                           const QoSTarget& qos,
                                                           const OptimizerConfig& cfg = {});

/// Every node at p_max, with the resulting bound.
PowerAllocation qos_agnostic_baseline(const Scenario& scenario, const QoSTarget& qos,
                                      const OptimizerConfig& cfg = {});

/// One shared power, lowered from p_max with step halving while eps holds.
PowerAllocation qos_aware_baseline(const Scenario& scenario, const QoSTarget& qos, const OptimizerConfig& cfg = {});

/// Σ_{n<m} |l_n - l_m|.
double path_norm(std::span<const double> lengths);

/// 100 (1 - total / baseline_total).
double saving_gain_percent(double total_w, double baseline_total_w);

}  // namespace wsnc
