#pragma once

#include "wsnc/mellin.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace wsnc {

/// One hop's per-increment service transform, u -> E[g^{u-1}].
struct LinkService {
    std::function<MellinValue(double)> mellin_at;
    std::string label;
    double mean_snr = 1.0;

    static LinkService shannon(const ShannonRayleighService& svc, std::string label = {});
    /// `mean_snr` is informational here; Q already folds it in.
    static LinkService whart(const WirelessHartService& svc, double mean_snr, std::string label = {});
    /// Constant transform value at every u != 1 (test and scripting aid).
    static LinkService constant(double value, std::string label = {});
};

/// Tandem of links fed by one arrival flow. The kernel's time unit is one
/// arrival interval (a slot for Shannon links, a superframe for WirelessHART).
struct PathModel {
    std::vector<LinkService> links;
    ArrivalModel arrival;

    void validate() const;
};

enum class KernelRoute {
    Automatic,  // pairwise recursion, confluent form if the recursion is ill-conditioned
    Recursion,
    Confluent,
};

struct KernelOptions {
    KernelRoute route = KernelRoute::Automatic;
    /// Link (0-based) used as the subtracted index m wherever it is present and
    /// not the last link of a subpath; -1 picks the second-to-last every time.
    int pivot = -1;
    /// Cancellation factor above which Automatic switches to the confluent form.
    double condition_limit = 1e5;
};

struct KernelEvaluation {
    double s = 0.0;
    int w = 0;
    double value = std::numeric_limits<double>::infinity();
    bool stable = false;
    KernelRoute route = KernelRoute::Recursion;  // route actually taken
    double condition = 1.0;  // recursion's |terms| / |result|; 1 for the confluent form
};

struct CrossTraffic {
    double rate_bits = 0.0;
};

struct BoundConfig {
    double s_max = 50.0;
    double boundary_rel_tol = 1e-9;
    double search_delta_min = 1e-9;
    int w_max = 10000;
    KernelOptions kernel;
};

/// max_n M_α(1+s)·M_n(1-s); the path is stable at s iff this is < 1.
double stability_margin(const PathModel& path, double s);

/// End b of the stable interval (0, b), or `cfg.s_max` if the margin stays
/// below 1 up to it. Throws InfeasibleError(Stability) when no s > 0 is stable.
double stability_boundary(const PathModel& path, const BoundConfig& cfg = {});

/// M(1-s)^w / (1 - M_α(1+s) M(1-s)); +inf and stable=false when unstable.
KernelEvaluation kernel_single(const LinkService& link, const ArrivalModel& arrival, double s, int w);

/// End-to-end kernel of an N-hop path by the pairwise-difference recursion
/// over subpaths, memoized by link subset.
KernelEvaluation kernel_path(const PathModel& path, double s, int w, const KernelOptions& opts = {});

/// Same as kernel_path, taking log M_n(1-s) per link and log M_α(1+s).
KernelEvaluation kernel_from_logs(std::span<const double> log_service, double log_arrival, int w,
                                  const KernelOptions& opts = {});

struct BruteForceResult {
    double value = 0.0;
    /// Last summed term over the total; above 1e-12 means the horizon is short.
    double tail_ratio = 0.0;
    bool tail_ok = false;
};

/// Direct summation Σ_{j<=horizon} M_α^j Σ_{n_1+..+n_N=j+w} Π M_k^{n_k}.
/// Independent of the recursion; meant as a test oracle.
BruteForceResult kernel_path_bruteforce(const PathModel& path, double s, int w, int horizon);

struct ViolationBound {
    double epsilon = std::numeric_limits<double>::infinity();
    double s_star = 0.0;
    double s_boundary = 0.0;
};

/// inf over s in (0, b) of kernel_path, by five-point search. Values above 1
/// are returned unclamped.
ViolationBound violation_bound(const PathModel& path, int w, const BoundConfig& cfg = {});

/// Smallest w >= 0 with violation_bound(path, w) <= eps. Throws
/// InfeasibleError(Target) if none up to cfg.w_max.
int delay_bound_for_eps(const PathModel& path, double eps, const BoundConfig& cfg = {});

/// Leftover service after independent cross traffic of `cross.rate_bits`
/// bits per slot: M'(u) = e^{k_c(1-u)} M(u).
LinkService apply_cross_traffic(const LinkService& link, const CrossTraffic& cross);

}  // namespace wsnc
