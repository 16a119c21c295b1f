#include "wsnc/kernel.hpp"

#include "wsnc/errors.hpp"
#include "wsnc/search.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace wsnc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-link quantities after factoring out the largest service transform:
// z_k = M_k / M_max in [0, 1], rho = M_α M_max, gap_k = 1 - M_α M_k.
struct Normalized {
    std::vector<double> z;
    std::vector<double> gap;
    double rho = 0.0;
};

struct Cell {
    double value;
    double magnitude;  // same recursion on |coefficients|
};

class SubsetRecursion {
public:
    SubsetRecursion(const Normalized& n, int w, int pivot) : n_(n), w_(w), pivot_(pivot) {}

    Cell eval(std::uint64_t mask) {
        if (auto it = memo_.find(mask); it != memo_.end()) return it->second;
        Cell cell{};
        if (std::popcount(mask) == 1) {
            const int k = std::countr_zero(mask);
            const double v = std::pow(n_.z[k], w_) / n_.gap[k];
            cell = {v, v};
        } else {
            const int last = 63 - std::countl_zero(mask);
            const std::uint64_t rest = mask & ~(std::uint64_t{1} << last);
            int m = 63 - std::countl_zero(rest);
            if (pivot_ >= 0 && pivot_ != last && (mask >> pivot_) & 1U) m = pivot_;
            const Cell without_m = eval(mask & ~(std::uint64_t{1} << m));
            const Cell without_last = eval(rest);
            const double z_last = n_.z[last];
            const double z_m = n_.z[m];
            const double diff = z_last - z_m;
            cell.value = (z_last * without_m.value - z_m * without_last.value) / diff;
            cell.magnitude = (z_last * without_m.magnitude + z_m * without_last.magnitude) / std::abs(diff);
        }
        memo_.emplace(mask, cell);
        return cell;
    }

private:
    const Normalized& n_;
    int w_;
    int pivot_;
    std::unordered_map<std::uint64_t, Cell> memo_;
};

// Divided difference of t^{w+N-1} / (1 - rho t) at the nodes z, read off as
// entry (1, N) of the same function applied to the upper-bidiagonal matrix
// with diagonal z and unit superdiagonal. Every intermediate is non-negative,
// so repeated or clustered nodes cost no accuracy.
double confluent(const Normalized& n, int w) {
    const std::size_t count = n.z.size();
    std::vector<double> y(count);
    y[count - 1] = 1.0 / n.gap[count - 1];
    for (std::size_t i = count - 1; i-- > 0;) y[i] = n.rho * y[i + 1] / n.gap[i];
    const long power = static_cast<long>(w) + static_cast<long>(count) - 1;
    for (long step = 0; step < power; ++step) {
        for (std::size_t i = 0; i + 1 < count; ++i) y[i] = n.z[i] * y[i] + y[i + 1];
        y[count - 1] *= n.z[count - 1];
    }
    return y[0];
}

std::vector<double> service_logs(const PathModel& path, double s) {
    std::vector<double> logs;
    logs.reserve(path.links.size());
    for (const auto& link : path.links) logs.push_back(link.mellin_at(1.0 - s).log());
    return logs;
}

double log_margin(const PathModel& path, double s) {
    const double log_arrival = mellin_arrival(path.arrival, s).log();
    double worst = -kInf;
    for (double lx : service_logs(path, s)) worst = std::max(worst, log_arrival + lx);
    return worst;
}

}  // namespace

LinkService LinkService::shannon(const ShannonRayleighService& svc, std::string label) {
    svc.validate();
    return {[svc](double u) { return mellin_service_shannon(svc, u); }, std::move(label), svc.mean_snr};
}

LinkService LinkService::whart(const WirelessHartService& svc, double mean_snr, std::string label) {
    svc.validate();
    return {[svc](double u) { return mellin_service_whart(svc, u); }, std::move(label), mean_snr};
}

LinkService LinkService::constant(double value, std::string label) {
    if (!(value >= 0.0)) throw DomainError("constant Mellin value must be >= 0");
    return {[value](double u) { return u == 1.0 ? MellinValue::from_log(0.0) : MellinValue::from_value(value); },
            std::move(label), 1.0};
}

void PathModel::validate() const {
    if (links.empty()) throw DomainError("path must contain at least one link");
    if (links.size() > 63) throw DomainError("path longer than 63 links is not supported");
    for (const auto& link : links) {
        if (!link.mellin_at) throw DomainError("link '" + link.label + "' has no Mellin evaluator");
    }
    arrival.validate();
}

double stability_margin(const PathModel& path, double s) {
    path.validate();
    if (!(s > 0.0)) throw DomainError("stability_margin: s must be > 0");
    return std::exp(log_margin(path, s));
}

double stability_boundary(const PathModel& path, const BoundConfig& cfg) {
    path.validate();
    if (!(cfg.s_max > 0.0)) throw DomainError("s_max must be > 0");
    if (log_margin(path, cfg.s_max) < 0.0) return cfg.s_max;
    // The log-margin is convex and 0 at s = 0, so the stable set is an interval.
    double hi = cfg.s_max;
    double lo = hi;
    bool found = false;
    for (int i = 0; i < 64; ++i) {
        lo *= 0.5;
        if (log_margin(path, lo) < 0.0) {
            found = true;
            break;
        }
        hi = lo;
    }
    if (!found) {
        std::ostringstream msg;
        msg << "stability condition M_a(1+s) M_n(1-s) < 1 fails for every s > 0 (arrival rate "
            << path.arrival.rate_bits << " bits is not below the service of every link)";
        throw InfeasibleError(InfeasibleError::Reason::Stability, msg.str());
    }
    while (hi - lo > cfg.boundary_rel_tol * lo) {
        const double mid = 0.5 * (lo + hi);
        if (log_margin(path, mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

KernelEvaluation kernel_from_logs(std::span<const double> log_service, double log_arrival, int w,
                                  const KernelOptions& opts) {
    if (log_service.empty()) throw DomainError("kernel needs at least one link");
    if (log_service.size() > 63) throw DomainError("path longer than 63 links is not supported");
    if (w < 0) throw DomainError("kernel: w must be >= 0");
    KernelEvaluation out;
    out.w = w;
    out.route = opts.route == KernelRoute::Confluent ? KernelRoute::Confluent : KernelRoute::Recursion;

    double log_max = -kInf;
    for (double lx : log_service) {
        const double ly = log_arrival + lx;
        if (std::isnan(ly) || ly >= 0.0) return out;  // unstable
        log_max = std::max(log_max, lx);
    }
    out.stable = true;
    if (log_max == -kInf) {
        out.value = w == 0 ? 1.0 : 0.0;
        return out;
    }

    Normalized n;
    n.rho = std::exp(log_arrival + log_max);
    for (double lx : log_service) {
        n.z.push_back(std::exp(lx - log_max));
        n.gap.push_back(-std::expm1(log_arrival + lx));
    }

    double scaled = 0.0;
    const bool use_recursion = opts.route != KernelRoute::Confluent;
    if (use_recursion) {
        const int count = static_cast<int>(n.z.size());
        SubsetRecursion rec(n, w, opts.pivot < count ? opts.pivot : -1);
        const std::uint64_t all = (std::uint64_t{1} << count) - 1;
        const Cell cell = rec.eval(all);
        scaled = cell.value;
        out.condition = cell.magnitude / std::abs(cell.value);
        const bool trusted = std::isfinite(out.condition) && out.condition <= opts.condition_limit && scaled > 0.0;
        if (!trusted && opts.route == KernelRoute::Automatic) {
            scaled = confluent(n, w);
            out.route = KernelRoute::Confluent;
            out.condition = 1.0;
        }
    } else {
        scaled = confluent(n, w);
    }
    // K = M_max^w · (normalized kernel); the w = 0 guard avoids 0 · inf.
    out.value = w == 0 ? scaled : std::exp(w * log_max + std::log(scaled));
    return out;
}

KernelEvaluation kernel_path(const PathModel& path, double s, int w, const KernelOptions& opts) {
    path.validate();
    if (!(s > 0.0)) throw DomainError("kernel: s must be > 0");
    const auto logs = service_logs(path, s);
    KernelEvaluation out = kernel_from_logs(logs, mellin_arrival(path.arrival, s).log(), w, opts);
    out.s = s;
    return out;
}

KernelEvaluation kernel_single(const LinkService& link, const ArrivalModel& arrival, double s, int w) {
    return kernel_path(PathModel{{link}, arrival}, s, w);
}

BruteForceResult kernel_path_bruteforce(const PathModel& path, double s, int w, int horizon) {
    path.validate();
    if (!(s > 0.0)) throw DomainError("kernel: s must be > 0");
    if (w < 0 || horizon < 0) throw DomainError("kernel_path_bruteforce: w and horizon must be >= 0");
    const long double a = std::exp(static_cast<long double>(mellin_arrival(path.arrival, s).log()));
    std::vector<long double> x;
    for (const auto& link : path.links) x.push_back(std::exp(static_cast<long double>(link.mellin_at(1.0 - s).log())));
    const long double x_max = *std::max_element(x.begin(), x.end());
    if (a * x_max >= 1.0L) throw DomainError("kernel_path_bruteforce: path is unstable at s");

    // counts[n]: sum over all splits n = n_1 + .. + n_N of Π (a x_k)^{n_k},
    // built one link at a time. Then a^j Σ_{splits of j+w} Π x_k^{n_k} is
    // counts[j + w] / a^w, and no power of a alone is ever formed.
    const std::size_t top = static_cast<std::size_t>(horizon) + static_cast<std::size_t>(w);
    std::vector<long double> counts(top + 1, 0.0L);
    counts[0] = 1.0L;
    for (long double xk : x) {
        const long double yk = a * xk;
        for (std::size_t n = 1; n <= top; ++n) counts[n] += yk * counts[n - 1];
    }
    long double sum = 0.0L;
    long double term = 0.0L;
    for (int j = 0; j <= horizon; ++j) {
        term = counts[static_cast<std::size_t>(j) + static_cast<std::size_t>(w)];
        sum += term;
    }
    const long double scale = std::pow(a, -static_cast<long double>(w));
    sum *= scale;
    term *= scale;
    BruteForceResult out;
    out.value = static_cast<double>(sum);
    const long double rest = term / (1.0L - a * x_max);
    out.tail_ratio = sum > 0.0L ? static_cast<double>(rest / sum) : 0.0;
    out.tail_ok = out.tail_ratio < 1e-12;
    return out;
}

ViolationBound violation_bound(const PathModel& path, int w, const BoundConfig& cfg) {
    if (w < 0) throw DomainError("violation_bound: w must be >= 0");
    ViolationBound out;
    out.s_boundary = stability_boundary(path, cfg);
    const auto best = five_point_search(
        [&](double s) { return kernel_path(path, s, w, cfg.kernel).value; }, 0.0, out.s_boundary,
        cfg.search_delta_min);
    out.epsilon = best.value;
    out.s_star = best.x;
    return out;
}

int delay_bound_for_eps(const PathModel& path, double eps, const BoundConfig& cfg) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("delay_bound_for_eps: eps must lie in (0, 1)");
    auto meets = [&](int w) { return violation_bound(path, w, cfg).epsilon <= eps; };
    if (meets(0)) return 0;
    int failing = 0;
    int passing = 1;
    while (!meets(passing)) {
        failing = passing;
        if (passing >= cfg.w_max) {
            std::ostringstream msg;
            msg << "no delay w <= " << cfg.w_max << " reaches violation probability " << eps;
            throw InfeasibleError(InfeasibleError::Reason::Target, msg.str());
        }
        passing = std::min(2 * passing, cfg.w_max);
    }
    while (passing - failing > 1) {
        const int mid = failing + (passing - failing) / 2;
        if (meets(mid)) {
            passing = mid;
        } else {
            failing = mid;
        }
    }
    return passing;
}

LinkService apply_cross_traffic(const LinkService& link, const CrossTraffic& cross) {
    if (!std::isfinite(cross.rate_bits) || cross.rate_bits < 0.0) {
        throw DomainError("cross traffic rate_bits must be finite and >= 0");
    }
    if (cross.rate_bits == 0.0) return link;
    LinkService out = link;
    out.mellin_at = [inner = link.mellin_at, k = cross.rate_bits](double u) {
        return MellinValue::from_log(k * (1.0 - u) + inner(u).log());
    };
    return out;
}

}  // namespace wsnc
