#include "wsnc/special.hpp"

#include "wsnc/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace wsnc::special {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 100000;

// Legendre continued fraction for Γ(a,x) e^{x} x^{-a}, modified Lentz.
// Converges for every real a once x - a is comfortably positive.
double continued_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) return h;
    }
    throw NumericError("incomplete gamma: continued fraction did not converge for a=" +
                       std::to_string(a) + ", x=" + std::to_string(x));
}

// Lower incomplete gamma γ(a,x) for a > 0 by its power series.
double lower_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < kMaxIterations; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) {
            return sum * std::exp(a * std::log(x) - x);
        }
    }
    throw NumericError("incomplete gamma: series did not converge");
}

// Γ(a,x) for a in (-1,1) and small x, written so that the a -> 0 limit
// (the exponential integral) carries no cancellation:
//   Γ(a,x) = (Γ(1+a) - x^a)/a - x^a Σ_{k>=1} (-x)^k / (k! (a+k)).
double small_a(double a, double x) {
    const double log_x = std::log(x);
    double head;
    if (a == 0.0) {
        head = -std::numbers::egamma - log_x;
    } else {
        head = (boost::math::tgamma1pm1(a) - std::expm1(a * log_x)) / a;
    }
    double power = 1.0;  // (-x)^k / k!
    double sum = 0.0;
    for (int k = 1; k < kMaxIterations; ++k) {
        power *= -x / k;
        const double term = power / (a + k);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return head - std::exp(a * log_x) * sum;
}

bool use_continued_fraction(double a, double x) {
    return x >= 1.0 ? x >= a + 1.0 : x - a >= 4.0;
}

// Γ(a,x) in the region where the continued fraction is not used.
double direct(double a, double x) {
    if (a >= 1.0) {
        return std::tgamma(a) - lower_series(a, x);
    }
    if (a >= -0.5) return small_a(a, x);
    // Seed in [-0.5, 0.5] and step down, so every divisor has |order| >= 0.5:
    //   Γ(a-1,x) = (Γ(a,x) - x^{a-1} e^{-x}) / (a-1).
    const double seed = a - std::round(a);
    const int steps = static_cast<int>(-std::round(a));
    double value = small_a(seed, x);
    double order = seed;
    for (int k = 0; k < steps; ++k) {
        order -= 1.0;
        value = (value - std::exp(order * std::log(x) - x)) / order;
    }
    return value;
}

void check_arguments(double a, double x) {
    if (!std::isfinite(a) || !std::isfinite(x)) {
        throw DomainError("incomplete gamma: non-finite argument");
    }
    if (x < 0.0) {
        throw DomainError("incomplete gamma: x must be non-negative");
    }
    if (x == 0.0 && a <= 0.0) {
        throw DomainError("incomplete gamma: integral diverges for x = 0 and a <= 0");
    }
}

}  // namespace

double upper_incomplete_gamma(double a, double x) {
    check_arguments(a, x);
    if (x == 0.0) return std::tgamma(a);
    if (use_continued_fraction(a, x)) {
        return std::exp(a * std::log(x) - x) * continued_fraction(a, x);
    }
    return direct(a, x);
}

double log_upper_incomplete_gamma(double a, double x) {
    check_arguments(a, x);
    if (x == 0.0) return std::lgamma(a);
    if (use_continued_fraction(a, x)) {
        return a * std::log(x) - x + std::log(continued_fraction(a, x));
    }
    return std::log(direct(a, x));
}

}  // namespace wsnc::special
