#include "wsnc/mellin.hpp"

#include "wsnc/errors.hpp"
#include "wsnc/special.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>

namespace wsnc {
namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

// log(e^a + e^b) without overflow.
double log_add_exp(double a, double b) {
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    if (hi == -std::numeric_limits<double>::infinity()) return hi;
    return hi + std::log1p(std::exp(lo - hi));
}

// (-1)^k binom(16,k) for k = 2..16, and the exponent factor 20(1/k - 1).
struct BerTerms {
    std::array<double, 15> coeff{};
    std::array<double, 15> rate{};
};

BerTerms make_ber_terms() {
    BerTerms t;
    double binom = 1.0;  // binom(16, k)
    for (int k = 1; k <= 16; ++k) {
        binom = binom * (16 - k + 1) / k;
        if (k < 2) continue;
        t.coeff[k - 2] = (k % 2 == 0 ? 1.0 : -1.0) * binom;
        t.rate[k - 2] = 20.0 * (1.0 / k - 1.0);
    }
    return t;
}

const BerTerms& ber_terms() {
    static const BerTerms terms = make_ber_terms();
    return terms;
}

}  // namespace

void ArrivalModel::validate() const {
    if (!std::isfinite(rate_bits) || rate_bits < 0.0) {
        throw DomainError("arrival rate_bits must be finite and >= 0");
    }
    if (interval_slots < 1) throw DomainError("arrival interval_slots must be >= 1");
}

void ShannonRayleighService::validate() const {
    if (!std::isfinite(mean_snr) || mean_snr <= 0.0) {
        throw DomainError("mean_snr must be finite and > 0");
    }
    if (!std::isfinite(symbols_per_slot) || symbols_per_slot <= 0.0) {
        throw DomainError("symbols_per_slot must be finite and > 0");
    }
}

void WirelessHartService::validate() const {
    if (frame_bits <= 0) throw DomainError("frame_bits must be > 0");
    if (!(success_prob >= 0.0 && success_prob <= 1.0)) {
        throw DomainError("success_prob must lie in [0, 1]");
    }
}

MellinValue mellin_arrival(const ArrivalModel& arrival, double s) {
    require_finite(s, "s");
    arrival.validate();
    if (arrival.rate_bits == 0.0) return MellinValue::from_log(0.0);
    return MellinValue::from_log(arrival.rate_bits * s);
}

MellinValue mellin_service_shannon(const ShannonRayleighService& svc, double u) {
    require_finite(u, "u");
    svc.validate();
    if (u == 1.0) return MellinValue::from_log(0.0);
    const double exponent = svc.c_nat() * (u - 1.0);
    const double x = 1.0 / svc.mean_snr;
    const double log_value = x + exponent * std::log(svc.mean_snr) +
                             special::log_upper_incomplete_gamma(exponent + 1.0, x);
    if (std::isnan(log_value)) throw NumericError("Shannon Mellin transform evaluated to NaN");
    return MellinValue::from_log(log_value);
}

MellinValue mellin_service_whart(const WirelessHartService& svc, double u) {
    require_finite(u, "u");
    svc.validate();
    const double q = svc.success_prob;
    if (q == 0.0) return MellinValue::from_log(0.0);
    const double t = static_cast<double>(svc.frame_bits) * (u - 1.0);
    if (q == 1.0) return MellinValue::from_log(t);
    // log(1 + Q(e^t - 1)); log1p keeps u near 1 accurate, log-sum-exp the tails.
    const double shift = q * std::expm1(std::min(t, 700.0));
    if (std::abs(shift) < 0.5) return MellinValue::from_log(std::log1p(shift));
    return MellinValue::from_log(log_add_exp(std::log(q) + t, std::log1p(-q)));
}

double ber_oqpsk(double snr) {
    if (!std::isfinite(snr) && snr != std::numeric_limits<double>::infinity()) {
        throw DomainError("ber_oqpsk: snr must not be NaN");
    }
    if (snr < 0.0) throw DomainError("ber_oqpsk: snr must be >= 0");
    const auto& terms = ber_terms();
    // Neumaier compensated sum; at snr = 0 the terms reach 1e4 and cancel to 15/16.
    double sum = 0.0;
    double carry = 0.0;
    for (std::size_t i = 0; i < terms.coeff.size(); ++i) {
        const double term = terms.coeff[i] * std::exp(terms.rate[i] * snr);
        const double next = sum + term;
        if (std::abs(sum) >= std::abs(term)) {
            carry += (sum - next) + term;
        } else {
            carry += (term - next) + sum;
        }
        sum = next;
    }
    const double ber = (8.0 / 15.0) * (1.0 / 16.0) * (sum + carry);
    return std::clamp(ber, 0.0, 0.5);
}

double frame_success_at(double snr, int frame_bits) {
    if (frame_bits <= 0) throw DomainError("frame_bits must be > 0");
    const double ber = ber_oqpsk(snr);
    return std::exp(static_cast<double>(frame_bits) * std::log1p(-ber));
}

double frame_success_prob(double mean_snr, int frame_bits) {
    if (!std::isfinite(mean_snr) || mean_snr <= 0.0) {
        throw DomainError("frame_success_prob: mean_snr must be finite and > 0");
    }
    if (frame_bits <= 0) throw DomainError("frame_bits must be > 0");

    // Above snr_hi the frame is error-free to 1e-18; ber < 4 e^{-10 snr} there.
    double snr_hi = std::log(4.0 * frame_bits * 1e18) / 10.0;
    while (frame_bits * ber_oqpsk(snr_hi) > 1e-17) snr_hi += 0.5;

    // Split at the snr values where the success curve turns over, and stop
    // where the exponential weight underflows.
    auto integrand = [&](double snr) {
        return std::exp(-snr / mean_snr) / mean_snr * frame_success_at(snr, frame_bits);
    };
    const std::array<double, 6> cuts{0.0, 0.25, 0.5, 1.0, 2.0, snr_hi};
    const double weight_end = 745.0 * mean_snr;
    double head = 0.0;
    double error = 0.0;
    double l1 = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i];
        const double hi = std::min(cuts[i + 1], weight_end);
        if (lo >= hi) break;
        double piece_error = 0.0;
        double piece_l1 = 0.0;
        head += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            integrand, lo, hi, 20, 1e-9, &piece_error, &piece_l1);
        error += piece_error;
        l1 += piece_l1;
    }
    // The alternating BER sum leaves ~1e-10 relative noise in the integrand, so
    // ask for 1e-9. The absolute floor covers mean_snr -> 0, where Q itself
    // sits near underflow.
    if (!(error <= 1e-7 * l1 + 1e-290)) {
        std::ostringstream msg;
        msg << "frame_success_prob: quadrature did not converge (mean_snr=" << mean_snr
            << ", frame_bits=" << frame_bits << ", error estimate=" << error << ", L1=" << l1 << ")";
        throw NumericError(msg.str());
    }
    const double tail = std::exp(-snr_hi / mean_snr);
    return std::clamp(head + tail, 0.0, 1.0);
}

}  // namespace wsnc
