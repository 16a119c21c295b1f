#pragma once

#include <cmath>
#include <limits>
#include <numbers>

namespace wsnc {

/// Mellin transform value E[X^{u-1}] of a non-negative random variable.
///
/// Held as its logarithm: kernel numerators raise these to w-th powers and
/// divergent transforms are represented as +inf.
class MellinValue {
public:
    MellinValue() = default;

    static MellinValue from_log(double log_value) { return MellinValue(log_value); }
    static MellinValue from_value(double value) { return MellinValue(std::log(value)); }
    static MellinValue infinite() { return MellinValue(std::numeric_limits<double>::infinity()); }

    double log() const noexcept { return log_value_; }
    double value() const noexcept { return std::exp(log_value_); }
    bool finite() const noexcept { return log_value_ < std::numeric_limits<double>::infinity(); }

private:
    explicit MellinValue(double log_value) : log_value_(log_value) {}

    double log_value_ = 0.0;  // value 1
};

/// Constant-rate arrivals: `rate_bits` enter every `interval_slots` slots.
struct ArrivalModel {
    double rate_bits = 0.0;
    int interval_slots = 1;

    void validate() const;
};

/// Shannon-capacity service over a Rayleigh block-fading link.
///
/// The SNR-domain increment is (1 + γ)^c with γ ~ Exp(mean_snr) and
/// c = symbols_per_slot / ln 2, i.e. symbols_per_slot·log2(1+γ) bits.
struct ShannonRayleighService {
    double mean_snr = 1.0;
    double symbols_per_slot = 20.0;

    double c_nat() const noexcept { return symbols_per_slot / std::numbers::ln2; }
    void validate() const;
};

/// WirelessHART slot service: a frame of `frame_bits` bits is delivered with
/// probability `success_prob`, otherwise nothing.
struct WirelessHartService {
    int frame_bits = 1016;
    double success_prob = 1.0;

    void validate() const;
};

/// Arrival increment transform evaluated at 1 + s: exp(rate_bits · s).
MellinValue mellin_arrival(const ArrivalModel& arrival, double s);

/// E[(1+γ)^{c(u-1)}] = e^{1/γ̄} γ̄^{c(u-1)} Γ(c(u-1)+1, 1/γ̄).
MellinValue mellin_service_shannon(const ShannonRayleighService& svc, double u);

/// 1 + (e^{k(u-1)} - 1)·Q, the transform of the Bernoulli frame service.
MellinValue mellin_service_whart(const WirelessHartService& svc, double u);

/// Bit-error probability of the 2.4 GHz O-QPSK DSSS PHY at linear SNR `snr`
/// (IEEE 802.15.4-2006 closed form, 16-chip symbol alphabet).
double ber_oqpsk(double snr);

/// Frame success probability of a `frame_bits`-bit frame at instantaneous
/// linear SNR `snr`: (1 - ber)^frame_bits.
double frame_success_at(double snr, int frame_bits);

/// Q(γ̄): frame success probability averaged over Rayleigh fading with mean
/// SNR `mean_snr`, by adaptive Gauss-Kronrod quadrature. Throws NumericError
/// if the quadrature error estimate stays above tolerance.
double frame_success_prob(double mean_snr, int frame_bits);

}  // namespace wsnc
