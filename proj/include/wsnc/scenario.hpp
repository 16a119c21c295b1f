#pragma once

#include "wsnc/kernel.hpp"
#include "wsnc/mellin.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace wsnc {

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

/// γ̄ = p h̄² / σ².
double snr_from_power(double power_w, double gain, double noise_w);

/// Mean path gain K0 d^{-η}.
double path_gain(double distance_m, double exponent, double reference_gain);

/// Default noise floor: -111 dBm thermal over a 2 MHz channel plus a 10 dB
/// noise figure.
inline constexpr double kDefaultNoiseDbm = -101.0;
inline constexpr double kDefaultPathlossExponent = 3.0;

/// K0 such that a `length_m` link at `power_dbm` sees mean SNR `snr_db`.
double calibrated_reference_gain(double snr_db = 15.0, double length_m = 20.0, double power_dbm = 4.0,
                                 double noise_dbm = kDefaultNoiseDbm,
                                 double exponent = kDefaultPathlossExponent);

/// Link geometry: either lengths (converted through K0 d^{-η}) or explicit
/// mean gains. Exactly one of the two lists is non-empty.
struct PathGeometry {
    std::vector<double> link_lengths_m;
    std::vector<double> gains;
    double pathloss_exponent = kDefaultPathlossExponent;
    double reference_gain = calibrated_reference_gain();

    std::size_t hops() const noexcept { return gains.empty() ? link_lengths_m.size() : gains.size(); }
    std::vector<double> link_gains() const;
    void validate() const;
};

struct Transceiver {
    double p_min_w = dbm_to_watt(-17.0);
    double p_max_w = dbm_to_watt(4.0);
    double i_idle_a = 0.2e-6;
    double i_rx_a = 11.8e-3;
    double supply_v = 3.0;
    double t_slot_s = 10e-3;
    double t_tx_s = 4.256e-3;
    double t_ack_s = 0.8e-3;
    double tx_overhead_w = 15e-3;  // circuit power on top of the radiated power

    void validate() const;
};

enum class ServiceKind { Shannon, WirelessHart };

struct ServiceSpec {
    ServiceKind kind = ServiceKind::Shannon;
    double symbols_per_slot = 20.0;  // Shannon
    int frame_bits = 1016;           // WirelessHART
};

struct Scenario {
    std::string name = "scenario";
    PathGeometry geometry;
    double noise_power_w = dbm_to_watt(kDefaultNoiseDbm);
    ServiceSpec service;
    ArrivalModel arrival{20.0, 1};
    Transceiver transceiver;
    std::vector<double> batteries_j;         // empty: no battery data
    std::vector<double> cross_traffic_bits;  // empty: no cross traffic

    std::size_t hops() const noexcept { return geometry.hops(); }
    void validate() const;
};

/// Mean SNR of every link under the given transmit powers.
std::vector<double> link_snrs(const Scenario& scenario, std::span<const double> powers_w);

/// Kernel-ready path: one LinkService per hop (Q(γ̄) folded in for
/// WirelessHART), cross traffic applied when present.
PathModel build_path(const Scenario& scenario, std::span<const double> powers_w);

/// Length of one superframe, N slots.
double superframe_seconds(std::size_t hops, const Transceiver& trx);

/// Energy drawn by transmitter `node_index` (1-based, 1 = source) in one
/// superframe of an N-hop path at transmit power `power_w`.
double energy_per_superframe(int node_index, int hops, double power_w, const Transceiver& trx);

enum class LifetimeModel {
    Full,        // energy_per_superframe
    Simplified,  // radiated power only, B / (p T)
};

/// θ = B / e in superframes; +inf when e == 0.
double battery_duration(double charge_j, double energy_per_superframe_j);

/// Battery duration of every transmitter under `powers_w`.
std::vector<double> battery_durations(const Scenario& scenario, std::span<const double> charges_j,
                                      std::span<const double> powers_w,
                                      LifetimeModel model = LifetimeModel::Full);

enum class BatteryPreset { Equal, Proportional, InverseProportional };

/// Split `total_j` across transmitters: equally, in proportion to each
/// link's path loss 1/h̄², or in proportion to h̄².
std::vector<double> battery_presets(BatteryPreset kind, const PathGeometry& geometry, double total_j);

double mah_to_joule(double mah, double volts);

}  // namespace wsnc
