#include "wsnc/scenario.hpp"

#include "wsnc/errors.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace wsnc {
namespace {

void require_positive(double v, const std::string& what) {
    if (!std::isfinite(v) || v <= 0.0) throw DomainError(what + " must be finite and > 0");
}

void require_non_negative(double v, const std::string& what) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError(what + " must be finite and >= 0");
}

}  // namespace

double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

double watt_to_dbm(double watt) { return 10.0 * std::log10(watt / 1e-3); }

double snr_from_power(double power_w, double gain, double noise_w) {
    require_non_negative(power_w, "power");
    require_positive(gain, "gain");
    require_positive(noise_w, "noise power");
    return power_w * gain / noise_w;
}

double path_gain(double distance_m, double exponent, double reference_gain) {
    require_positive(distance_m, "link length");
    require_positive(reference_gain, "reference gain");
    if (!std::isfinite(exponent)) throw DomainError("path-loss exponent must be finite");
    return reference_gain * std::pow(distance_m, -exponent);
}

double calibrated_reference_gain(double snr_db, double length_m, double power_dbm, double noise_dbm,
                                 double exponent) {
    return std::pow(10.0, snr_db / 10.0) * dbm_to_watt(noise_dbm) * std::pow(length_m, exponent) /
           dbm_to_watt(power_dbm);
}

std::vector<double> PathGeometry::link_gains() const {
    validate();
    if (!gains.empty()) return gains;
    std::vector<double> out;
    out.reserve(link_lengths_m.size());
    for (double d : link_lengths_m) out.push_back(path_gain(d, pathloss_exponent, reference_gain));
    return out;
}

void PathGeometry::validate() const {
    if (link_lengths_m.empty() == gains.empty()) {
        throw DomainError("path geometry needs exactly one of link lengths or link gains");
    }
    for (double d : link_lengths_m) require_positive(d, "link length");
    for (double g : gains) require_positive(g, "link gain");
    require_positive(reference_gain, "reference gain");
    if (!std::isfinite(pathloss_exponent)) throw DomainError("path-loss exponent must be finite");
}

void Transceiver::validate() const {
    require_positive(p_max_w, "p_max");
    require_non_negative(p_min_w, "p_min");
    if (p_min_w > p_max_w) throw DomainError("p_min must not exceed p_max");
    require_non_negative(i_idle_a, "idle current");
    require_non_negative(i_rx_a, "receive current");
    require_positive(supply_v, "supply voltage");
    require_positive(t_slot_s, "slot duration");
    require_non_negative(t_tx_s, "tx duration");
    require_non_negative(t_ack_s, "ack duration");
    require_non_negative(tx_overhead_w, "tx overhead");
    if (t_tx_s + t_ack_s > t_slot_s) throw DomainError("tx + ack duration exceeds the slot");
}

void Scenario::validate() const {
    geometry.validate();
    require_positive(noise_power_w, "noise power");
    arrival.validate();
    transceiver.validate();
    // The kernel's time unit is the arrival interval: one slot (Shannon) or
    // one superframe (WirelessHART).
    if (arrival.interval_slots != 1) {
        throw DomainError("only one arrival per slot (Shannon) or per superframe (WirelessHART) is supported");
    }
    if (service.kind == ServiceKind::Shannon) {
        require_positive(service.symbols_per_slot, "symbols per slot");
    } else if (service.frame_bits <= 0) {
        throw DomainError("frame bits must be > 0");
    }
    if (!batteries_j.empty() && batteries_j.size() != hops()) {
        throw DomainError("battery list length must equal the number of transmitters");
    }
    for (double b : batteries_j) require_non_negative(b, "battery charge");
    if (!cross_traffic_bits.empty() && cross_traffic_bits.size() != hops()) {
        throw DomainError("cross-traffic list length must equal the number of links");
    }
    for (double k : cross_traffic_bits) require_non_negative(k, "cross traffic");
}

std::vector<double> link_snrs(const Scenario& scenario, std::span<const double> powers_w) {
    const auto gains = scenario.geometry.link_gains();
    if (powers_w.size() != gains.size()) throw DomainError("power vector length must equal the hop count");
    std::vector<double> out;
    out.reserve(gains.size());
    for (std::size_t n = 0; n < gains.size(); ++n) {
        out.push_back(snr_from_power(powers_w[n], gains[n], scenario.noise_power_w));
    }
    return out;
}

PathModel build_path(const Scenario& scenario, std::span<const double> powers_w) {
    scenario.validate();
    const auto snrs = link_snrs(scenario, powers_w);
    PathModel path;
    path.arrival = scenario.arrival;
    for (std::size_t n = 0; n < snrs.size(); ++n) {
        if (!(snrs[n] > 0.0)) throw DomainError("link " + std::to_string(n + 1) + " has zero transmit power");
        const std::string label = "link" + std::to_string(n + 1);
        LinkService link;
        if (scenario.service.kind == ServiceKind::Shannon) {
            link = LinkService::shannon({snrs[n], scenario.service.symbols_per_slot}, label);
        } else {
            const double q = frame_success_prob(snrs[n], scenario.service.frame_bits);
            link = LinkService::whart({scenario.service.frame_bits, q}, snrs[n], label);
        }
        if (!scenario.cross_traffic_bits.empty()) {
            link = apply_cross_traffic(link, {scenario.cross_traffic_bits[n]});
        }
        path.links.push_back(std::move(link));
    }
    return path;
}

double superframe_seconds(std::size_t hops, const Transceiver& trx) {
    return static_cast<double>(hops) * trx.t_slot_s;
}

double energy_per_superframe(int node_index, int hops, double power_w, const Transceiver& trx) {
    if (hops < 1) throw DomainError("hop count must be >= 1");
    if (node_index < 1 || node_index > hops) {
        throw DomainError("node index " + std::to_string(node_index) + " outside 1.." + std::to_string(hops));
    }
    require_non_negative(power_w, "transmit power");
    const double tx_power = power_w + trx.tx_overhead_w;
    const double rx_power = trx.i_rx_a * trx.supply_v;
    // Own slot: send the frame, then listen for the ACK.
    double energy = tx_power * trx.t_tx_s + rx_power * trx.t_ack_s;
    double busy = trx.t_tx_s + trx.t_ack_s;
    if (node_index > 1) {
        // Upstream slot: receive the frame, then send the ACK.
        energy += rx_power * trx.t_tx_s + tx_power * trx.t_ack_s;
        busy += trx.t_tx_s + trx.t_ack_s;
    }
    const double idle = superframe_seconds(static_cast<std::size_t>(hops), trx) - busy;
    return energy + trx.i_idle_a * trx.supply_v * idle;
}

double battery_duration(double charge_j, double energy_per_superframe_j) {
    require_non_negative(charge_j, "battery charge");
    require_non_negative(energy_per_superframe_j, "energy per superframe");
    if (energy_per_superframe_j == 0.0) return std::numeric_limits<double>::infinity();
    return charge_j / energy_per_superframe_j;
}

std::vector<double> battery_durations(const Scenario& scenario, std::span<const double> charges_j,
                                      std::span<const double> powers_w, LifetimeModel model) {
    const int hops = static_cast<int>(scenario.hops());
    if (charges_j.size() != powers_w.size() || powers_w.size() != scenario.hops()) {
        throw DomainError("battery and power vectors must both have one entry per transmitter");
    }
    std::vector<double> out;
    out.reserve(powers_w.size());
    const double frame = superframe_seconds(scenario.hops(), scenario.transceiver);
    for (int n = 1; n <= hops; ++n) {
        const double p = powers_w[n - 1];
        const double e = model == LifetimeModel::Full ? energy_per_superframe(n, hops, p, scenario.transceiver)
                                                      : p * frame;
        out.push_back(battery_duration(charges_j[n - 1], e));
    }
    return out;
}

std::vector<double> battery_presets(BatteryPreset kind, const PathGeometry& geometry, double total_j) {
    require_non_negative(total_j, "total battery charge");
    const auto gains = geometry.link_gains();
    std::vector<double> weights;
    weights.reserve(gains.size());
    for (double g : gains) {
        switch (kind) {
            case BatteryPreset::Equal: weights.push_back(1.0); break;
            case BatteryPreset::Proportional: weights.push_back(1.0 / g); break;
            case BatteryPreset::InverseProportional: weights.push_back(g); break;
        }
    }
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (auto& w : weights) w = total_j * w / sum;
    return weights;
}

double mah_to_joule(double mah, double volts) {
    require_non_negative(mah, "battery capacity");
    require_positive(volts, "battery voltage");
    return mah * 3.6 * volts;
}

}  // namespace wsnc
