#include "wsnc/config.hpp"

#include "wsnc/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace wsnc {
namespace {

namespace pt = boost::property_tree;

struct Position {
    int line = 0;
    int column = 0;
};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

// Source position of every "section.key", for error messages. The tree
// itself comes from boost's INI parser, which keeps no positions.
std::map<std::string, Position> locate_keys(std::string_view text) {
    std::map<std::string, Position> out;
    std::string section;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        const std::string body = trim(line);
        if (body.empty() || body[0] == ';' || body[0] == '#') continue;
        if (body.front() == '[') {
            section = trim(body.substr(1, body.find(']') - 1));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const auto value_start = line.find_first_not_of(" \t", eq + 1);
        const int column = static_cast<int>(value_start == std::string::npos ? eq + 2 : value_start + 1);
        out[section + "." + trim(line.substr(0, eq))] = {line_no, column};
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ", ";
        out += format_double(values[i]);
    }
    return out;
}

// Unit-suffixed spellings of one quantity, each with its conversion to SI.
struct Spelling {
    const char* key;
    std::function<double(double)> to_si;
};

double scale(double factor, double v) { return factor * v; }

class Reader {
public:
    Reader(const pt::ptree& tree, std::map<std::string, Position> where) : tree_(tree), where_(std::move(where)) {}

    [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
        const std::string full = section + "." + key;
        const auto it = where_.find(full);
        const Position pos = it == where_.end() ? Position{} : it->second;
        throw ParseError(full + ": " + what, pos.line, pos.column);
    }

    std::optional<std::string> raw(const std::string& section, const std::string& key) {
        used_.insert(section + "." + key);
        const auto sec = tree_.get_child_optional(pt::ptree::path_type(section, '/'));
        if (!sec) return std::nullopt;
        const auto value = sec->get_optional<std::string>(pt::ptree::path_type(key, '/'));
        if (!value) return std::nullopt;
        return trim(*value);
    }

    double parse_number(const std::string& section, const std::string& key, const std::string& text) const {
        double v = 0.0;
        const char* begin = text.data();
        const char* end = begin + text.size();
        if (!text.empty() && *begin == '+') ++begin;
        const auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || ptr != end || !std::isfinite(v)) fail(section, key, "expected a number, got '" + text + "'");
        return v;
    }

    std::optional<double> number(const std::string& section, const std::string& key) {
        const auto text = raw(section, key);
        if (!text) return std::nullopt;
        return parse_number(section, key, *text);
    }

    double number_or(const std::string& section, const std::string& key, double fallback) {
        return number(section, key).value_or(fallback);
    }

    std::optional<std::int64_t> integer(const std::string& section, const std::string& key) {
        const auto v = number(section, key);
        if (!v) return std::nullopt;
        if (std::trunc(*v) != *v || std::abs(*v) > 9.0e15) fail(section, key, "expected an integer");
        return static_cast<std::int64_t>(*v);
    }

    std::optional<std::vector<double>> list(const std::string& section, const std::string& key) {
        const auto text = raw(section, key);
        if (!text) return std::nullopt;
        std::vector<double> out;
        std::stringstream items(*text);
        for (std::string item; std::getline(items, item, ',');) out.push_back(parse_number(section, key, trim(item)));
        if (out.empty()) fail(section, key, "expected a comma-separated list of numbers");
        return out;
    }

    // At most one spelling may be present; the value comes back in SI units.
    std::optional<double> quantity(const std::string& section, std::initializer_list<Spelling> spellings) {
        std::optional<double> out;
        const char* seen = nullptr;
        for (const auto& s : spellings) {
            const auto v = number(section, s.key);
            if (!v) continue;
            if (seen) fail(section, s.key, std::string("conflicts with ") + seen);
            seen = s.key;
            out = s.to_si(*v);
        }
        return out;
    }

    std::optional<std::vector<double>> quantity_list(const std::string& section,
                                                     std::initializer_list<Spelling> spellings) {
        std::optional<std::vector<double>> out;
        const char* seen = nullptr;
        for (const auto& s : spellings) {
            auto v = list(section, s.key);
            if (!v) continue;
            if (seen) fail(section, s.key, std::string("conflicts with ") + seen);
            seen = s.key;
            for (auto& x : *v) x = s.to_si(x);
            out = std::move(v);
        }
        return out;
    }

    // Keys nobody asked for are typos until proven otherwise.
    void reject_unknown(const std::set<std::string>& sections) const {
        for (const auto& [section, body] : tree_) {
            if (!sections.count(section)) {
                const auto it = where_.lower_bound(section + ".");
                const Position pos = it == where_.end() ? Position{} : Position{it->second.line, 1};
                throw ParseError("unknown section [" + section + "]", pos.line, pos.column);
            }
            if (section == "paths") continue;
            for (const auto& kv : body) {
                if (!used_.count(section + "." + kv.first)) fail(section, kv.first, "unknown key");
            }
        }
    }

    const pt::ptree& tree() const { return tree_; }

private:
    const pt::ptree& tree_;
    std::map<std::string, Position> where_;
    std::set<std::string> used_;
};

template <class Enum>
Enum choose(Reader& r, const std::string& section, const std::string& key, Enum fallback,
            std::initializer_list<std::pair<const char*, Enum>> names) {
    const auto text = r.raw(section, key);
    if (!text) return fallback;
    std::string options;
    for (const auto& [name, value] : names) {
        if (*text == name) return value;
        options += options.empty() ? name : std::string(", ") + name;
    }
    r.fail(section, key, "expected one of " + options + ", got '" + *text + "'");
}

void apply_override(pt::ptree& tree, const std::string& assignment) {
    const auto eq = assignment.find('=');
    const std::string key = trim(assignment.substr(0, eq));
    if (eq == std::string::npos || key.find('.') == std::string::npos || key.front() == '.' || key.back() == '.') {
        throw ParseError("override '" + assignment + "' is not of the form section.key=value", 0, 0);
    }
    const auto dot = key.find('.');
    const std::string path = trim(key.substr(0, dot)) + "/" + trim(key.substr(dot + 1));
    tree.put(pt::ptree::path_type(path, '/'), trim(assignment.substr(eq + 1)));
}

const char* preset_name(BatteryPreset p) {
    switch (p) {
        case BatteryPreset::Equal: return "equal";
        case BatteryPreset::Proportional: return "proportional";
        case BatteryPreset::InverseProportional: return "inverse";
    }
    return "equal";
}

}  // namespace

std::vector<double> BatterySpec::for_path(const PathGeometry& geometry) const {
    if (preset) return battery_presets(*preset, geometry, total_j);
    if (!charges_j.empty() && charges_j.size() != geometry.hops()) {
        throw DomainError("battery charge list has " + std::to_string(charges_j.size()) + " entries for a " +
                          std::to_string(geometry.hops()) + "-hop path");
    }
    return charges_j;
}

SimOptimizerConfig ScenarioFile::sim_optimizer_config() const {
    SimOptimizerConfig cfg;
    cfg.sim = sim;
    cfg.sim.slots = sim_optimizer.slots;
    cfg.sim.early_stop.reset();
    cfg.delta_p_init_w = sim_optimizer.delta_p_init_w;
    cfg.max_halvings = sim_optimizer.max_halvings;
    cfg.lifetime_model = optimizer.lifetime_model;
    return cfg;
}

ScenarioFile parse_scenario(std::string_view text, const std::vector<std::string>& overrides) {
    pt::ptree tree;
    {
        std::istringstream in{std::string(text)};
        try {
            pt::ini_parser::read_ini(in, tree);
        } catch (const pt::ini_parser_error& e) {
            throw ParseError(e.message(), static_cast<int>(e.line()), 1);
        }
    }
    auto where = locate_keys(text);
    for (const auto& o : overrides) {
        apply_override(tree, o);
        const auto key = trim(o.substr(0, o.find('=')));
        where[key] = {0, 0};
    }
    Reader r(tree, std::move(where));
    ScenarioFile file;

    if (auto name = r.raw("scenario", "name")) file.name = *name;

    // Channel and calibration shared by every path.
    Scenario base;
    base.name = file.name;
    auto& geo = base.geometry;
    geo.pathloss_exponent = r.number_or("path", "pathloss_exponent", kDefaultPathlossExponent);
    const auto noise = r.quantity("path", {{"noise_w", [](double v) { return v; }},
                                           {"noise_dbm", [](double v) { return dbm_to_watt(v); }}});
    base.noise_power_w = noise.value_or(dbm_to_watt(kDefaultNoiseDbm));
    const auto ref_gain = r.number("path", "reference_gain");
    const auto ref_snr = r.number("path", "reference_snr_db");
    const auto ref_len = r.number("path", "reference_length_m");
    const auto ref_pow = r.number("path", "reference_power_dbm");
    if (ref_gain && (ref_snr || ref_len || ref_pow)) {
        r.fail("path", "reference_gain", "give either reference_gain or the reference_* calibration point, not both");
    }
    geo.reference_gain = ref_gain.value_or(calibrated_reference_gain(
        ref_snr.value_or(15.0), ref_len.value_or(20.0), ref_pow.value_or(4.0), watt_to_dbm(base.noise_power_w),
        geo.pathloss_exponent));

    // Service and arrivals.
    base.service.kind = choose(r, "service", "kind", ServiceKind::Shannon,
                               {{"shannon", ServiceKind::Shannon}, {"wirelesshart", ServiceKind::WirelessHart}});
    const bool whart = base.service.kind == ServiceKind::WirelessHart;
    base.service.symbols_per_slot = r.number_or("service", "symbols_per_slot", 20.0);
    if (auto bits = r.integer("service", "frame_bits")) base.service.frame_bits = static_cast<int>(*bits);
    base.arrival.rate_bits = r.number_or("service", "arrival_bits", whart ? 80.0 : 20.0);
    if (auto cross = r.list("service", "cross_traffic_bits")) base.cross_traffic_bits = *cross;

    // Transceiver.
    auto& trx = base.transceiver;
    trx.p_min_w = r.quantity("transceiver", {{"p_min_w", [](double v) { return v; }},
                                             {"p_min_mw", [](double v) { return scale(1e-3, v); }},
                                             {"p_min_dbm", [](double v) { return dbm_to_watt(v); }}})
                      .value_or(trx.p_min_w);
    trx.p_max_w = r.quantity("transceiver", {{"p_max_w", [](double v) { return v; }},
                                             {"p_max_mw", [](double v) { return scale(1e-3, v); }},
                                             {"p_max_dbm", [](double v) { return dbm_to_watt(v); }}})
                      .value_or(trx.p_max_w);
    trx.i_idle_a = r.quantity("transceiver", {{"i_idle_a", [](double v) { return v; }},
                                              {"i_idle_ma", [](double v) { return scale(1e-3, v); }},
                                              {"i_idle_ua", [](double v) { return scale(1e-6, v); }}})
                       .value_or(trx.i_idle_a);
    trx.i_rx_a = r.quantity("transceiver", {{"i_rx_a", [](double v) { return v; }},
                                            {"i_rx_ma", [](double v) { return scale(1e-3, v); }}})
                     .value_or(trx.i_rx_a);
    trx.supply_v = r.number_or("transceiver", "supply_v", trx.supply_v);
    trx.t_slot_s = r.quantity("transceiver", {{"slot_s", [](double v) { return v; }},
                                              {"slot_ms", [](double v) { return scale(1e-3, v); }}})
                       .value_or(trx.t_slot_s);
    trx.t_tx_s = r.quantity("transceiver", {{"tx_s", [](double v) { return v; }},
                                            {"tx_ms", [](double v) { return scale(1e-3, v); }}})
                     .value_or(trx.t_tx_s);
    trx.t_ack_s = r.quantity("transceiver", {{"ack_s", [](double v) { return v; }},
                                             {"ack_ms", [](double v) { return scale(1e-3, v); }}})
                      .value_or(trx.t_ack_s);
    trx.tx_overhead_w = r.quantity("transceiver", {{"tx_overhead_w", [](double v) { return v; }},
                                                   {"tx_overhead_mw", [](double v) { return scale(1e-3, v); }}})
                            .value_or(trx.tx_overhead_w);

    // QoS target; the tolerance defaults to eps / 100.
    if (auto w = r.integer("qos", "delay")) file.qos.target_delay = static_cast<int>(*w);
    file.qos.target_eps = r.number_or("qos", "eps", file.qos.target_eps);
    file.qos.eps_tolerance = r.number_or("qos", "eps_tolerance", file.qos.target_eps / 100.0);

    // Batteries.
    const double volts = r.number_or("batteries", "voltage_v", trx.supply_v);
    const auto mah = [volts](double v) { return mah_to_joule(v, volts); };
    const auto identity = [](double v) { return v; };
    file.batteries.preset = std::nullopt;
    if (r.raw("batteries", "preset")) {
        file.batteries.preset = choose(r, "batteries", "preset", BatteryPreset::Equal,
                                       {{"equal", BatteryPreset::Equal},
                                        {"proportional", BatteryPreset::Proportional},
                                        {"inverse", BatteryPreset::InverseProportional}});
    }
    const auto total = r.quantity("batteries", {{"total_j", identity}, {"total_mah", mah}});
    const auto charges = r.quantity_list("batteries", {{"charge_j", identity}, {"charge_mah", mah}});
    if (file.batteries.preset && charges) r.fail("batteries", "preset", "give either a preset or explicit charges");
    if (file.batteries.preset && !total) r.fail("batteries", "preset", "a preset needs total_j or total_mah");
    if (!file.batteries.preset && total) r.fail("batteries", "total_j", "a total charge needs a preset");
    if (total) file.batteries.total_j = *total;
    if (charges) file.batteries.charges_j = *charges;

    // Optimizer.
    auto& opt = file.optimizer;
    opt.delta_p_init_w = r.quantity("optimizer", {{"delta_p_init_w", identity},
                                                  {"delta_p_init_mw", [](double v) { return scale(1e-3, v); }}})
                             .value_or(opt.delta_p_init_w);
    opt.delta_p_min_w = r.quantity("optimizer", {{"delta_p_min_w", identity},
                                                 {"delta_p_min_mw", [](double v) { return scale(1e-3, v); }}})
                            .value_or(opt.delta_p_min_w);
    opt.s_interval_min = r.number_or("optimizer", "s_interval_min", opt.s_interval_min);
    if (auto it = r.integer("optimizer", "max_iterations")) opt.max_iterations = static_cast<int>(*it);
    opt.lifetime_model = choose(r, "optimizer", "lifetime_model", LifetimeModel::Full,
                                {{"full", LifetimeModel::Full}, {"simplified", LifetimeModel::Simplified}});
    opt.bound.s_max = r.number_or("optimizer", "s_max", opt.bound.s_max);
    if (auto wm = r.integer("optimizer", "w_max")) opt.bound.w_max = static_cast<int>(*wm);
    opt.bound.search_delta_min = opt.s_interval_min;

    // Simulation.
    auto& sim = file.sim;
    if (auto v = r.integer("sim", "slots")) sim.slots = *v;
    if (auto text = r.raw("sim", "seed")) {
        const auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), sim.seed);
        if (ec != std::errc() || ptr != text->data() + text->size()) {
            r.fail("sim", "seed", "expected an unsigned 64-bit integer, got '" + *text + "'");
        }
    }
    if (auto v = r.integer("sim", "warmup_slots")) sim.warmup_slots = *v;
    if (auto v = r.integer("sim", "divergence_backlog")) sim.divergence_backlog = *v;
    if (r.raw("sim", "scheduling")) {
        sim.scheduling = choose(r, "sim", "scheduling", Scheduling::PerSlotAllLinks,
                                {{"per-slot", Scheduling::PerSlotAllLinks},
                                 {"round-robin", Scheduling::RoundRobinSuperframe}});
    }
    if (auto v = r.integer("sim", "optimizer_slots")) file.sim_optimizer.slots = *v;
    file.sim_optimizer.delta_p_init_w =
        r.quantity("sim", {{"optimizer_delta_p_w", identity},
                           {"optimizer_delta_p_mw", [](double v) { return scale(1e-3, v); }}})
            .value_or(file.sim_optimizer.delta_p_init_w);
    if (auto v = r.integer("sim", "optimizer_max_halvings")) file.sim_optimizer.max_halvings = static_cast<int>(*v);

    // Paths: a single [path] geometry or a named [paths] list of lengths.
    const auto lengths = r.list("path", "length_m");
    const auto gains = r.list("path", "gains");
    if (lengths && gains) r.fail("path", "gains", "give either length_m or gains, not both");
    const auto paths_section = tree.get_child_optional("paths");
    if (paths_section && (lengths || gains)) {
        r.fail("path", lengths ? "length_m" : "gains", "a [paths] list replaces the single-path geometry");
    }
    auto add_path = [&](const std::string& id, PathGeometry g) {
        Scenario sc = base;
        sc.name = id;
        sc.geometry = std::move(g);
        try {
            sc.validate();
            sc.batteries_j = file.batteries.for_path(sc.geometry);
            sc.validate();
        } catch (const DomainError& e) {
            throw ParseError("path '" + id + "': " + e.what(), 0, 0);
        }
        file.path_ids.push_back(id);
        file.paths.push_back(std::move(sc));
    };
    if (paths_section) {
        for (const auto& kv : *paths_section) {
            PathGeometry g = geo;
            g.link_lengths_m = *r.list("paths", kv.first);
            add_path(kv.first, std::move(g));
        }
        if (file.paths.empty()) throw ParseError("[paths] lists no paths", 0, 0);
    } else {
        PathGeometry g = geo;
        if (gains) {
            g.gains = *gains;
        } else if (lengths) {
            g.link_lengths_m = *lengths;
        } else {
            throw ParseError("no path given: set path.length_m, path.gains or a [paths] list", 0, 0);
        }
        add_path(file.name, std::move(g));
    }

    r.reject_unknown({"scenario", "path", "paths", "service", "qos", "transceiver", "batteries", "optimizer", "sim"});
    try {
        file.qos.validate();
        file.optimizer.validate();
        file.sim.validate();
    } catch (const DomainError& e) {
        throw ParseError(e.what(), 0, 0);
    }
    return file;
}

ScenarioFile load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
    if (path.empty()) return parse_scenario({}, overrides);
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'", 0, 0);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str(), overrides);
}

std::string serialize_scenario(const ScenarioFile& file) {
    if (file.paths.empty()) throw DomainError("scenario has no paths");
    const Scenario& base = file.paths.front();
    const auto& geo = base.geometry;
    const auto& trx = base.transceiver;
    std::ostringstream out;
    auto kv = [&](const char* key, const std::string& value) { out << key << " = " << value << "\n"; };
    auto num = [&](const char* key, double v) { kv(key, format_double(v)); };

    out << "[scenario]\n";
    kv("name", file.name);

    out << "\n[path]\n";
    num("pathloss_exponent", geo.pathloss_exponent);
    num("reference_gain", geo.reference_gain);
    num("noise_w", base.noise_power_w);
    const bool single = file.paths.size() == 1 && file.path_ids.front() == file.name;
    if (single) {
        if (geo.gains.empty()) {
            kv("length_m", join(geo.link_lengths_m));
        } else {
            kv("gains", join(geo.gains));
        }
    } else {
        out << "\n[paths]\n";
        for (std::size_t i = 0; i < file.paths.size(); ++i) {
            if (!file.paths[i].geometry.gains.empty()) {
                throw DomainError("a multi-path scenario file takes link lengths only");
            }
            out << file.path_ids[i] << " = " << join(file.paths[i].geometry.link_lengths_m) << "\n";
        }
    }

    out << "\n[service]\n";
    kv("kind", base.service.kind == ServiceKind::Shannon ? "shannon" : "wirelesshart");
    num("symbols_per_slot", base.service.symbols_per_slot);
    kv("frame_bits", std::to_string(base.service.frame_bits));
    num("arrival_bits", base.arrival.rate_bits);
    if (!base.cross_traffic_bits.empty()) kv("cross_traffic_bits", join(base.cross_traffic_bits));

    out << "\n[qos]\n";
    kv("delay", std::to_string(file.qos.target_delay));
    num("eps", file.qos.target_eps);
    num("eps_tolerance", file.qos.eps_tolerance);

    out << "\n[transceiver]\n";
    num("p_min_w", trx.p_min_w);
    num("p_max_w", trx.p_max_w);
    num("i_idle_a", trx.i_idle_a);
    num("i_rx_a", trx.i_rx_a);
    num("supply_v", trx.supply_v);
    num("slot_s", trx.t_slot_s);
    num("tx_s", trx.t_tx_s);
    num("ack_s", trx.t_ack_s);
    num("tx_overhead_w", trx.tx_overhead_w);

    if (!file.batteries.empty()) {
        out << "\n[batteries]\n";
        if (file.batteries.preset) {
            kv("preset", preset_name(*file.batteries.preset));
            num("total_j", file.batteries.total_j);
        } else {
            kv("charge_j", join(file.batteries.charges_j));
        }
    }

    const auto& opt = file.optimizer;
    out << "\n[optimizer]\n";
    num("delta_p_init_w", opt.delta_p_init_w);
    num("delta_p_min_w", opt.delta_p_min_w);
    num("s_interval_min", opt.s_interval_min);
    kv("max_iterations", std::to_string(opt.max_iterations));
    kv("lifetime_model", opt.lifetime_model == LifetimeModel::Full ? "full" : "simplified");
    num("s_max", opt.bound.s_max);
    kv("w_max", std::to_string(opt.bound.w_max));

    const auto& sim = file.sim;
    out << "\n[sim]\n";
    kv("slots", std::to_string(sim.slots));
    kv("seed", std::to_string(sim.seed));
    kv("warmup_slots", std::to_string(sim.warmup_slots));
    kv("divergence_backlog", std::to_string(sim.divergence_backlog));
    if (sim.scheduling) {
        kv("scheduling", *sim.scheduling == Scheduling::PerSlotAllLinks ? "per-slot" : "round-robin");
    }
    kv("optimizer_slots", std::to_string(file.sim_optimizer.slots));
    num("optimizer_delta_p_w", file.sim_optimizer.delta_p_init_w);
    kv("optimizer_max_halvings", std::to_string(file.sim_optimizer.max_halvings));
    return out.str();
}

}  // namespace wsnc
