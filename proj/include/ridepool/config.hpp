#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ridepool/common.hpp"
#include "ridepool/demand.hpp"
#include "ridepool/dispatch.hpp"
#include "ridepool/pricing.hpp"

namespace ridepool {

// A demand hotspot in the synthetic generator: extra requests/min at a cell.
struct DemandHotspot {
    int row = 0;
    int col = 0;
    double extra_rate = 0.0;
};

// Everything a run needs. Defaults follow the reported experimental setup:
// beta = (10,1,5,12,8), omega4..6 = (15,1,4), lambda = 0.10, one-minute
// steps, 5 km matching radius, 10-minute idle threshold, 21-hour duty,
// 5000-deep replay memory, 43x44 grid of 800 m cells.
struct SimConfig {
    int grid_rows = 43;
    int grid_cols = 44;
    double cell_km = 0.8;

    double delta_t_min = 1.0;
    long steps = 1440;
    std::uint64_t seed = 1;
    double speed_kmh = 20.0;

    int fleet_size = 8000;
    double entry_window_min = 240.0;
    double duty_limit_min = 21.0 * 60.0;

    double matching_radius_km = 5.0;
    int requeue_limit = 3;

    double gas_price = 1.0;
    double lambda = 0.10;
    int hotspot_refresh_ticks = 5;

    RequestDefaults request_defaults;

    std::string demand_mode = "synthetic"; // synthetic | csv
    std::string trips_csv;
    double base_rate = 0.002; // requests/min per zone
    std::vector<DemandHotspot> demand_hotspots;
    std::string tod_profile = "flat"; // flat | peaks

    double idle_dispatch_min = 10.0;
    double dispatch_warmup_min = 20.0; // no dispatching while warming up
    RewardWeights betas;
    PolicyConfig policy;
    int updates_per_tick = 1;

    bool use_dispatch = true;
    bool use_ridesharing = true;
    bool use_pricing = true;
    bool use_darm = true;

    std::vector<VehicleTypeProfile> types = default_vehicle_types();

    std::string toggles_label() const {
        std::string s;
        s += use_dispatch ? "D," : "!D,";
        s += use_ridesharing ? "RS," : "!RS,";
        s += use_pricing ? "PS," : "!PS,";
        s += use_darm ? "DARM" : "GM";
        return s;
    }

    // Collects every violation so an operator sees the full list at once.
    std::vector<std::string> validation_errors() const {
        std::vector<std::string> errs;
        auto need = [&](bool ok, const std::string& msg) {
            if (!ok)
                errs.push_back(msg);
        };
        need(grid_rows >= 1 && grid_cols >= 1, "grid_rows/grid_cols must be >= 1");
        need(cell_km > 0.0, "cell_km must be > 0");
        need(delta_t_min > 0.0, "delta_t_min must be > 0 (valid range: positive minutes)");
        need(steps >= 0, "steps must be >= 0");
        need(speed_kmh > 0.0, "speed_kmh must be > 0");
        need(fleet_size >= 0, "fleet_size must be >= 0");
        need(entry_window_min >= 0.0, "entry_window_min must be >= 0");
        need(duty_limit_min > 0.0, "duty_limit_min must be > 0");
        need(matching_radius_km > 0.0, "matching_radius_km must be > 0");
        need(requeue_limit >= 0, "requeue_limit must be >= 0");
        need(gas_price >= 0.0, "gas_price must be >= 0");
        need(lambda > 0.0 && lambda <= 1.0, "lambda must lie in (0, 1]");
        need(hotspot_refresh_ticks >= 1, "hotspot_refresh_ticks must be >= 1");
        need(request_defaults.delay_tolerance_min > 0.0,
             "delay_tolerance_min must be > 0");
        need(demand_mode == "synthetic" || demand_mode == "csv",
             "demand_mode must be synthetic or csv");
        need(demand_mode != "csv" || !trips_csv.empty(),
             "demand_mode csv requires trips_csv");
        need(base_rate >= 0.0, "base_rate must be >= 0");
        for (const DemandHotspot& h : demand_hotspots) {
            need(h.row >= 0 && h.row < grid_rows && h.col >= 0 && h.col < grid_cols,
                 "demand hotspot outside the grid");
            need(h.extra_rate >= 0.0, "hotspot extra rate must be >= 0");
        }
        need(tod_profile == "flat" || tod_profile == "peaks",
             "tod_profile must be flat or peaks");
        need(idle_dispatch_min >= 0.0, "idle_dispatch_min must be >= 0");
        need(dispatch_warmup_min >= 0.0, "dispatch_warmup_min must be >= 0");
        need(updates_per_tick >= 0, "updates_per_tick must be >= 0");
        need(!types.empty(), "type table must not be empty");
        for (const VehicleTypeProfile& t : types)
            need(t.type_rank > 0 && t.max_capacity > 0 && t.mileage_km_per_l > 0.0 &&
                     t.price_per_km > 0.0 && t.price_per_wait_min > 0.0 &&
                     t.base_price > 0.0,
                 "all vehicle type fields must be > 0");
        try {
            policy.validate();
        } catch (const ConfigError& e) {
            errs.push_back(e.what());
        }
        return errs;
    }

    void validate() const {
        const std::vector<std::string> errs = validation_errors();
        if (errs.empty())
            return;
        std::string joined = "invalid configuration:";
        for (const std::string& e : errs)
            joined += "\n  - " + e;
        throw ConfigError(joined);
    }

    RateProfile rate_profile(const ZoneGrid& grid) const {
        RateProfile p;
        p.zone_rate_per_min.assign(static_cast<std::size_t>(grid.zone_count()),
                                   base_rate);
        for (const DemandHotspot& h : demand_hotspots)
            p.zone_rate_per_min[static_cast<std::size_t>(grid.zone_at(h.row, h.col))] +=
                h.extra_rate;
        if (tod_profile == "peaks") {
            p.tod_factor.assign(48, 0.4);
            for (int b = 14; b <= 19; ++b)
                p.tod_factor[static_cast<std::size_t>(b)] = 1.6; // 07:00-10:00
            for (int b = 34; b <= 39; ++b)
                p.tod_factor[static_cast<std::size_t>(b)] = 1.8; // 17:00-20:00
        }
        return p;
    }
};

namespace detail {

inline bool parse_bool(const std::string& v, bool& out) {
    if (v == "on" || v == "true" || v == "1") {
        out = true;
        return true;
    }
    if (v == "off" || v == "false" || v == "0") {
        out = false;
        return true;
    }
    return false;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep))
        out.push_back(trim(item));
    return out;
}

} // namespace detail

// Apply one `key = value` pair. Throws ConfigError naming the key when it is
// unknown or the value does not parse.
inline void apply_config_entry(SimConfig& cfg, const std::string& key,
                               const std::string& value) {
    auto as_double = [&](const std::string& v) {
        double d;
        if (!detail::parse_double(v, d))
            throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
        return d;
    };
    auto as_long = [&](const std::string& v) {
        long long n;
        if (!detail::parse_long(v, n))
            throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
        return n;
    };
    auto as_bool = [&](const std::string& v) {
        bool b;
        if (!detail::parse_bool(v, b))
            throw ConfigError("key '" + key + "': expected on/off, got '" + v + "'");
        return b;
    };

    if (key == "grid_rows") cfg.grid_rows = static_cast<int>(as_long(value));
    else if (key == "grid_cols") cfg.grid_cols = static_cast<int>(as_long(value));
    else if (key == "cell_km") cfg.cell_km = as_double(value);
    else if (key == "delta_t") cfg.delta_t_min = as_double(value);
    else if (key == "steps") cfg.steps = static_cast<long>(as_long(value));
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(as_long(value));
    else if (key == "speed_kmh") cfg.speed_kmh = as_double(value);
    else if (key == "fleet_size") cfg.fleet_size = static_cast<int>(as_long(value));
    else if (key == "entry_window_min") cfg.entry_window_min = as_double(value);
    else if (key == "duty_limit_min") cfg.duty_limit_min = as_double(value);
    else if (key == "matching_radius_km") cfg.matching_radius_km = as_double(value);
    else if (key == "requeue_limit") cfg.requeue_limit = static_cast<int>(as_long(value));
    else if (key == "gas_price") cfg.gas_price = as_double(value);
    else if (key == "lambda") cfg.lambda = as_double(value);
    else if (key == "hotspot_refresh_ticks")
        cfg.hotspot_refresh_ticks = static_cast<int>(as_long(value));
    else if (key == "delay_tolerance_min")
        cfg.request_defaults.delay_tolerance_min = as_double(value);
    else if (key == "delta") cfg.request_defaults.compromise = as_double(value);
    else if (key == "omega4") cfg.request_defaults.pooling_weight = as_double(value);
    else if (key == "omega5") cfg.request_defaults.delay_weight = as_double(value);
    else if (key == "omega6") cfg.request_defaults.type_weight = as_double(value);
    else if (key == "demand_mode") cfg.demand_mode = value;
    else if (key == "trips_csv") cfg.trips_csv = value;
    else if (key == "base_rate") cfg.base_rate = as_double(value);
    else if (key == "tod_profile") cfg.tod_profile = value;
    else if (key == "demand_hotspots") {
        cfg.demand_hotspots.clear();
        for (const std::string& item : detail::split(value, '|')) {
            if (item.empty())
                continue;
            DemandHotspot h;
            if (std::sscanf(item.c_str(), "%d ,%d = %lf", &h.row, &h.col,
                            &h.extra_rate) != 3 &&
                std::sscanf(item.c_str(), "%d,%d=%lf", &h.row, &h.col,
                            &h.extra_rate) != 3)
                throw ConfigError("key 'demand_hotspots': expected row,col=rate items");
            cfg.demand_hotspots.push_back(h);
        }
    } else if (key == "idle_dispatch_min") cfg.idle_dispatch_min = as_double(value);
    else if (key == "dispatch_warmup_min") cfg.dispatch_warmup_min = as_double(value);
    else if (key == "beta1") cfg.betas.served = as_double(value);
    else if (key == "beta2") cfg.betas.dispatch = as_double(value);
    else if (key == "beta3") cfg.betas.extra_delay = as_double(value);
    else if (key == "beta4") cfg.betas.profit = as_double(value);
    else if (key == "beta5") cfg.betas.activation = as_double(value);
    else if (key == "profile") cfg.policy.profile = value;
    else if (key == "crop_radius") cfg.policy.crop_radius = static_cast<int>(as_long(value));
    else if (key == "hidden") cfg.policy.hidden = static_cast<int>(as_long(value));
    else if (key == "eta") cfg.policy.eta = as_double(value);
    else if (key == "epsilon_start") cfg.policy.epsilon_start = as_double(value);
    else if (key == "epsilon_end") cfg.policy.epsilon_end = as_double(value);
    else if (key == "epsilon_span") cfg.policy.epsilon_span = as_long(value);
    else if (key == "sigma_start") cfg.policy.sigma_start = as_double(value);
    else if (key == "sigma_end") cfg.policy.sigma_end = as_double(value);
    else if (key == "sigma_span") cfg.policy.sigma_span = as_long(value);
    else if (key == "replay_capacity")
        cfg.policy.replay_capacity = static_cast<std::size_t>(as_long(value));
    else if (key == "batch_size")
        cfg.policy.batch_size = static_cast<std::size_t>(as_long(value));
    else if (key == "learn_start")
        cfg.policy.learn_start = static_cast<std::size_t>(as_long(value));
    else if (key == "target_sync_every") cfg.policy.target_sync_every = as_long(value);
    else if (key == "updates_per_tick")
        cfg.updates_per_tick = static_cast<int>(as_long(value));
    else if (key == "dispatch") cfg.use_dispatch = as_bool(value);
    else if (key == "ridesharing") cfg.use_ridesharing = as_bool(value);
    else if (key == "pricing") cfg.use_pricing = as_bool(value);
    else if (key == "darm") cfg.use_darm = as_bool(value);
    else if (key == "type_table") {
        std::vector<VehicleTypeProfile> types;
        for (const std::string& item : detail::split(value, '|')) {
            if (item.empty())
                continue;
            const std::vector<std::string> f = detail::split(item, ',');
            if (f.size() != 6)
                throw ConfigError(
                    "key 'type_table': each entry needs rank,cmax,mileage,"
                    "price_per_km,price_per_wait_min,base_price");
            VehicleTypeProfile t;
            t.type_rank = static_cast<int>(as_long(f[0]));
            t.max_capacity = static_cast<int>(as_long(f[1]));
            t.mileage_km_per_l = as_double(f[2]);
            t.price_per_km = as_double(f[3]);
            t.price_per_wait_min = as_double(f[4]);
            t.base_price = as_double(f[5]);
            types.push_back(t);
        }
        if (types.empty())
            throw ConfigError("key 'type_table': no entries");
        cfg.types = std::move(types);
    } else
        throw ConfigError("unknown key '" + key + "'");
}

// Flat key-value format: `key = value` lines, `#` comments, optional
// `[section]` headers that are purely organizational.
inline SimConfig parse_config(std::istream& is) {
    SimConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        const std::string t = detail::trim(line);
        if (t.empty())
            continue;
        if (t.front() == '[' && t.back() == ']')
            continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected `key = value`, got '" + t + "'");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        apply_config_entry(cfg, key, value);
    }
    return cfg;
}

inline SimConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open config file '" + path + "'");
    try {
        return parse_config(is);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

} // namespace ridepool
