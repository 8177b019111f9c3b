#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ridepool/common.hpp"
#include "ridepool/grid.hpp"
#include "ridepool/route.hpp"

namespace ridepool {

// One row of the vehicle type table. omega2 (the fuel term weight) is fixed
// at 1 and not stored; what varies across types is the mileage.
struct VehicleTypeProfile {
    int type_rank = 1;               // higher = more luxurious
    int max_capacity = 4;
    double mileage_km_per_l = 14.0;
    double price_per_km = 1.0;       // omega1
    double price_per_wait_min = 0.3; // omega3
    double base_price = 3.0;         // minimum earning per trip
};

inline std::vector<VehicleTypeProfile> default_vehicle_types() {
    return {
        {1, 4, 14.0, 1.0, 0.3, 3.0},
        {2, 4, 12.0, 1.3, 0.4, 4.0},
        {3, 6, 10.0, 1.7, 0.5, 5.0},
        {4, 6, 8.0, 2.2, 0.6, 7.0},
    };
}

// Number of riders the trip distance is split across: the absolute difference
// of the route loads at the request's dropoff and pickup stops, floored at 1
// so the fare division below never sees zero.
inline int sharing_count(const Route& route, std::int64_t request_id) {
    const int oi = route.stop_index(request_id, StopKind::Pickup);
    const int di = route.stop_index(request_id, StopKind::Dropoff);
    if (oi < 0 || di < 0)
        throw DomainError("request " + std::to_string(request_id) +
                          " has no pickup/dropoff stop in route");
    const int diff = std::abs(route.loads()[di] - route.loads()[oi]);
    return std::max(1, diff);
}

// Base fare: base price, plus the shared per-km rate and fuel surcharge on
// the request's marginal route distance, minus the waiting rebate. Clamped
// below at the base price so the rebate cannot erase the driver's minimum
// earning.
inline double initial_price(const VehicleTypeProfile& type, double route_cost_km,
                            int sharing, double wait_min, double gas_price) {
    if (sharing < 1)
        throw DomainError("sharing count must be >= 1");
    const double shared_km = route_cost_km / sharing;
    const double raw = type.base_price + type.price_per_km * shared_km +
                       shared_km * (gas_price / type.mileage_km_per_l) -
                       type.price_per_wait_min * wait_min;
    return std::max(raw, type.base_price);
}

// Zones ranked descending by expected discounted reward; the top lambda
// fraction forms the hotspot list L. rank is 1-based, ties break by zone id.
struct HotspotList {
    std::vector<Zone> ranked;   // best first
    std::vector<int> rank;      // zone -> 1..M
    std::vector<char> member;   // zone -> in L
    int list_size = 0;

    bool contains(Zone z) const { return member[static_cast<std::size_t>(z)] != 0; }
    int rank_of(Zone z) const { return rank[static_cast<std::size_t>(z)]; }
};

inline HotspotList build_hotspots(std::span<const double> zone_values,
                                  double lambda_fraction) {
    if (!(lambda_fraction > 0.0) || lambda_fraction > 1.0)
        throw ConfigError("lambda must be in (0, 1]");
    const int zones = static_cast<int>(zone_values.size());
    for (double v : zone_values)
        if (!std::isfinite(v))
            throw DomainError("non-finite zone value in hotspot ranking");

    HotspotList out;
    out.ranked.resize(zones);
    std::iota(out.ranked.begin(), out.ranked.end(), 0);
    std::sort(out.ranked.begin(), out.ranked.end(), [&](Zone a, Zone b) {
        if (zone_values[a] != zone_values[b])
            return zone_values[a] > zone_values[b];
        return a < b;
    });
    out.rank.assign(zones, 0);
    out.member.assign(zones, 0);
    out.list_size = static_cast<int>(std::ceil(lambda_fraction * zones));
    for (int i = 0; i < zones; ++i) {
        out.rank[static_cast<std::size_t>(out.ranked[i])] = i + 1;
        if (i < out.list_size)
            out.member[static_cast<std::size_t>(out.ranked[i])] = 1;
    }
    return out;
}

// Driver's counter-price: unchanged for hotspot destinations, otherwise the
// initial price plus a surcharge scaling with the destination's rank and the
// driver's base price.
inline double propose_price(double initial, Zone destination,
                            const HotspotList& hotspots, double base_price) {
    if (hotspots.contains(destination))
        return initial;
    const double alpha = hotspots.rank_of(destination);
    return initial + initial * (alpha / 2.0) * base_price;
}

// Customer utility: pooling aversion, urgency, and vehicle-type preference.
// An instant pickup is floored at one minute to keep the urgency term finite.
inline double customer_utility(int occupancy, double wait_min, int type_rank,
                               double pooling_weight, double delay_weight,
                               double type_weight) {
    const double wait = std::max(wait_min, 1.0);
    return pooling_weight / occupancy + delay_weight / wait + type_weight * type_rank;
}

// Accept iff utility strictly exceeds price net of the compromise threshold.
inline bool customer_decide(double utility, double price, double compromise) {
    return utility > price - compromise;
}

// One priced offer, as logged to the metrics stream.
struct Quote {
    std::int64_t request_id = 0;
    int vehicle_id = 0;
    double initial_price = 0.0;
    double final_price = 0.0;
    double marginal_cost_km = 0.0;
    int sharing = 1;
    double wait_min = 0.0;
    bool accepted = false;
};

} // namespace ridepool
