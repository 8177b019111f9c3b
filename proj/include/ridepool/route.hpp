#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ridepool/common.hpp"
#include "ridepool/grid.hpp"
#include "ridepool/request.hpp"

namespace ridepool {

enum class StopKind { Pickup, Dropoff };

struct Stop {
    Zone zone = 0;
    StopKind kind = StopKind::Pickup;
    std::int64_t request_id = 0;
    int passengers = 1;
};

// Running onboard load after each stop: +|r| at a pickup, -|r| at a dropoff,
// starting from onboard_at_start. A dropoff whose pickup appears later in the
// sequence is an ordering violation; a dropoff with no pickup stop at all
// belongs to a rider already onboard and is fine.
inline std::vector<int> capacity_prefix(std::span<const Stop> stops, int onboard_at_start) {
    for (std::size_t i = 0; i < stops.size(); ++i) {
        if (stops[i].kind != StopKind::Dropoff)
            continue;
        for (std::size_t j = i + 1; j < stops.size(); ++j) {
            if (stops[j].request_id == stops[i].request_id &&
                stops[j].kind == StopKind::Pickup)
                throw DomainError("infeasible route: dropoff for request " +
                                  std::to_string(stops[i].request_id) +
                                  " precedes its pickup");
        }
    }
    std::vector<int> loads;
    loads.reserve(stops.size());
    int load = onboard_at_start;
    for (const Stop& s : stops) {
        load += (s.kind == StopKind::Pickup) ? s.passengers : -s.passengers;
        loads.push_back(load);
    }
    return loads;
}

inline bool capacity_feasible(std::span<const Stop> stops, int max_capacity,
                              int onboard_at_start) {
    if (onboard_at_start > max_capacity)
        return false;
    for (int load : capacity_prefix(stops, onboard_at_start))
        if (load > max_capacity)
            return false;
    return true;
}

// An ordered stop sequence with cached cost and capacity prefix. The cost is
// anchored at the owning vehicle's zone (path weight of anchor ++ stop zones);
// both caches are recomputed on every mutation.
class Route {
public:
    Route() = default;

    static Route build(const ZoneGrid& grid, Zone anchor, std::vector<Stop> stops,
                       int onboard_at_start) {
        Route r;
        r.stops_ = std::move(stops);
        r.onboard_at_start_ = onboard_at_start;
        r.refresh(grid, anchor);
        return r;
    }

    bool empty() const { return stops_.empty(); }
    std::size_t size() const { return stops_.size(); }
    const std::vector<Stop>& stops() const { return stops_; }
    const std::vector<int>& loads() const { return loads_; }
    double cost_km() const { return cost_km_; }
    int onboard_at_start() const { return onboard_at_start_; }
    int final_load() const { return loads_.empty() ? onboard_at_start_ : loads_.back(); }
    int peak_load() const {
        int peak = onboard_at_start_;
        for (int l : loads_)
            peak = std::max(peak, l);
        return peak;
    }

    const Stop& front() const { return stops_.front(); }

    bool has_request(std::int64_t id) const {
        for (const Stop& s : stops_)
            if (s.request_id == id)
                return true;
        return false;
    }

    int stop_index(std::int64_t id, StopKind kind) const {
        for (std::size_t i = 0; i < stops_.size(); ++i)
            if (stops_[i].request_id == id && stops_[i].kind == kind)
                return static_cast<int>(i);
        return -1;
    }

    // Vehicle moved or boarded/dropped: re-anchor the cost and re-walk loads.
    void refresh(const ZoneGrid& grid, Zone anchor) {
        loads_ = capacity_prefix(stops_, onboard_at_start_);
        cost_km_ = 0.0;
        Zone prev = anchor;
        for (const Stop& s : stops_) {
            cost_km_ += grid.distance_km(prev, s.zone);
            prev = s.zone;
        }
    }

    void set_onboard_at_start(int onboard) { onboard_at_start_ = onboard; }

    void pop_front(const ZoneGrid& grid, Zone anchor) {
        if (stops_.empty())
            throw DomainError("pop_front on empty route");
        const Stop s = stops_.front();
        stops_.erase(stops_.begin());
        onboard_at_start_ += (s.kind == StopKind::Pickup) ? s.passengers : -s.passengers;
        refresh(grid, anchor);
    }

    Route without_request(const ZoneGrid& grid, Zone anchor, std::int64_t id) const {
        std::vector<Stop> kept;
        kept.reserve(stops_.size());
        for (const Stop& s : stops_)
            if (s.request_id != id)
                kept.push_back(s);
        return build(grid, anchor, std::move(kept), onboard_at_start_);
    }

private:
    std::vector<Stop> stops_;
    std::vector<int> loads_;
    double cost_km_ = 0.0;
    int onboard_at_start_ = 0;
};

struct InsertionResult {
    Route route;
    double total_cost_km = 0.0;
    double marginal_cost_km = 0.0;
    int pickup_index = -1;
    int dropoff_index = -1;
    int positions_evaluated = 0;
};

namespace detail {

// Cost delta of slipping zone u into position pos of the stop list, relative
// to the anchored path cost (remove one edge, add two).
inline double edge_delta(const ZoneGrid& grid, Zone anchor,
                         const std::vector<Stop>& stops, std::size_t pos, Zone u) {
    const Zone prev = (pos == 0) ? anchor : stops[pos - 1].zone;
    if (pos == stops.size())
        return grid.distance_km(prev, u);
    const Zone next = stops[pos].zone;
    return grid.distance_km(prev, u) + grid.distance_km(u, next) -
           grid.distance_km(prev, next);
}

} // namespace detail

// Two-stage insertion: scan every pickup position for the minimum-cost
// capacity-feasible slot, fix it, then scan every later dropoff position.
// Existing stop order is never changed. Candidate costs are evaluated as
// local edge deltas; ties break toward the earliest position. Returns
// nullopt when no pickup position has seat room.
inline std::optional<InsertionResult>
insert_request(const ZoneGrid& grid, Zone vehicle_zone, const Route& route,
               const RideRequest& request, int max_capacity) {
    if (route.has_request(request.id))
        throw DomainError("request " + std::to_string(request.id) +
                          " already present in route");

    const int pax = request.passengers;
    const std::vector<Stop>& stops = route.stops();
    const std::vector<int>& loads = route.loads();
    const int onboard = route.onboard_at_start();

    InsertionResult result;

    if (route.empty()) {
        if (onboard + pax > max_capacity)
            return std::nullopt;
        std::vector<Stop> fresh{
            {request.origin, StopKind::Pickup, request.id, pax},
            {request.destination, StopKind::Dropoff, request.id, pax}};
        result.route = Route::build(grid, vehicle_zone, std::move(fresh), onboard);
        result.total_cost_km = result.route.cost_km();
        result.marginal_cost_km = result.total_cost_km;
        result.pickup_index = 0;
        result.dropoff_index = 1;
        result.positions_evaluated = 1;
        return result;
    }

    const std::size_t n = stops.size();
    const double base_cost = route.cost_km();
    auto load_before = [&](std::size_t pos) {
        return pos == 0 ? onboard : loads[pos - 1];
    };

    // Stage 1: pickup position, filtered on seat room at arrival.
    int best_o = -1;
    double best_o_cost = std::numeric_limits<double>::infinity();
    int evaluated = 0;
    for (std::size_t p = 0; p <= n; ++p) {
        ++evaluated;
        if (load_before(p) + pax > max_capacity)
            continue;
        const double c = base_cost +
                         detail::edge_delta(grid, vehicle_zone, stops, p, request.origin);
        if (c < best_o_cost) {
            best_o_cost = c;
            best_o = static_cast<int>(p);
        }
    }
    if (best_o < 0) {
        result.positions_evaluated = evaluated;
        return std::nullopt;
    }

    // Route with the pickup placed; the new rider stays on through the end
    // until the dropoff position is chosen.
    std::vector<Stop> with_o(stops);
    with_o.insert(with_o.begin() + best_o,
                  Stop{request.origin, StopKind::Pickup, request.id, pax});

    // Stage 2: dropoff position after the pickup. The span between the two
    // stops must never sit at max capacity; once a blocked stop is reached
    // every later position is blocked too.
    int best_d = -1;
    double best_d_cost = std::numeric_limits<double>::infinity();
    for (std::size_t q = static_cast<std::size_t>(best_o) + 1; q <= with_o.size(); ++q) {
        if (q > static_cast<std::size_t>(best_o) + 1) {
            // load after stop q-1 of with_o (an original stop, shifted, with
            // the new rider aboard)
            const int load = loads[q - 2] + pax;
            if (load > max_capacity)
                break;
        }
        ++evaluated;
        const double c = best_o_cost +
                         detail::edge_delta(grid, vehicle_zone, with_o, q, request.destination);
        if (c < best_d_cost) {
            best_d_cost = c;
            best_d = static_cast<int>(q);
        }
    }
    result.positions_evaluated = evaluated;
    if (best_d < 0)
        return std::nullopt;

    with_o.insert(with_o.begin() + best_d,
                  Stop{request.destination, StopKind::Dropoff, request.id, pax});
    result.route = Route::build(grid, vehicle_zone, std::move(with_o), onboard);
    result.total_cost_km = best_d_cost;
    result.marginal_cost_km = best_d_cost - base_cost;
    result.pickup_index = best_o;
    result.dropoff_index = best_d;
    return result;
}

// Route growth for greedy matching without the optimization phase: the new
// request is served after everything already committed.
inline std::optional<InsertionResult>
append_request(const ZoneGrid& grid, Zone vehicle_zone, const Route& route,
               const RideRequest& request, int max_capacity) {
    if (route.has_request(request.id))
        throw DomainError("request " + std::to_string(request.id) +
                          " already present in route");
    if (route.final_load() + request.passengers > max_capacity)
        return std::nullopt;
    std::vector<Stop> stops(route.stops());
    stops.push_back({request.origin, StopKind::Pickup, request.id, request.passengers});
    stops.push_back({request.destination, StopKind::Dropoff, request.id, request.passengers});
    InsertionResult result;
    const double base = route.cost_km();
    result.route = Route::build(grid, vehicle_zone, std::move(stops),
                                route.onboard_at_start());
    result.total_cost_km = result.route.cost_km();
    result.marginal_cost_km = result.total_cost_km - base;
    result.pickup_index = static_cast<int>(route.size());
    result.dropoff_index = result.pickup_index + 1;
    result.positions_evaluated = 1;
    return result;
}

inline double marginal_cost(double old_cost_km, double new_cost_km) {
    return new_cost_km - old_cost_km;
}

struct AssignmentCost {
    double total_km = 0.0;
    Route final_route;
    std::vector<std::int64_t> skipped;
};

// Serving cost of a whole assignment list: requests inserted sequentially,
// summing the full route cost after each insertion. Infeasible requests are
// skipped and reported.
inline AssignmentCost assignment_cost(const ZoneGrid& grid, Zone vehicle_zone,
                                      const Route& start,
                                      std::span<const RideRequest> requests,
                                      int max_capacity) {
    AssignmentCost out;
    out.final_route = start;
    for (const RideRequest& r : requests) {
        auto ins = insert_request(grid, vehicle_zone, out.final_route, r, max_capacity);
        if (!ins) {
            out.skipped.push_back(r.id);
            continue;
        }
        out.total_km += ins->total_cost_km;
        out.final_route = std::move(ins->route);
    }
    return out;
}

} // namespace ridepool
