#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ridepool/grid.hpp"
#include "ridepool/request.hpp"
#include "ridepool/route.hpp"

namespace ridepool {

// One vehicle as the greedy matcher sees it. `location` and `committed_load`
// are provisional bookkeeping: the location moves to each assigned origin and
// the load counts every assigned passenger as if already onboard.
struct GreedyVehicle {
    int vehicle_id = 0;
    Zone location = 0;
    int committed_load = 0;
    int max_capacity = 4;
};

struct GreedyOptions {
    double radius_km = 5.0;
    double speed_kmh = 20.0;
    // One request per vehicle and only empty vehicles as candidates
    // (ride-sharing disabled).
    bool single_request = false;
};

// Per-vehicle assignment list, sorted ascending by origin proximity to the
// vehicle's position at phase start.
struct AssignmentList {
    int vehicle_id = 0;
    std::vector<std::size_t> request_indices;
};

struct GreedyResult {
    std::vector<AssignmentList> assignments; // ascending vehicle id, non-empty lists only
    std::vector<std::size_t> rejected;       // no candidate within radius/capacity
};

// Algorithm: for each request in input order, candidates are vehicles within
// the pickup radius with seat room for the whole party; the one with the
// minimum ETA to the origin wins (ties to the lowest vehicle id). The winner's
// provisional location becomes the origin and its provisional load grows.
inline GreedyResult greedy_assign(std::span<const RideRequest> requests,
                                  std::span<const GreedyVehicle> fleet,
                                  const ZoneGrid& grid, const GreedyOptions& opt) {
    struct Slot {
        GreedyVehicle v;
        Zone home;       // position at phase start, used for the proximity sort
        int assigned = 0;
        std::vector<std::size_t> picked;
    };
    std::vector<Slot> slots;
    slots.reserve(fleet.size());
    for (const GreedyVehicle& v : fleet)
        slots.push_back({v, v.location, 0, {}});
    std::sort(slots.begin(), slots.end(),
              [](const Slot& a, const Slot& b) { return a.v.vehicle_id < b.v.vehicle_id; });

    GreedyResult out;
    for (std::size_t ri = 0; ri < requests.size(); ++ri) {
        const RideRequest& r = requests[ri];
        double best_eta = std::numeric_limits<double>::infinity();
        Slot* best = nullptr;
        for (Slot& s : slots) {
            if (opt.single_request && (s.v.committed_load > 0 || s.assigned > 0))
                continue;
            if (s.v.committed_load + r.passengers > s.v.max_capacity)
                continue;
            if (grid.distance_km(s.v.location, r.origin) > opt.radius_km)
                continue;
            const double eta = grid.travel_time_min(s.v.location, r.origin, opt.speed_kmh);
            if (eta < best_eta) {
                best_eta = eta;
                best = &s;
            }
        }
        if (!best) {
            out.rejected.push_back(ri);
            continue;
        }
        best->picked.push_back(ri);
        best->assigned += 1;
        best->v.location = r.origin;
        best->v.committed_load += r.passengers;
    }

    for (Slot& s : slots) {
        if (s.picked.empty())
            continue;
        std::stable_sort(s.picked.begin(), s.picked.end(),
                         [&](std::size_t a, std::size_t b) {
                             const double da = grid.distance_km(s.home, requests[a].origin);
                             const double db = grid.distance_km(s.home, requests[b].origin);
                             if (da != db)
                                 return da < db;
                             return requests[a].id < requests[b].id;
                         });
        out.assignments.push_back({s.v.vehicle_id, std::move(s.picked)});
    }
    return out;
}

} // namespace ridepool
