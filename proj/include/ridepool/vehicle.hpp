#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "ridepool/dispatch.hpp"
#include "ridepool/grid.hpp"
#include "ridepool/route.hpp"

namespace ridepool {

enum class VehicleStatus { Idle, Dispatching, Serving };

inline const char* to_string(VehicleStatus s) {
    switch (s) {
    case VehicleStatus::Idle: return "idle";
    case VehicleStatus::Dispatching: return "dispatching";
    case VehicleStatus::Serving: return "serving";
    }
    return "?";
}

// Promise bookkeeping per committed rider: the travel time a solo trip would
// have taken from the moment of commitment, and the current estimated
// drop-off time under the live route.
struct RiderClock {
    double request_time_min = 0.0;
    double promised_solo_min = 0.0;
    double est_drop_time_min = 0.0;
    int passengers = 1;
};

struct VehicleState {
    int id = 0;
    int type_index = 0;
    Zone zone = 0;
    VehicleStatus status = VehicleStatus::Idle;

    Route route;
    double leg_progress_km = 0.0;          // toward the current waypoint
    std::optional<Zone> dispatch_target;

    int onboard = 0;                       // V_C: passengers in the car now
    int committed_passengers = 0;          // onboard + accepted-not-yet-picked

    double idle_min = 0.0;                 // consecutive idle minutes
    bool entered = false;
    bool exited = false;
    double entered_at_min = 0.0;
    double exits_at_min = 0.0;             // entered_at + duty limit

    double earnings = 0.0;
    double distance_km = 0.0;
    double fuel_cost = 0.0;
    double duty_min = 0.0;
    double occupied_min = 0.0;
    double idle_total_min = 0.0;
    double dispatch_travel_min = 0.0;
    int riders_served = 0;

    std::map<std::int64_t, RiderClock> riders;

    // Open dispatch-decision window for DQN training.
    struct PendingDecision {
        DispatchState state;
        int action = 0;
        RewardBreakdown acc;
    };
    std::optional<PendingDecision> pending;
    bool occupied_last_tick = false;

    bool on_duty(double now_min) const {
        return entered && !exited && now_min < exits_at_min;
    }
    bool busy() const { return !route.empty(); }

    // Seats still sellable against the type's maximum.
    int free_seats(int max_capacity) const {
        return max_capacity - committed_passengers;
    }
};

} // namespace ridepool
