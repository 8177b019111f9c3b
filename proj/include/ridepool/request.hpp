#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "ridepool/common.hpp"
#include "ridepool/grid.hpp"

namespace ridepool {

enum class RequestStatus { Waiting, Matched, Onboard, Completed, Rejected };

// Why a request reached a terminal rejected state.
enum class RejectReason { None, Radius, Customer, Expired, Degenerate };

inline const char* to_string(RequestStatus s) {
    switch (s) {
    case RequestStatus::Waiting: return "waiting";
    case RequestStatus::Matched: return "matched";
    case RequestStatus::Onboard: return "onboard";
    case RequestStatus::Completed: return "completed";
    case RequestStatus::Rejected: return "rejected";
    }
    return "?";
}

struct RideRequest {
    std::int64_t id = 0;
    double request_time_min = 0.0;
    Zone origin = 0;
    Zone destination = 0;
    int passengers = 1;
    double delay_tolerance_min = 30.0;
    // Utility weights and compromise threshold; default to the global config
    // values, overridable per request in the trips CSV.
    double pooling_weight = 15.0;   // weight on 1/occupancy
    double delay_weight = 1.0;      // weight on 1/waiting-time
    double type_weight = 4.0;       // weight on vehicle type rank
    double compromise = 0.0;        // money the customer will absorb

    RequestStatus status = RequestStatus::Waiting;
    RejectReason reject_reason = RejectReason::None;
    int rejection_count = 0;        // re-queue events so far
    bool snapped_to_boundary = false;

    // Runtime bookkeeping filled by the engine.
    int assigned_vehicle = -1;
    double pickup_time_min = std::nan("");
    double dropoff_time_min = std::nan("");
    double fare = 0.0;

    bool degenerate() const { return origin == destination; }
    bool terminal() const {
        return status == RequestStatus::Completed || status == RequestStatus::Rejected;
    }

    // Transitions are forward-only: waiting -> matched -> onboard -> completed,
    // or any pre-onboard state -> rejected.
    void advance_status(RequestStatus next) {
        const bool ok =
            (next == RequestStatus::Rejected &&
             (status == RequestStatus::Waiting || status == RequestStatus::Matched)) ||
            (status == RequestStatus::Waiting && next == RequestStatus::Matched) ||
            (status == RequestStatus::Matched && next == RequestStatus::Onboard) ||
            (status == RequestStatus::Onboard && next == RequestStatus::Completed);
        if (!ok)
            throw DomainError(std::string("illegal request status transition ") +
                              to_string(status) + " -> " + to_string(next));
        status = next;
    }
};

} // namespace ridepool
