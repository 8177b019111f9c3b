#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ridepool/common.hpp"
#include "ridepool/grid.hpp"

namespace ridepool {

// Per-zone, per-future-step expectations over a horizon of T+1 steps.
// Used both for demand (expected request counts) and supply (vehicle counts).
struct Forecast {
    int horizon_steps = 0; // T; the table holds T+1 steps
    int zones = 0;
    bool cold_start = false;
    std::vector<double> values; // (horizon_steps + 1) x zones, step-major

    Forecast() = default;
    Forecast(int horizon, int zone_count)
        : horizon_steps(horizon), zones(zone_count),
          values(static_cast<std::size_t>(horizon + 1) * zone_count, 0.0) {
        if (horizon < 0 || zone_count < 1)
            throw DomainError("forecast needs horizon >= 0 and zones >= 1");
    }

    double at(int step, Zone z) const {
        return values[index(step, z)];
    }
    double& at(int step, Zone z) {
        return values[index(step, z)];
    }

    double step_total(int step) const {
        double total = 0.0;
        for (Zone z = 0; z < zones; ++z)
            total += at(step, z);
        return total;
    }

private:
    std::size_t index(int step, Zone z) const {
        if (step < 0 || step > horizon_steps || z < 0 || z >= zones)
            throw DomainError("forecast lookup out of range (step " +
                              std::to_string(step) + ", zone " + std::to_string(z) + ")");
        return static_cast<std::size_t>(step) * zones + z;
    }
};

using DemandForecast = Forecast;
using SupplyForecast = Forecast;

} // namespace ridepool
