#pragma once

#include <cmath>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "ridepool/common.hpp"

namespace ridepool {

using Zone = std::int32_t;

// The discretized operating area: rows x cols square cells, ids in row-major
// order. Distances are Manhattan grid distances scaled by the cell edge, so
// the metric is symmetric, zero on the diagonal, and satisfies the triangle
// inequality. Immutable after construction; safe to share across threads.
class ZoneGrid {
public:
    ZoneGrid(int rows, int cols, double cell_km)
        : rows_(rows), cols_(cols), cell_km_(cell_km) {
        if (rows < 1 || cols < 1)
            throw ConfigError("grid dimensions must be >= 1 (got " +
                              std::to_string(rows) + "x" + std::to_string(cols) + ")");
        if (!(cell_km > 0.0))
            throw ConfigError("cell size must be > 0 km");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double cell_km() const { return cell_km_; }
    int zone_count() const { return rows_ * cols_; }

    bool contains(Zone z) const { return z >= 0 && z < zone_count(); }

    Zone zone_at(int row, int col) const {
        if (row < 0 || row >= rows_ || col < 0 || col >= cols_)
            throw DomainError("cell (" + std::to_string(row) + "," +
                              std::to_string(col) + ") outside grid");
        return static_cast<Zone>(row * cols_ + col);
    }

    int row_of(Zone z) const { return check(z) / cols_; }
    int col_of(Zone z) const { return check(z) % cols_; }

    // Nearest in-grid cell for possibly out-of-range coordinates.
    Zone clamp_cell(long row, long col) const {
        row = std::max(0L, std::min<long>(row, rows_ - 1));
        col = std::max(0L, std::min<long>(col, cols_ - 1));
        return static_cast<Zone>(row * cols_ + col);
    }

    double distance_km(Zone a, Zone b) const {
        check(a);
        check(b);
        const int dr = std::abs(row_of(a) - row_of(b));
        const int dc = std::abs(col_of(a) - col_of(b));
        return (dr + dc) * cell_km_;
    }

    double travel_time_min(Zone a, Zone b, double speed_kmh) const {
        if (!(speed_kmh > 0.0))
            throw ConfigError("speed must be > 0 km/h");
        return distance_km(a, b) / speed_kmh * 60.0;
    }

    // Weight of a stop sequence: sum of consecutive pairwise distances.
    double path_weight_km(std::span<const Zone> stops) const {
        if (stops.empty())
            throw DomainError("path_weight of empty stop sequence");
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < stops.size(); ++i)
            total += distance_km(stops[i], stops[i + 1]);
        return total;
    }

private:
    Zone check(Zone z) const {
        if (!contains(z))
            throw DomainError("invalid zone id " + std::to_string(z));
        return z;
    }

    int rows_;
    int cols_;
    double cell_km_;
};

// Dense precomputed pair distances. Interchangeable with ZoneGrid::distance_km
// for the grid it was built from; useful when a metric other than the closed
// form has to be plugged in or audited.
class PathWeightTable {
public:
    explicit PathWeightTable(const ZoneGrid& grid)
        : zones_(grid.zone_count()), w_(static_cast<std::size_t>(zones_) * zones_) {
        for (Zone a = 0; a < zones_; ++a)
            for (Zone b = 0; b < zones_; ++b)
                w_[static_cast<std::size_t>(a) * zones_ + b] = grid.distance_km(a, b);
    }

    int zone_count() const { return zones_; }

    double weight(Zone a, Zone b) const {
        if (a < 0 || a >= zones_ || b < 0 || b >= zones_)
            throw DomainError("invalid zone id in weight lookup");
        return w_[static_cast<std::size_t>(a) * zones_ + b];
    }

private:
    int zones_;
    std::vector<double> w_;
};

} // namespace ridepool
