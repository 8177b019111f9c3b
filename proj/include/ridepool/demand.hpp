#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ridepool/common.hpp"
#include "ridepool/forecast.hpp"
#include "ridepool/grid.hpp"
#include "ridepool/request.hpp"
#include "ridepool/vehicle.hpp"

namespace ridepool {

// Global per-request defaults applied where the CSV has no override.
struct RequestDefaults {
    double delay_tolerance_min = 30.0;
    double compromise = 5.0;
    double pooling_weight = 15.0;
    double delay_weight = 1.0;
    double type_weight = 4.0;
};

struct ParseReject {
    std::size_t line = 0;
    std::string message;
    std::string raw;
};

struct IngestResult {
    std::vector<RideRequest> requests; // sorted by request_time, then id
    std::vector<ParseReject> rejects;
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ','))
        out.push_back(field);
    if (!line.empty() && line.back() == ',')
        out.push_back("");
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos)
        return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty())
        return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out);
}

inline bool parse_long(const std::string& s, long long& out) {
    const std::string t = trim(s);
    if (t.empty())
        return false;
    char* end = nullptr;
    out = std::strtoll(t.c_str(), &end, 10);
    return end == t.c_str() + t.size();
}

// Days since the civil epoch, for differencing ISO-8601 dates.
inline long long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (static_cast<unsigned>(m) + (m > 2 ? -3 : 9)) + 2) / 5 +
                         static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

// "YYYY-MM-DDTHH:MM[:SS]" -> (day serial, minute of day). Returns false if
// the token is not ISO formatted.
inline bool parse_iso(const std::string& s, long long& day, double& min_of_day) {
    int y, mo, d, h, mi;
    double sec = 0.0;
    int consumed = 0;
    if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d%n", &y, &mo, &d, &h, &mi, &consumed) != 5)
        return false;
    if (consumed < static_cast<int>(s.size())) {
        if (s[static_cast<std::size_t>(consumed)] != ':')
            return false;
        if (std::sscanf(s.c_str() + consumed + 1, "%lf", &sec) != 1)
            return false;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59)
        return false;
    day = days_from_civil(y, mo, d);
    min_of_day = h * 60.0 + mi + sec / 60.0;
    return true;
}

} // namespace detail

// Parse a trip CSV. Header:
//   id,request_time,passengers,origin_row,origin_col,dest_row,dest_col[,delay_tolerance,delta]
// request_time is either minutes since simulation start or an ISO-8601
// timestamp; ISO times are rebased to midnight of the earliest date in the
// file. Malformed rows land in the rejects report and parsing continues;
// out-of-grid cells snap to the nearest boundary zone and are flagged.
inline IngestResult ingest_trips(std::istream& is, const ZoneGrid& grid,
                                 const RequestDefaults& defaults) {
    IngestResult out;
    struct Pending {
        RideRequest req;
        bool iso = false;
        long long day = 0;
        double min_of_day = 0.0;
    };
    std::vector<Pending> pending;

    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        const std::vector<std::string> f = detail::split_csv(t);
        if (first) {
            first = false;
            if (!f.empty() && detail::trim(f[0]) == "id")
                continue; // header row
        }
        auto reject = [&](const std::string& why) {
            out.rejects.push_back({line_no, why, line});
        };
        if (f.size() < 7 || f.size() > 9) {
            reject("expected 7-9 fields, got " + std::to_string(f.size()));
            continue;
        }
        Pending p;
        long long id;
        if (!detail::parse_long(f[0], id)) {
            reject("unparseable id");
            continue;
        }
        p.req.id = id;
        if (detail::parse_iso(detail::trim(f[1]), p.day, p.min_of_day)) {
            p.iso = true;
        } else if (double minutes; detail::parse_double(f[1], minutes)) {
            p.req.request_time_min = minutes;
        } else {
            reject("unparseable request_time");
            continue;
        }
        long long pax;
        if (!detail::parse_long(f[2], pax)) {
            reject("unparseable passenger count");
            continue;
        }
        if (pax < 1) {
            reject("passenger_count < 1");
            continue;
        }
        p.req.passengers = static_cast<int>(pax);
        double coords[4];
        bool bad = false;
        for (int i = 0; i < 4; ++i)
            if (!detail::parse_double(f[static_cast<std::size_t>(3 + i)], coords[i])) {
                reject("unparseable coordinate in field " + std::to_string(4 + i));
                bad = true;
                break;
            }
        if (bad)
            continue;
        auto snap = [&](double row, double col, bool& flagged) {
            const long r = std::llround(row);
            const long c = std::llround(col);
            if (r < 0 || r >= grid.rows() || c < 0 || c >= grid.cols())
                flagged = true;
            return grid.clamp_cell(r, c);
        };
        bool flagged = false;
        p.req.origin = snap(coords[0], coords[1], flagged);
        p.req.destination = snap(coords[2], coords[3], flagged);
        p.req.snapped_to_boundary = flagged;
        p.req.delay_tolerance_min = defaults.delay_tolerance_min;
        p.req.compromise = defaults.compromise;
        p.req.pooling_weight = defaults.pooling_weight;
        p.req.delay_weight = defaults.delay_weight;
        p.req.type_weight = defaults.type_weight;
        if (f.size() >= 8 && !detail::trim(f[7]).empty()) {
            if (!detail::parse_double(f[7], p.req.delay_tolerance_min)) {
                reject("unparseable delay_tolerance");
                continue;
            }
        }
        if (f.size() >= 9 && !detail::trim(f[8]).empty()) {
            if (!detail::parse_double(f[8], p.req.compromise)) {
                reject("unparseable delta");
                continue;
            }
        }
        pending.push_back(std::move(p));
    }

    long long base_day = 0;
    bool has_iso = false;
    for (const Pending& p : pending)
        if (p.iso && (!has_iso || p.day < base_day)) {
            base_day = p.day;
            has_iso = true;
        }
    out.requests.reserve(pending.size());
    for (Pending& p : pending) {
        if (p.iso)
            p.req.request_time_min =
                static_cast<double>(p.day - base_day) * 1440.0 + p.min_of_day;
        out.requests.push_back(std::move(p.req));
    }
    std::sort(out.requests.begin(), out.requests.end(),
              [](const RideRequest& a, const RideRequest& b) {
                  if (a.request_time_min != b.request_time_min)
                      return a.request_time_min < b.request_time_min;
                  return a.id < b.id;
              });
    return out;
}

// Requests/minute per zone, modulated by a time-of-day factor curve
// (one factor per 30-minute bin, wrapping daily; empty means flat).
struct RateProfile {
    std::vector<double> zone_rate_per_min;
    std::vector<double> tod_factor;

    double rate(Zone z, double t_min) const {
        double r = zone_rate_per_min[static_cast<std::size_t>(z)];
        if (!tod_factor.empty()) {
            const double day_min = std::fmod(t_min, 1440.0);
            const std::size_t bin =
                static_cast<std::size_t>(day_min / 30.0) % tod_factor.size();
            r *= tod_factor[bin];
        }
        return r;
    }

    void validate(int zones) const {
        if (static_cast<int>(zone_rate_per_min.size()) != zones)
            throw ConfigError("rate profile zone count mismatch");
        for (double r : zone_rate_per_min)
            if (r < 0.0 || !std::isfinite(r))
                throw ConfigError("zone rates must be finite and >= 0");
        for (double f : tod_factor)
            if (f < 0.0 || !std::isfinite(f))
                throw ConfigError("time-of-day factors must be finite and >= 0");
    }
};

struct SyntheticOptions {
    double duration_min = 1440.0;
    std::uint64_t seed = 1;
    RequestDefaults defaults;
    std::int64_t first_id = 0;
};

// Poisson arrivals per zone per minute; destinations uniform over the other
// zones, party sizes 1-4 weighted toward singles. Identical seeds produce
// identical streams.
inline std::vector<RideRequest> generate_synthetic(const ZoneGrid& grid,
                                                   const RateProfile& profile,
                                                   const SyntheticOptions& opt) {
    profile.validate(grid.zone_count());
    std::mt19937_64 rng(opt.seed);
    std::discrete_distribution<int> party({70.0, 20.0, 7.0, 3.0});
    std::vector<RideRequest> out;
    std::int64_t next_id = opt.first_id;
    for (long minute = 0; minute < static_cast<long>(opt.duration_min); ++minute) {
        for (Zone z = 0; z < grid.zone_count(); ++z) {
            const double rate = profile.rate(z, static_cast<double>(minute));
            if (rate <= 0.0)
                continue;
            std::poisson_distribution<int> arrivals(rate);
            const int n = arrivals(rng);
            for (int k = 0; k < n; ++k) {
                RideRequest r;
                r.id = next_id++;
                r.request_time_min = static_cast<double>(minute);
                r.origin = z;
                if (grid.zone_count() > 1) {
                    std::uniform_int_distribution<Zone> dest(0, grid.zone_count() - 2);
                    Zone d = dest(rng);
                    if (d >= z)
                        ++d;
                    r.destination = d;
                } else {
                    r.destination = z;
                }
                r.passengers = 1 + party(rng);
                r.delay_tolerance_min = opt.defaults.delay_tolerance_min;
                r.compromise = opt.defaults.compromise;
                r.pooling_weight = opt.defaults.pooling_weight;
                r.delay_weight = opt.defaults.delay_weight;
                r.type_weight = opt.defaults.type_weight;
                out.push_back(r);
            }
        }
    }
    return out;
}

// Historical-average demand predictor: expected count per zone for a future
// step is the mean count observed in the same 30-minute time-of-day bin over
// complete prior days. With no complete prior day it falls back to the
// per-zone mean over all elapsed bins; with no history at all it forecasts
// zeros and flags the cold start.
class DemandPredictor {
public:
    explicit DemandPredictor(int zones, int bin_minutes = 30)
        : zones_(zones), bin_min_(bin_minutes),
          bins_per_day_(1440 / bin_minutes) {
        if (zones < 1 || bin_minutes < 1 || 1440 % bin_minutes != 0)
            throw ConfigError("predictor needs zones >= 1 and a bin dividing 1440");
    }

    void observe(Zone z, double t_min) {
        if (z < 0 || z >= zones_)
            throw DomainError("observe: invalid zone");
        const long day = static_cast<long>(t_min / 1440.0);
        const int bin = static_cast<int>(std::fmod(t_min, 1440.0) / bin_min_);
        while (static_cast<long>(days_.size()) <= day)
            days_.emplace_back(static_cast<std::size_t>(bins_per_day_) * zones_, 0.0);
        days_[static_cast<std::size_t>(day)]
             [static_cast<std::size_t>(bin) * zones_ + z] += 1.0;
        total_ += 1.0;
        per_zone_total_.resize(static_cast<std::size_t>(zones_), 0.0);
        per_zone_total_[static_cast<std::size_t>(z)] += 1.0;
    }

    bool cold_start() const { return total_ == 0.0; }

    DemandForecast predict(double t_min, int horizon_steps, double step_min = 1.0) const {
        DemandForecast fc(horizon_steps, zones_);
        if (total_ == 0.0) {
            fc.cold_start = true;
            return fc;
        }
        const long today = static_cast<long>(t_min / 1440.0);
        const long prior_days = std::min<long>(today, static_cast<long>(days_.size()));
        if (prior_days >= 1) {
            for (int k = 0; k <= horizon_steps; ++k) {
                const double when = t_min + k * step_min;
                const int bin =
                    static_cast<int>(std::fmod(when, 1440.0) / bin_min_) % bins_per_day_;
                for (Zone z = 0; z < zones_; ++z) {
                    double sum = 0.0;
                    for (long d = 0; d < prior_days; ++d)
                        sum += days_[static_cast<std::size_t>(d)]
                                    [static_cast<std::size_t>(bin) * zones_ + z];
                    fc.at(k, z) = sum / static_cast<double>(prior_days);
                }
            }
            return fc;
        }
        // cold-ish start: uniform-over-bins per-zone mean
        const double bins_elapsed = std::max(1.0, t_min / bin_min_);
        for (int k = 0; k <= horizon_steps; ++k)
            for (Zone z = 0; z < zones_; ++z)
                fc.at(k, z) = per_zone_total_.empty()
                                  ? 0.0
                                  : per_zone_total_[static_cast<std::size_t>(z)] /
                                        bins_elapsed;
        return fc;
    }

private:
    int zones_;
    int bin_min_;
    int bins_per_day_;
    double total_ = 0.0;
    std::vector<double> per_zone_total_;
    std::vector<std::vector<double>> days_; // [day][bin * zones + zone]
};

// Project vehicle availability: vehicles with an empty route count in their
// current zone at every step; vehicles working a route count at their final
// drop-off zone from the step the route completes (ETA rounded up).
inline SupplyForecast project_supply(std::span<const VehicleState> fleet,
                                     const ZoneGrid& grid, double now_min,
                                     int horizon_steps, double speed_kmh,
                                     double step_min = 1.0) {
    SupplyForecast fc(horizon_steps, grid.zone_count());
    for (const VehicleState& v : fleet) {
        if (!v.entered || v.exited)
            continue;
        if (v.route.empty()) {
            for (int k = 0; k <= horizon_steps; ++k)
                fc.at(k, v.zone) += 1.0;
            continue;
        }
        double remaining_km = 0.0;
        Zone prev = v.zone;
        bool valid = true;
        for (const Stop& s : v.route.stops()) {
            if (!grid.contains(s.zone)) {
                valid = false;
                break;
            }
            remaining_km += grid.distance_km(prev, s.zone);
            prev = s.zone;
        }
        if (!valid)
            continue; // corrupt route: skip this vehicle
        remaining_km = std::max(0.0, remaining_km - v.leg_progress_km);
        const double eta_min = remaining_km / speed_kmh * 60.0;
        const int eta_steps = static_cast<int>(std::ceil(eta_min / step_min));
        const Zone final_zone = v.route.stops().back().zone;
        for (int k = eta_steps; k <= horizon_steps; ++k)
            if (k >= 0)
                fc.at(k, final_zone) += 1.0;
    }
    return fc;
}

} // namespace ridepool
