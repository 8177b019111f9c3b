#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ridepool/common.hpp"
#include "ridepool/demand.hpp"

namespace ridepool {

// One row per tick. Counters prefixed cum_ are cumulative and monotone;
// accept_rate = cum_served / max(cum_requests, 1).
struct TickRow {
    long tick = 0;
    int new_requests = 0;
    int requeued = 0;
    int assigned = 0;
    int boards = 0;
    int completions = 0;
    int reject_radius = 0;
    int reject_customer = 0;
    int reject_degenerate = 0;
    int expired = 0;
    int quotes = 0;
    int quote_accepts = 0;
    double mean_wait_s = 0.0; // over this tick's boards; 0 when none
    int occupied = 0;         // vehicles with at least one rider
    int idle = 0;
    int dispatching = 0;
    int serving = 0;
    int active = 0;           // on duty
    double distance_km = 0.0; // this tick
    double earnings = 0.0;    // this tick
    double fuel_cost = 0.0;   // this tick
    long cum_requests = 0;
    long cum_served = 0;
    long cum_completed = 0;
    long cum_reject_radius = 0;
    long cum_reject_customer = 0;
    long cum_reject_degenerate = 0;
    long cum_expired = 0;
    double accept_rate = 0.0;
};

struct VehicleRow {
    int vehicle_id = 0;
    int type_rank = 0;
    double duty_min = 0.0;
    double occupied_min = 0.0;
    double idle_min = 0.0;
    double dispatch_min = 0.0;
    double distance_km = 0.0;
    double earnings = 0.0;
    double fuel_cost = 0.0;
    int riders_served = 0;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace detail

struct MetricsLog {
    std::vector<TickRow> ticks;
    std::vector<VehicleRow> vehicles;
    std::vector<double> wait_samples_s; // one per board, in board order

    static constexpr const char* kTickHeader =
        "tick,new_requests,requeued,assigned,boards,completions,reject_radius,"
        "reject_customer,reject_degenerate,expired,quotes,quote_accepts,"
        "mean_wait_s,occupied,idle,dispatching,serving,active,distance_km,"
        "earnings,fuel_cost,cum_requests,cum_served,cum_completed,"
        "cum_reject_radius,cum_reject_customer,cum_reject_degenerate,"
        "cum_expired,accept_rate";

    static constexpr const char* kVehicleHeader =
        "vehicle_id,type_rank,duty_min,occupied_min,idle_min,dispatch_min,"
        "distance_km,earnings,fuel_cost,riders_served";

    void write_ticks_csv(std::ostream& os) const {
        os << kTickHeader << "\n";
        for (const TickRow& r : ticks) {
            os << r.tick << ',' << r.new_requests << ',' << r.requeued << ','
               << r.assigned << ',' << r.boards << ',' << r.completions << ','
               << r.reject_radius << ',' << r.reject_customer << ','
               << r.reject_degenerate << ',' << r.expired << ',' << r.quotes << ','
               << r.quote_accepts << ',' << detail::fmt(r.mean_wait_s) << ','
               << r.occupied << ',' << r.idle << ',' << r.dispatching << ','
               << r.serving << ',' << r.active << ',' << detail::fmt(r.distance_km)
               << ',' << detail::fmt(r.earnings) << ',' << detail::fmt(r.fuel_cost)
               << ',' << r.cum_requests << ',' << r.cum_served << ','
               << r.cum_completed << ',' << r.cum_reject_radius << ','
               << r.cum_reject_customer << ',' << r.cum_reject_degenerate << ','
               << r.cum_expired << ',' << detail::fmt(r.accept_rate) << "\n";
        }
    }

    void write_vehicles_csv(std::ostream& os) const {
        os << kVehicleHeader << "\n";
        for (const VehicleRow& v : vehicles) {
            os << v.vehicle_id << ',' << v.type_rank << ','
               << detail::fmt(v.duty_min) << ',' << detail::fmt(v.occupied_min) << ','
               << detail::fmt(v.idle_min) << ',' << detail::fmt(v.dispatch_min) << ','
               << detail::fmt(v.distance_km) << ',' << detail::fmt(v.earnings) << ','
               << detail::fmt(v.fuel_cost) << ',' << v.riders_served << "\n";
        }
    }

    static MetricsLog read_csv(std::istream& ticks_is, std::istream* vehicles_is) {
        MetricsLog log;
        std::string line;
        bool header = true;
        while (std::getline(ticks_is, line)) {
            if (header) {
                header = false;
                continue;
            }
            const std::vector<std::string> f = detail::split_csv(line);
            if (f.size() < 29)
                throw ConfigError("metrics CSV row with " + std::to_string(f.size()) +
                                  " fields (expected 29)");
            TickRow r;
            std::size_t i = 0;
            auto li = [&] { return std::stol(f[i++]); };
            auto di = [&] { return std::stod(f[i++]); };
            r.tick = li();
            r.new_requests = static_cast<int>(li());
            r.requeued = static_cast<int>(li());
            r.assigned = static_cast<int>(li());
            r.boards = static_cast<int>(li());
            r.completions = static_cast<int>(li());
            r.reject_radius = static_cast<int>(li());
            r.reject_customer = static_cast<int>(li());
            r.reject_degenerate = static_cast<int>(li());
            r.expired = static_cast<int>(li());
            r.quotes = static_cast<int>(li());
            r.quote_accepts = static_cast<int>(li());
            r.mean_wait_s = di();
            r.occupied = static_cast<int>(li());
            r.idle = static_cast<int>(li());
            r.dispatching = static_cast<int>(li());
            r.serving = static_cast<int>(li());
            r.active = static_cast<int>(li());
            r.distance_km = di();
            r.earnings = di();
            r.fuel_cost = di();
            r.cum_requests = li();
            r.cum_served = li();
            r.cum_completed = li();
            r.cum_reject_radius = li();
            r.cum_reject_customer = li();
            r.cum_reject_degenerate = li();
            r.cum_expired = li();
            r.accept_rate = di();
            log.ticks.push_back(r);
        }
        if (vehicles_is) {
            header = true;
            while (std::getline(*vehicles_is, line)) {
                if (header) {
                    header = false;
                    continue;
                }
                const std::vector<std::string> f = detail::split_csv(line);
                if (f.size() < 10)
                    throw ConfigError("vehicles CSV row with too few fields");
                VehicleRow v;
                v.vehicle_id = std::stoi(f[0]);
                v.type_rank = std::stoi(f[1]);
                v.duty_min = std::stod(f[2]);
                v.occupied_min = std::stod(f[3]);
                v.idle_min = std::stod(f[4]);
                v.dispatch_min = std::stod(f[5]);
                v.distance_km = std::stod(f[6]);
                v.earnings = std::stod(f[7]);
                v.fuel_cost = std::stod(f[8]);
                v.riders_served = std::stoi(f[9]);
                log.vehicles.push_back(v);
            }
        }
        return log;
    }
};

struct Histogram {
    std::string title;
    std::vector<double> edges; // n+1 edges for n bins
    std::vector<long> counts;

    static Histogram build(const std::string& title, const std::vector<double>& xs,
                           double lo, double hi, int bins) {
        Histogram h;
        h.title = title;
        h.counts.assign(static_cast<std::size_t>(bins), 0);
        for (int i = 0; i <= bins; ++i)
            h.edges.push_back(lo + (hi - lo) * i / bins);
        for (double x : xs) {
            int b = static_cast<int>((x - lo) / (hi - lo) * bins);
            b = std::clamp(b, 0, bins - 1);
            ++h.counts[static_cast<std::size_t>(b)];
        }
        return h;
    }

    void render(std::ostream& os) const {
        os << title << "\n";
        long maxc = 1;
        for (long c : counts)
            maxc = std::max(maxc, c);
        for (std::size_t i = 0; i < counts.size(); ++i) {
            char label[64];
            std::snprintf(label, sizeof label, "  [%8.2f, %8.2f)", edges[i],
                          edges[i + 1]);
            os << label << " " << std::string(
                      static_cast<std::size_t>(40.0 * counts[i] / maxc), '#')
               << " " << counts[i] << "\n";
        }
    }
};

struct SummaryReport {
    bool empty = false;
    long total_requests = 0;
    long served = 0;
    long completed = 0;
    long reject_radius = 0;
    long reject_customer = 0;
    long reject_degenerate = 0;
    long expired = 0;
    double accept_rate = 0.0;
    double mean_wait_s = 0.0;
    double mean_occupied_vehicles = 0.0;
    double peak_occupied_vehicles = 0.0;
    double fleet_profit = 0.0;
    double mean_profit_per_hour = 0.0;   // over vehicles with duty time
    double mean_km_per_hour = 0.0;
    double mean_idle_hours = 0.0;
    double mean_occupancy_pct = 0.0;
    std::vector<Histogram> histograms;

    std::string to_text() const {
        std::ostringstream os;
        if (empty) {
            os << "warning: empty metrics log, nothing to summarize\n";
            return os.str();
        }
        os << "requests            " << total_requests << "\n";
        os << "served (boards)     " << served << "\n";
        os << "completed           " << completed << "\n";
        os << "accept rate         " << detail::fmt(accept_rate) << "\n";
        os << "rejected: radius    " << reject_radius << "\n";
        os << "rejected: customer  " << reject_customer << "\n";
        os << "rejected: degenerate " << reject_degenerate << "\n";
        os << "expired             " << expired << "\n";
        os << "mean wait (s)       " << detail::fmt(mean_wait_s) << "\n";
        os << "mean occupied fleet " << detail::fmt(mean_occupied_vehicles) << "\n";
        os << "peak occupied fleet " << detail::fmt(peak_occupied_vehicles) << "\n";
        os << "fleet profit        " << detail::fmt(fleet_profit) << "\n";
        os << "profit/hour (mean)  " << detail::fmt(mean_profit_per_hour) << "\n";
        os << "km/hour (mean)      " << detail::fmt(mean_km_per_hour) << "\n";
        os << "idle hours (mean)   " << detail::fmt(mean_idle_hours) << "\n";
        os << "occupancy % (mean)  " << detail::fmt(mean_occupancy_pct) << "\n";
        for (const Histogram& h : histograms) {
            os << "\n";
            h.render(os);
        }
        return os.str();
    }
};

inline SummaryReport summarize(const MetricsLog& log) {
    SummaryReport rep;
    if (log.ticks.empty()) {
        rep.empty = true;
        return rep;
    }
    const TickRow& last = log.ticks.back();
    rep.total_requests = last.cum_requests;
    rep.served = last.cum_served;
    rep.completed = last.cum_completed;
    rep.reject_radius = last.cum_reject_radius;
    rep.reject_customer = last.cum_reject_customer;
    rep.reject_degenerate = last.cum_reject_degenerate;
    rep.expired = last.cum_expired;
    rep.accept_rate = last.accept_rate;

    double wait_sum = 0.0;
    long wait_n = 0;
    double occ_sum = 0.0;
    for (const TickRow& r : log.ticks) {
        wait_sum += r.mean_wait_s * r.boards;
        wait_n += r.boards;
        occ_sum += r.occupied;
        rep.peak_occupied_vehicles = std::max<double>(rep.peak_occupied_vehicles,
                                                      r.occupied);
    }
    rep.mean_wait_s = wait_n > 0 ? wait_sum / wait_n : 0.0;
    rep.mean_occupied_vehicles = occ_sum / static_cast<double>(log.ticks.size());

    std::vector<double> profit_per_hour, km_per_hour, idle_hours, occupancy_pct;
    for (const VehicleRow& v : log.vehicles) {
        rep.fleet_profit += v.earnings - v.fuel_cost;
        if (v.duty_min <= 0.0)
            continue;
        const double hours = v.duty_min / 60.0;
        profit_per_hour.push_back((v.earnings - v.fuel_cost) / hours);
        km_per_hour.push_back(v.distance_km / hours);
        idle_hours.push_back(v.idle_min / 60.0);
        occupancy_pct.push_back(100.0 * v.occupied_min / v.duty_min);
    }
    auto mean = [](const std::vector<double>& xs) {
        if (xs.empty())
            return 0.0;
        double s = 0.0;
        for (double x : xs)
            s += x;
        return s / static_cast<double>(xs.size());
    };
    rep.mean_profit_per_hour = mean(profit_per_hour);
    rep.mean_km_per_hour = mean(km_per_hour);
    rep.mean_idle_hours = mean(idle_hours);
    rep.mean_occupancy_pct = mean(occupancy_pct);

    if (!profit_per_hour.empty()) {
        const double pmax = *std::max_element(profit_per_hour.begin(), profit_per_hour.end());
        const double pmin = *std::min_element(profit_per_hour.begin(), profit_per_hour.end());
        rep.histograms.push_back(Histogram::build("profit per hour", profit_per_hour,
                                                  std::min(0.0, pmin),
                                                  std::max(1.0, pmax), 10));
        const double kmax = *std::max_element(km_per_hour.begin(), km_per_hour.end());
        rep.histograms.push_back(
            Histogram::build("km per hour", km_per_hour, 0.0, std::max(1.0, kmax), 10));
        const double imax = *std::max_element(idle_hours.begin(), idle_hours.end());
        rep.histograms.push_back(Histogram::build("idle hours per vehicle", idle_hours,
                                                  0.0, std::max(1.0, imax), 10));
        rep.histograms.push_back(Histogram::build("occupancy %% of duty time",
                                                  occupancy_pct, 0.0, 100.0, 10));
    }
    const std::vector<double>& waits = log.wait_samples_s;
    if (!waits.empty()) {
        const double wmax = *std::max_element(waits.begin(), waits.end());
        rep.histograms.push_back(Histogram::build("waiting time (s)", waits, 0.0,
                                                  std::max(60.0, wmax), 12));
    }
    return rep;
}

} // namespace ridepool
