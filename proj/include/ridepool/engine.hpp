#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ridepool/common.hpp"
#include "ridepool/config.hpp"
#include "ridepool/demand.hpp"
#include "ridepool/dispatch.hpp"
#include "ridepool/grid.hpp"
#include "ridepool/matching.hpp"
#include "ridepool/metrics.hpp"
#include "ridepool/pricing.hpp"
#include "ridepool/request.hpp"
#include "ridepool/route.hpp"
#include "ridepool/vehicle.hpp"

namespace ridepool {

struct EngineOptions {
    bool training = false; // collect transitions and run updates
    bool explore = false;  // epsilon-greedy instead of greedy decisions
    std::ostream* trace = nullptr;
    std::function<void(long tick, const LearnStats&)> on_learn;
};

// The simulation loop. One tick runs, in order: vehicle admission, request
// intake (new + re-queued), forecasting, dispatch of the newcomers, greedy
// assignment, per-vehicle insertion/pricing/decision in proximity order,
// movement, idle dispatch, exits, learning, and the metrics row. Vehicles are
// always visited in ascending id, so a fixed config and seed reproduce the
// log byte for byte.
class Engine {
public:
    Engine(SimConfig cfg, EngineOptions opt = {})
        : cfg_(validated(std::move(cfg))), opt_(std::move(opt)),
          grid_(cfg_.grid_rows, cfg_.grid_cols, cfg_.cell_km),
          predictor_(grid_.zone_count()) {
        cfg_.policy.seed = mix_seed(cfg_.seed, 0x90CAu);
        policy_ = std::make_unique<QFunction>(cfg_.policy);
        init_fleet();
        prime_requests();
    }

    const SimConfig& config() const { return cfg_; }
    const ZoneGrid& grid() const { return grid_; }
    QFunction& policy() { return *policy_; }
    const QFunction& policy() const { return *policy_; }
    std::vector<VehicleState>& fleet() { return fleet_; }
    std::vector<RideRequest>& requests() { return requests_; }
    const MetricsLog& log() const { return log_; }
    long tick() const { return tick_; }
    double now() const { return static_cast<double>(tick_) * cfg_.delta_t_min; }
    const HotspotList& hotspots() const { return hotspots_; }
    const std::vector<Quote>& last_quotes() const { return tick_quotes_; }

    // Swap in a trained policy (e.g. from a checkpoint).
    void set_policy(QFunction policy) {
        policy_ = std::make_unique<QFunction>(std::move(policy));
    }

    MetricsLog run() {
        for (long t = 0; t < cfg_.steps; ++t)
            step();
        finalize_vehicle_rows();
        return log_;
    }

    void step() {
        const double now_min = now();
        TickRow row;
        row.tick = tick_;
        tick_distance_ = tick_earnings_ = tick_fuel_ = 0.0;
        tick_quotes_.clear();

        std::vector<int> newly_entered = admit_vehicles(now_min);
        std::vector<std::size_t> batch = intake_requests(now_min, row);

        for (std::size_t idx : batch)
            predictor_.observe(requests_[idx].origin, requests_[idx].request_time_min);

        demand_fc_ = predictor_.predict(now_min, kStateHorizon, cfg_.delta_t_min);
        supply_fc_ = project_supply(fleet_, grid_, now_min, kStateHorizon,
                                    cfg_.speed_kmh, cfg_.delta_t_min);

        if (dispatch_active(now_min))
            for (int id : newly_entered)
                dispatch_vehicle(fleet_[static_cast<std::size_t>(id)], now_min);

        refresh_hotspots();

        match_and_price(batch, now_min, row);
        advance_fleet(now_min, row);
        idle_dispatch(now_min);
        process_exits(now_min);

        if (opt_.training) {
            for (int u = 0; u < cfg_.updates_per_tick; ++u) {
                const std::optional<LearnStats> stats = policy_->learn();
                if (stats && opt_.on_learn)
                    opt_.on_learn(tick_, *stats);
            }
        }

        fill_metrics_row(row);
        check_invariants(row);
        log_.ticks.push_back(row);
        ++tick_;
    }

    void finalize_vehicle_rows() {
        log_.vehicles.clear();
        for (const VehicleState& v : fleet_) {
            VehicleRow r;
            r.vehicle_id = v.id;
            r.type_rank = cfg_.types[static_cast<std::size_t>(v.type_index)].type_rank;
            r.duty_min = v.duty_min;
            r.occupied_min = v.occupied_min;
            r.idle_min = v.idle_total_min;
            r.dispatch_min = v.dispatch_travel_min;
            r.distance_km = v.distance_km;
            r.earnings = v.earnings;
            r.fuel_cost = v.fuel_cost;
            r.riders_served = v.riders_served;
            log_.vehicles.push_back(r);
        }
    }

    // Exposed for fixtures: inject a request after construction.
    std::size_t inject_request(RideRequest r) {
        const std::size_t idx = requests_.size();
        id_index_[r.id] = idx;
        requests_.push_back(std::move(r));
        ++ingested_;
        waiting_ += 1;
        pending_injections_.push_back(idx);
        injected_indices_.insert(idx);
        return idx;
    }

    static constexpr int kStateHorizon = 30;

private:
    static SimConfig validated(SimConfig cfg) {
        cfg.validate();
        return cfg;
    }

    const VehicleTypeProfile& type_of(const VehicleState& v) const {
        return cfg_.types[static_cast<std::size_t>(v.type_index)];
    }

    bool dispatch_active(double now_min) const {
        return cfg_.use_dispatch && now_min >= cfg_.dispatch_warmup_min;
    }

    void init_fleet() {
        std::mt19937_64 fleet_rng(mix_seed(cfg_.seed, 0xF1EEu));
        std::uniform_int_distribution<int> type_pick(
            0, static_cast<int>(cfg_.types.size()) - 1);
        std::uniform_int_distribution<Zone> zone_pick(0, grid_.zone_count() - 1);
        fleet_.resize(static_cast<std::size_t>(cfg_.fleet_size));
        for (int i = 0; i < cfg_.fleet_size; ++i) {
            VehicleState& v = fleet_[static_cast<std::size_t>(i)];
            v.id = i;
            v.type_index = type_pick(fleet_rng);
            v.zone = zone_pick(fleet_rng);
            v.entered_at_min = cfg_.fleet_size > 0
                                   ? cfg_.entry_window_min * i / cfg_.fleet_size
                                   : 0.0;
            v.exits_at_min = v.entered_at_min + cfg_.duty_limit_min;
        }
    }

    void prime_requests() {
        if (cfg_.demand_mode == "csv") {
            std::ifstream is(cfg_.trips_csv);
            if (!is)
                throw ConfigError("cannot open trips_csv '" + cfg_.trips_csv + "'");
            IngestResult res = ingest_trips(is, grid_, cfg_.request_defaults);
            requests_ = std::move(res.requests);
            if (opt_.trace)
                for (const ParseReject& pr : res.rejects)
                    *opt_.trace << "ingest reject line " << pr.line << ": "
                                << pr.message << "\n";
        } else {
            SyntheticOptions sopt;
            sopt.duration_min = static_cast<double>(cfg_.steps) * cfg_.delta_t_min;
            sopt.seed = mix_seed(cfg_.seed, 0xDE3Au);
            sopt.defaults = cfg_.request_defaults;
            requests_ = generate_synthetic(grid_, cfg_.rate_profile(grid_), sopt);
        }
        arrival_cursor_ = 0;
        id_index_.clear();
        for (std::size_t i = 0; i < requests_.size(); ++i)
            id_index_[requests_[i].id] = i;
    }

    std::vector<int> admit_vehicles(double now_min) {
        std::vector<int> entered;
        for (VehicleState& v : fleet_) {
            if (!v.entered && v.entered_at_min <= now_min) {
                v.entered = true;
                v.status = VehicleStatus::Idle;
                v.idle_min = 0.0;
                entered.push_back(v.id);
            }
        }
        return entered;
    }

    std::vector<std::size_t> intake_requests(double now_min, TickRow& row) {
        std::vector<std::size_t> batch;
        // re-queued first (they carry older request times)
        std::deque<std::size_t> requeued;
        std::swap(requeued, requeue_next_);
        for (std::size_t idx : requeued) {
            RideRequest& r = requests_[idx];
            if (now_min - r.request_time_min > r.delay_tolerance_min) {
                make_terminal(r, RejectReason::Expired);
                ++row.expired;
                continue;
            }
            ++row.requeued;
            batch.push_back(idx);
        }
        for (std::size_t idx : pending_injections_)
            batch.push_back(idx);
        pending_injections_.clear();
        while (arrival_cursor_ < requests_.size() &&
               requests_[arrival_cursor_].request_time_min <
                   now_min + cfg_.delta_t_min) {
            const std::size_t idx = arrival_cursor_++;
            if (injected_indices_.count(idx))
                continue; // already queued on injection
            ++ingested_;
            ++waiting_;
            ++row.new_requests;
            batch.push_back(idx);
        }
        // degenerate trips are flagged on intake and never matched
        std::vector<std::size_t> live;
        live.reserve(batch.size());
        for (std::size_t idx : batch) {
            RideRequest& r = requests_[idx];
            if (r.degenerate()) {
                make_terminal(r, RejectReason::Degenerate);
                ++row.reject_degenerate;
                continue;
            }
            live.push_back(idx);
        }
        std::sort(live.begin(), live.end(), [&](std::size_t a, std::size_t b) {
            if (requests_[a].request_time_min != requests_[b].request_time_min)
                return requests_[a].request_time_min < requests_[b].request_time_min;
            return requests_[a].id < requests_[b].id;
        });
        return live;
    }

    void make_terminal(RideRequest& r, RejectReason reason) {
        r.advance_status(RequestStatus::Rejected);
        r.reject_reason = reason;
        --waiting_;
        switch (reason) {
        case RejectReason::Radius: ++terminal_radius_; break;
        case RejectReason::Customer: ++terminal_customer_; break;
        case RejectReason::Expired: ++terminal_expired_; break;
        case RejectReason::Degenerate: ++terminal_degenerate_; break;
        case RejectReason::None: break;
        }
        if (opt_.trace)
            *opt_.trace << "t=" << tick_ << " terminal r" << r.id << " "
                        << static_cast<int>(reason) << "\n";
    }

    // A rejected-or-infeasible request goes back to the next tick's queue
    // until the re-queue bound or the waiting tolerance runs out.
    void requeue_or_expire(RideRequest& r, std::size_t idx, bool customer_caused,
                           double now_min, TickRow& row) {
        r.rejection_count += 1;
        if (r.rejection_count > cfg_.requeue_limit) {
            make_terminal(r, customer_caused ? RejectReason::Customer
                                             : RejectReason::Expired);
            if (customer_caused)
                ++row.reject_customer;
            else
                ++row.expired;
            return;
        }
        if (now_min - r.request_time_min > r.delay_tolerance_min) {
            make_terminal(r, RejectReason::Expired);
            ++row.expired;
            return;
        }
        requeue_next_.push_back(idx);
    }

    void refresh_hotspots() {
        if (!cfg_.use_pricing)
            return;
        if (hotspots_valid_ && tick_ % cfg_.hotspot_refresh_ticks != 0)
            return;
        std::vector<double> values(static_cast<std::size_t>(grid_.zone_count()), 0.0);
        if (cfg_.use_dispatch) {
            for (Zone z = 0; z < grid_.zone_count(); ++z) {
                const DispatchState s = encode_state(demand_fc_, supply_fc_, z, grid_,
                                                     policy_->crop_radius());
                const std::vector<double> q = policy_->q_values(s);
                values[static_cast<std::size_t>(z)] =
                    *std::max_element(q.begin(), q.end());
            }
        }
        hotspots_ = build_hotspots(values, cfg_.lambda);
        hotspots_valid_ = true;
    }

    Zone current_waypoint(const VehicleState& v, bool& has) const {
        if (!v.route.empty()) {
            has = true;
            return v.route.front().zone;
        }
        if (v.dispatch_target) {
            has = true;
            return *v.dispatch_target;
        }
        has = false;
        return v.zone;
    }

    void dispatch_vehicle(VehicleState& v, double now_min) {
        if (v.busy() || !v.on_duty(now_min))
            return;
        close_pending(v);
        DispatchState s =
            encode_state(demand_fc_, supply_fc_, v.zone, grid_, policy_->crop_radius());
        const int action = policy_->decide(s, opt_.explore);
        const Zone target =
            action_to_zone(v.zone, DispatchAction::from_index(action), grid_);
        if (opt_.training)
            v.pending = VehicleState::PendingDecision{std::move(s), action, {}};
        if (target == v.zone) {
            v.status = VehicleStatus::Idle;
            v.idle_min = 0.0;
            v.dispatch_target.reset();
        } else {
            v.status = VehicleStatus::Dispatching;
            v.dispatch_target = target;
            v.leg_progress_km = 0.0;
        }
        if (opt_.trace)
            *opt_.trace << "t=" << tick_ << " dispatch v" << v.id << " -> z" << target
                        << "\n";
    }

    void close_pending(VehicleState& v) {
        if (!opt_.training || !v.pending)
            return;
        Transition t;
        t.state = std::move(v.pending->state);
        t.action = v.pending->action;
        t.reward = compute_reward(v.pending->acc, cfg_.betas);
        t.next_state =
            encode_state(demand_fc_, supply_fc_, v.zone, grid_, policy_->crop_radius());
        policy_->remember(std::move(t));
        v.pending.reset();
    }

    // Estimated minutes until the new rider is picked up, along the tentative
    // route from the vehicle's current position.
    double pickup_eta_min(const VehicleState& v, const Route& route,
                          int pickup_index) const {
        double km = 0.0;
        Zone prev = v.zone;
        for (int i = 0; i <= pickup_index; ++i) {
            km += grid_.distance_km(prev, route.stops()[static_cast<std::size_t>(i)].zone);
            prev = route.stops()[static_cast<std::size_t>(i)].zone;
        }
        km = std::max(0.0, km - v.leg_progress_km);
        return km / cfg_.speed_kmh * 60.0;
    }

    double route_time_to_stop(const VehicleState& v, const Route& route,
                              std::int64_t request_id, StopKind kind) const {
        const int idx = route.stop_index(request_id, kind);
        if (idx < 0)
            return 0.0;
        return pickup_eta_min(v, route, idx);
    }

    void match_and_price(const std::vector<std::size_t>& batch, double now_min,
                         TickRow& row) {
        if (batch.empty())
            return;
        std::vector<GreedyVehicle> greedy_fleet;
        for (const VehicleState& v : fleet_) {
            if (!v.on_duty(now_min))
                continue;
            const VehicleTypeProfile& t = type_of(v);
            if (cfg_.use_ridesharing) {
                if (v.committed_passengers >= t.max_capacity)
                    continue;
            } else if (v.committed_passengers > 0 || !v.route.empty()) {
                continue;
            }
            greedy_fleet.push_back(
                {v.id, v.zone, v.committed_passengers, t.max_capacity});
        }

        std::vector<RideRequest> snapshot;
        snapshot.reserve(batch.size());
        for (std::size_t idx : batch)
            snapshot.push_back(requests_[idx]);

        GreedyOptions gopt;
        gopt.radius_km = cfg_.matching_radius_km;
        gopt.speed_kmh = cfg_.speed_kmh;
        gopt.single_request = !cfg_.use_ridesharing;
        const GreedyResult assigned = greedy_assign(snapshot, greedy_fleet, grid_, gopt);

        for (std::size_t bi : assigned.rejected) {
            RideRequest& r = requests_[batch[bi]];
            make_terminal(r, RejectReason::Radius);
            ++row.reject_radius;
        }

        for (const AssignmentList& list : assigned.assignments) {
            VehicleState& v = fleet_[static_cast<std::size_t>(list.vehicle_id)];
            const VehicleTypeProfile& type = type_of(v);
            for (std::size_t bi : list.request_indices) {
                const std::size_t idx = batch[bi];
                RideRequest& r = requests_[idx];
                ++row.assigned;

                const std::optional<InsertionResult> ins =
                    cfg_.use_darm
                        ? insert_request(grid_, v.zone, v.route, r, type.max_capacity)
                        : append_request(grid_, v.zone, v.route, r, type.max_capacity);
                if (!ins) {
                    requeue_or_expire(r, idx, /*customer_caused=*/false, now_min, row);
                    continue;
                }

                const double wait_est =
                    (now_min - r.request_time_min) +
                    pickup_eta_min(v, ins->route, ins->pickup_index);

                Quote quote;
                quote.request_id = r.id;
                quote.vehicle_id = v.id;
                quote.marginal_cost_km = ins->marginal_cost_km;
                quote.wait_min = wait_est;
                quote.sharing = sharing_count(ins->route, r.id);
                quote.initial_price =
                    initial_price(type, ins->marginal_cost_km, quote.sharing, wait_est,
                                  cfg_.gas_price);
                if (cfg_.use_pricing) {
                    quote.final_price = propose_price(quote.initial_price, r.destination,
                                                      hotspots_, type.base_price);
                    const int occupancy =
                        ins->route.loads()[static_cast<std::size_t>(ins->pickup_index)];
                    const double utility = customer_utility(
                        occupancy, wait_est, type.type_rank, r.pooling_weight,
                        r.delay_weight, r.type_weight);
                    quote.accepted =
                        customer_decide(utility, quote.final_price, r.compromise);
                } else {
                    quote.final_price = quote.initial_price;
                    quote.accepted = true;
                }
                ++row.quotes;
                tick_quotes_.push_back(quote);
                if (opt_.trace)
                    *opt_.trace << "t=" << tick_ << " quote v" << v.id << " r" << r.id
                                << " Pinit=" << quote.initial_price
                                << " P=" << quote.final_price
                                << (quote.accepted ? " accept" : " reject") << "\n";

                if (!quote.accepted) {
                    requeue_or_expire(r, idx, /*customer_caused=*/true, now_min, row);
                    continue;
                }
                ++row.quote_accepts;
                commit_request(v, r, *ins, quote, now_min);
            }
        }
    }

    void commit_request(VehicleState& v, RideRequest& r, const InsertionResult& ins,
                        const Quote& quote, double now_min) {
        bool had_wp = false;
        const Zone old_wp = current_waypoint(v, had_wp);

        // extra delay imposed on everyone already committed
        double extra_delay = 0.0;
        for (auto& [rid, clock] : v.riders) {
            const StopKind kind = StopKind::Dropoff;
            const double new_eta = route_time_to_stop(v, ins.route, rid, kind);
            const double new_drop = now_min + new_eta;
            if (new_drop > clock.est_drop_time_min)
                extra_delay += new_drop - clock.est_drop_time_min;
            clock.est_drop_time_min = new_drop;
        }

        RiderClock clock;
        clock.request_time_min = r.request_time_min;
        clock.passengers = r.passengers;
        clock.promised_solo_min =
            grid_.travel_time_min(v.zone, r.origin, cfg_.speed_kmh) +
            grid_.travel_time_min(r.origin, r.destination, cfg_.speed_kmh);
        clock.est_drop_time_min =
            now_min + route_time_to_stop(v, ins.route, r.id, StopKind::Dropoff);
        // xi for the new rider: elapsed + remaining vs the solo promise
        extra_delay +=
            (clock.est_drop_time_min - r.request_time_min) - clock.promised_solo_min;
        v.riders[r.id] = clock;

        if (v.pending)
            v.pending->acc.extra_delay_min += extra_delay;

        v.route = ins.route;
        v.committed_passengers += r.passengers;
        v.idle_min = 0.0;
        v.status = VehicleStatus::Serving;
        v.dispatch_target.reset();
        bool has_wp = false;
        const Zone new_wp = current_waypoint(v, has_wp);
        if (!had_wp || new_wp != old_wp)
            v.leg_progress_km = 0.0;

        r.advance_status(RequestStatus::Matched);
        r.assigned_vehicle = v.id;
        r.fare = quote.final_price;
        --waiting_;
        ++matched_;
    }

    void advance_fleet(double now_min, TickRow& row) {
        for (VehicleState& v : fleet_) {
            if (!v.entered || v.exited)
                continue;
            v.duty_min += cfg_.delta_t_min;
            const VehicleTypeProfile& type = type_of(v);
            double budget_km = cfg_.speed_kmh * cfg_.delta_t_min / 60.0;
            const double full_budget = budget_km;

            while (budget_km > 1e-12) {
                bool has_wp = false;
                const Zone wp = current_waypoint(v, has_wp);
                if (!has_wp)
                    break;
                const double leg_km = grid_.distance_km(v.zone, wp);
                const double rem = leg_km - v.leg_progress_km;
                const bool dispatching = v.route.empty() && v.dispatch_target.has_value();
                if (rem > budget_km) {
                    move(v, budget_km, dispatching, type);
                    v.leg_progress_km += budget_km;
                    budget_km = 0.0;
                    break;
                }
                move(v, rem, dispatching, type);
                budget_km -= rem;
                v.zone = wp;
                v.leg_progress_km = 0.0;
                const double minute_used =
                    cfg_.delta_t_min * (1.0 - budget_km / std::max(full_budget, 1e-12));
                if (!v.route.empty() && v.route.front().zone == v.zone) {
                    handle_stop(v, now_min + minute_used, row);
                } else if (v.dispatch_target && *v.dispatch_target == v.zone) {
                    v.dispatch_target.reset();
                    v.status = VehicleStatus::Idle;
                    v.idle_min = 0.0;
                }
            }

            if (v.onboard > 0)
                v.occupied_min += cfg_.delta_t_min;
            if (v.status == VehicleStatus::Idle) {
                v.idle_min += cfg_.delta_t_min;
                v.idle_total_min += cfg_.delta_t_min;
            }

            const bool occupied_now = v.onboard > 0;
            if (occupied_now && !v.occupied_last_tick && v.pending)
                v.pending->acc.activation_delta += 1.0;
            v.occupied_last_tick = occupied_now;
        }
    }

    void move(VehicleState& v, double km, bool dispatching,
              const VehicleTypeProfile& type) {
        if (km <= 0.0)
            return;
        v.distance_km += km;
        const double fuel = km * cfg_.gas_price / type.mileage_km_per_l;
        v.fuel_cost += fuel;
        tick_distance_ += km;
        tick_fuel_ += fuel;
        if (v.pending)
            v.pending->acc.profit -= fuel;
        const double minutes = km / cfg_.speed_kmh * 60.0;
        if (dispatching) {
            v.dispatch_travel_min += minutes;
            if (v.pending)
                v.pending->acc.dispatch_min += minutes;
        }
    }

    // Consume every stop at the vehicle's current zone (pickups board,
    // dropoffs settle the fare).
    void handle_stop(VehicleState& v, double moment_min, TickRow& row) {
        while (!v.route.empty() && v.route.front().zone == v.zone) {
            const Stop stop = v.route.front();
            RideRequest& r = request_by_id(stop.request_id);
            if (stop.kind == StopKind::Pickup) {
                r.advance_status(RequestStatus::Onboard);
                r.pickup_time_min = moment_min;
                const double wait_s = (moment_min - r.request_time_min) * 60.0;
                log_.wait_samples_s.push_back(wait_s);
                tick_wait_s_sum_ += wait_s;
                ++row.boards;
                --matched_;
                ++onboard_count_;
                v.onboard += stop.passengers;
                if (v.pending)
                    v.pending->acc.served_count += 1.0;
                if (opt_.trace)
                    *opt_.trace << "t=" << tick_ << " board v" << v.id << " r" << r.id
                                << " wait_s=" << wait_s << "\n";
            } else {
                r.advance_status(RequestStatus::Completed);
                r.dropoff_time_min = moment_min;
                v.onboard -= stop.passengers;
                v.committed_passengers -= stop.passengers;
                v.earnings += r.fare;
                tick_earnings_ += r.fare;
                ++v.riders_served;
                v.riders.erase(r.id);
                ++row.completions;
                --onboard_count_;
                ++completed_;
                if (v.pending)
                    v.pending->acc.profit += r.fare;
                if (opt_.trace)
                    *opt_.trace << "t=" << tick_ << " drop v" << v.id << " r" << r.id
                                << " fare=" << r.fare << "\n";
            }
            v.route.pop_front(grid_, v.zone);
            if (v.route.empty()) {
                v.status = VehicleStatus::Idle;
                v.idle_min = 0.0;
            }
        }
    }

    void idle_dispatch(double now_min) {
        if (!dispatch_active(now_min))
            return;
        for (VehicleState& v : fleet_) {
            if (!v.entered || v.exited || v.status != VehicleStatus::Idle)
                continue;
            if (now_min + cfg_.delta_t_min >= v.exits_at_min)
                continue;
            if (v.idle_min > cfg_.idle_dispatch_min)
                dispatch_vehicle(v, now_min);
        }
    }

    void process_exits(double now_min) {
        for (VehicleState& v : fleet_) {
            if (!v.entered || v.exited)
                continue;
            if (now_min + cfg_.delta_t_min < v.exits_at_min)
                continue;
            if (!v.route.empty() || v.onboard > 0 || v.committed_passengers > 0)
                continue; // finish the committed work first
            close_pending(v);
            v.exited = true;
            v.status = VehicleStatus::Idle;
            v.dispatch_target.reset();
            if (opt_.trace)
                *opt_.trace << "t=" << tick_ << " exit v" << v.id << "\n";
        }
    }

    void fill_metrics_row(TickRow& row) {
        for (const VehicleState& v : fleet_) {
            if (!v.entered || v.exited)
                continue;
            ++row.active;
            if (v.onboard > 0)
                ++row.occupied;
            switch (v.status) {
            case VehicleStatus::Idle: ++row.idle; break;
            case VehicleStatus::Dispatching: ++row.dispatching; break;
            case VehicleStatus::Serving: ++row.serving; break;
            }
        }
        row.mean_wait_s = row.boards > 0 ? tick_wait_s_sum_ / row.boards : 0.0;
        tick_wait_s_sum_ = 0.0;
        row.distance_km = tick_distance_;
        row.earnings = tick_earnings_;
        row.fuel_cost = tick_fuel_;
        cum_served_ += row.boards;
        row.cum_requests = ingested_;
        row.cum_served = cum_served_;
        row.cum_completed = completed_;
        row.cum_reject_radius = terminal_radius_;
        row.cum_reject_customer = terminal_customer_;
        row.cum_reject_degenerate = terminal_degenerate_;
        row.cum_expired = terminal_expired_;
        row.accept_rate =
            static_cast<double>(cum_served_) / std::max<long>(ingested_, 1);
    }

    // Halt on corruption instead of logging garbage.
    void check_invariants(const TickRow& row) {
        const long accounted = waiting_ + matched_ + onboard_count_ + completed_ +
                               terminal_radius_ + terminal_customer_ +
                               terminal_expired_ + terminal_degenerate_;
        if (accounted != ingested_)
            throw SimulationError(
                "request conservation broken at tick " + std::to_string(tick_) +
                ": accounted " + std::to_string(accounted) + " of " +
                std::to_string(ingested_) + " (waiting " + std::to_string(waiting_) +
                ", matched " + std::to_string(matched_) + ", onboard " +
                std::to_string(onboard_count_) + ", completed " +
                std::to_string(completed_) + ")");
        for (const VehicleState& v : fleet_) {
            const VehicleTypeProfile& t = type_of(v);
            if (v.onboard > t.max_capacity || v.onboard < 0)
                throw SimulationError("vehicle " + std::to_string(v.id) +
                                      " onboard load " + std::to_string(v.onboard) +
                                      " breaks capacity " +
                                      std::to_string(t.max_capacity) + " at tick " +
                                      std::to_string(tick_));
            if (v.committed_passengers < v.onboard)
                throw SimulationError("vehicle " + std::to_string(v.id) +
                                      " committed < onboard at tick " +
                                      std::to_string(tick_));
        }
        (void)row;
    }

    RideRequest& request_by_id(std::int64_t id) {
        const auto it = id_index_.find(id);
        if (it == id_index_.end())
            throw SimulationError("unknown request id " + std::to_string(id));
        return requests_[it->second];
    }

    SimConfig cfg_;
    EngineOptions opt_;
    ZoneGrid grid_;
    DemandPredictor predictor_;
    std::unique_ptr<QFunction> policy_;
    std::vector<VehicleState> fleet_;
    std::vector<RideRequest> requests_;
    std::size_t arrival_cursor_ = 0;
    std::deque<std::size_t> requeue_next_;
    std::vector<std::size_t> pending_injections_;
    std::unordered_set<std::size_t> injected_indices_;
    DemandForecast demand_fc_;
    SupplyForecast supply_fc_;
    HotspotList hotspots_;
    bool hotspots_valid_ = false;
    MetricsLog log_;
    std::vector<Quote> tick_quotes_;
    std::unordered_map<std::int64_t, std::size_t> id_index_;
    long tick_ = 0;

    long ingested_ = 0;
    long waiting_ = 0;
    long matched_ = 0;
    long onboard_count_ = 0;
    long completed_ = 0;
    long cum_served_ = 0;
    long terminal_radius_ = 0;
    long terminal_customer_ = 0;
    long terminal_expired_ = 0;
    long terminal_degenerate_ = 0;

    double tick_distance_ = 0.0;
    double tick_earnings_ = 0.0;
    double tick_fuel_ = 0.0;
    double tick_wait_s_sum_ = 0.0;
};

} // namespace ridepool
