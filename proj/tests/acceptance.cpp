// Acceptance suite: one pass/fail line per criterion. Usage:
//   acceptance [N ...]    run the given criteria (default: all)

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "ridepool/config.hpp"
#include "ridepool/engine.hpp"

using namespace ridepool;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------- criterion 1
// Insertion oracle equivalence: local-delta implementation vs the full
// re-sum two-stage oracle, exact, over 1000 randomized instances.
Outcome criterion_insertion_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240601);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const oracles::RandomInstance inst = oracles::random_instance(rng);
        const Route base =
            Route::build(inst.grid, inst.anchor, inst.base_stops, inst.onboard);
        const auto got =
            insert_request(inst.grid, inst.anchor, base, inst.request, inst.cmax);
        const auto want =
            oracles::two_stage_insert(inst.grid, inst.anchor, inst.base_stops,
                                      inst.onboard, inst.request, inst.cmax);
        if (got.has_value() != want.has_value())
            return {false, "feasibility mismatch at trial " + std::to_string(trial)};
        if (!got)
            continue;
        ++checked;
        if (got->total_cost_km != want->cost)
            return {false, "cost mismatch at trial " + std::to_string(trial) + ": " +
                               std::to_string(got->total_cost_km) + " vs " +
                               std::to_string(want->cost)};
        if (got->pickup_index != want->pickup_index ||
            got->dropoff_index != want->dropoff_index)
            return {false, "position mismatch at trial " + std::to_string(trial)};
    }
    const double secs = seconds_since(t0);
    if (secs >= 30.0)
        return {false, "took " + std::to_string(secs) + " s (limit 30)"};
    return {true, std::to_string(checked) + "/1000 feasible instances exact, " +
                      std::to_string(secs) + " s"};
}

// ---------------------------------------------------------------- criterion 2
// Capacity/feasibility: 10,000 random route mutations, zero violations.
Outcome criterion_capacity_suite() {
    std::mt19937_64 rng(20240602);
    long mutations = 0, violations = 0;
    while (mutations < 10000) {
        const int rows = 2 + static_cast<int>(rng() % 9);
        const int cols = 2 + static_cast<int>(rng() % 9);
        ZoneGrid grid(rows, cols, 0.5);
        std::uniform_int_distribution<Zone> pick(0, grid.zone_count() - 1);
        const int cmax = 2 + static_cast<int>(rng() % 5);
        Zone anchor = pick(rng);
        Route route;
        int onboard = 0;
        std::int64_t next_id = 1;
        for (int step = 0; step < 40 && mutations < 10000; ++step) {
            const int op = static_cast<int>(rng() % 3);
            if (op < 2) { // insert a request
                RideRequest r;
                r.id = next_id++;
                r.origin = pick(rng);
                r.destination = pick(rng);
                r.passengers = 1 + static_cast<int>(rng() % 3);
                const auto ins = insert_request(grid, anchor, route, r, cmax);
                if (!ins)
                    continue;
                route = ins->route;
            } else if (!route.empty()) { // vehicle reaches the next stop
                const Stop s = route.front();
                anchor = s.zone;
                route.pop_front(grid, anchor);
                onboard = route.onboard_at_start();
            } else {
                continue;
            }
            ++mutations;
            // committed routes must stay within Eq.-style bounds and order
            try {
                const std::vector<int> loads =
                    capacity_prefix(route.stops(), route.onboard_at_start());
                for (int load : loads)
                    if (load > cmax || load < 0)
                        ++violations;
                if (route.onboard_at_start() > cmax)
                    ++violations;
            } catch (const DomainError&) {
                ++violations; // pickup/dropoff ordering broke
            }
            (void)onboard;
        }
    }
    if (violations != 0)
        return {false, std::to_string(violations) + " violations in " +
                           std::to_string(mutations) + " mutations"};
    return {true, "0 violations in " + std::to_string(mutations) + " mutations"};
}

// ---------------------------------------------------------------- criterion 3
// Pricing fidelity: worked unit vectors to 1e-9 and the experimental
// defaults wired into a default-constructed config.
Outcome criterion_pricing_fidelity() {
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
    std::vector<std::string> failures;

    VehicleTypeProfile t;
    t.type_rank = 2;
    t.max_capacity = 4;
    t.mileage_km_per_l = 20.0;
    t.price_per_km = 2.0;
    t.price_per_wait_min = 0.5;
    t.base_price = 5.0;
    if (!close(initial_price(t, 10.0, 2, 4.0, 3.0), 13.75))
        failures.push_back("initial_price != 13.75");

    std::vector<double> values{4.0, 3.0, 2.0, 1.0};
    const HotspotList h = build_hotspots(values, 0.25);
    if (!close(propose_price(13.75, 0, h, 5.0), 13.75))
        failures.push_back("hotspot member price changed");
    if (!close(propose_price(13.75, 3, h, 5.0), 151.25))
        failures.push_back("rank-4 surcharge != 151.25");
    HotspotList h1 = h;
    h1.member.assign(4, 0);
    if (!close(propose_price(13.75, 0, h1, 5.0), 48.125))
        failures.push_back("rank-1 surcharge != 48.125");

    if (!close(customer_utility(1, 5.0, 2, 15.0, 1.0, 4.0), 23.2))
        failures.push_back("utility != 23.2");
    if (!customer_decide(23.2, 13.75, 0.0))
        failures.push_back("23.2 vs 13.75 should accept");
    if (customer_decide(10.0, 20.0, 5.0))
        failures.push_back("10 vs 15 should reject");
    if (customer_decide(15.0, 20.0, 5.0))
        failures.push_back("boundary should reject (strict)");

    const SimConfig cfg;
    if (cfg.betas.served != 10.0 || cfg.betas.dispatch != 1.0 ||
        cfg.betas.extra_delay != 5.0 || cfg.betas.profit != 12.0 ||
        cfg.betas.activation != 8.0)
        failures.push_back("beta defaults not (10,1,5,12,8)");
    if (cfg.lambda != 0.10)
        failures.push_back("lambda default not 0.10");
    if (cfg.request_defaults.pooling_weight != 15.0 ||
        cfg.request_defaults.delay_weight != 1.0 ||
        cfg.request_defaults.type_weight != 4.0)
        failures.push_back("omega4..6 defaults not (15,1,4)");

    const RewardWeights w;
    RewardBreakdown b;
    b.served_count = 2;
    b.dispatch_min = 3;
    b.extra_delay_min = 1;
    b.profit = 13.75;
    b.activation_delta = 1;
    if (!close(compute_reward(b, w), 169.0))
        failures.push_back("reward(2,3,1,13.75,1) != 169");

    if (!failures.empty()) {
        std::string msg;
        for (const std::string& f : failures)
            msg += f + "; ";
        return {false, msg};
    }
    return {true, "all worked values exact to 1e-9, defaults wired"};
}

// ---------------------------------------------------------------- criterion 4
// Opposite-direction exclusion: the opposing vehicle quotes strictly more
// and the customer takes only the aligned vehicle.
Outcome criterion_opposite_direction() {
    ZoneGrid grid(1, 12, 1.0);
    const Zone here = grid.zone_at(0, 5);
    const Zone east = grid.zone_at(0, 9);
    const Zone west = grid.zone_at(0, 1);

    VehicleTypeProfile type;
    type.type_rank = 1;
    type.max_capacity = 4;
    type.mileage_km_per_l = 14.0;
    type.price_per_km = 1.0;
    type.price_per_wait_min = 0.3;
    type.base_price = 3.0;

    // vehicle 1 committed westbound, vehicle 2 committed eastbound
    Route west_route = Route::build(grid, here, {{west, StopKind::Dropoff, 1, 1}}, 1);
    Route east_route = Route::build(grid, here, {{east, StopKind::Dropoff, 2, 1}}, 1);

    RideRequest r;
    r.id = 3;
    r.origin = here;
    r.destination = east;
    r.passengers = 1;
    r.pooling_weight = 0.0;
    r.delay_weight = 0.0;
    r.type_weight = 0.0;
    r.compromise = 5.0;

    // every zone is a hotspot so only the insertion cost separates the quotes
    std::vector<double> flat(grid.zone_count(), 0.0);
    const HotspotList hotspots = build_hotspots(flat, 1.0);

    auto quote_from = [&](const Route& route) {
        const auto ins = insert_request(grid, here, route, r, type.max_capacity);
        if (!ins)
            throw DomainError("fixture insertion failed");
        const int sharing = sharing_count(ins->route, r.id);
        const double wait =
            0.0 + grid.path_weight_km(std::vector<Zone>{here, ins->route.stops()[0].zone}) /
                      20.0 * 60.0;
        const double p_init =
            initial_price(type, ins->marginal_cost_km, sharing, wait, 1.0);
        return propose_price(p_init, r.destination, hotspots, type.base_price);
    };

    const double opposing = quote_from(west_route);
    const double aligned = quote_from(east_route);
    if (!(opposing > aligned))
        return {false, "opposing quote " + std::to_string(opposing) +
                           " not above aligned " + std::to_string(aligned)};
    if (!(aligned < r.compromise && r.compromise < opposing))
        return {false, "delta=5 does not sit between the quotes (" +
                           std::to_string(aligned) + ", " + std::to_string(opposing) +
                           ")"};

    const double utility = customer_utility(2, 1.0, type.type_rank, r.pooling_weight,
                                            r.delay_weight, r.type_weight);
    const bool accept_opposing = customer_decide(utility, opposing, r.compromise);
    const bool accept_aligned = customer_decide(utility, aligned, r.compromise);
    if (accept_opposing || !accept_aligned)
        return {false, "decision pattern wrong: opposing=" +
                           std::to_string(accept_opposing) +
                           " aligned=" + std::to_string(accept_aligned)};
    char buf[128];
    std::snprintf(buf, sizeof buf, "quotes %.4f > %.4f, customer takes only the aligned vehicle",
                  opposing, aligned);
    return {true, buf};
}

// ---------------------------------------------------------------- criterion 5
constexpr double kHotspotRate = 0.5; // requests/min at the single hotspot

SimConfig hotspot_training_config() {
    SimConfig cfg;
    cfg.grid_rows = 5;
    cfg.grid_cols = 5;
    cfg.cell_km = 0.8;
    cfg.speed_kmh = 20.0;
    cfg.steps = 80000;
    cfg.fleet_size = 8;
    cfg.entry_window_min = 0.0;
    cfg.duty_limit_min = 1e7; // nobody exits during training
    cfg.base_rate = 0.0;
    cfg.demand_hotspots = {{2, 2, kHotspotRate}};
    // two-cell pickup radius: fares only reach vehicles sitting near demand
    cfg.matching_radius_km = 1.6;
    cfg.use_dispatch = true;
    cfg.use_pricing = false;
    cfg.use_ridesharing = true;
    cfg.use_darm = true;
    cfg.dispatch_warmup_min = 20.0;
    cfg.request_defaults.delay_tolerance_min = 15.0;
    cfg.policy.profile = "compact";
    cfg.policy.crop_radius = 5;
    cfg.policy.hidden = 64;
    // tighter discount and learning rates than the full-scale defaults keep
    // the desk-sized value function from overshooting; the reward weights are
    // scaled down uniformly, preserving their ratios
    cfg.policy.eta = 0.8;
    cfg.policy.sigma_start = 0.01;
    cfg.policy.sigma_end = 0.0005;
    cfg.policy.target_sync_every = 300;
    cfg.policy.epsilon_span = 3000;
    cfg.policy.sigma_span = 10000;
    cfg.betas = {0.10, 0.01, 0.05, 0.12, 0.08};
    cfg.updates_per_tick = 2;
    cfg.seed = 11;
    return cfg;
}

// Demand/supply planes an idle vehicle would see on the trained scenario.
std::pair<DemandForecast, SupplyForecast> hotspot_forecasts(const ZoneGrid& grid,
                                                            Zone vehicle_zone) {
    DemandForecast demand(Engine::kStateHorizon, grid.zone_count());
    const Zone hot = grid.zone_at(2, 2);
    for (int k = 0; k <= Engine::kStateHorizon; ++k)
        demand.at(k, hot) = kHotspotRate * 30.0; // count per 30-minute bin
    SupplyForecast supply(Engine::kStateHorizon, grid.zone_count());
    for (int k = 0; k <= Engine::kStateHorizon; ++k)
        supply.at(k, vehicle_zone) += 1.0;
    return {std::move(demand), std::move(supply)};
}

Outcome criterion_rl_sanity() {
    const auto t0 = Clock::now();
    SimConfig cfg = hotspot_training_config();

    std::vector<double> qmax_curve;
    EngineOptions opt;
    opt.training = true;
    opt.explore = true;
    opt.on_learn = [&](long, const LearnStats& st) {
        qmax_curve.push_back(st.mean_qmax);
    };
    Engine eng(cfg, opt);
    eng.run();
    const double train_secs = seconds_since(t0);
    if (train_secs > 20.0 * 60.0)
        return {false, "training took " + std::to_string(train_secs) + " s (> 20 min)"};

    // greedy vs uniform-random dispatch distance to the hotspot
    const ZoneGrid& grid = eng.grid();
    const Zone hot = grid.zone_at(2, 2);
    std::mt19937_64 episode_rng(555);
    std::uniform_int_distribution<Zone> zone_pick(0, grid.zone_count() - 1);
    std::uniform_int_distribution<int> action_pick(0, kActionCount - 1);
    double greedy_sum = 0.0, random_sum = 0.0;
    for (int ep = 0; ep < 100; ++ep) {
        const Zone start = zone_pick(episode_rng);
        const auto [demand, supply] = hotspot_forecasts(grid, start);
        const DispatchState s =
            encode_state(demand, supply, start, grid, eng.policy().crop_radius());
        const int a = eng.policy().decide(s, false);
        const Zone greedy_target =
            action_to_zone(start, DispatchAction::from_index(a), grid);
        greedy_sum += grid.distance_km(greedy_target, hot);
        const Zone random_target = action_to_zone(
            start, DispatchAction::from_index(action_pick(episode_rng)), grid);
        random_sum += grid.distance_km(random_target, hot);
    }
    const double greedy_mean = greedy_sum / 100.0;
    const double random_mean = random_sum / 100.0;
    if (!(greedy_mean <= 0.60 * random_mean))
        return {false, "greedy mean distance " + std::to_string(greedy_mean) +
                           " km not <= 60% of random " + std::to_string(random_mean) +
                           " km"};

    // q-max trailing windows: non-decreasing after the warmup quarter
    if (qmax_curve.size() < 200)
        return {false, "too few updates recorded (" +
                           std::to_string(qmax_curve.size()) + ")"};
    const std::size_t warmup = qmax_curve.size() / 4;
    const std::size_t span = qmax_curve.size() - warmup;
    const int windows = 4;
    std::vector<double> means;
    for (int wdx = 0; wdx < windows; ++wdx) {
        const std::size_t a = warmup + span * wdx / windows;
        const std::size_t b = warmup + span * (wdx + 1) / windows;
        double sum = 0.0;
        for (std::size_t i = a; i < b; ++i)
            sum += qmax_curve[i];
        means.push_back(sum / static_cast<double>(b - a));
    }
    for (int wdx = 0; wdx + 1 < windows; ++wdx)
        if (means[static_cast<std::size_t>(wdx + 1)] <
            means[static_cast<std::size_t>(wdx)] - 1e-9)
            return {false, "q-max window " + std::to_string(wdx + 1) +
                               " decreased: " + std::to_string(means[wdx]) + " -> " +
                               std::to_string(means[wdx + 1])};

    char buf[224];
    std::snprintf(buf, sizeof buf,
                  "greedy %.2f km vs random %.2f km (%.0f%%), q-max windows "
                  "%.1f/%.1f/%.1f/%.1f, %zu updates, %.0f s train",
                  greedy_mean, random_mean, 100.0 * greedy_mean / random_mean,
                  means[0], means[1], means[2], means[3], qmax_curve.size(),
                  train_secs);
    return {true, buf};
}

// ---------------------------------------------------------------- criterion 6
SimConfig compare_scenario() {
    SimConfig cfg;
    cfg.grid_rows = 20;
    cfg.grid_cols = 20;
    cfg.cell_km = 0.8;
    cfg.speed_kmh = 20.0;
    cfg.steps = 1440;
    cfg.fleet_size = 200;
    cfg.entry_window_min = 240.0;
    cfg.base_rate = 0.012;
    cfg.demand_hotspots = {{4, 4, 0.4}, {15, 5, 0.4}, {10, 14, 0.4}, {3, 16, 0.3}};
    cfg.tod_profile = "peaks";
    cfg.request_defaults.compromise = 5.0;
    cfg.request_defaults.delay_tolerance_min = 30.0;
    // small base prices keep the rank surcharge in a range where customer
    // decisions discriminate between destinations
    cfg.types = {{1, 4, 14.0, 2.0, 0.3, 0.02},
                 {2, 4, 12.0, 2.3, 0.4, 0.03},
                 {3, 6, 10.0, 2.7, 0.5, 0.04},
                 {4, 6, 8.0, 3.2, 0.6, 0.05}};
    cfg.policy.crop_radius = 5;
    cfg.policy.hidden = 64;
    cfg.policy.epsilon_span = 3000;
    cfg.seed = 1000;
    return cfg;
}

struct RowStats {
    double accept = 0, served = 0, occupied = 0, profit_h = 0;
};

Outcome criterion_baseline_direction() {
    // short training pass on the same scenario for the dispatch rows
    SimConfig train_cfg = compare_scenario();
    train_cfg.steps = 1000;
    EngineOptions topt;
    topt.training = true;
    topt.explore = true;
    Engine trainer(train_cfg, topt);
    trainer.run();
    std::ostringstream ckpt;
    trainer.policy().save(ckpt);

    const auto t0 = Clock::now();
    struct RowDef {
        const char* label;
        bool d, rs, ps, darm;
    };
    const std::vector<RowDef> rows = {
        {"!D,!RS,!PS,GM", false, false, false, false},
        {"!D,RS,!PS,GM", false, true, false, false},
        {"D,!RS,!PS,GM", true, false, false, false},
        {"D,RS,!PS,GM", true, true, false, false},
        {"D,RS,PS,GM", true, true, true, false},
        {"D,RS,PS,DARM", true, true, true, true},
    };
    const int seeds = 5;

    std::vector<RowStats> stats(rows.size());
    std::vector<std::pair<int, int>> jobs; // (row, seed)
    for (int rdx = 0; rdx < static_cast<int>(rows.size()); ++rdx)
        for (int s = 0; s < seeds; ++s)
            jobs.emplace_back(rdx, s);

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    std::string error;
    auto worker = [&]() {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size())
                return;
            const auto [rdx, s] = jobs[j];
            try {
                SimConfig cfg = compare_scenario();
                cfg.use_dispatch = rows[static_cast<std::size_t>(rdx)].d;
                cfg.use_ridesharing = rows[static_cast<std::size_t>(rdx)].rs;
                cfg.use_pricing = rows[static_cast<std::size_t>(rdx)].ps;
                cfg.use_darm = rows[static_cast<std::size_t>(rdx)].darm;
                cfg.seed += static_cast<std::uint64_t>(s);
                Engine eng(cfg);
                if (cfg.use_dispatch) {
                    std::istringstream in(ckpt.str());
                    eng.set_policy(QFunction::load(in));
                }
                const MetricsLog log = eng.run();
                const SummaryReport rep = summarize(log);
                std::lock_guard<std::mutex> lock(mu);
                RowStats& r = stats[static_cast<std::size_t>(rdx)];
                r.accept += rep.accept_rate / seeds;
                r.served += static_cast<double>(rep.served) / seeds;
                r.occupied += rep.mean_occupied_vehicles / seeds;
                r.profit_h += rep.mean_profit_per_hour / seeds;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                error = e.what();
                return;
            }
        }
    };
    const unsigned nthreads =
        std::max(2u, std::min(8u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < nthreads; ++i)
        pool.emplace_back(worker);
    for (std::thread& th : pool)
        th.join();
    if (!error.empty())
        return {false, "run failed: " + error};
    const double secs = seconds_since(t0);

    const RowStats& base = stats[0];        // !D,!RS,!PS,GM
    const RowStats& no_rs_d = stats[2];     // D,!RS,!PS,GM
    const RowStats& deeppool = stats[3];    // D,RS,!PS,GM
    const RowStats& full = stats[5];        // D,RS,PS,DARM

    std::ostringstream detail;
    detail.precision(4);
    detail << "accept: full " << full.accept << " vs DP " << deeppool.accept
           << " vs base " << base.accept << "; occupied: full " << full.occupied
           << " vs DP " << deeppool.occupied << "; served: full " << full.served
           << " vs DP " << deeppool.served << "; profit/h: full " << full.profit_h
           << " vs !RS " << no_rs_d.profit_h << "/" << base.profit_h << "; "
           << static_cast<int>(secs) << " s";

    if (secs >= 600.0)
        return {false, "compare took " + std::to_string(secs) + " s (limit 600): " +
                           detail.str()};
    if (!(full.accept > deeppool.accept))
        return {false, "(a) accept rate not above (D,RS,!PS,GM): " + detail.str()};
    if (!(full.accept > base.accept))
        return {false, "(a) accept rate not above (!D,!RS,!PS,GM): " + detail.str()};
    if (!(full.occupied < deeppool.occupied && full.served >= deeppool.served))
        return {false, "(b) occupancy/served direction failed: " + detail.str()};
    if (!(full.profit_h > no_rs_d.profit_h && full.profit_h > base.profit_h))
        return {false, "(c) profit/hour not above the no-ride-sharing rows: " +
                           detail.str()};
    return {true, detail.str()};
}

// ---------------------------------------------------------------- criterion 7
Outcome criterion_determinism() {
    SimConfig cfg = compare_scenario();
    cfg.steps = 300;
    cfg.fleet_size = 60;
    cfg.seed = 31337;
    auto render = [&]() {
        Engine eng(cfg);
        const MetricsLog log = eng.run();
        std::ostringstream os;
        log.write_ticks_csv(os);
        os << "--\n";
        log.write_vehicles_csv(os);
        return os.str();
    };
    const std::string a = render();
    const std::string b = render();
    if (a != b)
        return {false, "logs differ between identical runs"};
    return {true, std::to_string(a.size()) + " bytes, byte-identical"};
}

// ---------------------------------------------------------------- criterion 8
Outcome criterion_scan_bound() {
    std::mt19937_64 rng(20240608);
    long insertions = 0;
    long worst_lhs = 0, worst_rhs = 0;
    for (int round = 0; round < 400; ++round) {
        ZoneGrid grid(8, 8, 0.5);
        std::uniform_int_distribution<Zone> pick(0, grid.zone_count() - 1);
        const Zone anchor = pick(rng);
        Route route;
        const int cmax = 12; // roomy: let routes grow long
        for (int i = 0; i < 8; ++i) {
            RideRequest r;
            r.id = i + 1;
            r.origin = pick(rng);
            r.destination = pick(rng);
            r.passengers = 1;
            const int n = static_cast<int>(route.size());
            const auto ins = insert_request(grid, anchor, route, r, cmax);
            if (!ins)
                continue;
            ++insertions;
            const int bound = (n + 1) * (n + 1);
            if (ins->positions_evaluated > bound)
                return {false, "insertion scanned " +
                                   std::to_string(ins->positions_evaluated) +
                                   " positions, bound " + std::to_string(bound)};
            if (ins->positions_evaluated > worst_lhs) {
                worst_lhs = ins->positions_evaluated;
                worst_rhs = bound;
            }
            route = ins->route;
        }
    }
    return {true, std::to_string(insertions) + " insertions, worst " +
                      std::to_string(worst_lhs) + " of bound " +
                      std::to_string(worst_rhs)};
}

} // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int number;
        const char* name;
        Outcome (*fn)();
    };
    const std::vector<Criterion> table = {
        {1, "insertion oracle equivalence", criterion_insertion_oracle},
        {2, "capacity/feasibility suite", criterion_capacity_suite},
        {3, "pricing fidelity", criterion_pricing_fidelity},
        {4, "opposite-direction exclusion", criterion_opposite_direction},
        {5, "RL sanity on the 5x5 hotspot", criterion_rl_sanity},
        {6, "baseline direction", criterion_baseline_direction},
        {7, "determinism", criterion_determinism},
        {8, "insertion scan-count bound", criterion_scan_bound},
    };

    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i)
        wanted.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const Criterion& c : table) {
        if (!wanted.empty() &&
            std::find(wanted.begin(), wanted.end(), c.number) == wanted.end())
            continue;
        Outcome out;
        try {
            out = c.fn();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] criterion %d (%s): %s\n", out.pass ? "PASS" : "FAIL",
                    c.number, c.name, out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass)
            ++failures;
    }
    return failures == 0 ? 0 : 1;
}
