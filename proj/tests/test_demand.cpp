#include <cmath>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "ridepool/demand.hpp"

using namespace ridepool;

TEST_CASE("trip ingestion parses, snaps, and sorts", "[demand]") {
    ZoneGrid g(5, 5, 1.0);
    RequestDefaults defaults;

    SECTION("a plain row parses directly") {
        std::istringstream csv(
            "id,request_time,passengers,origin_row,origin_col,dest_row,dest_col\n"
            "0,2020-01-01T00:00:00,1,0,0,4,0\n");
        const IngestResult res = ingest_trips(csv, g, defaults);
        REQUIRE(res.rejects.empty());
        REQUIRE(res.requests.size() == 1);
        const RideRequest& r = res.requests[0];
        REQUIRE(r.passengers == 1);
        REQUIRE(r.request_time_min == 0.0);
        REQUIRE(r.origin == g.zone_at(0, 0));
        REQUIRE(r.destination == g.zone_at(4, 0));
        REQUIRE_FALSE(r.snapped_to_boundary);
    }

    SECTION("zero passengers is a row-level parse error") {
        std::istringstream csv("0,5,0,0,0,4,0\n1,6,1,0,0,4,0\n");
        const IngestResult res = ingest_trips(csv, g, defaults);
        REQUIRE(res.requests.size() == 1);
        REQUIRE(res.rejects.size() == 1);
        REQUIRE(res.rejects[0].message == "passenger_count < 1");
    }

    SECTION("rows come back sorted by request time") {
        std::istringstream csv("0,5,1,0,0,4,0\n1,1,1,0,1,4,0\n2,3,1,0,2,4,0\n");
        const IngestResult res = ingest_trips(csv, g, defaults);
        REQUIRE(res.requests.size() == 3);
        REQUIRE(res.requests[0].request_time_min == 1.0);
        REQUIRE(res.requests[1].request_time_min == 3.0);
        REQUIRE(res.requests[2].request_time_min == 5.0);
    }

    SECTION("out-of-grid coordinates snap to the boundary and are flagged") {
        std::istringstream csv("0,0,1,-2,1,4,9\n");
        const IngestResult res = ingest_trips(csv, g, defaults);
        REQUIRE(res.requests.size() == 1);
        REQUIRE(res.requests[0].origin == g.zone_at(0, 1));
        REQUIRE(res.requests[0].destination == g.zone_at(4, 4));
        REQUIRE(res.requests[0].snapped_to_boundary);
    }

    SECTION("ISO timestamps rebase to the earliest midnight") {
        std::istringstream csv(
            "0,2020-01-02T01:30:00,1,0,0,4,0\n"
            "1,2020-01-01T07:00:00,2,1,1,3,3\n");
        const IngestResult res = ingest_trips(csv, g, defaults);
        REQUIRE(res.requests.size() == 2);
        REQUIRE(res.requests[0].request_time_min == Catch::Approx(7.0 * 60.0));
        REQUIRE(res.requests[1].request_time_min ==
                Catch::Approx(1440.0 + 90.0));
    }

    SECTION("optional per-request overrides land in the request") {
        std::istringstream csv("0,1,1,0,0,4,0,12.5,9.25\n");
        const IngestResult res = ingest_trips(csv, g, defaults);
        REQUIRE(res.requests.size() == 1);
        REQUIRE(res.requests[0].delay_tolerance_min == 12.5);
        REQUIRE(res.requests[0].compromise == 9.25);
    }

    SECTION("malformed rows keep a reject record with the line number") {
        std::istringstream csv("0,1,1,0,0,4,0\nnot,a,row\n2,2,1,1,1,3,3\n");
        const IngestResult res = ingest_trips(csv, g, defaults);
        REQUIRE(res.requests.size() == 2);
        REQUIRE(res.rejects.size() == 1);
        REQUIRE(res.rejects[0].line == 2);
    }
}

TEST_CASE("synthetic generation is seeded and Poisson distributed", "[demand]") {
    ZoneGrid g(3, 3, 1.0);

    SECTION("zero rates give an empty stream") {
        RateProfile p;
        p.zone_rate_per_min.assign(9, 0.0);
        SyntheticOptions opt;
        opt.duration_min = 100.0;
        REQUIRE(generate_synthetic(g, p, opt).empty());
    }

    SECTION("equal seeds produce identical streams") {
        RateProfile p;
        p.zone_rate_per_min.assign(9, 0.1);
        SyntheticOptions opt;
        opt.duration_min = 200.0;
        opt.seed = 77;
        const std::vector<RideRequest> a = generate_synthetic(g, p, opt);
        const std::vector<RideRequest> b = generate_synthetic(g, p, opt);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            REQUIRE(a[i].id == b[i].id);
            REQUIRE(a[i].origin == b[i].origin);
            REQUIRE(a[i].destination == b[i].destination);
            REQUIRE(a[i].request_time_min == b[i].request_time_min);
            REQUIRE(a[i].passengers == b[i].passengers);
        }
    }

    SECTION("the arrival count matches the Poisson mean within 3 SE") {
        RateProfile p;
        p.zone_rate_per_min.assign(9, 0.0);
        p.zone_rate_per_min[4] = 2.0;
        SyntheticOptions opt;
        opt.duration_min = 1000.0;
        opt.seed = 5;
        const std::vector<RideRequest> rs = generate_synthetic(g, p, opt);
        const double expect = 2000.0;
        const double se = std::sqrt(expect);
        REQUIRE(std::abs(static_cast<double>(rs.size()) - expect) <= 3.0 * se);
        for (const RideRequest& r : rs) {
            REQUIRE(r.origin == 4);
            REQUIRE(r.destination != 4);
        }
    }

    SECTION("negative rates are refused") {
        RateProfile p;
        p.zone_rate_per_min.assign(9, -0.1);
        SyntheticOptions opt;
        REQUIRE_THROWS_AS(generate_synthetic(g, p, opt), ConfigError);
    }
}

TEST_CASE("demand predictor averages the same time-of-day bin over days",
          "[demand]") {
    SECTION("two prior days with 4 and 6 events forecast 5.0") {
        DemandPredictor pred(4);
        for (int i = 0; i < 4; ++i)
            pred.observe(2, 10.0 + i); // day 0, bin 0
        for (int i = 0; i < 6; ++i)
            pred.observe(2, 1440.0 + 10.0 + i); // day 1, bin 0
        const DemandForecast fc = pred.predict(2.0 * 1440.0 + 5.0, 3);
        REQUIRE(fc.at(0, 2) == Catch::Approx(5.0));
        REQUIRE_FALSE(fc.cold_start);
    }

    SECTION("no history forecasts zeros with a cold-start flag") {
        DemandPredictor pred(4);
        const DemandForecast fc = pred.predict(100.0, 5);
        REQUIRE(fc.cold_start);
        for (int k = 0; k <= 5; ++k)
            for (Zone z = 0; z < 4; ++z)
                REQUIRE(fc.at(k, z) == 0.0);
    }

    SECTION("a constant rate forecasts the same value at every step") {
        DemandPredictor pred(2);
        for (long day = 0; day < 3; ++day)
            for (int bin = 0; bin < 48; ++bin)
                for (int k = 0; k < 7; ++k)
                    pred.observe(1, day * 1440.0 + bin * 30.0 + k);
        const DemandForecast fc = pred.predict(3.0 * 1440.0, 30);
        for (int k = 0; k <= 30; ++k)
            REQUIRE(fc.at(k, 1) == Catch::Approx(7.0));
    }

    SECTION("stationary synthetic demand converges within 10% by day 20") {
        ZoneGrid g(3, 3, 1.0);
        RateProfile p;
        p.zone_rate_per_min.assign(9, 2.0);
        SyntheticOptions opt;
        opt.duration_min = 20.0 * 1440.0;
        opt.seed = 9;
        DemandPredictor pred(9);
        for (const RideRequest& r : generate_synthetic(g, p, opt))
            pred.observe(r.origin, r.request_time_min);
        const DemandForecast fc = pred.predict(20.0 * 1440.0, 0);
        const double truth = 2.0 * 30.0; // expected per 30-minute bin
        for (Zone z = 0; z < 9; ++z)
            REQUIRE(std::abs(fc.at(0, z) - truth) / truth < 0.10);
    }
}

TEST_CASE("supply projection places vehicles at drop-off completion",
          "[demand]") {
    ZoneGrid g(1, 10, 1.0);

    SECTION("an idle vehicle counts in its zone at every step") {
        VehicleState v;
        v.entered = true;
        v.zone = g.zone_at(0, 3);
        std::vector<VehicleState> fleet{v};
        const SupplyForecast fc = project_supply(fleet, g, 0.0, 2, 20.0);
        for (int k = 0; k <= 2; ++k)
            REQUIRE(fc.at(k, v.zone) == 1.0);
    }

    SECTION("a busy vehicle appears at its final stop after the rounded ETA") {
        VehicleState v;
        v.entered = true;
        v.zone = g.zone_at(0, 0);
        // one dropoff 3 km out at 60 km/h -> 3 min
        v.route = Route::build(g, v.zone,
                               {{g.zone_at(0, 3), StopKind::Dropoff, 1, 1}}, 1);
        std::vector<VehicleState> fleet{v};
        const SupplyForecast fc = project_supply(fleet, g, 0.0, 5, 60.0);
        const Zone m = g.zone_at(0, 3);
        for (int k = 0; k <= 2; ++k)
            REQUIRE(fc.at(k, m) == 0.0);
        for (int k = 3; k <= 5; ++k)
            REQUIRE(fc.at(k, m) == 1.0);
    }

    SECTION("an empty fleet projects all zeros") {
        std::vector<VehicleState> fleet;
        const SupplyForecast fc = project_supply(fleet, g, 0.0, 4, 20.0);
        for (int k = 0; k <= 4; ++k)
            REQUIRE(fc.step_total(k) == 0.0);
    }

    SECTION("vehicles are conserved across zones at every step") {
        std::mt19937_64 rng(3);
        std::vector<VehicleState> fleet;
        for (int i = 0; i < 12; ++i) {
            VehicleState v;
            v.id = i;
            v.entered = i % 5 != 4;
            v.exited = i % 7 == 6;
            v.zone = static_cast<Zone>(rng() % 10);
            if (i % 3 == 0 && v.entered && !v.exited) {
                v.route = Route::build(
                    g, v.zone, {{static_cast<Zone>(rng() % 10), StopKind::Dropoff, i, 1}},
                    1);
                v.onboard = 1;
            }
            fleet.push_back(v);
        }
        int alive = 0;
        for (const VehicleState& v : fleet)
            alive += (v.entered && !v.exited) ? 1 : 0;
        // fast fleet so every route completes inside the horizon
        const SupplyForecast fc = project_supply(fleet, g, 0.0, 6, 200.0);
        for (int k = 0; k <= 6; ++k)
            REQUIRE(fc.step_total(k) <= alive);
        REQUIRE(fc.step_total(6) == alive);
    }
}

TEST_CASE("forecast shape and value invariants", "[demand]") {
    DemandPredictor pred(6);
    pred.observe(0, 5.0);
    const DemandForecast fc = pred.predict(10.0, 30);
    REQUIRE(fc.horizon_steps == 30);
    REQUIRE(fc.zones == 6);
    for (int k = 0; k <= 30; ++k)
        for (Zone z = 0; z < 6; ++z) {
            REQUIRE(std::isfinite(fc.at(k, z)));
            REQUIRE(fc.at(k, z) >= 0.0);
        }
}
