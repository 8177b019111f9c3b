#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <iomanip>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ridepool/common.hpp"
#include "ridepool/forecast.hpp"
#include "ridepool/grid.hpp"
#include "ridepool/qnet.hpp"

namespace ridepool {

// A relocation by (dx, dy) cells, each axis within +/-7; (0,0) stays put.
struct DispatchAction {
    int dx = 0;
    int dy = 0;

    static DispatchAction from_index(int index) {
        if (index < 0 || index >= kActionCount)
            throw DomainError("action index out of range: " + std::to_string(index));
        return {index % kActionDim - kActionReach, index / kActionDim - kActionReach};
    }
    int index() const {
        return (dy + kActionReach) * kActionDim + (dx + kActionReach);
    }
};

// Crop the four feature planes around the vehicle: plane 0 sums the demand
// forecast over the next 30 steps, planes 1-3 hold supply at +0/+15/+30.
inline DispatchState encode_state(const DemandForecast& demand,
                                  const SupplyForecast& supply, Zone vehicle_zone,
                                  const ZoneGrid& grid, int crop_radius) {
    if (demand.horizon_steps < 30 || supply.horizon_steps < 30)
        throw DomainError("forecast horizon shorter than the 30-step state window");
    if (demand.zones != grid.zone_count() || supply.zones != grid.zone_count())
        throw DomainError("forecast zone count does not match grid");

    DispatchState s;
    s.crop_radius = crop_radius;
    s.width = 2 * crop_radius + 1;
    s.vehicle_zone = vehicle_zone;
    s.planes.assign(static_cast<std::size_t>(4) * s.width * s.width, 0.0);

    const int vr = grid.row_of(vehicle_zone);
    const int vc = grid.col_of(vehicle_zone);
    const int supply_offsets[3] = {0, 15, 30};
    for (int y = 0; y < s.width; ++y) {
        const int row = vr + y - crop_radius;
        if (row < 0 || row >= grid.rows())
            continue;
        for (int x = 0; x < s.width; ++x) {
            const int col = vc + x - crop_radius;
            if (col < 0 || col >= grid.cols())
                continue;
            const Zone z = grid.zone_at(row, col);
            double d = 0.0;
            for (int k = 1; k <= 30; ++k)
                d += demand.at(k, z);
            s.at(0, y, x) = d;
            for (int p = 0; p < 3; ++p)
                s.at(1 + p, y, x) = supply.at(supply_offsets[p], z);
        }
    }
    return s;
}

// Clamp the move to the map; edge vehicles lose the out-of-range part.
inline Zone action_to_zone(Zone vehicle_zone, DispatchAction a, const ZoneGrid& grid) {
    const long row = grid.row_of(vehicle_zone) + a.dy;
    const long col = grid.col_of(vehicle_zone) + a.dx;
    return grid.clamp_cell(row, col);
}

// Epsilon-greedy: argmax with probability 1-eps (ties to the lowest index),
// uniform otherwise.
inline int select_action(std::span<const double> q, double epsilon,
                         std::mt19937_64& rng) {
    if (epsilon < 0.0 || epsilon > 1.0)
        throw DomainError("epsilon must lie in [0, 1]");
    if (epsilon > 0.0) {
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        if (coin(rng) < epsilon) {
            std::uniform_int_distribution<int> pick(0, static_cast<int>(q.size()) - 1);
            return pick(rng);
        }
    }
    int best = 0;
    for (int i = 1; i < static_cast<int>(q.size()); ++i)
        if (q[static_cast<std::size_t>(i)] > q[static_cast<std::size_t>(best)])
            best = i;
    return best;
}

// Linear interpolation from start to end over span steps, held at end after.
inline double linear_schedule(std::int64_t step, double start, double end,
                              std::int64_t span) {
    if (span <= 0)
        throw ConfigError("schedule span must be > 0");
    if (step <= 0)
        return start;
    if (step >= span)
        return end;
    const double t = static_cast<double>(step) / static_cast<double>(span);
    return start + (end - start) * t;
}

struct RewardWeights {
    double served = 10.0;     // beta1
    double dispatch = 1.0;    // beta2
    double extra_delay = 5.0; // beta3
    double profit = 12.0;     // beta4
    double activation = 8.0;  // beta5
};

struct RewardBreakdown {
    double served_count = 0.0;      // C_{t,n}
    double dispatch_min = 0.0;      // T^D
    double extra_delay_min = 0.0;   // T^E (sum of xi)
    double profit = 0.0;            // earnings minus fuel
    double activation_delta = 0.0;  // max(e_t - e_{t-1}, 0)
};

// Reward service and profit, penalize time spent and waking idle vehicles.
inline double compute_reward(const RewardBreakdown& b, const RewardWeights& w) {
    return w.served * b.served_count - w.dispatch * b.dispatch_min -
           w.extra_delay * b.extra_delay_min + w.profit * b.profit -
           w.activation * std::max(b.activation_delta, 0.0);
}

struct Transition {
    DispatchState state;
    int action = 0;
    double reward = 0.0;
    DispatchState next_state;
};

// FIFO experience memory of bounded capacity.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0)
            throw ConfigError("replay capacity must be > 0");
    }

    void push(Transition t) {
        if (buf_.size() == capacity_)
            buf_.pop_front();
        buf_.push_back(std::move(t));
    }

    std::size_t size() const { return buf_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& operator[](std::size_t i) const { return buf_[i]; }

    std::vector<const Transition*> sample(std::size_t count, std::mt19937_64& rng) const {
        std::vector<const Transition*> picks;
        if (buf_.empty())
            return picks;
        std::uniform_int_distribution<std::size_t> dist(0, buf_.size() - 1);
        picks.reserve(count);
        for (std::size_t i = 0; i < count; ++i)
            picks.push_back(&buf_[dist(rng)]);
        return picks;
    }

private:
    std::size_t capacity_;
    std::deque<Transition> buf_;
};

struct PolicyConfig {
    std::string profile = "compact";
    int crop_radius = 5;
    int hidden = 64;
    double eta = 0.9;                  // discount
    double epsilon_start = 1.0;
    double epsilon_end = 0.1;
    std::int64_t epsilon_span = 3000;  // T_n decision steps
    double sigma_start = 0.1;
    double sigma_end = 0.001;
    std::int64_t sigma_span = 10000;   // update steps
    std::size_t replay_capacity = 5000;
    std::size_t batch_size = 32;
    std::size_t learn_start = 0; // min buffered transitions before updates
    std::int64_t target_sync_every = 150;
    std::uint64_t seed = 1;

    void validate() const {
        if (!(eta > 0.0) || !(eta < 1.0))
            throw ConfigError("eta must lie in (0, 1)");
        for (double e : {epsilon_start, epsilon_end})
            if (e < 0.0 || e > 1.0)
                throw ConfigError("epsilon endpoints must lie in [0, 1]");
        if (epsilon_span <= 0 || sigma_span <= 0)
            throw ConfigError("schedule spans must be > 0");
        if (batch_size == 0 || replay_capacity < batch_size)
            throw ConfigError("replay capacity must be >= batch size >= 1");
        if (target_sync_every <= 0)
            throw ConfigError("target_sync_every must be > 0");
    }
};

struct LearnStats {
    double loss = 0.0;     // mean squared TD error before the step
    double mean_qmax = 0.0;
    double sigma = 0.0;
};

// The dispatch policy: online and target networks, replay memory, and the
// exploration/learning-rate schedules. Forward passes are const; updates and
// buffer pushes belong to the sequential end-of-tick phase.
class QFunction {
public:
    QFunction(PolicyConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        online_ = make_qnet(cfg_.profile, cfg_.crop_radius, cfg_.hidden, cfg_.seed);
        target_ = online_->clone();
        buffer_ = std::make_unique<ReplayBuffer>(cfg_.replay_capacity);
        explore_rng_.seed(mix_seed(cfg_.seed, 0xD15u));
        sample_rng_.seed(mix_seed(cfg_.seed, 0x5A3u));
    }

    const PolicyConfig& config() const { return cfg_; }
    int crop_radius() const { return online_->crop_radius(); }
    std::int64_t decision_steps() const { return decision_steps_; }
    std::int64_t update_steps() const { return update_steps_; }
    const ReplayBuffer& buffer() const { return *buffer_; }

    double epsilon() const {
        return linear_schedule(decision_steps_, cfg_.epsilon_start, cfg_.epsilon_end,
                               cfg_.epsilon_span);
    }
    double sigma() const {
        return linear_schedule(update_steps_, cfg_.sigma_start, cfg_.sigma_end,
                               cfg_.sigma_span);
    }

    std::vector<double> q_values(const DispatchState& s) const {
        return online_->forward(s);
    }

    // Pick an action; exploring draws advance the epsilon schedule.
    int decide(const DispatchState& s, bool explore) {
        const std::vector<double> q = online_->forward(s);
        if (!explore)
            return select_action(q, 0.0, explore_rng_);
        const double eps = epsilon();
        ++decision_steps_;
        return select_action(q, eps, explore_rng_);
    }

    void remember(Transition t) { buffer_->push(std::move(t)); }

    // One Bellman batch update against the frozen target network; the target
    // syncs every target_sync_every updates.
    std::optional<LearnStats> learn() {
        if (buffer_->size() < std::max(cfg_.batch_size, cfg_.learn_start))
            return std::nullopt;
        const auto picks = buffer_->sample(cfg_.batch_size, sample_rng_);
        std::vector<QSample> batch;
        batch.reserve(picks.size());
        double qmax_sum = 0.0;
        for (const Transition* t : picks) {
            const std::vector<double> next_q = target_->forward(t->next_state);
            const double max_next = *std::max_element(next_q.begin(), next_q.end());
            batch.push_back({&t->state, t->action, t->reward + cfg_.eta * max_next});
            const std::vector<double> cur_q = online_->forward(t->state);
            qmax_sum += *std::max_element(cur_q.begin(), cur_q.end());
        }
        LearnStats stats;
        stats.sigma = sigma();
        stats.loss = online_->fit(batch, stats.sigma);
        stats.mean_qmax = qmax_sum / static_cast<double>(batch.size());
        ++update_steps_;
        if (update_steps_ % cfg_.target_sync_every == 0)
            sync_target();
        return stats;
    }

    void sync_target() { target_->copy_from(*online_); }

    // Textual checkpoint; doubles are written as hex floats so reloaded
    // parameters reproduce Q outputs bit-exactly.
    void save(std::ostream& os) const {
        os << "ridepool-qnet 1\n";
        os << "profile " << cfg_.profile << "\n";
        os << "crop_radius " << cfg_.crop_radius << "\n";
        os << "hidden " << cfg_.hidden << "\n";
        os << "eta " << hexd(cfg_.eta) << "\n";
        os << "epsilon " << hexd(cfg_.epsilon_start) << " " << hexd(cfg_.epsilon_end)
           << " " << cfg_.epsilon_span << "\n";
        os << "sigma " << hexd(cfg_.sigma_start) << " " << hexd(cfg_.sigma_end) << " "
           << cfg_.sigma_span << "\n";
        os << "replay " << cfg_.replay_capacity << " " << cfg_.batch_size << " "
           << cfg_.target_sync_every << " " << cfg_.learn_start << "\n";
        os << "seed " << cfg_.seed << "\n";
        os << "steps " << decision_steps_ << " " << update_steps_ << "\n";
        os << "rng " << explore_rng_ << "\n";
        os << "sample_rng " << sample_rng_ << "\n";
        write_params(os, "params", online_->parameters());
        write_params(os, "target_params", target_->parameters());
    }

    static QFunction load(std::istream& is) {
        std::string magic;
        int version = 0;
        is >> magic >> version;
        if (magic != "ridepool-qnet" || version != 1)
            throw ConfigError("unrecognized checkpoint header '" + magic + "'");
        PolicyConfig cfg;
        std::int64_t decision_steps = 0, update_steps = 0;
        std::string rng_state, sample_rng_state;
        std::string key;
        std::vector<double> params, target_params;
        while (is >> key) {
            if (key == "profile") is >> cfg.profile;
            else if (key == "crop_radius") is >> cfg.crop_radius;
            else if (key == "hidden") is >> cfg.hidden;
            else if (key == "eta") cfg.eta = read_hexd(is);
            else if (key == "epsilon") {
                cfg.epsilon_start = read_hexd(is);
                cfg.epsilon_end = read_hexd(is);
                is >> cfg.epsilon_span;
            } else if (key == "sigma") {
                cfg.sigma_start = read_hexd(is);
                cfg.sigma_end = read_hexd(is);
                is >> cfg.sigma_span;
            } else if (key == "replay")
                is >> cfg.replay_capacity >> cfg.batch_size >> cfg.target_sync_every >>
                    cfg.learn_start;
            else if (key == "seed") is >> cfg.seed;
            else if (key == "steps") is >> decision_steps >> update_steps;
            else if (key == "rng") { is >> std::ws; std::getline(is, rng_state); }
            else if (key == "sample_rng") { is >> std::ws; std::getline(is, sample_rng_state); }
            else if (key == "params") read_params(is, params);
            else if (key == "target_params") read_params(is, target_params);
            else throw ConfigError("unknown checkpoint key '" + key + "'");
        }
        QFunction qf(cfg);
        qf.decision_steps_ = decision_steps;
        qf.update_steps_ = update_steps;
        if (!rng_state.empty()) {
            std::istringstream s(rng_state);
            s >> qf.explore_rng_;
        }
        if (!sample_rng_state.empty()) {
            std::istringstream s(sample_rng_state);
            s >> qf.sample_rng_;
        }
        if (params.size() != qf.online_->parameters().size())
            throw ConfigError("checkpoint parameter count mismatch");
        qf.online_->parameters() = params;
        qf.target_->parameters() = target_params.empty() ? params : target_params;
        return qf;
    }

private:
    static std::string hexd(double v) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%a", v);
        return buf;
    }
    static double read_hexd(std::istream& is) {
        std::string tok;
        is >> tok;
        return std::strtod(tok.c_str(), nullptr);
    }
    static void write_params(std::ostream& os, const char* name,
                             const std::vector<double>& p) {
        os << name << " " << p.size();
        for (double v : p)
            os << " " << hexd(v);
        os << "\n";
    }
    static void read_params(std::istream& is, std::vector<double>& p) {
        std::size_t n = 0;
        is >> n;
        p.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            p[i] = read_hexd(is);
    }

    PolicyConfig cfg_;
    std::unique_ptr<QNet> online_;
    std::unique_ptr<QNet> target_;
    std::unique_ptr<ReplayBuffer> buffer_;
    std::int64_t decision_steps_ = 0;
    std::int64_t update_steps_ = 0;
    std::mt19937_64 explore_rng_;
    std::mt19937_64 sample_rng_;
};

struct DispatchDecision {
    int vehicle_id = 0;
    Zone destination = 0;
    DispatchState state;
    int action = 0;
};

// Algorithm-level batch entry point: one decision per (vehicle, zone) pair,
// in the given order.
inline std::vector<DispatchDecision>
dispatch_idle(std::span<const std::pair<int, Zone>> idle_vehicles,
              const DemandForecast& demand, const SupplyForecast& supply,
              const ZoneGrid& grid, QFunction& policy, bool explore) {
    std::vector<DispatchDecision> out;
    out.reserve(idle_vehicles.size());
    for (const auto& [id, zone] : idle_vehicles) {
        DispatchDecision d;
        d.vehicle_id = id;
        d.state = encode_state(demand, supply, zone, grid, policy.crop_radius());
        d.action = policy.decide(d.state, explore);
        d.destination = action_to_zone(zone, DispatchAction::from_index(d.action), grid);
        out.push_back(std::move(d));
    }
    return out;
}

} // namespace ridepool
