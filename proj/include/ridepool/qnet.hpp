#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ridepool/common.hpp"
#include "ridepool/grid.hpp"

namespace ridepool {

// Network input: four square feature planes cropped around the acting
// vehicle (zero-padded at the map edge). Plane 0 is predicted demand, planes
// 1-3 are projected supply at +0, +15 and +30 minutes.
struct DispatchState {
    int crop_radius = 5;
    int width = 11; // 2*crop_radius + 1
    Zone vehicle_zone = 0;
    std::vector<double> planes; // 4 * width * width, plane-major

    double at(int plane, int y, int x) const {
        return planes[static_cast<std::size_t>((plane * width + y) * width + x)];
    }
    double& at(int plane, int y, int x) {
        return planes[static_cast<std::size_t>((plane * width + y) * width + x)];
    }
};

constexpr int kActionReach = 7;      // max cells moved per axis
constexpr int kActionDim = 2 * kActionReach + 1;
constexpr int kActionCount = kActionDim * kActionDim;

// Demand forecasts arrive summed over a 30-step horizon; scale that plane
// back to a per-step magnitude before it meets the weights.
constexpr double kDemandPlaneScale = 1.0 / 30.0;

struct QSample {
    const DispatchState* state = nullptr;
    int action = 0;
    double target = 0.0;
};

// Action-value function approximator. Parameters live in one flat vector so
// target sync, cloning, and checkpointing stay generic. fit() performs one
// SGD step on the mean of 1/2*(target - Q(s,a))^2 over the batch and returns
// the mean squared TD error before the step.
class QNet {
public:
    virtual ~QNet() = default;

    virtual std::string profile_id() const = 0;
    virtual int crop_radius() const = 0;
    virtual int action_count() const { return kActionCount; }

    virtual std::vector<double> forward(const DispatchState& s) const = 0;
    virtual double fit(std::span<const QSample> batch, double learning_rate) = 0;

    virtual std::unique_ptr<QNet> clone() const = 0;

    const std::vector<double>& parameters() const { return params_; }
    std::vector<double>& parameters() { return params_; }

    void copy_from(const QNet& other) {
        if (other.parameters().size() != params_.size())
            throw DomainError("parameter copy between mismatched networks");
        params_ = other.parameters();
    }

protected:
    std::vector<double> params_;

    static void check_finiteness(std::span<const double> v, const char* what) {
        double norm = 0.0;
        for (double x : v) {
            if (!std::isfinite(x))
                throw NumericError(std::string("non-finite value in ") + what +
                                   " (parameter norm " + std::to_string(norm) + ")");
            norm += x * x;
        }
    }

    // Guard against exploding steps; inactive in normal operation.
    static void clip_gradient(std::vector<double>& g, double max_norm = 100.0) {
        double sq = 0.0;
        for (double x : g)
            sq += x * x;
        const double norm = std::sqrt(sq);
        if (norm > max_norm) {
            const double scale = max_norm / norm;
            for (double& x : g)
                x *= scale;
        }
    }

    static void he_uniform(std::vector<double>& p, std::size_t begin, std::size_t count,
                           int fan_in, std::mt19937_64& rng) {
        const double limit = std::sqrt(6.0 / std::max(1, fan_in));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (std::size_t i = 0; i < count; ++i)
            p[begin + i] = dist(rng);
    }
};

// Desk-scale profile: the four cropped planes flattened into one dense
// rectifier layer and a linear action head.
class CompactQNet final : public QNet {
public:
    CompactQNet(int crop_radius, int hidden, std::uint64_t seed)
        : radius_(crop_radius), width_(2 * crop_radius + 1), hidden_(hidden) {
        if (crop_radius < 1 || hidden < 1)
            throw ConfigError("compact profile needs crop_radius >= 1 and hidden >= 1");
        in_ = 4 * width_ * width_;
        w1_ = 0;
        b1_ = w1_ + static_cast<std::size_t>(hidden_) * in_;
        w2_ = b1_ + static_cast<std::size_t>(hidden_);
        b2_ = w2_ + static_cast<std::size_t>(kActionCount) * hidden_;
        params_.assign(b2_ + kActionCount, 0.0);
        std::mt19937_64 rng(seed);
        he_uniform(params_, w1_, static_cast<std::size_t>(hidden_) * in_, in_, rng);
        // action head starts at zero: a blank net scores every move equally
    }

    std::string profile_id() const override { return "compact"; }
    int crop_radius() const override { return radius_; }

    std::vector<double> forward(const DispatchState& s) const override {
        std::vector<double> x, h, q;
        run(s, x, h, q);
        check_finiteness(q, "compact q_forward output");
        return q;
    }

    double fit(std::span<const QSample> batch, double lr) override {
        if (batch.empty())
            throw DomainError("fit on empty batch");
        std::vector<double> grad(params_.size(), 0.0);
        std::vector<double> x, h, q;
        double sq_err = 0.0;
        for (const QSample& sample : batch) {
            run(*sample.state, x, h, q);
            const double delta = q[static_cast<std::size_t>(sample.action)] - sample.target;
            sq_err += delta * delta;
            // head
            const std::size_t row = w2_ + static_cast<std::size_t>(sample.action) * hidden_;
            for (int j = 0; j < hidden_; ++j)
                grad[row + j] += delta * h[static_cast<std::size_t>(j)];
            grad[b2_ + static_cast<std::size_t>(sample.action)] += delta;
            // hidden
            for (int j = 0; j < hidden_; ++j) {
                if (h[static_cast<std::size_t>(j)] <= 0.0)
                    continue;
                const double dh =
                    delta * params_[row + j];
                const std::size_t wrow = w1_ + static_cast<std::size_t>(j) * in_;
                for (int i = 0; i < in_; ++i)
                    grad[wrow + i] += dh * x[static_cast<std::size_t>(i)];
                grad[b1_ + static_cast<std::size_t>(j)] += dh;
            }
        }
        const double inv = 1.0 / static_cast<double>(batch.size());
        for (double& g : grad)
            g *= inv;
        clip_gradient(grad);
        for (std::size_t i = 0; i < params_.size(); ++i)
            params_[i] -= lr * grad[i];
        check_finiteness(params_, "compact parameters after update");
        return sq_err * inv;
    }

    std::unique_ptr<QNet> clone() const override {
        auto copy = std::make_unique<CompactQNet>(radius_, hidden_, 0);
        copy->params_ = params_;
        return copy;
    }

    int hidden() const { return hidden_; }

private:
    void run(const DispatchState& s, std::vector<double>& x, std::vector<double>& h,
             std::vector<double>& q) const {
        if (s.width != width_)
            throw DomainError("state window " + std::to_string(s.width) +
                              " does not match network window " + std::to_string(width_));
        x.assign(s.planes.begin(), s.planes.end());
        const std::size_t plane = static_cast<std::size_t>(width_) * width_;
        for (std::size_t i = 0; i < plane; ++i)
            x[i] *= kDemandPlaneScale;
        h.assign(static_cast<std::size_t>(hidden_), 0.0);
        for (int j = 0; j < hidden_; ++j) {
            const std::size_t row = w1_ + static_cast<std::size_t>(j) * in_;
            double acc = params_[b1_ + static_cast<std::size_t>(j)];
            for (int i = 0; i < in_; ++i)
                acc += params_[row + i] * x[static_cast<std::size_t>(i)];
            h[static_cast<std::size_t>(j)] = acc > 0.0 ? acc : 0.0;
        }
        q.assign(kActionCount, 0.0);
        for (int a = 0; a < kActionCount; ++a) {
            const std::size_t row = w2_ + static_cast<std::size_t>(a) * hidden_;
            double acc = params_[b2_ + static_cast<std::size_t>(a)];
            for (int j = 0; j < hidden_; ++j)
                acc += params_[row + j] * h[static_cast<std::size_t>(j)];
            q[static_cast<std::size_t>(a)] = acc;
        }
    }

    int radius_, width_, hidden_, in_ = 0;
    std::size_t w1_ = 0, b1_ = 0, w2_ = 0, b2_ = 0;
};

// Full-scale profile: 51x51 crops averaged down to 23x23, then the
// convolutional stack 16@5x5 / 32@3x3 / 64@3x3 / 128@1x1 with rectifiers and
// a linear 1@1x1 head over the 15x15 action map.
class ConvQNet final : public QNet {
public:
    explicit ConvQNet(std::uint64_t seed) {
        layers_ = {
            {4, 16, 5, 23, 23},   // -> 16 x 19 x 19
            {16, 32, 3, 19, 19},  // -> 32 x 17 x 17
            {32, 64, 3, 17, 17},  // -> 64 x 15 x 15
            {64, 128, 1, 15, 15}, // -> 128 x 15 x 15
            {128, 1, 1, 15, 15},  // -> 1 x 15 x 15 (linear head)
        };
        std::size_t total = 0;
        for (Conv& c : layers_) {
            c.w_off = total;
            total += c.weight_count();
            c.b_off = total;
            total += static_cast<std::size_t>(c.out_c);
        }
        params_.assign(total, 0.0);
        std::mt19937_64 rng(seed);
        for (std::size_t li = 0; li + 1 < layers_.size(); ++li) {
            const Conv& c = layers_[li];
            he_uniform(params_, c.w_off, c.weight_count(), c.in_c * c.k * c.k, rng);
        }
        // head stays zero-initialized, matching the compact profile
    }

    std::string profile_id() const override { return "full"; }
    int crop_radius() const override { return 25; }

    std::vector<double> forward(const DispatchState& s) const override {
        std::vector<std::vector<double>> acts;
        std::vector<double> q = run(s, acts);
        check_finiteness(q, "full q_forward output");
        return q;
    }

    double fit(std::span<const QSample> batch, double lr) override {
        if (batch.empty())
            throw DomainError("fit on empty batch");
        std::vector<double> grad(params_.size(), 0.0);
        double sq_err = 0.0;
        for (const QSample& sample : batch) {
            std::vector<std::vector<double>> acts; // acts[0] = pooled input
            std::vector<double> q = run(*sample.state, acts);
            const double delta = q[static_cast<std::size_t>(sample.action)] - sample.target;
            sq_err += delta * delta;
            std::vector<double> dout(q.size(), 0.0);
            dout[static_cast<std::size_t>(sample.action)] = delta;
            for (int li = static_cast<int>(layers_.size()) - 1; li >= 0; --li) {
                const bool relu = li + 1 < static_cast<int>(layers_.size());
                dout = backward(layers_[static_cast<std::size_t>(li)],
                                acts[static_cast<std::size_t>(li)],
                                acts[static_cast<std::size_t>(li) + 1], dout, relu, grad);
            }
        }
        const double inv = 1.0 / static_cast<double>(batch.size());
        for (double& g : grad)
            g *= inv;
        clip_gradient(grad);
        for (std::size_t i = 0; i < params_.size(); ++i)
            params_[i] -= lr * grad[i];
        check_finiteness(params_, "full parameters after update");
        return sq_err * inv;
    }

    std::unique_ptr<QNet> clone() const override {
        auto copy = std::make_unique<ConvQNet>(0);
        copy->params_ = params_;
        return copy;
    }

private:
    struct Conv {
        int in_c, out_c, k, in_h, in_w;
        std::size_t w_off = 0, b_off = 0;
        int out_h() const { return in_h - k + 1; }
        int out_w() const { return in_w - k + 1; }
        std::size_t weight_count() const {
            return static_cast<std::size_t>(out_c) * in_c * k * k;
        }
    };

    static constexpr int kCropWidth = 51;
    static constexpr int kPoolK = 29; // 51 -> 23 at stride 1
    static constexpr int kPooledWidth = kCropWidth - kPoolK + 1;

    std::vector<double> pool_input(const DispatchState& s) const {
        if (s.width != kCropWidth)
            throw DomainError("full profile expects a 51x51 crop, got " +
                              std::to_string(s.width));
        std::vector<double> out(static_cast<std::size_t>(4) * kPooledWidth * kPooledWidth);
        const double inv = 1.0 / (kPoolK * kPoolK);
        for (int p = 0; p < 4; ++p)
            for (int y = 0; y < kPooledWidth; ++y)
                for (int x = 0; x < kPooledWidth; ++x) {
                    double acc = 0.0;
                    for (int ky = 0; ky < kPoolK; ++ky)
                        for (int kx = 0; kx < kPoolK; ++kx)
                            acc += s.at(p, y + ky, x + kx);
                    double v = acc * inv;
                    if (p == 0)
                        v *= kDemandPlaneScale;
                    out[static_cast<std::size_t>((p * kPooledWidth + y) * kPooledWidth + x)] = v;
                }
        return out;
    }

    std::vector<double> run(const DispatchState& s,
                            std::vector<std::vector<double>>& acts) const {
        acts.clear();
        acts.push_back(pool_input(s));
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            const bool relu = li + 1 < layers_.size();
            acts.push_back(forward_layer(layers_[li], acts.back(), relu));
        }
        return acts.back();
    }

    std::vector<double> forward_layer(const Conv& c, const std::vector<double>& in,
                                      bool relu) const {
        const int oh = c.out_h(), ow = c.out_w();
        std::vector<double> out(static_cast<std::size_t>(c.out_c) * oh * ow);
        for (int oc = 0; oc < c.out_c; ++oc)
            for (int y = 0; y < oh; ++y)
                for (int x = 0; x < ow; ++x) {
                    double acc = params_[c.b_off + static_cast<std::size_t>(oc)];
                    for (int ic = 0; ic < c.in_c; ++ic)
                        for (int ky = 0; ky < c.k; ++ky)
                            for (int kx = 0; kx < c.k; ++kx)
                                acc += params_[widx(c, oc, ic, ky, kx)] *
                                       in[static_cast<std::size_t>(
                                           (ic * c.in_h + y + ky) * c.in_w + x + kx)];
                    if (relu && acc < 0.0)
                        acc = 0.0;
                    out[static_cast<std::size_t>((oc * oh + y) * ow + x)] = acc;
                }
        return out;
    }

    // Returns the gradient w.r.t. the layer input; accumulates weight/bias
    // gradients. `out` must be the cached activations of this layer so the
    // rectifier mask can be recovered.
    std::vector<double> backward(const Conv& c, const std::vector<double>& in,
                                 const std::vector<double>& out,
                                 const std::vector<double>& dout, bool relu,
                                 std::vector<double>& grad) const {
        const int oh = c.out_h(), ow = c.out_w();
        std::vector<double> din(static_cast<std::size_t>(c.in_c) * c.in_h * c.in_w, 0.0);
        for (int oc = 0; oc < c.out_c; ++oc)
            for (int y = 0; y < oh; ++y)
                for (int x = 0; x < ow; ++x) {
                    const std::size_t oi = static_cast<std::size_t>((oc * oh + y) * ow + x);
                    double d = dout[oi];
                    if (d == 0.0)
                        continue;
                    if (relu && out[oi] <= 0.0)
                        continue;
                    grad[c.b_off + static_cast<std::size_t>(oc)] += d;
                    for (int ic = 0; ic < c.in_c; ++ic)
                        for (int ky = 0; ky < c.k; ++ky)
                            for (int kx = 0; kx < c.k; ++kx) {
                                const std::size_t ii = static_cast<std::size_t>(
                                    (ic * c.in_h + y + ky) * c.in_w + x + kx);
                                grad[widx(c, oc, ic, ky, kx)] += d * in[ii];
                                din[ii] += d * params_[widx(c, oc, ic, ky, kx)];
                            }
                }
        return din;
    }

    std::size_t widx(const Conv& c, int oc, int ic, int ky, int kx) const {
        return c.w_off +
               static_cast<std::size_t>(((oc * c.in_c + ic) * c.k + ky) * c.k + kx);
    }

    std::vector<Conv> layers_;
};

inline std::unique_ptr<QNet> make_qnet(const std::string& profile, int crop_radius,
                                       int hidden, std::uint64_t seed) {
    if (profile == "compact")
        return std::make_unique<CompactQNet>(crop_radius, hidden, seed);
    if (profile == "full")
        return std::make_unique<ConvQNet>(seed);
    throw ConfigError("unknown network profile '" + profile +
                      "' (expected compact or full)");
}

} // namespace ridepool
