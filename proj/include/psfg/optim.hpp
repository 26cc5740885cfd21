#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "psfg/errors.hpp"
#include "psfg/network.hpp"

namespace psfg {

enum class OptKind : std::uint8_t {
    sgd = 0,
    adam = 1,
};

struct OptimizerConfig {
    OptKind kind = OptKind::adam;
    float learning_rate = 1e-3f;
    float beta1 = 0.5f; // GAN-friendly default
    float beta2 = 0.999f;
    float eps = 1e-8f;

    bool operator==(const OptimizerConfig&) const = default;
};

// Moments are plain binary32 vectors; the whole update runs in binary32 with
// a fixed operation order, so twin optimizers fed bit-equal gradients stay
// bit-equal forever.
struct OptimizerState {
    OptimizerConfig cfg;
    std::vector<float> m;
    std::vector<float> v;
    std::uint64_t step_count = 0;

    static OptimizerState make(const OptimizerConfig& cfg, std::size_t param_count) {
        OptimizerState s;
        s.cfg = cfg;
        if (cfg.kind == OptKind::adam) {
            s.m.assign(param_count, 0.0f);
            s.v.assign(param_count, 0.0f);
        }
        return s;
    }
};

// In-place parameter update. learning_rate == 0 skips the parameter write
// entirely, making it an exact (bit-level) no-op on params; Adam moments
// still advance.
//
// Adam order per parameter i, all binary32:
//   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g*g;
//   mhat = m / (1 - b1^t);  vhat = v / (1 - b2^t);
//   p -= lr * mhat / (sqrt(vhat) + eps)
inline void apply_update(ParamVector& params, const ParamVector& grads, OptimizerState& opt) {
    if (!params.layout_equal(grads) || params.values.size() != grads.values.size()) {
        throw ShapeError("apply_update: gradient layout does not match parameters");
    }
    const OptimizerConfig& c = opt.cfg;
    const bool write = c.learning_rate != 0.0f;
    if (c.kind == OptKind::sgd) {
        if (!write) return;
        for (std::size_t i = 0; i < params.values.size(); ++i) {
            params.values[i] -= c.learning_rate * grads.values[i];
        }
        return;
    }
    if (opt.m.size() != params.values.size()) {
        throw ShapeError("apply_update: optimizer sized for " + std::to_string(opt.m.size()) +
                         " params, got " + std::to_string(params.values.size()));
    }
    opt.step_count += 1;
    const float b1 = c.beta1, b2 = c.beta2;
    const float corr1 = 1.0f - std::pow(b1, static_cast<float>(opt.step_count));
    const float corr2 = 1.0f - std::pow(b2, static_cast<float>(opt.step_count));
    for (std::size_t i = 0; i < params.values.size(); ++i) {
        const float g = grads.values[i];
        opt.m[i] = b1 * opt.m[i] + (1.0f - b1) * g;
        opt.v[i] = b2 * opt.v[i] + (1.0f - b2) * g * g;
        if (write) {
            const float mhat = opt.m[i] / corr1;
            const float vhat = opt.v[i] / corr2;
            params.values[i] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.eps);
        }
    }
}

} // namespace psfg
