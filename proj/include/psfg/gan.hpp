#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "psfg/loss.hpp"
#include "psfg/matrix.hpp"
#include "psfg/network.hpp"
#include "psfg/optim.hpp"
#include "psfg/rng.hpp"

namespace psfg {

// Conditional GAN wiring. Conditioning is one-hot concatenation on both
// sides: the generator consumes [z | onehot(l)], the discriminator
// [x | onehot(l)].
struct CGanConfig {
    std::uint32_t z_dim = 0;
    std::uint32_t num_classes = 0;
    std::vector<LayerSpec> gen_layers;
    std::vector<LayerSpec> disc_layers;
    std::uint32_t d_steps_per_g_step = 1;
    std::uint32_t batch_size = 0;

    std::uint32_t data_dim() const { return gen_layers.back().out_dim; }
};

inline void validate_cgan(const CGanConfig& cfg) {
    if (cfg.z_dim == 0 || cfg.num_classes == 0 || cfg.batch_size == 0 ||
        cfg.d_steps_per_g_step == 0) {
        throw ConfigError("cgan config: z_dim, num_classes, batch_size and d_steps must be positive");
    }
    validate_layers(cfg.gen_layers);
    validate_layers(cfg.disc_layers);
    if (cfg.gen_layers.front().in_dim != cfg.z_dim + cfg.num_classes) {
        throw ConfigError("generator in_dim must be z_dim + num_classes, got " +
                          std::to_string(cfg.gen_layers.front().in_dim));
    }
    if (cfg.disc_layers.front().in_dim != cfg.data_dim() + cfg.num_classes) {
        throw ConfigError("discriminator in_dim must be data_dim + num_classes, got " +
                          std::to_string(cfg.disc_layers.front().in_dim));
    }
    if (cfg.disc_layers.back().out_dim != 1) {
        throw ConfigError("discriminator must have a single output");
    }
}

// One publishing step's generator inputs: the noise batch and its labels.
struct NoiseBatch {
    Matrix z; // [batch x z_dim]
    std::vector<std::uint16_t> labels;

    std::size_t batch() const { return labels.size(); }

    bool bit_equal(const NoiseBatch& other) const {
        return z.bit_equal(other.z) && labels == other.labels;
    }
};

inline Matrix one_hot(std::span<const std::uint16_t> labels, std::size_t num_classes) {
    Matrix m(labels.size(), num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= num_classes) {
            throw DataError("label " + std::to_string(labels[i]) + " >= num_classes " +
                            std::to_string(num_classes));
        }
        m.at(i, labels[i]) = 1.0f;
    }
    return m;
}

// z ~ N(0, I) filled row-major in one Box-Muller pass, then labels drawn
// uniformly from allowed_labels (ascending order as given). Draw order is
// fixed: all of z first, then the labels.
inline NoiseBatch sample_noise(Rng& rng, const CGanConfig& cfg,
                               std::span<const std::uint16_t> allowed_labels,
                               std::size_t count) {
    if (allowed_labels.empty()) {
        throw ConfigError("sample_noise: allowed_labels is empty");
    }
    for (std::uint16_t l : allowed_labels) {
        if (l >= cfg.num_classes) {
            throw ConfigError("sample_noise: allowed label " + std::to_string(l) +
                              " >= num_classes " + std::to_string(cfg.num_classes));
        }
    }
    NoiseBatch nb;
    nb.z = Matrix(count, cfg.z_dim);
    rng.fill_normal(std::span<float>(nb.z.data()));
    nb.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        nb.labels[i] = allowed_labels[rng.bounded(allowed_labels.size())];
    }
    return nb;
}

inline NoiseBatch sample_noise(Rng& rng, const CGanConfig& cfg,
                               std::span<const std::uint16_t> allowed_labels) {
    return sample_noise(rng, cfg, allowed_labels, cfg.batch_size);
}

struct RealBatch {
    Matrix x;
    std::vector<std::uint16_t> labels;
};

// Pure sampling pass: G([z | onehot(l)]).
inline Matrix generate(const Network& g, const NoiseBatch& noise, std::uint32_t num_classes) {
    return forward(g, hconcat(noise.z, one_hot(noise.labels, num_classes)));
}

// One discriminator update: real inputs target 1, generated inputs
// (constants, no gradient reaches G) target 0. Returns the summed BCE of the
// two components, which at D == 1/2 equals 2 log 2.
inline double train_discriminator_step(Network& d, const Network& g, const RealBatch& real,
                                       const NoiseBatch& noise, OptimizerState& opt,
                                       const CGanConfig& cfg) {
    const Matrix fake = generate(g, noise, cfg.num_classes);
    const Matrix real_in = hconcat(real.x, one_hot(real.labels, cfg.num_classes));
    const Matrix fake_in = hconcat(fake, one_hot(noise.labels, cfg.num_classes));

    const Matrix pred_real = forward(d, real_in);
    LossGrad real_lg = bce_loss(pred_real, Matrix(pred_real.rows(), pred_real.cols(), 1.0f));
    const Matrix pred_fake = forward(d, fake_in);
    LossGrad fake_lg = bce_loss(pred_fake, Matrix(pred_fake.rows(), pred_fake.cols(), 0.0f));

    BackwardResult br_real = backward(d, real_in, real_lg.grad);
    BackwardResult br_fake = backward(d, fake_in, fake_lg.grad);
    add_in_place(br_real.param_grads, br_fake.param_grads);

    apply_update(d.params, br_real.param_grads, opt);
    return real_lg.loss + fake_lg.loss;
}

// One generator update with the non-saturating loss: BCE of D(G(z,l))
// against target 1. Gradients flow through the (frozen) discriminator into
// the generator; D is untouched bit-for-bit. This map is what both ends of
// the protocol run, so identical (G, D, noise, optimizer) inputs give
// identical updated generators.
inline double train_generator_step(Network& g, const Network& d, const NoiseBatch& noise,
                                   OptimizerState& opt, const CGanConfig& cfg) {
    const Matrix g_in = hconcat(noise.z, one_hot(noise.labels, cfg.num_classes));
    const Matrix fake = forward(g, g_in);
    const Matrix labels_1h = one_hot(noise.labels, cfg.num_classes);
    const Matrix d_in = hconcat(fake, labels_1h);

    const Matrix pred = forward(d, d_in);
    LossGrad lg = bce_loss(pred, Matrix(pred.rows(), pred.cols(), 1.0f));

    BackwardResult through_d = backward(d, d_in, lg.grad);
    const Matrix fake_grad = take_cols(through_d.input_grads, fake.cols());
    BackwardResult through_g = backward(g, g_in, fake_grad);

    apply_update(g.params, through_g.param_grads, opt);
    return lg.loss;
}

} // namespace psfg
