#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "psfg/digest.hpp"
#include "psfg/errors.hpp"
#include "psfg/matrix.hpp"
#include "psfg/rng.hpp"

namespace psfg {

enum class Activation : std::uint8_t {
    identity = 0,
    relu = 1,
    leaky_relu = 2,
    tanh = 3,
    sigmoid = 4,
};

enum class LayerKind : std::uint8_t {
    dense = 0,      // affine map followed by this layer's activation
    activation = 1, // elementwise only, in_dim == out_dim, no parameters
};

// leaky_relu slopes are restricted to multiples of 1/256 so the slope can
// cross the wire losslessly inside a packed 32-bit layout field.
inline constexpr float kLeakyAlphaStep = 1.0f / 256.0f;
inline constexpr float kDefaultLeakyAlpha = 64.0f / 256.0f;

struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    std::uint32_t in_dim = 0;
    std::uint32_t out_dim = 0;
    Activation act = Activation::identity;
    float leaky_alpha = kDefaultLeakyAlpha;

    static LayerSpec dense(std::uint32_t in, std::uint32_t out,
                           Activation act = Activation::identity,
                           float alpha = kDefaultLeakyAlpha) {
        return {LayerKind::dense, in, out, act, alpha};
    }

    static LayerSpec activation_layer(std::uint32_t dim, Activation act,
                                      float alpha = kDefaultLeakyAlpha) {
        return {LayerKind::activation, dim, dim, act, alpha};
    }

    std::size_t param_count() const {
        return kind == LayerKind::dense
                   ? static_cast<std::size_t>(in_dim) * out_dim + out_dim
                   : 0;
    }

    bool operator==(const LayerSpec&) const = default;
};

inline std::uint8_t leaky_alpha_byte(float alpha) {
    const float scaled = alpha * 256.0f;
    const auto b = static_cast<std::uint32_t>(scaled);
    if (static_cast<float>(b) != scaled || b > 255) {
        throw ConfigError("leaky_relu alpha must be k/256 with k in [0,255], got " +
                          std::to_string(alpha));
    }
    return static_cast<std::uint8_t>(b);
}

inline void validate_layers(std::span<const LayerSpec> layers) {
    if (layers.empty()) {
        throw ConfigError("network needs at least one layer");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        if (l.in_dim == 0 || l.out_dim == 0) {
            throw ConfigError("layer " + std::to_string(i) + ": zero dimension");
        }
        if (l.kind == LayerKind::activation && l.in_dim != l.out_dim) {
            throw ConfigError("layer " + std::to_string(i) +
                              ": activation layer must preserve dimension");
        }
        if (l.act == Activation::leaky_relu) {
            leaky_alpha_byte(l.leaky_alpha); // throws when not representable
        }
        if (i > 0 && layers[i - 1].out_dim != l.in_dim) {
            throw ConfigError("layer " + std::to_string(i) + ": in_dim " +
                              std::to_string(l.in_dim) + " does not match previous out_dim " +
                              std::to_string(layers[i - 1].out_dim));
        }
    }
}

// 64-bit digest of an architecture. Computed locally by every party that
// knows the layer list; messages carry it so receivers can reject mismatches.
inline std::uint64_t arch_digest(std::span<const LayerSpec> layers) {
    std::uint64_t h = kFnvOffset;
    for (const LayerSpec& l : layers) {
        h = fnv1a64_value(static_cast<std::uint32_t>(l.kind), h);
        h = fnv1a64_value(l.in_dim, h);
        h = fnv1a64_value(l.out_dim, h);
        h = fnv1a64_value(static_cast<std::uint32_t>(l.act), h);
        h = fnv1a64_value(l.act == Activation::leaky_relu ? l.leaky_alpha : 0.0f, h);
    }
    return h;
}

struct LayoutEntry {
    LayerSpec spec;
    std::uint64_t offset = 0;
    std::uint64_t length = 0;

    bool operator==(const LayoutEntry&) const = default;
};

// Flat, layer-structured parameter storage. The unit of transmission and of
// bit-exact comparison: two ParamVectors are equal iff every binary32 value
// is bit-identical and the layouts match.
struct ParamVector {
    std::vector<float> values;
    std::vector<LayoutEntry> layout;

    std::size_t size() const { return values.size(); }

    bool layout_equal(const ParamVector& other) const { return layout == other.layout; }

    bool bit_equal(const ParamVector& other) const {
        return layout == other.layout && values.size() == other.values.size() &&
               (values.empty() ||
                std::memcmp(values.data(), other.values.data(),
                            values.size() * sizeof(float)) == 0);
    }
};

inline std::vector<LayoutEntry> make_layout(std::span<const LayerSpec> layers) {
    std::vector<LayoutEntry> layout;
    layout.reserve(layers.size());
    std::uint64_t offset = 0;
    for (const LayerSpec& l : layers) {
        const std::uint64_t len = l.param_count();
        layout.push_back({l, offset, len});
        offset += len;
    }
    return layout;
}

enum class BiasInit : std::uint8_t {
    zero = 0,    // consumes no rng
    uniform = 1, // U(-0.05, 0.05), drawn after the layer's weights
};

// Glorot-uniform weights, |w| <= sqrt(6/(in+out)), drawn in layer order then
// row-major (input-major) order within each weight block. The rng stream is
// consumed identically by every party initializing from the same seed.
inline ParamVector init_params(std::span<const LayerSpec> layers, Rng& rng,
                               BiasInit bias_init = BiasInit::zero) {
    validate_layers(layers);
    ParamVector p;
    p.layout = make_layout(layers);
    p.values.resize(p.layout.empty() ? 0 : p.layout.back().offset + p.layout.back().length);
    for (const LayoutEntry& e : p.layout) {
        if (e.spec.kind != LayerKind::dense) continue;
        const float bound = std::sqrt(6.0f / static_cast<float>(e.spec.in_dim + e.spec.out_dim));
        float* w = p.values.data() + e.offset;
        const std::size_t wcount = static_cast<std::size_t>(e.spec.in_dim) * e.spec.out_dim;
        for (std::size_t i = 0; i < wcount; ++i) {
            w[i] = rng.uniform(-bound, bound);
        }
        float* b = w + wcount;
        for (std::size_t i = 0; i < e.spec.out_dim; ++i) {
            b[i] = bias_init == BiasInit::uniform ? rng.uniform(-0.05f, 0.05f) : 0.0f;
        }
    }
    return p;
}

// A network is just (layers, params); forward is a pure function of both.
struct Network {
    std::vector<LayerSpec> layers;
    ParamVector params;

    std::uint32_t in_dim() const { return layers.front().in_dim; }
    std::uint32_t out_dim() const { return layers.back().out_dim; }
    std::uint64_t digest() const { return arch_digest(layers); }
};

inline Network make_network(std::vector<LayerSpec> layers, Rng& rng,
                            BiasInit bias_init = BiasInit::zero) {
    Network net;
    net.params = init_params(layers, rng, bias_init);
    net.layers = std::move(layers);
    return net;
}

namespace detail {

inline float apply_act(Activation act, float alpha, float x) {
    switch (act) {
        case Activation::identity: return x;
        case Activation::relu: return x > 0.0f ? x : 0.0f;
        case Activation::leaky_relu: return x > 0.0f ? x : alpha * x;
        case Activation::tanh: return std::tanh(x);
        case Activation::sigmoid: return 1.0f / (1.0f + std::exp(-x));
    }
    return x;
}

// Derivative through the activation given post-activation value y. relu and
// leaky_relu recover the sign from y (y == 0 counts as the zero branch).
inline float act_grad_from_output(Activation act, float alpha, float y) {
    switch (act) {
        case Activation::identity: return 1.0f;
        case Activation::relu: return y > 0.0f ? 1.0f : 0.0f;
        case Activation::leaky_relu: return y > 0.0f ? 1.0f : alpha;
        case Activation::tanh: return 1.0f - y * y;
        case Activation::sigmoid: return y * (1.0f - y);
    }
    return 1.0f;
}

// y = x W + b followed by the layer activation. W is stored row-major
// [in_dim x out_dim] at `w`, bias at `w + in*out`.
inline Matrix dense_forward(const LayerSpec& l, const float* w, const Matrix& x) {
    const std::size_t in = l.in_dim, out = l.out_dim;
    const float* bias = w + in * out;
    Matrix y(x.rows(), out);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        float* yrow = y.data().data() + i * out;
        for (std::size_t j = 0; j < out; ++j) yrow[j] = bias[j];
        const float* xrow = x.data().data() + i * in;
        for (std::size_t p = 0; p < in; ++p) {
            const float xv = xrow[p];
            const float* wrow = w + p * out;
            for (std::size_t j = 0; j < out; ++j) {
                yrow[j] += xv * wrow[j];
            }
        }
        for (std::size_t j = 0; j < out; ++j) {
            yrow[j] = apply_act(l.act, l.leaky_alpha, yrow[j]);
        }
    }
    return y;
}

} // namespace detail

// Per-layer outputs; outs[0] is the input, outs[i] the output of layer i-1.
struct ForwardTrace {
    std::vector<Matrix> outs;
    const Matrix& output() const { return outs.back(); }
};

inline ForwardTrace forward_trace(const Network& net, const Matrix& x) {
    if (x.cols() != net.in_dim()) {
        throw ShapeError("forward: input cols " + std::to_string(x.cols()) + " vs in_dim " +
                         std::to_string(net.in_dim()));
    }
    ForwardTrace trace;
    trace.outs.reserve(net.layers.size() + 1);
    trace.outs.push_back(x);
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const LayerSpec& l = net.layers[li];
        const Matrix& in = trace.outs.back();
        if (l.kind == LayerKind::dense) {
            trace.outs.push_back(
                detail::dense_forward(l, net.params.values.data() + net.params.layout[li].offset, in));
        } else {
            Matrix y(in.rows(), in.cols());
            for (std::size_t i = 0; i < in.size(); ++i) {
                y.data()[i] = detail::apply_act(l.act, l.leaky_alpha, in.data()[i]);
            }
            trace.outs.push_back(std::move(y));
        }
    }
    return trace;
}

inline Matrix forward(const Network& net, const Matrix& x) {
    return forward_trace(net, x).outs.back();
}

struct BackwardResult {
    ParamVector param_grads;
    Matrix input_grads;
};

// Exact reverse-mode gradients of forward(net, x) contracted with
// upstream_grad (dLoss/dOutput). input_grads carries dLoss/dx so gradients
// can flow through a frozen discriminator into the generator.
inline BackwardResult backward(const Network& net, const Matrix& x, const Matrix& upstream) {
    ForwardTrace trace = forward_trace(net, x);
    if (upstream.rows() != x.rows() || upstream.cols() != net.out_dim()) {
        throw ShapeError("backward: upstream " + std::to_string(upstream.rows()) + "x" +
                         std::to_string(upstream.cols()) + " vs output " +
                         std::to_string(x.rows()) + "x" + std::to_string(net.out_dim()));
    }

    BackwardResult res;
    res.param_grads.layout = net.params.layout;
    res.param_grads.values.assign(net.params.values.size(), 0.0f);

    Matrix grad = upstream;
    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const LayerSpec& l = net.layers[li];
        const Matrix& y = trace.outs[li + 1];
        // through the activation
        for (std::size_t i = 0; i < grad.size(); ++i) {
            grad.data()[i] *= detail::act_grad_from_output(l.act, l.leaky_alpha, y.data()[i]);
        }
        if (l.kind == LayerKind::dense) {
            const Matrix& in = trace.outs[li];
            const std::size_t inn = l.in_dim, out = l.out_dim;
            float* gw = res.param_grads.values.data() + net.params.layout[li].offset;
            float* gb = gw + inn * out;
            // dW[p][j] += sum_i in[i][p] * grad[i][j]; batch index ascending
            for (std::size_t i = 0; i < in.rows(); ++i) {
                const float* inrow = in.data().data() + i * inn;
                const float* grow = grad.data().data() + i * out;
                for (std::size_t p = 0; p < inn; ++p) {
                    const float iv = inrow[p];
                    float* gwrow = gw + p * out;
                    for (std::size_t j = 0; j < out; ++j) {
                        gwrow[j] += iv * grow[j];
                    }
                }
                for (std::size_t j = 0; j < out; ++j) {
                    gb[j] += grow[j];
                }
            }
            // dx = grad * W^T
            const float* w = net.params.values.data() + net.params.layout[li].offset;
            Matrix gin(grad.rows(), inn);
            for (std::size_t i = 0; i < grad.rows(); ++i) {
                float* ginrow = gin.data().data() + i * inn;
                const float* grow = grad.data().data() + i * out;
                for (std::size_t j = 0; j < out; ++j) {
                    const float gv = grow[j];
                    for (std::size_t p = 0; p < inn; ++p) {
                        ginrow[p] += gv * w[p * out + j];
                    }
                }
            }
            grad = std::move(gin);
        }
        // activation-only layers pass grad through unchanged shape
    }
    res.input_grads = std::move(grad);
    return res;
}

inline ParamVector zeros_like(const ParamVector& p) {
    ParamVector z;
    z.layout = p.layout;
    z.values.assign(p.values.size(), 0.0f);
    return z;
}

inline void add_in_place(ParamVector& acc, const ParamVector& other) {
    if (!acc.layout_equal(other) || acc.values.size() != other.values.size()) {
        throw ShapeError("add_in_place: layout mismatch");
    }
    for (std::size_t i = 0; i < acc.values.size(); ++i) {
        acc.values[i] += other.values[i];
    }
}

inline std::uint64_t param_digest(const ParamVector& p) {
    std::uint64_t h = kFnvOffset;
    for (const LayoutEntry& e : p.layout) {
        h = fnv1a64_value(static_cast<std::uint32_t>(e.spec.kind), h);
        h = fnv1a64_value(e.spec.in_dim, h);
        h = fnv1a64_value(e.spec.out_dim, h);
    }
    return fnv1a64_floats(p.values, h);
}

inline std::size_t bit_diff_count(const ParamVector& a, const ParamVector& b) {
    if (a.values.size() != b.values.size()) {
        throw ShapeError("bit_diff_count: sizes " + std::to_string(a.values.size()) + " vs " +
                         std::to_string(b.values.size()));
    }
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        std::uint32_t ba, bb;
        std::memcpy(&ba, &a.values[i], 4);
        std::memcpy(&bb, &b.values[i], 4);
        if (ba != bb) ++count;
    }
    return count;
}

inline double param_l2_distance(const ParamVector& a, const ParamVector& b) {
    if (a.values.size() != b.values.size()) {
        throw ShapeError("param_l2_distance: size mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = static_cast<double>(a.values[i]) - static_cast<double>(b.values[i]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

} // namespace psfg
