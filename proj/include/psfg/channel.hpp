#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "psfg/errors.hpp"
#include "psfg/gan.hpp"
#include "psfg/network.hpp"

namespace psfg {

// One publishing-mechanism payload: everything that crosses the channel for
// one training step. The generator never appears here.
struct MpMessage {
    std::uint32_t user_id = 0;
    std::uint64_t step = 0;
    ParamVector disc_params;
    NoiseBatch noise;
    std::uint64_t arch_digest = 0;

    bool bit_equal(const MpMessage& other) const {
        return user_id == other.user_id && step == other.step &&
               arch_digest == other.arch_digest && disc_params.bit_equal(other.disc_params) &&
               noise.bit_equal(other.noise);
    }
};

// Wire format, all little-endian:
//   magic "PSFG" | version u16 | user_id u32 | step u64 | arch_digest u64
//   layout block: count u32, then per entry kind/in/out/offset/length (u32 each)
//   param block:  binary32 array
//   z block:      rows u32, cols u32, binary32 array
//   label block:  u16 per label (z rows of them)
// The packed `kind` word holds layer kind (bits 0-7), activation id
// (bits 8-15) and the leaky slope as k/256 (bits 16-23), which round-trips
// exactly because slopes are restricted to that grid.
inline constexpr std::uint16_t kWireVersion = 1;

namespace wire {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(v & 0xff);
    out.push_back((v >> 8) & 0xff);
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

inline void put_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

struct Reader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    void need(std::size_t n, const char* what) const {
        if (pos + n > bytes.size()) {
            throw DecodeError(std::string("truncated ") + what, pos);
        }
    }
    std::uint16_t u16(const char* what) {
        need(2, what);
        std::uint16_t v = bytes[pos] | (std::uint16_t(bytes[pos + 1]) << 8);
        pos += 2;
        return v;
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(bytes[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    float f32(const char* what) {
        const std::uint32_t bits = u32(what);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
};

inline std::uint32_t pack_layer_kind(const LayerSpec& l) {
    const std::uint32_t alpha =
        l.act == Activation::leaky_relu ? leaky_alpha_byte(l.leaky_alpha) : 0;
    return static_cast<std::uint32_t>(l.kind) | (static_cast<std::uint32_t>(l.act) << 8) |
           (alpha << 16);
}

inline LayerSpec unpack_layer_kind(std::uint32_t packed, std::uint32_t in, std::uint32_t out,
                                   std::size_t offset_for_error) {
    const std::uint32_t kind = packed & 0xff;
    const std::uint32_t act = (packed >> 8) & 0xff;
    const std::uint32_t alpha = (packed >> 16) & 0xff;
    if (kind > 1 || act > 4) {
        throw DecodeError("unknown layer kind/activation", offset_for_error);
    }
    LayerSpec l;
    l.kind = static_cast<LayerKind>(kind);
    l.in_dim = in;
    l.out_dim = out;
    l.act = static_cast<Activation>(act);
    l.leaky_alpha = static_cast<float>(alpha) * kLeakyAlphaStep;
    return l;
}

inline void put_layout(std::vector<std::uint8_t>& out, const std::vector<LayoutEntry>& layout) {
    put_u32(out, static_cast<std::uint32_t>(layout.size()));
    for (const LayoutEntry& e : layout) {
        put_u32(out, pack_layer_kind(e.spec));
        put_u32(out, e.spec.in_dim);
        put_u32(out, e.spec.out_dim);
        put_u32(out, static_cast<std::uint32_t>(e.offset));
        put_u32(out, static_cast<std::uint32_t>(e.length));
    }
}

inline std::vector<LayoutEntry> get_layout(Reader& r) {
    const std::uint32_t count = r.u32("layout count");
    std::vector<LayoutEntry> layout;
    layout.reserve(count);
    std::uint64_t expected_offset = 0;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::size_t at = r.pos;
        const std::uint32_t packed = r.u32("layout kind");
        const std::uint32_t in = r.u32("layout in_dim");
        const std::uint32_t out = r.u32("layout out_dim");
        const std::uint32_t offset = r.u32("layout offset");
        const std::uint32_t length = r.u32("layout length");
        LayoutEntry e{unpack_layer_kind(packed, in, out, at), offset, length};
        if (e.offset != expected_offset || e.length != e.spec.param_count()) {
            throw DecodeError("inconsistent layout entry", at);
        }
        expected_offset += e.length;
        layout.push_back(e);
    }
    return layout;
}

} // namespace wire

inline std::size_t layout_encoded_size(std::size_t entries) {
    return 4 + entries * 5 * 4;
}

inline std::size_t encoded_size(const MpMessage& msg) {
    return 4 + 2 + 4 + 8 + 8 + layout_encoded_size(msg.disc_params.layout.size()) +
           4 * msg.disc_params.size() + 8 + 4 * msg.noise.z.size() + 2 * msg.noise.labels.size();
}

inline std::vector<std::uint8_t> encode(const MpMessage& msg) {
    std::vector<std::uint8_t> out;
    out.reserve(encoded_size(msg));
    out.insert(out.end(), {'P', 'S', 'F', 'G'});
    wire::put_u16(out, kWireVersion);
    wire::put_u32(out, msg.user_id);
    wire::put_u64(out, msg.step);
    wire::put_u64(out, msg.arch_digest);
    wire::put_layout(out, msg.disc_params.layout);
    for (float v : msg.disc_params.values) wire::put_f32(out, v);
    wire::put_u32(out, static_cast<std::uint32_t>(msg.noise.z.rows()));
    wire::put_u32(out, static_cast<std::uint32_t>(msg.noise.z.cols()));
    for (float v : msg.noise.z.data()) wire::put_f32(out, v);
    for (std::uint16_t l : msg.noise.labels) wire::put_u16(out, l);
    return out;
}

// Inverse of encode; decode(encode(m)) is bit-identical to m. Rejects bad
// magic, unknown versions, inconsistent layouts, truncation and trailing
// garbage, always reporting a byte offset.
inline MpMessage decode(std::span<const std::uint8_t> bytes) {
    wire::Reader r{bytes};
    r.need(4, "magic");
    if (std::memcmp(bytes.data(), "PSFG", 4) != 0) {
        throw DecodeError("bad magic", 0);
    }
    r.pos = 4;
    const std::uint16_t version = r.u16("version");
    if (version != kWireVersion) {
        throw DecodeError("unsupported version " + std::to_string(version), 4);
    }
    MpMessage msg;
    msg.user_id = r.u32("user_id");
    msg.step = r.u64("step");
    msg.arch_digest = r.u64("arch_digest");
    msg.disc_params.layout = wire::get_layout(r);
    const std::uint64_t param_count = msg.disc_params.layout.empty()
                                          ? 0
                                          : msg.disc_params.layout.back().offset +
                                                msg.disc_params.layout.back().length;
    msg.disc_params.values.resize(param_count);
    for (std::uint64_t i = 0; i < param_count; ++i) {
        msg.disc_params.values[i] = r.f32("param block");
    }
    const std::uint32_t rows = r.u32("z rows");
    const std::uint32_t cols = r.u32("z cols");
    msg.noise.z = Matrix(rows, cols);
    for (std::size_t i = 0; i < msg.noise.z.size(); ++i) {
        msg.noise.z.data()[i] = r.f32("z block");
    }
    msg.noise.labels.resize(rows);
    for (std::uint32_t i = 0; i < rows; ++i) {
        msg.noise.labels[i] = r.u16("label block");
    }
    if (r.pos != bytes.size()) {
        throw DecodeError("trailing bytes after message", r.pos);
    }
    return msg;
}

enum class ChannelKind : std::uint8_t {
    ideal = 0,
    quantized = 1,
};

// Uniform symmetric quantizer: clamp to [-clip, clip], then snap to the
// nearest of 2^bits + 1 levels spaced delta = 2 clip / 2^bits apart. The
// delivered value is within delta/2 of the clamped original.
inline float quantize_value(float x, std::uint32_t bits, float clip) {
    const double delta = 2.0 * clip / static_cast<double>(1ull << bits);
    const double clamped = std::min(std::max(static_cast<double>(x), -static_cast<double>(clip)),
                                    static_cast<double>(clip));
    const double idx = std::nearbyint((clamped + clip) / delta);
    return static_cast<float>(-static_cast<double>(clip) + idx * delta);
}

// Client -> server link model. Quantization applies to the discriminator
// parameters (the model payload); the noise block is metadata the protocol
// already treats as public and is delivered exactly. The eavesdrop tap sees
// precisely the delivered message, nothing more.
struct ChannelModel {
    ChannelKind kind = ChannelKind::ideal;
    std::uint32_t bits = 16;
    float clip = 4.0f;
    std::function<void(const MpMessage&)> tap;
    std::uint64_t bytes_sent = 0;
    std::uint64_t messages_sent = 0;
};

inline MpMessage transmit(ChannelModel& ch, const MpMessage& msg) {
    MpMessage delivered = msg;
    if (ch.kind == ChannelKind::quantized) {
        for (float& v : delivered.disc_params.values) {
            v = quantize_value(v, ch.bits, ch.clip);
        }
    }
    ch.bytes_sent += encoded_size(delivered);
    ch.messages_sent += 1;
    if (ch.tap) {
        ch.tap(delivered);
    }
    return delivered;
}

// Per-step transmission accounting, in the parameter-count currency used for
// published comparisons: full sharing moves |theta_G| + |theta_D| parameters,
// the partial-sharing mechanism moves |theta_D| + batch * (z_dim + 1)
// (noise values plus one label slot per row). Byte columns price every
// parameter-equivalent at 4 bytes; framing overhead is tracked separately by
// the channel counters.
struct CostReport {
    std::string arch_name;
    std::uint64_t params_full = 0;
    std::uint64_t params_psfedgan = 0;
    std::uint64_t bytes_full = 0;
    std::uint64_t bytes_psfedgan = 0;
    double ratio = 0.0;
};

inline std::uint64_t layer_param_count(std::span<const LayerSpec> layers) {
    std::uint64_t total = 0;
    for (const LayerSpec& l : layers) total += l.param_count();
    return total;
}

inline CostReport cost_compare(const std::string& name, std::span<const LayerSpec> gen,
                               std::span<const LayerSpec> disc, std::uint64_t batch,
                               std::uint64_t z_dim) {
    validate_layers(gen);
    validate_layers(disc);
    CostReport r;
    r.arch_name = name;
    const std::uint64_t g = layer_param_count(gen);
    const std::uint64_t d = layer_param_count(disc);
    r.params_full = g + d;
    r.params_psfedgan = d + batch * (z_dim + 1);
    r.bytes_full = 4 * r.params_full;
    r.bytes_psfedgan = 4 * r.params_psfedgan;
    r.ratio = static_cast<double>(r.params_psfedgan) / static_cast<double>(r.params_full);
    return r;
}

inline std::string cost_csv_header() {
    return "arch_name,params_full,params_psfedgan,bytes_full,bytes_psfedgan,ratio";
}

inline std::string to_csv_row(const CostReport& r) {
    std::ostringstream os;
    os.precision(9);
    os << r.arch_name << ',' << r.params_full << ',' << r.params_psfedgan << ',' << r.bytes_full
       << ',' << r.bytes_psfedgan << ',' << r.ratio;
    return os.str();
}

// Reference architecture pairs shipped with the cost report.
struct ArchPair {
    std::string name;
    std::vector<LayerSpec> gen;
    std::vector<LayerSpec> disc;
    std::uint64_t batch;
    std::uint64_t z_dim;
};

inline std::vector<ArchPair> bundled_architectures() {
    using L = LayerSpec;
    const auto lrelu = Activation::leaky_relu;
    std::vector<ArchPair> out;
    // 2-D Gaussian toy
    out.push_back({"toy_gauss",
                   {L::dense(4 + 3, 32, lrelu), L::dense(32, 32, lrelu),
                    L::dense(32, 2, Activation::tanh)},
                   {L::dense(2 + 3, 32, lrelu), L::dense(32, 32, lrelu),
                    L::dense(32, 1, Activation::sigmoid)},
                   64, 4});
    // 8x8 glyph digits
    out.push_back({"toy_glyph",
                   {L::dense(16 + 10, 128, lrelu), L::dense(128, 128, lrelu),
                    L::dense(128, 64, Activation::tanh)},
                   {L::dense(64 + 10, 128, lrelu), L::dense(128, 128, lrelu),
                    L::dense(128, 1, Activation::sigmoid)},
                   64, 16});
    // mid-size pair: z 64, 10 classes, 256-wide trunks over 64-D data
    out.push_back({"mid_dense",
                   {L::dense(64 + 10, 256, lrelu), L::dense(256, 256, lrelu),
                    L::dense(256, 64, Activation::tanh)},
                   {L::dense(64 + 10, 256, lrelu), L::dense(256, 256, lrelu),
                    L::dense(256, 1, Activation::sigmoid)},
                   64, 64});
    // image-scale dense stand-in with |theta_G| ~ |theta_D| (~2M each)
    out.push_back({"image_dense",
                   {L::dense(100 + 10, 1024, lrelu), L::dense(1024, 1024, lrelu),
                    L::dense(1024, 784, Activation::tanh)},
                   {L::dense(784 + 10, 1024, lrelu), L::dense(1024, 1024, lrelu),
                    L::dense(1024, 1, Activation::sigmoid)},
                   64, 100});
    return out;
}

} // namespace psfg
