#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "psfg/channel.hpp"
#include "psfg/gan.hpp"
#include "psfg/metrics.hpp"
#include "psfg/network.hpp"
#include "psfg/optim.hpp"

namespace psfg {

enum class AttackMode : std::uint8_t {
    oracle = 0,       // exact seed, no perturbation; positive control
    weight_scale = 1, // layer-1 weights scaled by r
    bias_scale = 2,   // layer-1 biases scaled by r
};

inline const char* attack_mode_name(AttackMode m) {
    switch (m) {
        case AttackMode::oracle: return "oracle";
        case AttackMode::weight_scale: return "weight_scale";
        case AttackMode::bias_scale: return "bias_scale";
    }
    return "?";
}

// Attackers are maximally empowered: they are granted the victim's generator
// architecture and secret seed, then perturbed by the multiplicative factor
// r on the first dense layer. r is ignored in oracle mode.
struct AttackerConfig {
    AttackMode mode = AttackMode::weight_scale;
    float r = 1.0f;
    std::uint32_t target_user = 0;
    std::vector<LayerSpec> assumed_arch;
    std::uint64_t assumed_seed = 0;
    OptimizerConfig opt; // assumed identical to the victim's (most favorable)
    BiasInit bias_init = BiasInit::zero;
};

struct AttackerState {
    AttackerConfig cfg;
    Network g_a;
    OptimizerState opt;
    std::uint64_t steps_seen = 0;
    std::uint64_t next_step = 0;        // expected victim step index
    std::uint64_t divergence_events = 0; // observed step gaps (attack proceeds)
    double initial_param_distance = -1.0;
};

inline AttackerState attacker_init(const AttackerConfig& cfg) {
    if (cfg.mode != AttackMode::oracle && (cfg.r < 0.0f || cfg.r > 1.0f)) {
        throw ConfigError("attacker r must be in [0, 1]");
    }
    AttackerState st;
    st.cfg = cfg;
    Rng rng(cfg.assumed_seed);
    st.g_a = make_network(cfg.assumed_arch, rng, cfg.bias_init);
    if (cfg.mode != AttackMode::oracle) {
        for (const LayoutEntry& e : st.g_a.params.layout) {
            if (e.spec.kind != LayerKind::dense) continue;
            float* block = st.g_a.params.values.data() + e.offset;
            const std::size_t wcount = static_cast<std::size_t>(e.spec.in_dim) * e.spec.out_dim;
            if (cfg.mode == AttackMode::weight_scale) {
                for (std::size_t i = 0; i < wcount; ++i) block[i] *= cfg.r;
            } else {
                for (std::size_t i = 0; i < e.spec.out_dim; ++i) block[wcount + i] *= cfg.r;
            }
            break; // layer 1 only
        }
    }
    st.opt = OptimizerState::make(cfg.opt, st.g_a.params.size());
    return st;
}

// Shadow-trains the attacker's generator from an eavesdropped message:
// exactly the server's reconstruction procedure, differing only in the
// initial weights. An architecture mismatch against the observed layout is
// noted, not fatal; the attacker may simply be wrong.
inline void attacker_ingest(AttackerState& a, const MpMessage& msg, const CGanConfig& gan) {
    if (msg.step != a.next_step) {
        a.divergence_events += 1;
    }
    a.next_step = msg.step + 1;
    Network d;
    d.params = msg.disc_params;
    for (const LayoutEntry& e : msg.disc_params.layout) {
        d.layers.push_back(e.spec);
    }
    CGanConfig shadow = gan;
    shadow.disc_layers = d.layers;
    train_generator_step(a.g_a, d, msg.noise, a.opt, shadow);
    a.steps_seen += 1;
}

struct AttackReport {
    float r = 1.0f;
    AttackMode mode = AttackMode::oracle;
    std::uint32_t user_id = 0;
    double attacker_acc = 0.0;
    double cloud_acc = 0.0;
    double nmse = 0.0;
    double ssim = 0.0;
    double param_l2 = 0.0;
};

inline std::string attack_csv_header() {
    return "r,mode,user_id,attacker_acc,cloud_acc,nmse,ssim,param_l2";
}

inline std::string to_csv_row(const AttackReport& r) {
    std::ostringstream os;
    os.precision(9);
    os << r.r << ',' << attack_mode_name(r.mode) << ',' << r.user_id << ',' << r.attacker_acc
       << ',' << r.cloud_acc << ',' << r.nmse << ',' << r.ssim << ',' << r.param_l2;
    return os.str();
}

// Rows of generated samples are scored as images: square when data_dim is a
// perfect square, a single-row image otherwise.
inline std::pair<std::size_t, std::size_t> image_shape(std::size_t data_dim) {
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(data_dim))));
    if (side * side == data_dim) return {side, side};
    return {1, data_dim};
}

// Scores the attack: judge accuracy on attacker generations vs the intended
// labels, the same for the victim ("cloud") generator, and pairwise NMSE /
// SSIM between attacker and victim outputs on identical noise.
inline AttackReport evaluate_attack(const AttackerState& a, const Network& victim,
                                    const NoiseBatch& probe, const Network& judge,
                                    std::uint32_t num_classes) {
    AttackReport rep;
    rep.r = a.cfg.r;
    rep.mode = a.cfg.mode;
    rep.user_id = a.cfg.target_user;

    const Matrix attacker_out = generate(a.g_a, probe, num_classes);
    const Matrix victim_out = generate(victim, probe, num_classes);

    rep.attacker_acc = classify_accuracy(judge, attacker_out, probe.labels);
    rep.cloud_acc = classify_accuracy(judge, victim_out, probe.labels);
    rep.nmse = nmse(victim_out, attacker_out);
    const auto [ir, ic] = image_shape(victim_out.cols());
    rep.ssim = ssim_rows_mean(victim_out, attacker_out, ir, ic, 2.0);
    rep.param_l2 = param_l2_distance(a.g_a.params, victim.params);
    return rep;
}

} // namespace psfg
