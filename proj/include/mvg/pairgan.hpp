#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mvg/autodiff.hpp"
#include "mvg/nn.hpp"
#include "mvg/rng.hpp"
#include "mvg/synthvideo.hpp"
#include "mvg/tensor.hpp"

namespace mvg::pairgan {

struct PairGanConfig {
    std::size_t d_z = 64;
    std::size_t d_omega = 64;
    std::size_t map_layers = 4;
    // channels at 4x4, 8x8, ... ; output resolution is 4 * 2^(len-1)
    std::vector<std::size_t> synth_channels = {40, 32, 24, 16};
    std::vector<std::size_t> disc_channels = {16, 24, 32, 40};
    // trailing synthesis blocks (and the output head) duplicated per frame;
    // 0 keeps the single shared stack with one 6-channel head
    std::size_t split_blocks = 0;
    std::size_t disc_fc = 64;
    double lr = 0.002; // generator and discriminator, per defaults
    double adam_beta1 = 0.0;
    double adam_beta2 = 0.99;
    double gamma_r1 = 1.0;
    std::size_t batch = 16; // small-corpus guidance (<1000 clips)
    std::size_t k = 4;      // pair frame interval
    std::size_t steps = 1500;
    std::size_t eval_every = 250;    // proxy-Frechet cadence, also checkpoint cadence
    std::size_t eval_samples = 128;
    std::uint64_t seed = 1;

    std::size_t out_res() const { return 4u << (synth_channels.size() - 1); }
};

struct MappingNet {
    std::vector<nn::Dense> layers;
    MappingNet() = default;
    MappingNet(Rng& rng, const PairGanConfig& cfg);
    ad::Var forward(const ad::Var& z) const; // [N,d_z] -> [N,d_omega]
    void collect(std::vector<ad::Var>& out);
};

// Per-stage value cache for the exact forward-mode Jacobian path.
struct StageCache {
    Tensor style;    // [ci]
    Tensor up_in;    // input after upsample, pre-modulation
    Tensor conv_out; // conv output pre-demodulation
    Tensor demod;    // [co] (empty if no demodulation)
    Tensor deriv;    // activation derivative: lrelu mask or 1-tanh^2
    Tensor out;      // post-activation output
};

struct SynthCache {
    Tensor omega; // [d_omega]
    std::vector<StageCache> shared;
    std::vector<StageCache> branch_former, branch_latter; // split mode
    StageCache head_former, head_latter;                  // split mode
    StageCache head;                                      // single-head mode
    Tensor pair_out;                                      // [6,R,R]
};

struct SynthesisNet {
    ad::Var const_input; // [C0,4,4]
    std::vector<nn::ModConv> blocks;                      // shared stack
    std::vector<nn::ModConv> branch_former, branch_latter; // split tails
    nn::ModConv head;                // single-head mode: 1x1 -> 6 channels
    nn::ModConv head_former, head_latter; // split mode: 1x1 -> 3 channels each
    bool split = false;
    double lrelu_slope = 0.2;

    SynthesisNet() = default;
    SynthesisNet(Rng& rng, const PairGanConfig& cfg);
    ad::Var forward(const ad::Var& omega) const; // [N,d_omega] -> [N,6,R,R]
    void collect(std::vector<ad::Var>& out);

    // Exact linearization used by motionspace: cache a single-sample forward,
    // then propagate input tangents through it.
    SynthCache forward_cached(const Tensor& omega) const;         // omega [d_omega]
    Tensor jvp(const SynthCache& cache, const Tensor& omega_dot) const; // -> [6,R,R]
};

struct PairGenerator {
    PairGanConfig config;
    MappingNet mapping;
    SynthesisNet synthesis;

    PairGenerator() = default;
    PairGenerator(Rng& rng, const PairGanConfig& cfg);

    std::vector<ad::Var> params();

    Tensor map_latent(const Tensor& z) const;        // [d_z] -> [d_omega]
    Tensor synthesize_pair(const Tensor& omega) const; // [d_omega] -> [6,R,R]
    ad::Var forward(const ad::Var& z) const;         // [N,d_z] -> [N,6,R,R]
    ad::Var synthesize(const ad::Var& omega) const;  // [N,d_omega] -> [N,6,R,R]
};

struct PairDiscriminator {
    nn::Conv2dLayer from_pairs;
    std::vector<nn::Conv2dLayer> downs; // stride 2
    nn::Conv2dLayer post_mbstd;
    nn::Dense fc_hidden, fc_out;
    double lrelu_slope = 0.2;

    PairDiscriminator() = default;
    PairDiscriminator(Rng& rng, const PairGanConfig& cfg);
    ad::Var forward(const ad::Var& x) const; // [N,6,R,R] -> [N,1]
    std::vector<ad::Var> params();
};

// Scalar logit for a single pair (shape-checked).
double discriminate_pair(PairDiscriminator& disc, const Tensor& pair);

struct TrainHistory {
    std::vector<std::size_t> step;
    std::vector<double> loss_g, loss_d, r1;
    std::vector<std::size_t> eval_step;
    std::vector<double> proxy_frechet;
    std::size_t best_step = 0;
    double best_frechet = 0;
    bool diverged = false;
    std::size_t last_finite_step = 0;
};

struct TrainedPairGan {
    PairGenerator gen;
    PairDiscriminator disc;
    TrainHistory history;
};

// Non-saturating adversarial training with R1 on real pairs. The selected
// checkpoint (lowest proxy-Frechet) is what `gen` holds on return.
TrainedPairGan train_pairgan(const std::vector<synthvideo::VideoClip>& corpus,
                             const PairGanConfig& cfg);

// ---- persistence: named-array archive + JSON manifest ----
// Returns the archive content hash.
std::string save_generator(const std::string& path, const PairGenerator& gen,
                           std::size_t step, std::uint64_t seed,
                           const std::string& corpus_hash = "");
PairGenerator load_generator(const std::string& path);
std::string generator_hash(const std::string& path);

} // namespace mvg::pairgan
