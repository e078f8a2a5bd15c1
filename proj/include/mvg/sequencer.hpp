#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvg/motionspace.hpp"
#include "mvg/nn.hpp"
#include "mvg/pairgan.hpp"
#include "mvg/synthvideo.hpp"

namespace mvg::sequencer {

enum class FirstFrame { latter_first, former_first };

// discriminator set bits
constexpr std::uint32_t kDiscTraditional = 1;   // TVD / D_V
constexpr std::uint32_t kDiscBidirectional = 2; // BVD / D_R
constexpr std::uint32_t kDiscImage = 4;         // ID (ablation arm)

std::string first_frame_name(FirstFrame f);
FirstFrame first_frame_from_name(const std::string& s);
std::string disc_set_name(std::uint32_t set);
std::uint32_t disc_set_from_name(const std::string& s);

struct SequencerConfig {
    std::size_t n_frames = 16; // rollout length in frames
    double lr = 1e-4;          // latent code generator
    double disc_lr = 1e-4;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.999;
    std::size_t epochs = 20; // desk default on the synthetic corpus
    std::size_t batch = 4;
    std::vector<std::size_t> video_disc_channels = {12, 16, 24, 32};
    std::size_t subsample_stride = 1; // >1: train on subsampled clips
    FirstFrame first = FirstFrame::latter_first;
    std::uint32_t disc_set = kDiscTraditional | kDiscBidirectional;
    std::uint64_t seed = 1;
    double edit_cap = 0.0; // >0 caps |omega_t - omega_0| during inference rollouts
};

struct SequencerParams {
    nn::LstmCell encoder; // consumes the content code
    nn::LstmCell decoder; // state-to-state; input is a learned constant
    ad::Var decoder_input; // [d_omega]
    nn::Dense out_map;     // hidden -> m coefficients, zero-initialized
    std::size_t d_omega = 0, m = 0;

    SequencerParams() = default;
    SequencerParams(Rng& rng, std::size_t d_omega, std::size_t m);
    std::vector<ad::Var> params();
};

// h0, c0 from the content code (zero initial cell state).
std::pair<ad::Var, ad::Var> encode_content(const SequencerParams& p, const ad::Var& omega0);

struct DecodeOut {
    ad::Var coeffs; // [N,m]
    ad::Var h, c;
};
DecodeOut decode_step(const SequencerParams& p, const ad::Var& h, const ad::Var& c);

struct RolloutTrace {
    std::vector<char> basis_used;      // per step t>=1: 'b' or 'f'
    std::vector<Tensor> coefficients;  // per step, [m]
};

// omega_0..omega_n; odd steps add backward-code rows, even steps >= 2 add
// forward-code rows.
std::vector<ad::Var> roll_latents_var(const SequencerParams& p,
                                      const motionspace::MotionBasis& basis,
                                      const ad::Var& omega0, std::size_t n,
                                      RolloutTrace* trace = nullptr);
std::vector<Tensor> roll_latents(const SequencerParams& p,
                                 const motionspace::MotionBasis& basis, const Tensor& omega0,
                                 std::size_t n, RolloutTrace* trace = nullptr,
                                 double edit_cap = 0.0);

// Frame selection per first-frame mode (pair index parity).
synthvideo::VideoClip assemble_video(const pairgan::PairGenerator& gen,
                                     const std::vector<Tensor>& latents, FirstFrame first);
ad::Var assemble_video_var(const pairgan::PairGenerator& gen,
                           const std::vector<ad::Var>& latents, FirstFrame first,
                           const std::vector<std::size_t>& parity_index);

struct VideoDiscriminator {
    std::vector<nn::Conv3dLayer> blocks;
    nn::Dense fc_out;
    double lrelu_slope = 0.2;
    std::string variant; // "traditional" | "bidirectional"

    VideoDiscriminator() = default;
    VideoDiscriminator(Rng& rng, const std::vector<std::size_t>& channels, std::size_t t,
                       std::size_t res, const std::string& variant);
    ad::Var forward(const ad::Var& x) const; // [N,6,T,H,W] -> [N,1]
    std::vector<ad::Var> params();
};

struct ImageDiscriminator {
    std::vector<nn::Conv2dLayer> blocks;
    nn::Dense fc_out;
    double lrelu_slope = 0.2;

    ImageDiscriminator() = default;
    ImageDiscriminator(Rng& rng, std::size_t res);
    ad::Var forward(const ad::Var& x) const; // [N,3,H,W] -> [N,1]
    std::vector<ad::Var> params();
};

// Saturating adversarial losses. Inputs are [N,3,T,H,W] clips in [-1,1].
// d_v: each frame is channel-concatenated with the clip's initial frame.
std::pair<ad::Var, ad::Var> d_v_loss(const VideoDiscriminator& dv, const ad::Var& real_clips,
                                     const ad::Var& fake_clips);
// d_r: the clip is channel-concatenated with its time reversal.
std::pair<ad::Var, ad::Var> d_r_loss(const VideoDiscriminator& dr, const ad::Var& real_clips,
                                     const ad::Var& fake_clips);
// image discriminator over frames of the generated clip only:
// first frame labeled real, subsequent frames fake.
std::pair<ad::Var, ad::Var> d_i_loss(const ImageDiscriminator& di, const ad::Var& fake_clips);

// The 6-channel discriminator inputs, exposed for structural tests.
ad::Var dv_input(const ad::Var& clips);
ad::Var dr_input(const ad::Var& clips);

struct TrainSeqHistory {
    std::vector<double> loss_seq, loss_disc;
    bool finite = true;
};

struct TrainedSequencer {
    SequencerParams params;
    VideoDiscriminator dv, dr;
    ImageDiscriminator di;
    SequencerConfig config;
    TrainSeqHistory history;
    std::string basis_hash, generator_hash, corpus_hash;
};

TrainedSequencer train_sequencer(pairgan::PairGenerator& gen, const std::string& generator_hash,
                                 const motionspace::MotionBasis& basis,
                                 const std::string& basis_hash,
                                 const std::vector<synthvideo::VideoClip>& corpus,
                                 const SequencerConfig& cfg);

std::vector<Tensor> interpolate_latents(const std::vector<Tensor>& latents, std::size_t factor);

enum class LongVideoMode { interpolate, subsampled_model };

synthvideo::VideoClip generate_video(const pairgan::PairGenerator& gen,
                                     const SequencerParams& seq,
                                     const motionspace::MotionBasis& basis, const Tensor& omega0,
                                     std::size_t n_frames, FirstFrame first,
                                     double edit_cap = 0.0);

synthvideo::VideoClip generate_long_video(const pairgan::PairGenerator& gen,
                                          const TrainedSequencer& seq,
                                          const motionspace::MotionBasis& basis,
                                          const Tensor& omega0, std::size_t total_frames,
                                          LongVideoMode mode);

std::string save_sequencer(const std::string& path, const TrainedSequencer& seq);
TrainedSequencer load_sequencer(const std::string& path, std::size_t d_omega);

} // namespace mvg::sequencer
