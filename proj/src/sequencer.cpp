#include "mvg/sequencer.hpp"

#include <algorithm>
#include <cmath>

#include "mvg/errors.hpp"
#include "mvg/io.hpp"

namespace mvg::sequencer {

using namespace mvg::ad;

std::string first_frame_name(FirstFrame f) {
    return f == FirstFrame::latter_first ? "latter_first" : "former_first";
}

FirstFrame first_frame_from_name(const std::string& s) {
    if (s == "latter_first") return FirstFrame::latter_first;
    if (s == "former_first") return FirstFrame::former_first;
    throw ConfigError("unknown first-frame mode: " + s);
}

std::string disc_set_name(std::uint32_t set) {
    std::string out;
    if (set & kDiscBidirectional) out += "BVD";
    if (set & kDiscTraditional) out += out.empty() ? "TVD" : "+TVD";
    if (set & kDiscImage) out += out.empty() ? "ID" : "+ID";
    return out.empty() ? "none" : out;
}

std::uint32_t disc_set_from_name(const std::string& s) {
    std::uint32_t set = 0;
    std::string rest = s;
    std::transform(rest.begin(), rest.end(), rest.begin(), ::toupper);
    std::size_t pos = 0;
    while (pos < rest.size()) {
        std::size_t next = rest.find('+', pos);
        if (next == std::string::npos) next = rest.size();
        const std::string tok = rest.substr(pos, next - pos);
        if (tok == "TVD") set |= kDiscTraditional;
        else if (tok == "BVD") set |= kDiscBidirectional;
        else if (tok == "ID") set |= kDiscImage;
        else throw ConfigError("unknown discriminator token: " + tok);
        pos = next + 1;
    }
    return set;
}

SequencerParams::SequencerParams(Rng& rng, std::size_t d, std::size_t m_)
    : encoder(rng, d, d),
      decoder(rng, d, d),
      decoder_input(nn::randn_tensor(rng, {d}, 1.0), true),
      out_map(rng, d, m_, 1.0, 0.0),
      d_omega(d),
      m(m_) {
    // zero-initialized output map: training starts from the static rollout
    Tensor& w = out_map.w.mutable_value();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.0;
}

std::vector<Var> SequencerParams::params() {
    std::vector<Var> out;
    encoder.collect(out);
    decoder.collect(out);
    out.push_back(decoder_input);
    out_map.collect(out);
    return out;
}

std::pair<Var, Var> encode_content(const SequencerParams& p, const Var& omega0) {
    if (omega0.shape().size() != 2 || omega0.shape()[1] != p.d_omega)
        throw ShapeError("encode_content: expects [N," + std::to_string(p.d_omega) + "]");
    const std::size_t n = omega0.shape()[0];
    Var h0 = constant(Tensor({n, p.d_omega}));
    Var c0 = constant(Tensor({n, p.d_omega}));
    return p.encoder.forward(omega0, h0, c0);
}

DecodeOut decode_step(const SequencerParams& p, const Var& h, const Var& c) {
    const std::size_t n = h.shape()[0];
    Var x = row_broadcast(p.decoder_input, n);
    auto [h2, c2] = p.decoder.forward(x, h, c);
    if (!all_finite(h2.value()) || !all_finite(c2.value()))
        throw NumericalError("decode_step: non-finite LSTM state");
    DecodeOut out;
    out.coeffs = p.out_map.forward(h2);
    out.h = h2;
    out.c = c2;
    return out;
}

std::vector<Var> roll_latents_var(const SequencerParams& p,
                                  const motionspace::MotionBasis& basis, const Var& omega0,
                                  std::size_t n, RolloutTrace* trace) {
    if (basis.backward_codes.dim(0) != p.m)
        throw ShapeError("roll_latents: basis m=" + std::to_string(basis.backward_codes.dim(0)) +
                         " does not match sequencer m=" + std::to_string(p.m));
    std::vector<Var> latents{omega0};
    auto [h, c] = encode_content(p, omega0);
    Var back = constant(basis.backward_codes);
    Var fwd = constant(basis.forward_codes);
    for (std::size_t t = 1; t <= n; ++t) {
        DecodeOut d = decode_step(p, h, c);
        h = d.h;
        c = d.c;
        const bool odd = (t % 2) == 1;
        // Odd steps combine backward codes (edit the former frame), even
        // steps >= 2 combine forward codes.
        Var delta = matmul(d.coeffs, odd ? back : fwd);
        latents.push_back(add(latents.back(), delta));
        if (trace) {
            trace->basis_used.push_back(odd ? 'b' : 'f');
            const Tensor& cf = d.coeffs.value();
            Tensor single({p.m});
            std::copy_n(cf.data(), p.m, single.data());
            trace->coefficients.push_back(single);
        }
    }
    return latents;
}

std::vector<Tensor> roll_latents(const SequencerParams& p, const motionspace::MotionBasis& basis,
                                 const Tensor& omega0, std::size_t n, RolloutTrace* trace,
                                 double edit_cap) {
    Var om = constant(omega0.reshaped({1, omega0.size()}));
    auto latents = roll_latents_var(p, basis, om, n, trace);
    std::vector<Tensor> out;
    out.reserve(latents.size());
    for (auto& l : latents) out.push_back(l.value().reshaped({omega0.size()}));
    if (edit_cap > 0.0) {
        for (std::size_t t = 1; t < out.size(); ++t) {
            double norm2_drift = 0;
            for (std::size_t i = 0; i < out[t].size(); ++i) {
                const double d = out[t][i] - out[0][i];
                norm2_drift += d * d;
            }
            const double drift = std::sqrt(norm2_drift);
            if (drift > edit_cap) {
                const double s = edit_cap / drift;
                for (std::size_t i = 0; i < out[t].size(); ++i)
                    out[t][i] = out[0][i] + s * (out[t][i] - out[0][i]);
            }
        }
    }
    return out;
}

namespace {

// pair index parity -> which half of the pair becomes the video frame
bool take_latter(std::size_t pair_index, FirstFrame first) {
    const bool even = (pair_index % 2) == 0;
    return first == FirstFrame::latter_first ? even : !even;
}

} // namespace

synthvideo::VideoClip assemble_video(const pairgan::PairGenerator& gen,
                                     const std::vector<Tensor>& latents, FirstFrame first) {
    if (latents.empty()) throw ShapeError("assemble_video: no latents");
    const std::size_t res = gen.config.out_res();
    synthvideo::VideoClip clip;
    clip.frames = latents.size();
    clip.height = res;
    clip.width = res;
    clip.content_id = "generated";
    clip.pixels.resize(latents.size() * 3 * res * res);
    const std::size_t fsz = 3 * res * res;
    for (std::size_t i = 0; i < latents.size(); ++i) {
        Tensor pair = gen.synthesize_pair(latents[i]);
        const std::size_t off = take_latter(i, first) ? fsz : 0;
        for (std::size_t j = 0; j < fsz; ++j)
            clip.pixels[i * fsz + j] = io::quant8(pair[off + j]);
    }
    return clip;
}

Var assemble_video_var(const pairgan::PairGenerator& gen, const std::vector<Var>& latents,
                       FirstFrame first, const std::vector<std::size_t>& parity_index) {
    if (latents.size() != parity_index.size())
        throw ShapeError("assemble_video_var: parity index size mismatch");
    std::vector<Var> frames;
    frames.reserve(latents.size());
    for (std::size_t i = 0; i < latents.size(); ++i) {
        Var pair = gen.synthesize(latents[i]); // [N,6,R,R]
        frames.push_back(take_latter(parity_index[i], first) ? slice_ax1(pair, 3, 6)
                                                             : slice_ax1(pair, 0, 3));
    }
    return stack_time(frames); // [N,3,T,R,R]
}

VideoDiscriminator::VideoDiscriminator(Rng& rng, const std::vector<std::size_t>& channels,
                                       std::size_t t, std::size_t res,
                                       const std::string& variant_)
    : variant(variant_) {
    // kernel 3x3x3 blocks; temporal strides (1,2,2,...), spatial stride 2
    std::size_t ci = 6, tt = t, rr = res;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const int ts = i == 0 ? 1 : 2;
        const int stride[3] = {ts, 2, 2};
        blocks.emplace_back(rng, ci, channels[i], 3, 3, stride, std::sqrt(2.0));
        ci = channels[i];
        tt = (tt + 2 - 3) / ts + 1;
        rr = (rr + 2 - 3) / 2 + 1;
    }
    fc_out = nn::Dense(rng, ci * tt * rr * rr, 1, 1.0, 0.0);
}

Var VideoDiscriminator::forward(const Var& x) const {
    if (x.shape().size() != 5 || x.shape()[1] != 6)
        throw ShapeError("video discriminator expects [N,6,T,H,W], got " +
                         Tensor::shape_str(x.shape()));
    Var h = x;
    for (const auto& b : blocks) h = leaky_relu(b.forward(h), lrelu_slope);
    const std::size_t n = h.shape()[0];
    return fc_out.forward(reshape(h, {n, h.size() / n}));
}

std::vector<Var> VideoDiscriminator::params() {
    std::vector<Var> out;
    for (auto& b : blocks) b.collect(out);
    fc_out.collect(out);
    return out;
}

ImageDiscriminator::ImageDiscriminator(Rng& rng, std::size_t res) {
    std::size_t ci = 3, rr = res;
    for (std::size_t co : {16, 24, 32}) {
        blocks.emplace_back(rng, ci, co, 3, 2, 1, std::sqrt(2.0));
        ci = co;
        rr = (rr + 2 - 3) / 2 + 1;
    }
    fc_out = nn::Dense(rng, ci * rr * rr, 1, 1.0, 0.0);
}

Var ImageDiscriminator::forward(const Var& x) const {
    if (x.shape().size() != 4 || x.shape()[1] != 3)
        throw ShapeError("image discriminator expects [N,3,H,W]");
    Var h = x;
    for (const auto& b : blocks) h = leaky_relu(b.forward(h), lrelu_slope);
    const std::size_t n = h.shape()[0];
    return fc_out.forward(reshape(h, {n, h.size() / n}));
}

std::vector<Var> ImageDiscriminator::params() {
    std::vector<Var> out;
    for (auto& b : blocks) b.collect(out);
    fc_out.collect(out);
    return out;
}

Var dv_input(const Var& clips) {
    const std::size_t t = clips.shape()[2];
    Var first = slice_time(clips, 0);
    std::vector<Var> frames;
    frames.reserve(t);
    for (std::size_t i = 0; i < t; ++i)
        frames.push_back(concat_ax1(slice_time(clips, i), first));
    return stack_time(frames);
}

Var dr_input(const Var& clips) {
    const std::size_t t = clips.shape()[2];
    std::vector<Var> frames;
    frames.reserve(t);
    for (std::size_t i = 0; i < t; ++i)
        frames.push_back(concat_ax1(slice_time(clips, i), slice_time(clips, t - 1 - i)));
    return stack_time(frames);
}

namespace {

void check_clip_batch(const Var& real, const Var& fake) {
    if (real.shape().size() != 5 || fake.shape().size() != 5)
        throw ShapeError("clip batches must be [N,3,T,H,W]");
    for (std::size_t i = 1; i < 5; ++i)
        if (real.shape()[i] != fake.shape()[i])
            throw ShapeError("real/fake clip shape mismatch: " +
                             Tensor::shape_str(real.shape()) + " vs " +
                             Tensor::shape_str(fake.shape()));
    if (real.shape()[2] < 2) throw ShapeError("clips must have T >= 2");
}

std::pair<Var, Var> adv_losses(const VideoDiscriminator& d, const Var& real_in,
                               const Var& fake_in) {
    Var logits_real = d.forward(real_in);
    Var logits_fake = d.forward(fake_in);
    // saturating cross-entropy: D maximizes E log D(v) + E log(1 - D(fake)),
    // the sequencer minimizes the same objective
    Var loss_d = add(mean_all(softplus_op(neg(logits_real))),
                     mean_all(softplus_op(logits_fake)));
    Var loss_g = neg(mean_all(softplus_op(logits_fake))); // E log(1 - D(fake))
    return {loss_d, loss_g};
}

Var adv_d_loss(const VideoDiscriminator& d, const Var& real_in, const Var& fake_in) {
    return add(mean_all(softplus_op(neg(d.forward(real_in)))),
               mean_all(softplus_op(d.forward(fake_in))));
}

} // namespace

std::pair<Var, Var> d_v_loss(const VideoDiscriminator& dv, const Var& real_clips,
                             const Var& fake_clips) {
    check_clip_batch(real_clips, fake_clips);
    return adv_losses(dv, dv_input(real_clips), dv_input(fake_clips));
}

std::pair<Var, Var> d_r_loss(const VideoDiscriminator& dr, const Var& real_clips,
                             const Var& fake_clips) {
    check_clip_batch(real_clips, fake_clips);
    return adv_losses(dr, dr_input(real_clips), dr_input(fake_clips));
}

std::pair<Var, Var> d_i_loss(const ImageDiscriminator& di, const Var& fake_clips) {
    const std::size_t t = fake_clips.shape()[2];
    Var logits_first = di.forward(slice_time(fake_clips, 0));
    std::vector<Var> later_logits;
    for (std::size_t i = 1; i < t; ++i)
        later_logits.push_back(di.forward(slice_time(fake_clips, i)));
    Var fake_term = mean_all(softplus_op(later_logits[0]));
    for (std::size_t i = 1; i < later_logits.size(); ++i)
        fake_term = add(fake_term, mean_all(softplus_op(later_logits[i])));
    fake_term = scale(fake_term, 1.0 / static_cast<double>(later_logits.size()));
    Var loss_d = add(mean_all(softplus_op(neg(logits_first))), fake_term);
    Var loss_g = neg(fake_term);
    return {loss_d, loss_g};
}

namespace {

Tensor clips_to_tensor(const std::vector<synthvideo::VideoClip>& clips) {
    const std::size_t n = clips.size(), t = clips[0].frames;
    const std::size_t h = clips[0].height, w = clips[0].width;
    Tensor out({n, 3, t, h, w});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t tt = 0; tt < t; ++tt) {
                const std::uint8_t* f = clips[i].frame_ptr(tt);
                for (std::size_t p = 0; p < h * w; ++p)
                    out[(((i * 3 + c) * t) + tt) * h * w + p] = io::dequant8(f[c * h * w + p]);
            }
    return out;
}

} // namespace

TrainedSequencer train_sequencer(pairgan::PairGenerator& gen, const std::string& generator_hash,
                                 const motionspace::MotionBasis& basis,
                                 const std::string& basis_hash,
                                 const std::vector<synthvideo::VideoClip>& corpus,
                                 const SequencerConfig& cfg) {
    if (basis.generator_hash != generator_hash)
        throw HashMismatchError(
            "train_sequencer: motion basis was extracted from generator " +
            basis.generator_hash + " but training against generator " + generator_hash);
    if (cfg.disc_set == 0) throw ConfigError("train_sequencer: empty discriminator set");
    if (cfg.n_frames < 2) throw ConfigError("train_sequencer: n_frames must be >= 2");

    Rng master(cfg.seed);
    Rng rng_init = master.split(0);
    Rng rng_data = master.split(1);
    Rng rng_z = master.split(2);

    const std::size_t res = gen.config.out_res();
    TrainedSequencer out;
    out.config = cfg;
    out.basis_hash = basis_hash;
    out.generator_hash = generator_hash;
    out.params = SequencerParams(rng_init, gen.config.d_omega, basis.backward_codes.dim(0));
    out.dv = VideoDiscriminator(rng_init, cfg.video_disc_channels, cfg.n_frames, res,
                                "traditional");
    out.dr = VideoDiscriminator(rng_init, cfg.video_disc_channels, cfg.n_frames, res,
                                "bidirectional");
    out.di = ImageDiscriminator(rng_init, res);

    auto seq_params = out.params.params();
    std::vector<Var> disc_params;
    if (cfg.disc_set & kDiscTraditional)
        for (auto& p : out.dv.params()) disc_params.push_back(p);
    if (cfg.disc_set & kDiscBidirectional)
        for (auto& p : out.dr.params()) disc_params.push_back(p);
    if (cfg.disc_set & kDiscImage)
        for (auto& p : out.di.params()) disc_params.push_back(p);

    nn::Adam opt_seq, opt_disc;
    opt_seq.lr = cfg.lr;
    opt_seq.beta1 = cfg.adam_beta1;
    opt_seq.beta2 = cfg.adam_beta2;
    opt_disc = opt_seq;
    opt_disc.lr = cfg.disc_lr;
    opt_seq.init(seq_params);
    opt_disc.init(disc_params);

    // pair-generator weights are frozen: exclude them from backward entirely
    auto gen_params = gen.params();
    std::vector<bool> was_trainable;
    for (auto& p : gen_params) {
        was_trainable.push_back(p.requires_grad());
        p.set_requires_grad(false);
    }

    // training corpus view (optionally subsampled, per long-sequence recipe)
    std::vector<synthvideo::VideoClip> view;
    const std::vector<synthvideo::VideoClip>* train_corpus = &corpus;
    if (cfg.subsample_stride > 1) {
        view.reserve(corpus.size());
        for (const auto& c : corpus) view.push_back(synthvideo::subsample_clip(c, cfg.subsample_stride));
        train_corpus = &view;
    }

    std::vector<std::size_t> parity(cfg.n_frames);
    for (std::size_t i = 0; i < cfg.n_frames; ++i) parity[i] = i;

    const std::size_t steps_per_epoch = std::max<std::size_t>(1, corpus.size() / cfg.batch);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t step = 0; step < steps_per_epoch; ++step) {
            auto real_clips =
                synthvideo::sample_clips(*train_corpus, cfg.n_frames, cfg.batch, rng_data);
            Var real = constant(clips_to_tensor(real_clips));

            // one rollout graph per optimizer step
            Tensor z({cfg.batch, gen.config.d_z});
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = rng_z.normal();
            Var omega0 = gen.mapping.forward(constant(z));
            auto latents = roll_latents_var(out.params, basis, omega0, cfg.n_frames - 1);
            Var fake = assemble_video_var(gen, latents, cfg.first, parity);

            // discriminator step on detached fakes
            Var fake_detached = detach(fake);
            Var loss_d = constant(Tensor::scalar(0.0));
            if (cfg.disc_set & kDiscTraditional)
                loss_d = add(loss_d, adv_d_loss(out.dv, dv_input(real), dv_input(fake_detached)));
            if (cfg.disc_set & kDiscBidirectional)
                loss_d = add(loss_d, adv_d_loss(out.dr, dr_input(real), dr_input(fake_detached)));
            if (cfg.disc_set & kDiscImage)
                loss_d = add(loss_d, d_i_loss(out.di, fake_detached).first);
            auto d_grads = grad(loss_d, disc_params);
            opt_disc.step(disc_params, d_grads);

            // sequencer step against the updated discriminators; the
            // saturating objective needs only the fake-side terms
            Var loss_g = constant(Tensor::scalar(0.0));
            if (cfg.disc_set & kDiscTraditional)
                loss_g = add(loss_g, neg(mean_all(softplus_op(out.dv.forward(dv_input(fake))))));
            if (cfg.disc_set & kDiscBidirectional)
                loss_g = add(loss_g, neg(mean_all(softplus_op(out.dr.forward(dr_input(fake))))));
            if (cfg.disc_set & kDiscImage)
                loss_g = add(loss_g, d_i_loss(out.di, fake).second);
            auto g_grads = grad(loss_g, seq_params);
            opt_seq.step(seq_params, g_grads);

            const double ld = loss_d.value()[0], lg = loss_g.value()[0];
            out.history.loss_disc.push_back(ld);
            out.history.loss_seq.push_back(lg);
            if (!std::isfinite(ld) || !std::isfinite(lg)) out.history.finite = false;
        }
    }

    for (std::size_t i = 0; i < gen_params.size(); ++i)
        gen_params[i].set_requires_grad(was_trainable[i]);
    return out;
}

std::vector<Tensor> interpolate_latents(const std::vector<Tensor>& latents, std::size_t factor) {
    if (factor < 1) throw ConfigError("interpolate_latents: factor must be >= 1");
    if (latents.size() < 2) throw ConfigError("interpolate_latents: need >= 2 latents");
    if (factor == 1) return latents;
    std::vector<Tensor> out;
    out.reserve((latents.size() - 1) * factor + 1);
    for (std::size_t i = 0; i + 1 < latents.size(); ++i) {
        for (std::size_t s = 0; s < factor; ++s) {
            const double a = static_cast<double>(s) / static_cast<double>(factor);
            Tensor v = latents[i];
            for (std::size_t j = 0; j < v.size(); ++j)
                v[j] = (1 - a) * latents[i][j] + a * latents[i + 1][j];
            out.push_back(std::move(v));
        }
    }
    out.push_back(latents.back());
    return out;
}

synthvideo::VideoClip generate_video(const pairgan::PairGenerator& gen,
                                     const SequencerParams& seq,
                                     const motionspace::MotionBasis& basis, const Tensor& omega0,
                                     std::size_t n_frames, FirstFrame first, double edit_cap) {
    auto latents = roll_latents(seq, basis, omega0, n_frames - 1, nullptr, edit_cap);
    return assemble_video(gen, latents, first);
}

synthvideo::VideoClip generate_long_video(const pairgan::PairGenerator& gen,
                                          const TrainedSequencer& seq,
                                          const motionspace::MotionBasis& basis,
                                          const Tensor& omega0, std::size_t total_frames,
                                          LongVideoMode mode) {
    const std::size_t n = seq.config.n_frames;
    if (total_frames < n) throw ConfigError("generate_long_video: total_frames below rollout length");
    if (mode == LongVideoMode::subsampled_model && seq.config.subsample_stride < 2)
        throw ConfigError(
            "generate_long_video: subsampled_model mode requires a sequencer trained on "
            "subsampled clips (subsample_stride > 1)");

    auto latents =
        roll_latents(seq.params, basis, omega0, n - 1, nullptr, seq.config.edit_cap);
    if (total_frames == n && mode == LongVideoMode::interpolate)
        return assemble_video(gen, latents, seq.config.first);

    const std::size_t factor =
        mode == LongVideoMode::subsampled_model
            ? seq.config.subsample_stride
            : (total_frames - 1 + (n - 2)) / (n - 1); // ceil((total-1)/(n-1))
    auto dense = interpolate_latents(latents, factor);
    // frame-selection parity follows the nearest rollout step
    std::vector<Tensor> used;
    std::vector<std::size_t> parity;
    for (std::size_t j = 0; j < dense.size() && used.size() < total_frames; ++j) {
        used.push_back(dense[j]);
        parity.push_back((j + factor / 2) / factor);
    }
    if (used.size() < total_frames)
        throw ConfigError("generate_long_video: interpolation factor too small for " +
                          std::to_string(total_frames) + " frames");

    const std::size_t res = gen.config.out_res();
    synthvideo::VideoClip clip;
    clip.frames = used.size();
    clip.height = res;
    clip.width = res;
    clip.content_id = "generated_long";
    clip.pixels.resize(used.size() * 3 * res * res);
    const std::size_t fsz = 3 * res * res;
    for (std::size_t i = 0; i < used.size(); ++i) {
        Tensor pair = gen.synthesize_pair(used[i]);
        const std::size_t off = take_latter(parity[i], seq.config.first) ? fsz : 0;
        for (std::size_t j = 0; j < fsz; ++j)
            clip.pixels[i * fsz + j] = io::quant8(pair[off + j]);
    }
    return clip;
}

std::string save_sequencer(const std::string& path, const TrainedSequencer& seq) {
    std::vector<std::pair<std::string, Tensor>> arrays;
    TrainedSequencer& s = const_cast<TrainedSequencer&>(seq);
    auto ps = s.params.params();
    for (std::size_t i = 0; i < ps.size(); ++i)
        arrays.emplace_back("seq.p" + std::to_string(i), ps[i].value());
    auto dvp = s.dv.params();
    for (std::size_t i = 0; i < dvp.size(); ++i)
        arrays.emplace_back("dv.p" + std::to_string(i), dvp[i].value());
    auto drp = s.dr.params();
    for (std::size_t i = 0; i < drp.size(); ++i)
        arrays.emplace_back("dr.p" + std::to_string(i), drp[i].value());
    io::save_archive(path, arrays);
    const std::string hash = io::file_hash_hex(path);
    nlohmann::json manifest{{"format_version", 1},
                            {"kind", "sequencer"},
                            {"d_omega", seq.params.d_omega},
                            {"m", seq.params.m},
                            {"n_frames", seq.config.n_frames},
                            {"first", first_frame_name(seq.config.first)},
                            {"disc_set", disc_set_name(seq.config.disc_set)},
                            {"subsample_stride", seq.config.subsample_stride},
                            {"edit_cap", seq.config.edit_cap},
                            {"seed", seq.config.seed},
                            {"video_disc_channels", seq.config.video_disc_channels},
                            {"basis_hash", seq.basis_hash},
                            {"generator_hash", seq.generator_hash},
                            {"corpus_hash", seq.corpus_hash},
                            {"archive_hash", hash}};
    io::save_json(path + ".json", manifest);
    return hash;
}

TrainedSequencer load_sequencer(const std::string& path, std::size_t d_omega) {
    const auto manifest = io::load_json(path + ".json");
    if (manifest.value("kind", "") != "sequencer")
        throw ConfigError("manifest is not a sequencer: " + path);
    if (manifest.at("archive_hash").get<std::string>() != io::file_hash_hex(path))
        throw HashMismatchError("sequencer archive hash mismatch for " + path);
    if (manifest.at("d_omega").get<std::size_t>() != d_omega)
        throw ConfigError("sequencer d_omega mismatch");

    TrainedSequencer out;
    out.config.n_frames = manifest.at("n_frames").get<std::size_t>();
    out.config.first = first_frame_from_name(manifest.at("first").get<std::string>());
    out.config.disc_set = disc_set_from_name(manifest.at("disc_set").get<std::string>());
    out.config.subsample_stride = manifest.at("subsample_stride").get<std::size_t>();
    out.config.edit_cap = manifest.at("edit_cap").get<double>();
    out.config.seed = manifest.at("seed").get<std::uint64_t>();
    out.config.video_disc_channels =
        manifest.at("video_disc_channels").get<std::vector<std::size_t>>();
    out.basis_hash = manifest.at("basis_hash").get<std::string>();
    out.generator_hash = manifest.at("generator_hash").get<std::string>();
    out.corpus_hash = manifest.value("corpus_hash", "");

    const std::size_t m = manifest.at("m").get<std::size_t>();
    Rng rng(0);
    out.params = SequencerParams(rng, d_omega, m);
    // discriminators are needed only to resume; rebuild with the stored dims
    auto arrays = io::load_archive(path);
    auto restore_group = [&](const std::string& prefix, std::vector<Var> params) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto it = arrays.find(prefix + std::to_string(i));
            if (it == arrays.end())
                throw ConfigError("sequencer checkpoint missing " + prefix + std::to_string(i));
            if (!it->second.same_shape(params[i].value()))
                throw ConfigError("sequencer checkpoint shape mismatch at " + prefix +
                                  std::to_string(i));
            params[i].mutable_value() = it->second;
        }
    };
    restore_group("seq.p", out.params.params());
    return out;
}

} // namespace mvg::sequencer
