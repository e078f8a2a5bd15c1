#include "mvg/pairgan.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "mvg/errors.hpp"
#include "mvg/io.hpp"
#include "mvg/kernels.hpp"
#include "mvg/metrics.hpp"

namespace mvg::pairgan {

using namespace mvg::ad;

MappingNet::MappingNet(Rng& rng, const PairGanConfig& cfg) {
    for (std::size_t i = 0; i < cfg.map_layers; ++i) {
        const std::size_t in = i == 0 ? cfg.d_z : cfg.d_omega;
        layers.emplace_back(rng, in, cfg.d_omega, std::sqrt(2.0), 0.0);
    }
}

Var MappingNet::forward(const Var& z) const {
    Var x = z;
    for (const auto& l : layers) x = leaky_relu(l.forward(x), 0.2);
    return x;
}

void MappingNet::collect(std::vector<Var>& out) {
    for (auto& l : layers) l.collect(out);
}

SynthesisNet::SynthesisNet(Rng& rng, const PairGanConfig& cfg) {
    const auto& ch = cfg.synth_channels;
    if (ch.size() < 2) throw ConfigError("synthesis needs at least 2 channel entries");
    const std::size_t n_blocks = ch.size() - 1;
    if (cfg.split_blocks >= n_blocks)
        throw ConfigError("split_blocks must leave at least one shared block");
    split = cfg.split_blocks > 0;
    const_input = Var(nn::randn_tensor(rng, {ch[0], 4, 4}), true);
    const std::size_t n_shared = n_blocks - cfg.split_blocks;
    for (std::size_t b = 0; b < n_shared; ++b)
        blocks.emplace_back(rng, cfg.d_omega, ch[b], ch[b + 1], 3, /*upsample=*/true,
                            /*demodulate=*/true);
    if (split) {
        for (std::size_t b = n_shared; b < n_blocks; ++b) {
            branch_former.emplace_back(rng, cfg.d_omega, ch[b], ch[b + 1], 3, true, true);
            branch_latter.emplace_back(rng, cfg.d_omega, ch[b], ch[b + 1], 3, true, true);
        }
        head_former = nn::ModConv(rng, cfg.d_omega, ch.back(), 3, 1, false, false);
        head_latter = nn::ModConv(rng, cfg.d_omega, ch.back(), 3, 1, false, false);
    } else {
        head = nn::ModConv(rng, cfg.d_omega, ch.back(), 6, 1, false, false);
    }
}

Var SynthesisNet::forward(const Var& omega) const {
    const std::size_t n = omega.shape()[0];
    Var x = batch_bcast(const_input, n);
    for (const auto& b : blocks) x = leaky_relu(b.forward(x, omega), lrelu_slope);
    if (!split) return tanh_op(head.forward(x, omega));
    Var xa = x, xb = x;
    for (const auto& b : branch_former) xa = leaky_relu(b.forward(xa, omega), lrelu_slope);
    for (const auto& b : branch_latter) xb = leaky_relu(b.forward(xb, omega), lrelu_slope);
    return concat_ax1(tanh_op(head_former.forward(xa, omega)),
                      tanh_op(head_latter.forward(xb, omega)));
}

void SynthesisNet::collect(std::vector<Var>& out) {
    out.push_back(const_input);
    for (auto& b : blocks) b.collect(out);
    if (split) {
        for (auto& b : branch_former) b.collect(out);
        for (auto& b : branch_latter) b.collect(out);
        head_former.collect(out);
        head_latter.collect(out);
    } else {
        head.collect(out);
    }
}

namespace {

// single-sample style evaluation: s = scale * (W omega) + b
Tensor eval_style(const nn::Dense& d, const Tensor& omega) {
    const std::size_t out = d.w.shape()[0], in = d.w.shape()[1];
    Tensor s({out});
    for (std::size_t i = 0; i < out; ++i) {
        double acc = 0;
        const double* row = d.w.value().data() + i * in;
        for (std::size_t j = 0; j < in; ++j) acc += row[j] * omega[j];
        s[i] = d.w_scale * acc + d.b.value()[i];
    }
    return s;
}

Tensor eval_style_tangent(const nn::Dense& d, const Tensor& omega_dot) {
    const std::size_t out = d.w.shape()[0], in = d.w.shape()[1];
    Tensor s({out});
    for (std::size_t i = 0; i < out; ++i) {
        double acc = 0;
        const double* row = d.w.value().data() + i * in;
        for (std::size_t j = 0; j < in; ++j) acc += row[j] * omega_dot[j];
        s[i] = d.w_scale * acc;
    }
    return s;
}

Tensor scaled_weights(const nn::ModConv& mc) {
    Tensor w = mc.w.value();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] *= mc.w_scale;
    return w;
}

// per-(out,in) squared kernel norms of the scaled weights
Tensor weight_sqnorms(const Tensor& weff) {
    const std::size_t co = weff.dim(0), ci = weff.dim(1), kk = weff.dim(2) * weff.dim(3);
    Tensor q({co, ci});
    for (std::size_t i = 0; i < co * ci; ++i) {
        const double* p = weff.data() + i * kk;
        double acc = 0;
        for (std::size_t j = 0; j < kk; ++j) acc += p[j] * p[j];
        q[i] = acc;
    }
    return q;
}

void scale_channels_inplace(Tensor& x, const Tensor& s) {
    const std::size_t c = x.dim(1), m = x.dim(2) * x.dim(3);
    for (std::size_t ic = 0; ic < c; ++ic) {
        double* blk = x.data() + ic * m;
        for (std::size_t i = 0; i < m; ++i) blk[i] *= s[ic];
    }
}

} // namespace

namespace {

// One modulated-conv stage evaluated on a single sample with everything the
// tangent pass needs cached. Heads use tanh, blocks use leaky-relu.
StageCache eval_stage(const nn::ModConv& mc, const Tensor& x_in, const Tensor& omega,
                      double lrelu_slope, bool is_head) {
    StageCache c;
    c.style = eval_style(mc.style, omega);
    c.up_in = mc.upsample ? kern::upsample2(x_in) : x_in;
    Tensor xs = c.up_in;
    scale_channels_inplace(xs, c.style);
    const Tensor weff = scaled_weights(mc);
    c.conv_out = kern::conv2d(xs, weff, 1, mc.pad);
    Tensor pre = c.conv_out;
    const std::size_t co = pre.dim(1);
    if (mc.demodulate) {
        const Tensor q = weight_sqnorms(weff);
        const std::size_t ci = q.dim(1);
        c.demod = Tensor({co});
        for (std::size_t i = 0; i < co; ++i) {
            double e = 1e-8;
            for (std::size_t j = 0; j < ci; ++j) e += q[i * ci + j] * c.style[j] * c.style[j];
            c.demod[i] = 1.0 / std::sqrt(e);
        }
        scale_channels_inplace(pre, c.demod);
    }
    const std::size_t m = pre.dim(2) * pre.dim(3);
    for (std::size_t ic = 0; ic < co; ++ic) {
        double* pp = pre.data() + ic * m;
        for (std::size_t i = 0; i < m; ++i) pp[i] += mc.b.value()[ic];
    }
    c.deriv = Tensor(pre.shape());
    if (is_head) {
        for (std::size_t i = 0; i < pre.size(); ++i) {
            pre[i] = std::tanh(pre[i]);
            c.deriv[i] = 1.0 - pre[i] * pre[i];
        }
    } else {
        for (std::size_t i = 0; i < pre.size(); ++i) {
            c.deriv[i] = pre[i] > 0 ? 1.0 : lrelu_slope;
            if (pre[i] <= 0) pre[i] *= lrelu_slope;
        }
    }
    c.out = pre;
    return c;
}

// Tangent through one cached stage; empty xdot means a zero input tangent.
Tensor jvp_stage(const nn::ModConv& mc, const StageCache& c, const Tensor& xdot,
                 const Tensor& omega_dot) {
    const Tensor sdot = eval_style_tangent(mc.style, omega_dot);
    Tensor xs_dot = c.up_in; // up_in * sdot term
    scale_channels_inplace(xs_dot, sdot);
    if (xdot.size() > 0) {
        Tensor xud = mc.upsample ? kern::upsample2(xdot) : xdot;
        scale_channels_inplace(xud, c.style);
        for (std::size_t i = 0; i < xs_dot.size(); ++i) xs_dot[i] += xud[i];
    }
    const Tensor weff = scaled_weights(mc);
    Tensor ydot = kern::conv2d(xs_dot, weff, 1, mc.pad);
    if (mc.demodulate) {
        const Tensor q = weight_sqnorms(weff);
        const std::size_t co = q.dim(0), ci = q.dim(1);
        Tensor ddot({co});
        for (std::size_t i = 0; i < co; ++i) {
            double edot = 0;
            for (std::size_t j = 0; j < ci; ++j)
                edot += 2.0 * q[i * ci + j] * c.style[j] * sdot[j];
            ddot[i] = -0.5 * c.demod[i] * c.demod[i] * c.demod[i] * edot;
        }
        scale_channels_inplace(ydot, c.demod);
        Tensor yterm = c.conv_out;
        scale_channels_inplace(yterm, ddot);
        for (std::size_t i = 0; i < ydot.size(); ++i) ydot[i] += yterm[i];
    }
    for (std::size_t i = 0; i < ydot.size(); ++i) ydot[i] *= c.deriv[i];
    return ydot;
}

} // namespace

SynthCache SynthesisNet::forward_cached(const Tensor& omega) const {
    SynthCache cache;
    cache.omega = omega;
    const auto& cshape = const_input.shape();
    Tensor x = const_input.value().reshaped({1, cshape[0], cshape[1], cshape[2]});
    for (const auto& blk : blocks) {
        cache.shared.push_back(eval_stage(blk, x, omega, lrelu_slope, false));
        x = cache.shared.back().out;
    }
    if (!split) {
        cache.head = eval_stage(head, x, omega, lrelu_slope, true);
        const Tensor& t = cache.head.out;
        cache.pair_out = t.reshaped({6, t.dim(2), t.dim(3)});
        return cache;
    }
    Tensor xa = x, xb = x;
    for (const auto& blk : branch_former) {
        cache.branch_former.push_back(eval_stage(blk, xa, omega, lrelu_slope, false));
        xa = cache.branch_former.back().out;
    }
    for (const auto& blk : branch_latter) {
        cache.branch_latter.push_back(eval_stage(blk, xb, omega, lrelu_slope, false));
        xb = cache.branch_latter.back().out;
    }
    cache.head_former = eval_stage(head_former, xa, omega, lrelu_slope, true);
    cache.head_latter = eval_stage(head_latter, xb, omega, lrelu_slope, true);
    const Tensor& ta = cache.head_former.out;
    const Tensor& tb = cache.head_latter.out;
    const std::size_t res = ta.dim(2);
    cache.pair_out = Tensor({6, res, res});
    std::copy_n(ta.data(), 3 * res * res, cache.pair_out.data());
    std::copy_n(tb.data(), 3 * res * res, cache.pair_out.data() + 3 * res * res);
    return cache;
}

Tensor SynthesisNet::jvp(const SynthCache& cache, const Tensor& omega_dot) const {
    Tensor xdot; // empty = zero tangent (const input)
    for (std::size_t bi = 0; bi < blocks.size(); ++bi)
        xdot = jvp_stage(blocks[bi], cache.shared[bi], xdot, omega_dot);
    if (!split) {
        Tensor ydot = jvp_stage(head, cache.head, xdot, omega_dot);
        return ydot.reshaped({6, ydot.dim(2), ydot.dim(3)});
    }
    Tensor xa = xdot, xb = xdot;
    for (std::size_t bi = 0; bi < branch_former.size(); ++bi)
        xa = jvp_stage(branch_former[bi], cache.branch_former[bi], xa, omega_dot);
    for (std::size_t bi = 0; bi < branch_latter.size(); ++bi)
        xb = jvp_stage(branch_latter[bi], cache.branch_latter[bi], xb, omega_dot);
    Tensor ya = jvp_stage(head_former, cache.head_former, xa, omega_dot);
    Tensor yb = jvp_stage(head_latter, cache.head_latter, xb, omega_dot);
    const std::size_t res = ya.dim(2);
    Tensor out({6, res, res});
    std::copy_n(ya.data(), 3 * res * res, out.data());
    std::copy_n(yb.data(), 3 * res * res, out.data() + 3 * res * res);
    return out;
}

PairGenerator::PairGenerator(Rng& rng, const PairGanConfig& cfg) : config(cfg) {
    mapping = MappingNet(rng, cfg);
    synthesis = SynthesisNet(rng, cfg);
}

std::vector<Var> PairGenerator::params() {
    std::vector<Var> out;
    mapping.collect(out);
    synthesis.collect(out);
    return out;
}

Tensor PairGenerator::map_latent(const Tensor& z) const {
    if (z.size() != config.d_z)
        throw ShapeError("map_latent: |z| = " + std::to_string(z.size()) + ", expected " +
                         std::to_string(config.d_z));
    Var zv = constant(z.reshaped({1, config.d_z}));
    return mapping.forward(zv).value().reshaped({config.d_omega});
}

Tensor PairGenerator::synthesize_pair(const Tensor& omega) const {
    if (omega.size() != config.d_omega)
        throw ShapeError("synthesize_pair: |omega| = " + std::to_string(omega.size()) +
                         ", expected " + std::to_string(config.d_omega));
    SynthCache c = synthesis.forward_cached(omega);
    return c.pair_out;
}

Var PairGenerator::forward(const Var& z) const { return synthesis.forward(mapping.forward(z)); }

Var PairGenerator::synthesize(const Var& omega) const { return synthesis.forward(omega); }

PairDiscriminator::PairDiscriminator(Rng& rng, const PairGanConfig& cfg) {
    const auto& dc = cfg.disc_channels;
    if (dc.size() < 2) throw ConfigError("discriminator needs at least 2 channel entries");
    const std::size_t res = cfg.out_res();
    const std::size_t final_res = res >> (dc.size() - 1);
    if (final_res != 4)
        throw ConfigError("disc_channels length must downsample " + std::to_string(res) +
                          " to 4 (got " + std::to_string(final_res) + ")");
    from_pairs = nn::Conv2dLayer(rng, 6, dc[0], 3, 1, 1, std::sqrt(2.0));
    for (std::size_t i = 0; i + 1 < dc.size(); ++i)
        downs.emplace_back(rng, dc[i], dc[i + 1], 3, 2, 1, std::sqrt(2.0));
    post_mbstd = nn::Conv2dLayer(rng, dc.back() + 1, dc.back(), 3, 1, 1, std::sqrt(2.0));
    fc_hidden = nn::Dense(rng, dc.back() * 16, cfg.disc_fc, std::sqrt(2.0), 0.0);
    fc_out = nn::Dense(rng, cfg.disc_fc, 1, 1.0, 0.0);
}

Var PairDiscriminator::forward(const Var& x) const {
    if (x.shape().size() != 4 || x.shape()[1] != 6)
        throw ShapeError("pair discriminator expects [N,6,R,R] input, got " +
                         Tensor::shape_str(x.shape()));
    Var h = leaky_relu(from_pairs.forward(x), lrelu_slope);
    for (const auto& d : downs) h = leaky_relu(d.forward(h), lrelu_slope);
    h = nn::minibatch_stddev(h);
    h = leaky_relu(post_mbstd.forward(h), lrelu_slope);
    const std::size_t n = h.shape()[0];
    h = reshape(h, {n, h.size() / n});
    h = leaky_relu(fc_hidden.forward(h), lrelu_slope);
    return fc_out.forward(h);
}

std::vector<Var> PairDiscriminator::params() {
    std::vector<Var> out;
    from_pairs.collect(out);
    for (auto& d : downs) d.collect(out);
    post_mbstd.collect(out);
    fc_hidden.collect(out);
    fc_out.collect(out);
    return out;
}

double discriminate_pair(PairDiscriminator& disc, const Tensor& pair) {
    if (pair.ndim() != 3 || pair.dim(0) != 6)
        throw ShapeError("discriminate_pair: expects [6,H,W], got " +
                         Tensor::shape_str(pair.shape()));
    Var x = constant(pair.reshaped({1, pair.dim(0), pair.dim(1), pair.dim(2)}));
    return disc.forward(x).value()[0];
}

namespace {

Tensor randn_batch(Rng& rng, std::size_t n, std::size_t d) {
    Tensor t({n, d});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
    return t;
}

std::vector<Tensor> flatten_batch(const Tensor& batch) {
    const std::size_t n = batch.dim(0), m = batch.size() / batch.dim(0);
    std::vector<Tensor> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Tensor t({m});
        std::copy_n(batch.data() + i * m, m, t.data());
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace

TrainedPairGan train_pairgan(const std::vector<synthvideo::VideoClip>& corpus,
                             const PairGanConfig& cfg) {
    if (corpus.empty()) throw ConfigError("train_pairgan: empty corpus");
    for (const auto& c : corpus)
        if (c.frames < cfg.k + 1)
            throw ConfigError("train_pairgan: corpus clip shorter than k+1 frames");
    if (corpus[0].height != cfg.out_res() || corpus[0].width != cfg.out_res())
        throw ConfigError("train_pairgan: corpus resolution " + std::to_string(corpus[0].height) +
                          " != generator resolution " + std::to_string(cfg.out_res()));

    Rng master(cfg.seed);
    Rng rng_init = master.split(0);
    Rng rng_data = master.split(1);
    Rng rng_z = master.split(2);
    Rng rng_eval_base = master.split(3);

    TrainedPairGan out{PairGenerator(rng_init, cfg), PairDiscriminator(rng_init, cfg), {}};
    auto g_params = out.gen.params();
    auto d_params = out.disc.params();
    nn::Adam opt_g, opt_d;
    opt_g.lr = cfg.lr;
    opt_g.beta1 = cfg.adam_beta1;
    opt_g.beta2 = cfg.adam_beta2;
    opt_d = opt_g;
    opt_g.init(g_params);
    opt_d.init(d_params);

    constexpr std::uint64_t kExtractorSeed = 0x5eedULL;
    std::vector<Tensor> best_g = nn::snapshot(g_params);
    std::vector<Tensor> last_finite_g = best_g;
    std::vector<Tensor> last_finite_d = nn::snapshot(d_params);
    out.history.best_frechet = std::numeric_limits<double>::infinity();

    auto evaluate = [&](std::size_t step) {
        Rng rng_eval = rng_eval_base.split(step);
        auto real = synthvideo::pairs_to_batch(
            synthvideo::sample_pairs(corpus, cfg.k, cfg.eval_samples, rng_eval));
        Var z = constant(randn_batch(rng_eval, cfg.eval_samples, cfg.d_z));
        Tensor fake = out.gen.forward(z).value();
        const double fd =
            metrics::feature_frechet(flatten_batch(fake), flatten_batch(real), kExtractorSeed);
        out.history.eval_step.push_back(step);
        out.history.proxy_frechet.push_back(fd);
        if (fd < out.history.best_frechet) {
            out.history.best_frechet = fd;
            out.history.best_step = step;
            best_g = nn::snapshot(g_params);
        }
    };

    for (std::size_t step = 0; step < cfg.steps; ++step) {
        // ---- discriminator step (real, fake, R1 on real) ----
        auto real_batch = synthvideo::pairs_to_batch(
            synthvideo::sample_pairs(corpus, cfg.k, cfg.batch, rng_data));
        Var x_real(real_batch, /*requires_grad=*/true);
        Var z = constant(randn_batch(rng_z, cfg.batch, cfg.d_z));
        Var fake = detach(out.gen.forward(z));

        Var logits_real = out.disc.forward(x_real);
        Var logits_fake = out.disc.forward(fake);
        Var loss_d = add(mean_all(softplus_op(neg(logits_real))),
                         mean_all(softplus_op(logits_fake)));
        Var gx = grad_vars(sum_all(logits_real), {x_real})[0];
        Var r1 = scale(sum_all(mul(gx, gx)), 1.0 / static_cast<double>(cfg.batch));
        Var loss_d_total = add(loss_d, scale(r1, cfg.gamma_r1 / 2.0));

        auto d_grads = grad(loss_d_total, d_params);
        // ---- generator step ----
        Var z2 = constant(randn_batch(rng_z, cfg.batch, cfg.d_z));
        Var fake2 = out.gen.forward(z2);
        Var loss_g = mean_all(softplus_op(neg(out.disc.forward(fake2))));
        auto g_grads = grad(loss_g, g_params);

        const double ld = loss_d_total.value()[0];
        const double lg = loss_g.value()[0];
        const double r1v = r1.value()[0];
        if (!std::isfinite(ld) || !std::isfinite(lg)) {
            nn::restore(g_params, last_finite_g);
            nn::restore(d_params, last_finite_d);
            out.history.diverged = true;
            break;
        }
        opt_d.step(d_params, d_grads);
        opt_g.step(g_params, g_grads);

        out.history.step.push_back(step);
        out.history.loss_d.push_back(ld);
        out.history.loss_g.push_back(lg);
        out.history.r1.push_back(r1v);
        out.history.last_finite_step = step;
        last_finite_g = nn::snapshot(g_params);
        last_finite_d = nn::snapshot(d_params);

        if ((step + 1) % cfg.eval_every == 0 || step + 1 == cfg.steps) evaluate(step + 1);
    }
    if (out.history.proxy_frechet.empty()) evaluate(out.history.last_finite_step);
    // the selected checkpoint is the proxy-Frechet minimizer
    nn::restore(g_params, best_g);
    return out;
}

// ------------------------------------------------------------- persistence

namespace {

void push_params(std::vector<std::pair<std::string, Tensor>>& arrays, const std::string& prefix,
                 std::vector<Var>& params) {
    for (std::size_t i = 0; i < params.size(); ++i)
        arrays.emplace_back(prefix + std::to_string(i), params[i].value());
}

} // namespace

std::string save_generator(const std::string& path, const PairGenerator& gen, std::size_t step,
                           std::uint64_t seed, const std::string& corpus_hash) {
    std::vector<std::pair<std::string, Tensor>> arrays;
    PairGenerator& g = const_cast<PairGenerator&>(gen);
    auto params = g.params();
    push_params(arrays, "gen.p", params);
    io::save_archive(path, arrays);
    const std::string hash = io::file_hash_hex(path);
    nlohmann::json manifest{{"format_version", 1},
                            {"kind", "pair_generator"},
                            {"d_z", gen.config.d_z},
                            {"d_omega", gen.config.d_omega},
                            {"map_layers", gen.config.map_layers},
                            {"block_dims", gen.config.synth_channels},
                            {"split_blocks", gen.config.split_blocks},
                            {"step", step},
                            {"seed", seed},
                            {"k", gen.config.k},
                            {"corpus_hash", corpus_hash},
                            {"archive_hash", hash}};
    io::save_json(path + ".json", manifest);
    return hash;
}

PairGenerator load_generator(const std::string& path) {
    const auto manifest = io::load_json(path + ".json");
    if (manifest.value("kind", "") != "pair_generator")
        throw ConfigError("checkpoint manifest is not a pair_generator: " + path);
    if (manifest.value("format_version", -1) != 1)
        throw ConfigError("unsupported checkpoint format_version in " + path);
    const std::string expect_hash = manifest.at("archive_hash").get<std::string>();
    const std::string actual_hash = io::file_hash_hex(path);
    if (expect_hash != actual_hash)
        throw HashMismatchError("checkpoint archive hash mismatch for " + path + ": manifest " +
                                expect_hash + " vs file " + actual_hash);

    PairGanConfig cfg;
    cfg.d_z = manifest.at("d_z").get<std::size_t>();
    cfg.d_omega = manifest.at("d_omega").get<std::size_t>();
    cfg.map_layers = manifest.at("map_layers").get<std::size_t>();
    cfg.synth_channels = manifest.at("block_dims").get<std::vector<std::size_t>>();
    cfg.split_blocks = manifest.value("split_blocks", std::size_t(0));
    cfg.k = manifest.at("k").get<std::size_t>();
    Rng rng(0);
    PairGenerator gen(rng, cfg);
    auto params = gen.params();
    auto arrays = io::load_archive(path);
    if (arrays.size() != params.size())
        throw ConfigError("checkpoint array count " + std::to_string(arrays.size()) +
                          " does not match architecture (" + std::to_string(params.size()) + ")");
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto it = arrays.find("gen.p" + std::to_string(i));
        if (it == arrays.end()) throw ConfigError("checkpoint missing array gen.p" + std::to_string(i));
        if (!it->second.same_shape(params[i].value()))
            throw ConfigError("checkpoint array gen.p" + std::to_string(i) + " has shape " +
                              Tensor::shape_str(it->second.shape()) + ", architecture expects " +
                              Tensor::shape_str(params[i].shape()));
        params[i].mutable_value() = it->second;
    }
    return gen;
}

std::string generator_hash(const std::string& path) { return io::file_hash_hex(path); }

} // namespace mvg::pairgan
