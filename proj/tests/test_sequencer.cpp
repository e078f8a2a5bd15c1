#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "mvg/errors.hpp"
#include "mvg/io.hpp"
#include "mvg/sequencer.hpp"

using namespace mvg;
using namespace mvg::ad;
using namespace mvg::sequencer;
using motionspace::MotionBasis;
using pairgan::PairGanConfig;
using pairgan::PairGenerator;

namespace {

PairGanConfig small_gen_config() {
    PairGanConfig cfg;
    cfg.d_z = 8;
    cfg.d_omega = 8;
    cfg.map_layers = 2;
    cfg.synth_channels = {8, 6};
    cfg.disc_channels = {6, 8};
    cfg.disc_fc = 16;
    cfg.seed = 3;
    return cfg;
}

// hand-built basis with unit-vector rows
MotionBasis axis_basis(std::size_t m, std::size_t d, const std::string& gen_hash) {
    MotionBasis b;
    b.backward_codes = Tensor({m, d});
    b.forward_codes = Tensor({m, d});
    for (std::size_t r = 0; r < m; ++r) {
        b.backward_codes[r * d + r] = 1.0;          // e_r
        b.forward_codes[r * d + (r + m)] = 1.0;     // e_{r+m}
    }
    b.generator_hash = gen_hash;
    b.config.m = m;
    return b;
}

SequencerParams make_params(std::size_t d, std::size_t m, std::uint64_t seed) {
    Rng rng(seed);
    return SequencerParams(rng, d, m);
}

} // namespace

TEST_CASE("encode_content: determinism, dims, sensitivity") {
    auto p = make_params(8, 2, 5);
    Rng rng(1);
    Tensor om({2, 8});
    for (std::size_t i = 0; i < om.size(); ++i) om[i] = rng.normal();
    auto [h1, c1] = encode_content(p, constant(om));
    auto [h2, c2] = encode_content(p, constant(om));
    CHECK(h1.shape() == std::vector<std::size_t>{2, 8});
    CHECK(c1.shape() == std::vector<std::size_t>{2, 8});
    for (std::size_t i = 0; i < h1.size(); ++i) {
        CHECK(h1.value()[i] == h2.value()[i]);
        CHECK(c1.value()[i] == c2.value()[i]);
    }
    // distinct content codes give distinct hidden states (row 0 vs row 1)
    double diff = 0;
    for (std::size_t j = 0; j < 8; ++j)
        diff += std::fabs(h1.value()[j] - h1.value()[8 + j]);
    CHECK(diff > 1e-9);

    CHECK_THROWS_AS(encode_content(p, constant(Tensor({2, 7}))), ShapeError);
}

TEST_CASE("decode_step: coefficient dim and two-step determinism") {
    auto p = make_params(8, 3, 7);
    // give the zero-initialized output map some weights
    Rng wr(9);
    Tensor& w = p.out_map.w.mutable_value();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.1 * wr.normal();

    Rng rng(2);
    Tensor om({1, 8});
    for (std::size_t i = 0; i < om.size(); ++i) om[i] = rng.normal();
    auto [h, c] = encode_content(p, constant(om));

    auto s1 = decode_step(p, h, c);
    auto s2 = decode_step(p, s1.h, s1.c);
    CHECK(s1.coeffs.shape() == std::vector<std::size_t>{1, 3});

    auto r1 = decode_step(p, h, c);
    auto r2 = decode_step(p, r1.h, r1.c);
    for (std::size_t i = 0; i < s2.coeffs.size(); ++i)
        CHECK(s2.coeffs.value()[i] == r2.coeffs.value()[i]);
}

TEST_CASE("roll_latents: zero map gives static rollout, n=0 gives [omega0]") {
    auto p = make_params(8, 2, 11); // out_map zero-initialized
    auto basis = axis_basis(2, 8, "h");
    Tensor om({8});
    for (std::size_t i = 0; i < 8; ++i) om[i] = 0.1 * (double(i) - 3.0);

    auto lat0 = roll_latents(p, basis, om, 0);
    REQUIRE(lat0.size() == 1);
    for (std::size_t i = 0; i < 8; ++i) CHECK(lat0[0][i] == om[i]);

    auto lat = roll_latents(p, basis, om, 6);
    REQUIRE(lat.size() == 7);
    for (const auto& l : lat)
        for (std::size_t i = 0; i < 8; ++i) CHECK(l[i] == doctest::Approx(om[i]));
}

TEST_CASE("roll_latents parity: odd steps backward codes, even steps forward codes") {
    auto p = make_params(8, 1, 13);
    // force coefficients to exactly 1: zero weights, bias 1
    p.out_map.b.mutable_value()[0] = 1.0;
    MotionBasis basis = axis_basis(1, 8, "h");

    Tensor om({8});
    RolloutTrace trace;
    auto lat = roll_latents(p, basis, om, 4, &trace);
    REQUIRE(lat.size() == 5);
    CHECK(trace.basis_used == std::vector<char>{'b', 'f', 'b', 'f'});
    for (const auto& cf : trace.coefficients) CHECK(cf[0] == doctest::Approx(1.0));

    // omega_1 = omega_0 + b[0]; omega_2 = omega_1 + f[0]
    CHECK(lat[1][0] == doctest::Approx(om[0] + 1.0));
    CHECK(lat[2][0] == doctest::Approx(om[0] + 1.0));
    CHECK(lat[2][1] == doctest::Approx(om[1] + 1.0)); // e_1 = forward row 0
    CHECK(lat[3][0] == doctest::Approx(om[0] + 2.0)); // backward again
    CHECK(lat[4][1] == doctest::Approx(om[1] + 2.0)); // forward again
}

TEST_CASE("assemble_video frame-selection rule (both first modes, n=3)") {
    auto gcfg = small_gen_config();
    Rng rng(gcfg.seed);
    PairGenerator gen(rng, gcfg);

    Rng ar(3);
    std::vector<Tensor> latents;
    for (int i = 0; i < 4; ++i) {
        Tensor om({gcfg.d_omega});
        for (std::size_t j = 0; j < om.size(); ++j) om[j] = ar.normal();
        latents.push_back(om);
    }
    const std::size_t res = gcfg.out_res();
    const std::size_t fsz = 3 * res * res;

    auto check_mode = [&](FirstFrame first, const std::vector<bool>& latter_expected) {
        auto clip = assemble_video(gen, latents, first);
        REQUIRE(clip.frames == 4);
        for (std::size_t i = 0; i < 4; ++i) {
            Tensor pair = gen.synthesize_pair(latents[i]);
            const std::size_t off = latter_expected[i] ? fsz : 0;
            for (std::size_t j = 0; j < fsz; ++j)
                CHECK(clip.pixels[i * fsz + j] == io::quant8(pair[off + j]));
        }
    };
    // latter_first: x~_{01}, x~_{10}, x~_{21}, x~_{30}
    check_mode(FirstFrame::latter_first, {true, false, true, false});
    // former_first: x~_{00}, x~_{11}, x~_{20}, x~_{31}
    check_mode(FirstFrame::former_first, {false, true, false, true});
}

TEST_CASE("degenerate rollout: all coefficients zero -> frames alternate between pair halves") {
    auto gcfg = small_gen_config();
    Rng rng(gcfg.seed);
    PairGenerator gen(rng, gcfg);
    auto p = make_params(gcfg.d_omega, 2, 17); // zero out_map
    auto basis = axis_basis(2, gcfg.d_omega, "h");
    Tensor om({gcfg.d_omega});
    Rng ar(5);
    for (std::size_t i = 0; i < om.size(); ++i) om[i] = ar.normal();

    auto latents = roll_latents(p, basis, om, 5);
    auto clip = assemble_video(gen, latents, FirstFrame::latter_first);
    const std::size_t fsz = 3 * gcfg.out_res() * gcfg.out_res();
    // frames 0,2,4 identical; frames 1,3,5 identical
    for (std::size_t t : {std::size_t(2), std::size_t(4)})
        CHECK(std::equal(clip.pixels.begin(), clip.pixels.begin() + fsz,
                         clip.pixels.begin() + t * fsz));
    for (std::size_t t : {std::size_t(3), std::size_t(5)})
        CHECK(std::equal(clip.pixels.begin() + fsz, clip.pixels.begin() + 2 * fsz,
                         clip.pixels.begin() + t * fsz));
}

TEST_CASE("dv/dr discriminator inputs: structure") {
    Rng rng(7);
    Tensor clips({1, 3, 4, 2, 2});
    for (std::size_t i = 0; i < clips.size(); ++i) clips[i] = rng.normal();
    Var v = constant(clips);

    Var dvin = dv_input(v);
    CHECK(dvin.shape() == std::vector<std::size_t>{1, 6, 4, 2, 2});
    // channels 3:6 at every t equal frame 0
    const std::size_t hw = 4;
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t p = 0; p < hw; ++p) {
                const double expected = clips[((c * 4) + 0) * hw + p];
                CHECK(dvin.value()[(((3 + c) * 4) + t) * hw + p] == expected);
            }

    Var drin = dr_input(v);
    // input[:, t, 3:6] == input[:, T-1-t, 0:3]
    for (std::size_t t = 0; t < 4; ++t)
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t p = 0; p < hw; ++p)
                CHECK(drin.value()[(((3 + c) * 4) + t) * hw + p] ==
                      drin.value()[((c * 4) + (3 - t)) * hw + p]);

    // palindromic clip: the two channel halves are identical frame-wise
    Tensor pal({1, 3, 4, 2, 2});
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t t = 0; t < 4; ++t)
            for (std::size_t p = 0; p < hw; ++p)
                pal[((c * 4) + t) * hw + p] = (t == 0 || t == 3) ? 0.5 : -0.25;
    Var drp = dr_input(constant(pal));
    for (std::size_t i = 0; i < 3 * 4 * hw; ++i)
        CHECK(drp.value()[i] == drp.value()[3 * 4 * hw + i]);
}

TEST_CASE("d_v_loss analytic: constant-half discriminator gives 2 ln 2") {
    Rng rng(11);
    VideoDiscriminator dv(rng, {4, 6}, 4, 8, "traditional");
    // zero every parameter -> logits exactly 0 -> probability 1/2
    for (auto& p : dv.params()) {
        Tensor& t = p.mutable_value();
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.0;
    }
    Tensor real({2, 3, 4, 8, 8}), fake({2, 3, 4, 8, 8});
    for (std::size_t i = 0; i < real.size(); ++i) {
        real[i] = rng.normal() * 0.5;
        fake[i] = rng.normal() * 0.5;
    }
    auto [loss_d, loss_g] = d_v_loss(dv, constant(real), constant(fake));
    CHECK(loss_d.value()[0] == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
    CHECK(loss_g.value()[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-12));

    auto [loss_rd, loss_rg] = d_r_loss(dv, constant(real), constant(fake));
    CHECK(loss_rd.value()[0] == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("d_v_loss limit: a separating discriminator drives loss_d toward 0") {
    Rng rng(13);
    VideoDiscriminator dv(rng, {4}, 4, 8, "traditional");
    // positive conv weights + positive fc weights: logit ~ sum of inputs
    Tensor& cw = dv.blocks[0].w.mutable_value();
    for (std::size_t i = 0; i < cw.size(); ++i) cw[i] = 0.05;
    Tensor& fw = dv.fc_out.w.mutable_value();
    for (std::size_t i = 0; i < fw.size(); ++i) fw[i] = 4.0;

    Tensor real = Tensor::full({1, 3, 4, 8, 8}, 1.0);
    Tensor fake = Tensor::full({1, 3, 4, 8, 8}, -1.0);
    auto [loss_d, loss_g] = d_v_loss(dv, constant(real), constant(fake));
    CHECK(loss_d.value()[0] < 0.1);
    CHECK(loss_d.value()[0] > 0.0);
}

TEST_CASE("loss_g gradient w.r.t. generated pixels matches finite differences") {
    Rng rng(17);
    VideoDiscriminator dv(rng, {4, 6}, 4, 8, "traditional");
    Tensor real({1, 3, 4, 8, 8}), fake({1, 3, 4, 8, 8});
    for (std::size_t i = 0; i < real.size(); ++i) {
        real[i] = 0.3 * rng.normal();
        fake[i] = 0.3 * rng.normal();
    }
    Var fake_v(fake, true);
    auto loss_of = [&](const Var& fv) {
        return d_v_loss(dv, constant(real), fv).second;
    };
    auto g = grad(loss_of(fake_v), {fake_v});
    const double h = 1e-5;
    double max_rel = 0;
    Tensor& ft = fake_v.mutable_value();
    for (std::size_t i = 0; i < ft.size(); i += 97) {
        const double orig = ft[i];
        ft[i] = orig + h;
        const double fp = loss_of(fake_v).value()[0];
        ft[i] = orig - h;
        const double fm = loss_of(fake_v).value()[0];
        ft[i] = orig;
        const double fd = (fp - fm) / (2 * h);
        const double an = g[0][i];
        max_rel = std::max(max_rel,
                           std::fabs(fd - an) / std::max({std::fabs(fd), std::fabs(an), 1e-7}));
    }
    CHECK(max_rel < 1e-3);
}

TEST_CASE("interpolate_latents") {
    std::vector<Tensor> lat{Tensor({2}, {0.0, 1.0}), Tensor({2}, {1.0, 3.0})};
    auto same = interpolate_latents(lat, 1);
    CHECK(same.size() == 2);

    auto mid = interpolate_latents(lat, 2);
    REQUIRE(mid.size() == 3);
    CHECK(mid[1][0] == doctest::Approx(0.5));
    CHECK(mid[1][1] == doctest::Approx(2.0));
    CHECK(mid[0][0] == 0.0);
    CHECK(mid[2][1] == 3.0);

    std::vector<Tensor> three{Tensor({1}, {0.0}), Tensor({1}, {1.0}), Tensor({1}, {2.0})};
    auto dense = interpolate_latents(three, 4);
    CHECK(dense.size() == 9);
    CHECK(dense[2][0] == doctest::Approx(0.5));
    CHECK(dense[8][0] == 2.0);

    CHECK_THROWS_AS(interpolate_latents(lat, 0), ConfigError);
    CHECK_THROWS_AS(interpolate_latents({lat[0]}, 2), ConfigError);
}

TEST_CASE("train_sequencer: hash gate, determinism, finite losses, gradient flow") {
    synthvideo::CorpusConfig ccfg;
    ccfg.n_videos = 4;
    ccfg.frames = 10;
    ccfg.seed = 7;
    auto corpus = synthvideo::make_corpus(ccfg);

    auto gcfg = small_gen_config();
    gcfg.synth_channels = {8, 6, 6};   // 16x16 output won't match 32x32 corpus...
    gcfg.disc_channels = {6, 8, 8};
    Rng rng(gcfg.seed);

    // use a 32x32 generator to match the corpus
    gcfg.synth_channels = {8, 6, 6, 6};
    gcfg.disc_channels = {6, 8, 8, 8};
    PairGenerator gen(rng, gcfg);

    auto basis = axis_basis(2, gcfg.d_omega, "genhash");

    SequencerConfig scfg;
    scfg.n_frames = 4;
    scfg.epochs = 1;
    scfg.batch = 2;
    scfg.video_disc_channels = {4, 6};
    scfg.seed = 31;

    CHECK_THROWS_AS(
        train_sequencer(gen, "differenthash", basis, "bh", corpus, scfg),
        HashMismatchError);

    auto t1 = train_sequencer(gen, "genhash", basis, "bh", corpus, scfg);
    CHECK(t1.history.finite);
    CHECK(!t1.history.loss_seq.empty());
    for (double v : t1.history.loss_seq) CHECK(std::isfinite(v));

    auto t2 = train_sequencer(gen, "genhash", basis, "bh", corpus, scfg);
    auto p1 = t1.params.params();
    auto p2 = t2.params.params();
    for (std::size_t i = 0; i < p1.size(); ++i)
        for (std::size_t j = 0; j < p1[i].size(); ++j)
            CHECK(p1[i].value()[j] == p2[i].value()[j]);

    // gradient flow: loss_g reaches encoder parameters through rollout +
    // synthesis + discriminator
    auto gen_params = gen.params();
    for (auto& p : gen_params) p.set_requires_grad(false);
    Tensor z({2, gcfg.d_z});
    Rng zr(5);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = zr.normal();
    Var omega0 = gen.mapping.forward(constant(z));
    auto latents = roll_latents_var(t1.params, basis, omega0, scfg.n_frames - 1);
    std::vector<std::size_t> parity{0, 1, 2, 3};
    Var fake = assemble_video_var(gen, latents, scfg.first, parity);
    auto real_clips = synthvideo::sample_clips(corpus, scfg.n_frames, 2, zr);
    Tensor realt({2, 3, 4, 32, 32});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t t = 0; t < 4; ++t)
                for (std::size_t p = 0; p < 1024; ++p)
                    realt[(((i * 3 + c) * 4) + t) * 1024 + p] =
                        real_clips[i].at(t, c, p / 32, p % 32);
    auto [ld, lg] = d_v_loss(t1.dv, constant(realt), fake);
    std::vector<Var> enc_params;
    t1.params.encoder.collect(enc_params);
    auto gflow = grad(lg, enc_params);
    double total = 0;
    for (const auto& g : gflow) total += norm2(g);
    CHECK(total > 0.0);
    for (auto& p : gen_params) p.set_requires_grad(true);
}

TEST_CASE("generate_long_video modes") {
    auto gcfg = small_gen_config();
    Rng rng(gcfg.seed);
    PairGenerator gen(rng, gcfg);
    auto basis = axis_basis(2, gcfg.d_omega, "h");

    TrainedSequencer seq;
    Rng pr(5);
    seq.params = SequencerParams(pr, gcfg.d_omega, 2);
    seq.config.n_frames = 8;
    seq.config.first = FirstFrame::latter_first;

    Tensor om({gcfg.d_omega});
    Rng ar(9);
    for (std::size_t i = 0; i < om.size(); ++i) om[i] = ar.normal();

    // identity path
    auto plain = generate_long_video(gen, seq, basis, om, 8, LongVideoMode::interpolate);
    CHECK(plain.frames == 8);
    auto direct = generate_video(gen, seq.params, basis, om, 8, seq.config.first);
    CHECK(plain.pixels == direct.pixels);

    auto longv = generate_long_video(gen, seq, basis, om, 32, LongVideoMode::interpolate);
    CHECK(longv.frames == 32);

    CHECK_THROWS_AS(generate_long_video(gen, seq, basis, om, 32, LongVideoMode::subsampled_model),
                    ConfigError);
    seq.config.subsample_stride = 4;
    auto subv = generate_long_video(gen, seq, basis, om, 29, LongVideoMode::subsampled_model);
    CHECK(subv.frames == 29);
}

TEST_CASE("sequencer save/load round trip") {
    namespace fs = std::filesystem;
    Rng pr(5);
    TrainedSequencer seq;
    seq.params = SequencerParams(pr, 8, 2);
    Rng wr(6);
    for (auto& p : seq.params.params()) {
        Tensor& t = p.mutable_value();
        for (std::size_t i = 0; i < t.size(); ++i) t[i] += 0.01 * wr.normal();
    }
    seq.dv = VideoDiscriminator(pr, {4, 6}, 4, 8, "traditional");
    seq.dr = VideoDiscriminator(pr, {4, 6}, 4, 8, "bidirectional");
    seq.di = ImageDiscriminator(pr, 8);
    seq.config.n_frames = 4;
    seq.config.video_disc_channels = {4, 6};
    seq.basis_hash = "bh";
    seq.generator_hash = "gh";

    const std::string path = (fs::temp_directory_path() / "mvg_seq.narc").string();
    fs::remove(path);
    fs::remove(path + ".json");
    save_sequencer(path, seq);
    auto loaded = load_sequencer(path, 8);
    CHECK(loaded.basis_hash == "bh");
    CHECK(loaded.generator_hash == "gh");
    CHECK(loaded.config.n_frames == 4);
    auto p1 = seq.params.params();
    auto p2 = loaded.params.params();
    for (std::size_t i = 0; i < p1.size(); ++i)
        for (std::size_t j = 0; j < p1[i].size(); ++j)
            CHECK(p1[i].value()[j] == p2[i].value()[j]);
    fs::remove(path);
    fs::remove(path + ".json");
}
