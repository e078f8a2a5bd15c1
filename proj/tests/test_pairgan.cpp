#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "mvg/errors.hpp"
#include "mvg/io.hpp"
#include "mvg/pairgan.hpp"

using namespace mvg;
using namespace mvg::ad;
using namespace mvg::pairgan;
using synthvideo::CorpusConfig;
using synthvideo::make_corpus;

namespace {

PairGanConfig toy_config() {
    // 2-block toy: d_omega=4, 8x8 output
    PairGanConfig cfg;
    cfg.d_z = 4;
    cfg.d_omega = 4;
    cfg.map_layers = 2;
    cfg.synth_channels = {6, 4};
    cfg.disc_channels = {6, 8};
    cfg.disc_fc = 16;
    cfg.seed = 3;
    return cfg;
}

PairGanConfig small32_config() {
    PairGanConfig cfg;
    cfg.d_z = 16;
    cfg.d_omega = 16;
    cfg.map_layers = 2;
    cfg.synth_channels = {12, 10, 8, 8};
    cfg.disc_channels = {8, 10, 12, 14};
    cfg.disc_fc = 24;
    cfg.seed = 5;
    return cfg;
}

} // namespace

TEST_CASE("map_latent contract") {
    auto cfg = toy_config();
    Rng rng(cfg.seed);
    PairGenerator gen(rng, cfg);

    Tensor z({4}, {0.3, -1.2, 0.7, 0.1});
    Tensor w1 = gen.map_latent(z);
    Tensor w2 = gen.map_latent(z);
    CHECK(w1.size() == cfg.d_omega);
    for (std::size_t i = 0; i < w1.size(); ++i) CHECK(w1[i] == w2[i]);

    // distinct z map to distinct omega on a random network
    Rng zr(77);
    int distinct = 0;
    for (int rep = 0; rep < 10; ++rep) {
        Tensor za({4}), zb({4});
        for (int i = 0; i < 4; ++i) {
            za[i] = zr.normal();
            zb[i] = zr.normal();
        }
        Tensor wa = gen.map_latent(za), wb = gen.map_latent(zb);
        double diff = 0;
        for (std::size_t i = 0; i < wa.size(); ++i) diff += std::fabs(wa[i] - wb[i]);
        if (diff > 1e-9) ++distinct;
    }
    CHECK(distinct == 10);

    CHECK_THROWS_AS(gen.map_latent(Tensor({3})), ShapeError);
}

TEST_CASE("synthesize_pair contract: shape, range, determinism") {
    auto cfg = small32_config();
    Rng rng(cfg.seed);
    PairGenerator gen(rng, cfg);
    CHECK(cfg.out_res() == 32);

    Rng zr(9);
    for (int rep = 0; rep < 3; ++rep) {
        Tensor omega({cfg.d_omega});
        for (std::size_t i = 0; i < omega.size(); ++i) omega[i] = 3.0 * zr.normal();
        Tensor pair = gen.synthesize_pair(omega);
        CHECK(pair.shape() == std::vector<std::size_t>{6, 32, 32});
        for (std::size_t i = 0; i < pair.size(); ++i) {
            CHECK(pair[i] <= 1.0);
            CHECK(pair[i] >= -1.0);
        }
        Tensor again = gen.synthesize_pair(omega);
        for (std::size_t i = 0; i < pair.size(); ++i) CHECK(pair[i] == again[i]);
    }
    CHECK_THROWS_AS(gen.synthesize_pair(Tensor({cfg.d_omega + 1})), ShapeError);
}

TEST_CASE("cached forward matches taped forward") {
    auto cfg = small32_config();
    Rng rng(cfg.seed);
    PairGenerator gen(rng, cfg);
    Rng zr(4);
    Tensor omega({cfg.d_omega});
    for (std::size_t i = 0; i < omega.size(); ++i) omega[i] = zr.normal();

    Tensor from_cache = gen.synthesize_pair(omega);
    Var om = constant(omega.reshaped({1, cfg.d_omega}));
    Tensor taped = gen.synthesize(om).value();
    double max_diff = 0;
    for (std::size_t i = 0; i < taped.size(); ++i)
        max_diff = std::max(max_diff, std::fabs(taped[i] - from_cache[i]));
    CHECK(max_diff < 1e-12);
}

TEST_CASE("split-branch synthesis: taped forward, cached forward, and jacobian agree") {
    auto cfg = small32_config();
    cfg.split_blocks = 1;
    Rng rng(cfg.seed);
    PairGenerator gen(rng, cfg);
    Rng zr(6);
    Tensor omega({cfg.d_omega});
    for (std::size_t i = 0; i < omega.size(); ++i) omega[i] = zr.normal();

    Tensor cached = gen.synthesize_pair(omega);
    Tensor taped = gen.synthesize(constant(omega.reshaped({1, cfg.d_omega}))).value();
    double max_diff = 0;
    for (std::size_t i = 0; i < taped.size(); ++i)
        max_diff = std::max(max_diff, std::fabs(taped[i] - cached[i]));
    CHECK(max_diff < 1e-12);

    // forward-mode jacobian vs finite differences in split mode
    SynthCache cache = gen.synthesis.forward_cached(omega);
    const double h = 1e-5;
    double num2 = 0, den2 = 0;
    for (std::size_t c = 0; c < cfg.d_omega; c += 3) {
        Tensor dir({cfg.d_omega});
        dir[c] = 1.0;
        Tensor col = gen.synthesis.jvp(cache, dir);
        Tensor op = omega, om = omega;
        op[c] += h;
        om[c] -= h;
        Tensor pp = gen.synthesize_pair(op);
        Tensor pm = gen.synthesize_pair(om);
        for (std::size_t r = 0; r < col.size(); ++r) {
            const double fd = (pp[r] - pm[r]) / (2 * h);
            num2 += (fd - col[r]) * (fd - col[r]);
            den2 += fd * fd;
        }
    }
    CHECK(std::sqrt(num2 / std::max(den2, 1e-300)) < 1e-6);
}

TEST_CASE("discriminator: finite logits, extremes, shape check") {
    auto cfg = small32_config();
    Rng rng(cfg.seed);
    PairDiscriminator disc(rng, cfg);

    Tensor all_plus = Tensor::full({6, 32, 32}, 1.0);
    Tensor all_minus = Tensor::full({6, 32, 32}, -1.0);
    CHECK(std::isfinite(discriminate_pair(disc, all_plus)));
    CHECK(std::isfinite(discriminate_pair(disc, all_minus)));

    const double l1 = discriminate_pair(disc, all_plus);
    const double l2 = discriminate_pair(disc, all_plus);
    CHECK(l1 == l2);

    CHECK_THROWS_AS(discriminate_pair(disc, Tensor({3, 32, 32})), ShapeError);
}

TEST_CASE("analytic gradient check: generator loss vs finite differences (toy, 1e-3)") {
    auto cfg = toy_config();
    Rng rng(cfg.seed);
    PairGenerator gen(rng, cfg);
    PairDiscriminator disc(rng, cfg);
    auto g_params = gen.params();
    auto d_params = disc.params();

    Rng zr(11);
    Tensor zt({2, cfg.d_z});
    for (std::size_t i = 0; i < zt.size(); ++i) zt[i] = zr.normal();

    auto gen_loss = [&]() {
        Var z = constant(zt);
        Var fake = gen.forward(z);
        return mean_all(softplus_op(neg(disc.forward(fake))));
    };

    Var loss = gen_loss();
    std::vector<Var> all_params = g_params;
    for (const auto& p : d_params) all_params.push_back(p);
    auto grads = grad(loss, all_params);

    const double h = 1e-5;
    double max_rel = 0;
    std::size_t checked = 0;
    for (std::size_t pi = 0; pi < all_params.size(); ++pi) {
        Tensor& pv = all_params[pi].mutable_value();
        for (std::size_t i = 0; i < pv.size(); ++i) {
            const double orig = pv[i];
            pv[i] = orig + h;
            const double fp = gen_loss().value()[0];
            pv[i] = orig - h;
            const double fm = gen_loss().value()[0];
            pv[i] = orig;
            const double fd = (fp - fm) / (2 * h);
            const double an = grads[pi][i];
            const double denom = std::max({std::fabs(fd), std::fabs(an), 1e-4});
            max_rel = std::max(max_rel, std::fabs(fd - an) / denom);
            ++checked;
        }
    }
    CHECK(checked > 500); // every parameter of the toy instance
    CHECK(max_rel < 1e-3);
}

TEST_CASE("R1 penalty is zero for constant discriminator") {
    auto cfg = toy_config();
    Rng rng(cfg.seed);
    PairDiscriminator disc(rng, cfg);
    // zero all weights; biases make the output a constant
    auto params = disc.params();
    for (auto& p : params) {
        Tensor& t = p.mutable_value();
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.0;
    }

    Rng zr(13);
    Tensor xt({3, 6, 8, 8});
    for (std::size_t i = 0; i < xt.size(); ++i) xt[i] = zr.normal();
    Var x(xt, true);
    Var logits = disc.forward(x);
    Var gx = grad_vars(sum_all(logits), {x})[0];
    Var r1 = sum_all(mul(gx, gx));
    CHECK(r1.value()[0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("one optimizer step is bit-identical across runs") {
    CorpusConfig ccfg;
    ccfg.n_videos = 4;
    ccfg.frames = 12;
    ccfg.seed = 7;
    auto corpus = make_corpus(ccfg);

    auto cfg = small32_config();
    cfg.steps = 2;
    cfg.batch = 4;
    cfg.eval_every = 2;
    cfg.eval_samples = 4;
    cfg.seed = 21;

    auto r1 = train_pairgan(corpus, cfg);
    auto r2 = train_pairgan(corpus, cfg);
    auto p1 = r1.gen.params();
    auto p2 = r2.gen.params();
    REQUIRE(p1.size() == p2.size());
    for (std::size_t i = 0; i < p1.size(); ++i) {
        const Tensor &a = p1[i].value(), &b = p2[i].value();
        REQUIRE(a.size() == b.size());
        for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == b[j]);
    }
    CHECK(r1.history.loss_d == r2.history.loss_d);
    CHECK(r1.history.loss_g == r2.history.loss_g);
    CHECK_FALSE(r1.history.diverged);
    for (double v : r1.history.loss_d) CHECK(std::isfinite(v));
    for (double v : r1.history.r1) CHECK(std::isfinite(v));
}

TEST_CASE("generator checkpoint save/load round trip with manifest validation") {
    namespace fs = std::filesystem;
    auto cfg = toy_config();
    Rng rng(cfg.seed);
    PairGenerator gen(rng, cfg);

    const std::string path = (fs::temp_directory_path() / "mvg_gen_ckpt.narc").string();
    fs::remove(path);
    fs::remove(path + ".json");
    const std::string hash = save_generator(path, gen, 42, cfg.seed);
    CHECK(hash == generator_hash(path));

    PairGenerator loaded = load_generator(path);
    Tensor z({cfg.d_z}, {0.5, -0.5, 1.0, 0.0});
    Tensor w_orig = gen.map_latent(z);
    Tensor w_load = loaded.map_latent(z);
    for (std::size_t i = 0; i < w_orig.size(); ++i) CHECK(w_orig[i] == w_load[i]);
    Tensor p_orig = gen.synthesize_pair(w_orig);
    Tensor p_load = loaded.synthesize_pair(w_load);
    for (std::size_t i = 0; i < p_orig.size(); ++i) CHECK(p_orig[i] == p_load[i]);

    // corrupt archive -> hash mismatch on load
    std::string content = io::read_file(path);
    content[content.size() / 2] ^= 0x01;
    io::atomic_write_file(path, content);
    CHECK_THROWS_AS(load_generator(path), HashMismatchError);

    fs::remove(path);
    fs::remove(path + ".json");
}
