#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "mvg/errors.hpp"
#include "mvg/io.hpp"
#include "mvg/kernels.hpp"
#include "mvg/linalg.hpp"
#include "mvg/metrics.hpp"
#include "mvg/rng.hpp"

using namespace mvg;
using namespace mvg::metrics;
using synthvideo::CorpusConfig;
using synthvideo::VideoClip;
using synthvideo::make_corpus;

namespace {

GaussianStats diag_gaussian(std::vector<double> mean, std::vector<double> var) {
    GaussianStats g;
    const std::size_t d = mean.size();
    g.mean = Tensor({d}, std::move(mean));
    g.cov = Tensor({d, d});
    for (std::size_t i = 0; i < d; ++i) g.cov[i * d + i] = var[i];
    return g;
}

VideoClip solid_clip(std::size_t t, double value) {
    VideoClip c;
    c.frames = t;
    c.height = 8;
    c.width = 8;
    c.content_id = "solid";
    c.pixels.assign(t * 3 * 64, io::quant8(value));
    return c;
}

} // namespace

TEST_CASE("sym_eig agrees with known spectra") {
    Tensor d({3, 3});
    d[0] = 4;
    d[4] = 1;
    d[8] = 0;
    auto [vals, vecs] = linalg::sym_eig(d);
    CHECK(vals[0] == doctest::Approx(4));
    CHECK(vals[1] == doctest::Approx(1));
    CHECK(vals[2] == doctest::Approx(0));

    // random symmetric: V diag V^T reconstructs
    Rng rng(3);
    const std::size_t n = 12;
    Tensor a({n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) a[i * n + j] = a[j * n + i] = rng.normal();
    auto [ev, V] = linalg::sym_eig(a);
    Tensor scaled = V;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) scaled[i * n + j] *= ev[j];
    Tensor rec = kern::matmul(scaled, kern::transpose(V));
    double max_err = 0;
    for (std::size_t i = 0; i < n * n; ++i) max_err = std::max(max_err, std::fabs(rec[i] - a[i]));
    CHECK(max_err < 1e-10);
    // orthonormality
    Tensor vtv = kern::matmul(kern::transpose(V), V);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            CHECK(std::fabs(vtv[i * n + j] - (i == j ? 1.0 : 0.0)) < 1e-12);
}

TEST_CASE("frechet_gaussian analytic cases") {
    auto a = diag_gaussian({0, 0}, {1, 2});
    CHECK(frechet_gaussian(a, a) == doctest::Approx(0).epsilon(1e-10));

    // equal covariance, shifted mean -> |d|^2
    auto b = diag_gaussian({3, -4}, {1, 2});
    CHECK(frechet_gaussian(a, b) == doctest::Approx(25.0).epsilon(1e-8));

    // 1-D closed form
    auto c1 = diag_gaussian({1.0}, {4.0});
    auto c2 = diag_gaussian({-2.0}, {9.0});
    CHECK(frechet_gaussian(c1, c2) == doctest::Approx(9.0 + 1.0).epsilon(1e-8));

    // symmetry and nonnegativity
    Rng rng(5);
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<Tensor> xs, ys;
        for (int i = 0; i < 32; ++i) {
            Tensor x({4}), y({4});
            for (int j = 0; j < 4; ++j) {
                x[j] = rng.normal();
                y[j] = 0.5 * rng.normal() + 0.2 * j;
            }
            xs.push_back(x);
            ys.push_back(y);
        }
        auto ga = fit_gaussian(xs), gb = fit_gaussian(ys);
        const double dab = frechet_gaussian(ga, gb);
        const double dba = frechet_gaussian(gb, ga);
        CHECK(std::fabs(dab - dba) < 1e-10);
        CHECK(dab >= 0);
    }

    CHECK_THROWS_AS(frechet_gaussian(a, c1), ShapeError);
}

TEST_CASE("feature_frechet basics") {
    Rng rng(11);
    std::vector<Tensor> set;
    for (int i = 0; i < 16; ++i) {
        Tensor t({50});
        for (std::size_t j = 0; j < 50; ++j) t[j] = rng.normal();
        set.push_back(t);
    }
    CHECK(feature_frechet(set, set, 42) == doctest::Approx(0).epsilon(1e-8));

    // permutation invariance
    std::vector<Tensor> shuffled = set;
    std::reverse(shuffled.begin(), shuffled.end());
    std::vector<Tensor> other;
    for (int i = 0; i < 16; ++i) {
        Tensor t({50});
        for (std::size_t j = 0; j < 50; ++j) t[j] = rng.normal() + 1.0;
        other.push_back(t);
    }
    CHECK(feature_frechet(set, other, 42) ==
          doctest::Approx(feature_frechet(shuffled, other, 42)).epsilon(1e-10));

    std::vector<Tensor> tiny{set[0]};
    CHECK_THROWS_AS(feature_frechet(tiny, set, 42), ProtocolError);
}

TEST_CASE("feature_frechet separates different-hue corpora") {
    CorpusConfig cfg;
    cfg.n_videos = 96;
    cfg.frames = 4;
    cfg.seed = 7;
    auto corpus = make_corpus(cfg);

    // bucket clips by hue: red-ish band vs blue-ish band
    std::vector<Tensor> red_a, red_b, blue;
    for (const auto& clip : corpus) {
        const double h = extract_content(clip.frame(0)).hue;
        Tensor flat = clip.tensor().reshaped({clip.tensor().size()});
        if (circular_hue_distance(h, 0.0) < 0.08) {
            (red_a.size() <= red_b.size() ? red_a : red_b).push_back(flat);
        } else if (circular_hue_distance(h, 0.55) < 0.08) {
            blue.push_back(flat);
        }
    }
    REQUIRE(red_a.size() >= 4);
    REQUIRE(red_b.size() >= 4);
    REQUIRE(blue.size() >= 4);

    const double same_color = feature_frechet(red_a, red_b, 42);
    const double diff_color = feature_frechet(red_a, blue, 42);
    CHECK(diff_color > 0);
    CHECK(diff_color > same_color);
}

TEST_CASE("content oracle on real clips") {
    CorpusConfig cfg;
    cfg.n_videos = 8;
    cfg.frames = 16;
    cfg.seed = 7;
    auto corpus = make_corpus(cfg);
    for (const auto& clip : corpus) {
        bool flagged = false;
        const double score = content_consistency(clip, &flagged);
        CHECK(!flagged);
        CHECK(score >= 0.99);
        CHECK(hue_drift(clip) < 0.02);
    }
}

TEST_CASE("content oracle detects spliced clips") {
    CorpusConfig cfg;
    cfg.n_videos = 24;
    cfg.frames = 8;
    cfg.seed = 7;
    auto corpus = make_corpus(cfg);
    // find two clips with far-apart hues
    std::size_t ia = 0, ib = 1;
    double best = -1;
    std::vector<double> hues;
    for (const auto& c : corpus) hues.push_back(extract_content(c.frame(0)).hue);
    for (std::size_t i = 0; i < corpus.size(); ++i)
        for (std::size_t j = i + 1; j < corpus.size(); ++j) {
            const double d = circular_hue_distance(hues[i], hues[j]);
            if (d > best) {
                best = d;
                ia = i;
                ib = j;
            }
        }
    REQUIRE(best > 0.3);
    VideoClip spliced = corpus[ia];
    const std::size_t fsz = 3 * spliced.height * spliced.width;
    for (std::size_t t = 4; t < 8; ++t)
        std::copy_n(corpus[ib].pixels.begin() + t * fsz, fsz, spliced.pixels.begin() + t * fsz);
    CHECK(content_consistency(spliced) < 0.5);
    CHECK(hue_drift(spliced) > 0.25);
}

TEST_CASE("content oracle static and blank cases") {
    CorpusConfig cfg;
    cfg.n_videos = 1;
    cfg.frames = 4;
    cfg.seed = 9;
    auto corpus = make_corpus(cfg);
    VideoClip still = corpus[0];
    const std::size_t fsz = 3 * still.height * still.width;
    for (std::size_t t = 1; t < still.frames; ++t)
        std::copy_n(still.pixels.begin(), fsz, still.pixels.begin() + t * fsz);
    CHECK(content_consistency(still) == doctest::Approx(1.0));

    VideoClip blank = solid_clip(4, -1.0);
    bool flagged = false;
    CHECK(content_consistency(blank, &flagged) == doctest::Approx(0.0));
    CHECK(flagged);
}

TEST_CASE("motion magnitude") {
    VideoClip still = solid_clip(5, 0.3);
    CHECK(motion_magnitude(still) == doctest::Approx(0.0));

    // alternating all-black / all-white
    VideoClip alt = solid_clip(6, -1.0);
    const std::size_t fsz = 3 * alt.height * alt.width;
    for (std::size_t t = 1; t < alt.frames; t += 2)
        std::fill_n(alt.pixels.begin() + t * fsz, fsz, io::quant8(1.0));
    CHECK(motion_magnitude(alt) == doctest::Approx(2.0));

    CorpusConfig cfg;
    cfg.n_videos = 3;
    cfg.frames = 12;
    cfg.seed = 7;
    auto corpus = make_corpus(cfg);
    for (const auto& c : corpus) CHECK(motion_magnitude(c) > 0.0);
    auto corpus2 = make_corpus(cfg);
    CHECK(motion_magnitude(corpus[0]) == doctest::Approx(motion_magnitude(corpus2[0])));
}

TEST_CASE("loop score") {
    // exact 2-frame cycle
    VideoClip cyc = solid_clip(8, -0.5);
    const std::size_t fsz = 3 * cyc.height * cyc.width;
    for (std::size_t t = 1; t < cyc.frames; t += 2)
        std::fill_n(cyc.pixels.begin() + t * fsz, fsz, io::quant8(0.5));
    CHECK(loop_score(cyc) >= 0.99);

    VideoClip still = solid_clip(8, 0.1);
    CHECK(loop_score(still) >= 0.999);

    // monotone translation scores below the repeating cycle
    CorpusConfig cfg;
    cfg.n_videos = 4;
    cfg.frames = 16;
    cfg.motion_kind = synthvideo::MotionKind::drift;
    cfg.seed = 77;
    auto corpus = make_corpus(cfg);
    for (const auto& c : corpus) CHECK(loop_score(c) < loop_score(cyc));

    CHECK_THROWS_AS(loop_score(solid_clip(3, 0.0)), ShapeError);
}
