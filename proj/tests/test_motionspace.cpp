#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "mvg/errors.hpp"
#include "mvg/io.hpp"
#include "mvg/kernels.hpp"
#include "mvg/linalg.hpp"
#include "mvg/motionspace.hpp"

#if __has_include(<Eigen/Dense>)
#include <Eigen/Dense>
#define MVG_HAVE_EIGEN 1
#endif

using namespace mvg;
using namespace mvg::motionspace;
using pairgan::PairGanConfig;
using pairgan::PairGenerator;

namespace {

PairGanConfig toy_config() {
    PairGanConfig cfg;
    cfg.d_z = 6;
    cfg.d_omega = 6;
    cfg.map_layers = 2;
    cfg.synth_channels = {6, 4};
    cfg.disc_channels = {6, 8};
    cfg.disc_fc = 16;
    cfg.seed = 3;
    return cfg;
}

Tensor rand_unit(Rng& rng, std::size_t d) {
    Tensor v({d});
    for (std::size_t i = 0; i < d; ++i) v[i] = rng.normal();
    const double n = norm2(v);
    for (std::size_t i = 0; i < d; ++i) v[i] /= n;
    return v;
}

// random orthonormal columns [d, r]
Tensor rand_orthonormal(Rng& rng, std::size_t d, std::size_t r) {
    std::vector<Tensor> cols;
    while (cols.size() < r) {
        Tensor v({d});
        for (std::size_t i = 0; i < d; ++i) v[i] = rng.normal();
        for (const auto& c : cols) {
            const double p = dot(c, v);
            for (std::size_t i = 0; i < d; ++i) v[i] -= p * c[i];
        }
        const double n = norm2(v);
        if (n < 1e-8) continue;
        for (std::size_t i = 0; i < d; ++i) v[i] /= n;
        cols.push_back(v);
    }
    Tensor out({d, r});
    for (std::size_t j = 0; j < r; ++j)
        for (std::size_t i = 0; i < d; ++i) out[i * r + j] = cols[j][i];
    return out;
}

} // namespace

TEST_CASE("assemble_jacobian reproduces a linear map exactly") {
    Rng rng(1);
    const std::size_t rows = 9, d = 5;
    Tensor a({rows, d});
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.normal();
    Tensor j = assemble_jacobian(
        [&](const Tensor& t) {
            Tensor y({rows});
            for (std::size_t r = 0; r < rows; ++r) {
                double acc = 0;
                for (std::size_t c = 0; c < d; ++c) acc += a[r * d + c] * t[c];
                y[r] = acc;
            }
            return y;
        },
        d, rows);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(j[i] == a[i]);
}

TEST_CASE("jacobian matches central finite differences (toy generator)") {
    auto cfg = toy_config();
    Rng rng(cfg.seed);
    PairGenerator gen(rng, cfg);
    Rng ar(5);

    for (int anchor = 0; anchor < 2; ++anchor) {
        Tensor z({cfg.d_z});
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = ar.normal();
        Tensor omega = gen.map_latent(z);
        Tensor j = jacobian(gen, omega, Frame::both);

        const double h = 1e-3;
        double num2 = 0, den2 = 0;
        for (std::size_t c = 0; c < cfg.d_omega; ++c) {
            Tensor op = omega, om = omega;
            op[c] += h;
            om[c] -= h;
            Tensor pp = gen.synthesize_pair(op);
            Tensor pm = gen.synthesize_pair(om);
            for (std::size_t r = 0; r < j.dim(0); ++r) {
                const double fd = (pp[r] - pm[r]) / (2 * h);
                const double diff = fd - j[r * cfg.d_omega + c];
                num2 += diff * diff;
                den2 += fd * fd;
            }
        }
        CHECK(std::sqrt(num2) / std::sqrt(den2) < 1e-3);
    }
}

TEST_CASE("jacobian layout: former rows above latter rows") {
    auto cfg = toy_config();
    Rng rng(cfg.seed);
    PairGenerator gen(rng, cfg);
    Tensor omega({cfg.d_omega}, std::vector<double>{0.1, -0.2, 0.4, 0.8, -0.6, 0.3});
    Tensor jb = jacobian(gen, omega, Frame::both);
    Tensor jf = jacobian(gen, omega, Frame::former);
    Tensor jl = jacobian(gen, omega, Frame::latter);
    const std::size_t dx = jf.dim(0);
    REQUIRE(jb.dim(0) == 2 * dx);
    for (std::size_t i = 0; i < jf.size(); ++i) {
        CHECK(jb[i] == jf[i]);
        CHECK(jb[jf.size() + i] == jl[i]);
    }
}

TEST_CASE("forward-mode and reverse-mode row paths agree to 1e-10") {
    auto cfg = toy_config();
    Rng rng(cfg.seed);
    PairGenerator gen(rng, cfg);
    Rng ar(7);
    Tensor z({cfg.d_z});
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = ar.normal();
    Tensor omega = gen.map_latent(z);

    Tensor fwd = jacobian(gen, omega, Frame::both);
    // spot-check several row blocks
    for (std::size_t start : {std::size_t(0), std::size_t(100), std::size_t(200)}) {
        const std::size_t end = std::min(start + 24, fwd.dim(0));
        Tensor rows = jacobian_by_rows(gen, omega, Frame::both, start, end);
        double max_diff = 0;
        for (std::size_t r = start; r < end; ++r)
            for (std::size_t c = 0; c < cfg.d_omega; ++c)
                max_diff = std::max(max_diff, std::fabs(rows[(r - start) * cfg.d_omega + c] -
                                                        fwd[r * cfg.d_omega + c]));
        CHECK(max_diff < 1e-10);
    }
    // latter-frame slice agrees too
    Tensor lat_rows = jacobian_by_rows(gen, omega, Frame::latter, 3, 9);
    Tensor lat_full = jacobian(gen, omega, Frame::latter);
    for (std::size_t r = 3; r < 9; ++r)
        for (std::size_t c = 0; c < cfg.d_omega; ++c)
            CHECK(lat_rows[(r - 3) * cfg.d_omega + c] ==
                  doctest::Approx(lat_full[r * cfg.d_omega + c]).epsilon(1e-12));
}

TEST_CASE("gram matrices are symmetric") {
    auto cfg = toy_config();
    Rng rng(cfg.seed);
    PairGenerator gen(rng, cfg);
    Tensor omega({cfg.d_omega}, std::vector<double>{0.5, 0.1, -0.3, 0.9, 0.0, -0.7});
    Tensor j = jacobian(gen, omega, Frame::former);
    Tensor gram = kern::matmul(kern::transpose(j), j);
    CHECK(linalg::asymmetry(gram) < 1e-8);
}

TEST_CASE("first_order_edit_error: zero at alpha=0 and o(alpha) scaling") {
    auto cfg = toy_config();
    Rng rng(cfg.seed);
    PairGenerator gen(rng, cfg);
    Rng ar(9);
    Tensor z({cfg.d_z});
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = ar.normal();
    Tensor omega = gen.map_latent(z);
    Tensor n = rand_unit(ar, cfg.d_omega);

    CHECK(first_order_edit_error(gen, omega, n, 0.0) == doctest::Approx(0.0));

    const double e50 = first_order_edit_error(gen, omega, n, 0.5);
    const double e25 = first_order_edit_error(gen, omega, n, 0.25);
    const double e125 = first_order_edit_error(gen, omega, n, 0.125);
    CHECK(e25 / e50 < 0.6);
    CHECK(e125 / e25 < 0.6);
}

TEST_CASE("rpca_admm: zero matrix converges immediately") {
    Tensor m({8, 8});
    auto r = rpca_admm(m, 0.0, 1.0, 1e-6, 100);
    CHECK(r.iterations == 1);
    CHECK(r.converged);
    CHECK(norm2(r.low_rank) == 0.0);
    CHECK(norm2(r.sparse) == 0.0);
}

TEST_CASE("rpca_admm: exact low-rank input recovered") {
    Rng rng(11);
    const std::size_t d = 64, rank = 5;
    Tensor u({d, rank});
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = rng.normal();
    Tensor l0 = kern::matmul(u, kern::transpose(u));
    auto r = rpca_admm(l0, 1.0 / 8.0, 1.0, 1e-7, 1000);
    double num = 0;
    for (std::size_t i = 0; i < l0.size(); ++i) {
        const double diff = r.low_rank[i] - l0[i];
        num += diff * diff;
    }
    CHECK(std::sqrt(num) / norm2(l0) < 1e-3);
    CHECK(norm2(r.sparse) / norm2(l0) < 1e-3);
}

TEST_CASE("rpca_admm: synthetic oracle with sparse corruption") {
    Rng rng(13);
    const std::size_t d = 64, rank = 5;
    Tensor u({d, rank});
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = rng.normal();
    Tensor l0 = kern::matmul(u, kern::transpose(u));
    double mean_abs = 0;
    for (std::size_t i = 0; i < l0.size(); ++i) mean_abs += std::fabs(l0[i]);
    mean_abs /= l0.size();

    // 1% sparse entries (symmetric placement), magnitude 10x mean |L0|
    Tensor s0({d, d});
    const std::size_t n_sparse = d * d / 100;
    std::size_t placed = 0;
    while (placed < n_sparse / 2 * 2) {
        const std::size_t i = rng.uniform_int(0, d - 1);
        const std::size_t j = rng.uniform_int(0, d - 1);
        if (s0[i * d + j] != 0.0) continue;
        const double v = (rng.bernoulli(0.5) ? 1 : -1) * 10.0 * mean_abs;
        s0[i * d + j] = v;
        s0[j * d + i] = v;
        placed += 2;
    }
    Tensor m = l0;
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += s0[i];

    auto r = rpca_admm(m, 1.0 / 8.0, 1.0, 1e-7, 1000);
    double num = 0;
    for (std::size_t i = 0; i < l0.size(); ++i) {
        const double diff = r.low_rank[i] - l0[i];
        num += diff * diff;
    }
    const double rel = std::sqrt(num) / norm2(l0);
    CHECK(rel < 1e-2);
    CHECK(r.iterations <= 1000);
    // residual invariant at convergence
    double res = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double v = m[i] - r.low_rank[i] - r.sparse[i];
        res += v * v;
    }
    CHECK(std::sqrt(res) / norm2(m) < 1e-6);
}

TEST_CASE("rpca_admm rejects bad input") {
    Tensor m({4, 4});
    m[1] = 1.0; // asymmetric
    CHECK_THROWS_AS(rpca_admm(m, 0.0, 1.0, 1e-6, 10), ShapeError);
    Tensor nf({2, 2});
    nf[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(rpca_admm(nf, 0.0, 1.0, 1e-6, 10), NumericalError);
}

TEST_CASE("svd_basis analytic cases and reconstruction") {
    Tensor eye = linalg::identity(4);
    auto b = svd_basis(eye);
    for (std::size_t i = 0; i < 4; ++i) CHECK(b.singvals[i] == doctest::Approx(1.0));

    Tensor diag({3, 3});
    diag[0] = 4;
    diag[4] = 1;
    diag[8] = 0;
    auto b2 = svd_basis(diag);
    CHECK(b2.singvals[0] == doctest::Approx(4));
    CHECK(b2.singvals[1] == doctest::Approx(1));
    CHECK(b2.singvals[2] == doctest::Approx(0).epsilon(1e-12));
    // axis-aligned with positive leading entries
    CHECK(std::fabs(b2.v[0]) == doctest::Approx(1.0));
    CHECK(b2.v[0] > 0);

    // reconstruction on random PSD
    Rng rng(17);
    const std::size_t d = 16;
    Tensor u({d, d});
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = rng.normal();
    Tensor psd = kern::matmul(u, kern::transpose(u));
    auto b3 = svd_basis(psd);
    Tensor scaled = b3.v;
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i) scaled[i * d + j] *= b3.singvals[j];
    Tensor rec = kern::matmul(scaled, kern::transpose(b3.v));
    double num = 0;
    for (std::size_t i = 0; i < psd.size(); ++i) {
        const double diff = rec[i] - psd[i];
        num += diff * diff;
    }
    CHECK(std::sqrt(num) / norm2(psd) < 1e-6);

    // determinism incl. sign convention
    auto b4 = svd_basis(psd);
    for (std::size_t i = 0; i < b3.v.size(); ++i) CHECK(b3.v[i] == b4.v[i]);
}

#ifdef MVG_HAVE_EIGEN
TEST_CASE("svd_basis matches dense eigendecomposition oracle (principal angles)") {
    Rng rng(23);
    const std::size_t d = 8;
    Tensor u({d, d});
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = rng.normal();
    Tensor gram = kern::matmul(u, kern::transpose(u));
    auto mine = svd_basis(gram);

    Eigen::MatrixXd g(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) g(i, j) = gram[i * d + j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    // Eigen sorts ascending; compare top-r subspaces for several r
    for (std::size_t r : {std::size_t(1), std::size_t(3), std::size_t(5)}) {
        Eigen::MatrixXd v_oracle(d, r);
        for (std::size_t j = 0; j < r; ++j)
            v_oracle.col(j) = es.eigenvectors().col(d - 1 - j);
        Eigen::MatrixXd v_mine(d, r);
        for (std::size_t j = 0; j < r; ++j)
            for (std::size_t i = 0; i < d; ++i) v_mine(i, j) = mine.v[i * d + j];
        // principal angles via singular values of V1^T V2
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(v_oracle.transpose() * v_mine);
        for (std::size_t j = 0; j < r; ++j) {
            const double c = std::min(1.0, svd.singularValues()(j));
            CHECK(std::acos(c) < 1e-6);
        }
    }
}
#endif

TEST_CASE("effective_rank") {
    Tensor s({3}, std::vector<double>{10, 5, 1e-9});
    CHECK(effective_rank(s, 1e-3) == 2);
    Tensor z({4});
    CHECK(effective_rank(z, 1e-3) == 0);
    Tensor eq = Tensor::full({7}, 3.0);
    CHECK(effective_rank(eq, 1e-3) == 7);
    Tensor bad({2}, std::vector<double>{1.0, 2.0});
    CHECK_THROWS_AS(effective_rank(bad, 1e-3), ShapeError);
}

TEST_CASE("project_to_null properties") {
    Rng rng(29);
    const std::size_t d = 16, r = 5;
    Tensor v1 = rand_orthonormal(rng, d, r);

    // fixed point: project once to land in the null space, project again
    Tensor raw = rand_unit(rng, d);
    auto p0 = project_to_null(raw, v1);
    REQUIRE(p0.survived);
    auto p1 = project_to_null(p0.direction, v1);
    REQUIRE(p1.survived);
    double max_diff = 0;
    for (std::size_t i = 0; i < d; ++i)
        max_diff = std::max(max_diff, std::fabs(p1.direction[i] - p0.direction[i]));
    CHECK(max_diff < 1e-8); // idempotence up to renormalization

    // annihilation: vector inside span(V1)
    Tensor in_span({d});
    for (std::size_t i = 0; i < d; ++i) in_span[i] = v1[i * r + 2];
    auto pa = project_to_null(in_span, v1);
    CHECK_FALSE(pa.survived);

    // orthogonality of result to the basis
    for (int rep = 0; rep < 20; ++rep) {
        Tensor x = rand_unit(rng, d);
        auto p = project_to_null(x, v1);
        if (!p.survived) continue;
        for (std::size_t j = 0; j < r; ++j) {
            double c = 0;
            for (std::size_t i = 0; i < d; ++i) c += v1[i * r + j] * p.direction[i];
            CHECK(std::fabs(c) < 1e-6);
        }
    }
}

TEST_CASE("edit_latent") {
    Tensor omega({3}, std::vector<double>{1, 2, 3});
    Tensor dir({3}, std::vector<double>{1, 0, 0});
    Tensor same = edit_latent(omega, dir, 0.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(same[i] == omega[i]);
    Tensor fwd = edit_latent(omega, dir, 2.5);
    Tensor back = edit_latent(fwd, dir, -2.5);
    for (std::size_t i = 0; i < 3; ++i) CHECK(back[i] == doctest::Approx(omega[i]));
    CHECK_THROWS_AS(edit_latent(omega, Tensor({4}), 1.0), ShapeError);
}

TEST_CASE("compute_motion_basis mechanics on a toy generator") {
    auto cfg = toy_config();
    Rng rng(cfg.seed);
    PairGenerator gen(rng, cfg);

    MotionBasisConfig mc;
    mc.anchor_count = 3;
    mc.m = 2; // small m so an untrained toy model can still produce survivors
    mc.tau = 1e-4;
    mc.anchor_seed = 41;
    mc.diag_alpha = 1.0;

    MotionBasis basis = compute_motion_basis(gen, mc, "testhash");
    CHECK(basis.backward_codes.dim(0) == mc.m);
    CHECK(basis.forward_codes.dim(1) == cfg.d_omega);
    // rows unit norm and near-orthogonal
    for (const Tensor* codes : {&basis.backward_codes, &basis.forward_codes}) {
        for (std::size_t r = 0; r < mc.m; ++r) {
            double n = 0;
            for (std::size_t c = 0; c < cfg.d_omega; ++c) {
                const double v = (*codes)[r * cfg.d_omega + c];
                n += v * v;
            }
            CHECK(std::fabs(std::sqrt(n) - 1.0) < 1e-6);
        }
        for (std::size_t r1 = 0; r1 < mc.m; ++r1)
            for (std::size_t r2 = r1 + 1; r2 < mc.m; ++r2) {
                double c = 0;
                for (std::size_t i = 0; i < cfg.d_omega; ++i)
                    c += (*codes)[r1 * cfg.d_omega + i] * (*codes)[r2 * cfg.d_omega + i];
                CHECK(std::fabs(c) < 1e-4);
            }
    }
    CHECK(basis.anchors.size() == mc.anchor_count);
    CHECK(basis.generator_hash == "testhash");

    // determinism
    MotionBasis basis2 = compute_motion_basis(gen, mc, "testhash");
    for (std::size_t i = 0; i < basis.backward_codes.size(); ++i)
        CHECK(basis.backward_codes[i] == basis2.backward_codes[i]);

    // asking for more codes than directions exist -> error naming the count
    MotionBasisConfig big = mc;
    big.m = cfg.d_omega + 1;
    CHECK_THROWS_AS(compute_motion_basis(gen, big, "x"), NumericalError);
}

TEST_CASE("motion basis save/load round trip") {
    namespace fs = std::filesystem;
    auto cfg = toy_config();
    Rng rng(cfg.seed);
    PairGenerator gen(rng, cfg);
    MotionBasisConfig mc;
    mc.anchor_count = 2;
    mc.m = 2;
    mc.tau = 1e-4;
    mc.anchor_seed = 43;
    MotionBasis basis = compute_motion_basis(gen, mc, "abc123");

    const std::string path = (fs::temp_directory_path() / "mvg_basis.narc").string();
    fs::remove(path);
    fs::remove(path + ".json");
    save_basis(path, basis);
    MotionBasis loaded = load_basis(path);
    CHECK(loaded.generator_hash == "abc123");
    CHECK(loaded.rank_former == basis.rank_former);
    for (std::size_t i = 0; i < basis.backward_codes.size(); ++i)
        CHECK(loaded.backward_codes[i] == basis.backward_codes[i]);
    for (std::size_t i = 0; i < basis.forward_selectivity.size(); ++i)
        CHECK(loaded.forward_selectivity[i] == basis.forward_selectivity[i]);
    CHECK(loaded.config.anchor_seed == mc.anchor_seed);
    fs::remove(path);
    fs::remove(path + ".json");
}
