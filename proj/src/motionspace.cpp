#include "mvg/motionspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string_view>

#include "mvg/errors.hpp"
#include "mvg/io.hpp"
#include "mvg/kernels.hpp"
#include "mvg/linalg.hpp"

namespace mvg::motionspace {

RpcaResult rpca_admm(const Tensor& m, const RpcaConfig& cfg) {
    return rpca_admm(m, cfg.lambda, cfg.rho, cfg.tol, cfg.max_iter);
}

RpcaResult rpca_admm(const Tensor& m, double lambda, double rho, double tol,
                     std::size_t max_iter) {
    if (m.ndim() != 2 || m.dim(0) != m.dim(1))
        throw ShapeError("rpca_admm: expects square matrix");
    if (!all_finite(m)) throw NumericalError("rpca_admm: non-finite input");
    const std::size_t d = m.dim(0);
    if (linalg::asymmetry(m) > 1e-8 * std::max(1.0, max_abs(m)))
        throw ShapeError("rpca_admm: input not symmetric");
    if (lambda <= 0.0) lambda = 1.0 / std::sqrt(static_cast<double>(d));

    RpcaResult out;
    out.low_rank = Tensor({d, d});
    out.sparse = Tensor({d, d});
    const double norm_m = norm2(m);
    if (norm_m < 1e-300) {
        out.iterations = 1;
        out.residual = 0.0;
        out.converged = true;
        return out;
    }

    // The `rho` argument scales an automatic base penalty 1.25/sigma_max(M):
    // starting below the top singular value keeps singular-value thresholding
    // active early, the inexact-ALM regime where recovery is reliable.
    {
        auto [vals, vecs] = linalg::sym_eig(m);
        const double sigma_max = std::max(std::fabs(vals[0]), std::fabs(vals[d - 1]));
        rho = rho * 1.25 / std::max(sigma_max, 1e-12);
    }

    Tensor y({d, d}); // scaled dual
    Tensor l = out.low_rank, s = out.sparse, s_prev = out.sparse;

    auto svt = [&](const Tensor& a, double thresh) {
        auto [vals, vecs] = linalg::sym_eig(a);
        // signed shrink: singular values of a symmetric matrix are |eig|
        Tensor scaled = vecs;
        for (std::size_t j = 0; j < d; ++j) {
            const double lam = vals[j];
            const double shrunk =
                (lam > 0 ? 1.0 : -1.0) * std::max(0.0, std::fabs(lam) - thresh);
            for (std::size_t i = 0; i < d; ++i) scaled[i * d + j] *= shrunk;
        }
        return kern::matmul(scaled, kern::transpose(vecs));
    };

    for (std::size_t it = 1; it <= max_iter; ++it) {
        // L-step: singular value thresholding
        Tensor t1({d, d});
        for (std::size_t i = 0; i < d * d; ++i) t1[i] = m[i] - s[i] + y[i] / rho;
        l = svt(t1, 1.0 / rho);
        // S-step: entrywise soft thresholding
        const double st = lambda / rho;
        s_prev = s;
        for (std::size_t i = 0; i < d * d; ++i) {
            const double v = m[i] - l[i] + y[i] / rho;
            s[i] = v > st ? v - st : (v < -st ? v + st : 0.0);
        }
        // dual update
        double res2 = 0, ds2 = 0;
        for (std::size_t i = 0; i < d * d; ++i) {
            const double r = m[i] - l[i] - s[i];
            y[i] += rho * r;
            res2 += r * r;
            const double dsv = s[i] - s_prev[i];
            ds2 += dsv * dsv;
        }
        out.iterations = it;
        out.residual = std::sqrt(res2) / norm_m;
        if (out.residual < tol) {
            out.converged = true;
            break;
        }
        // primal stall: the sparse block has stopped moving at the current
        // penalty scale, so tighten the constraint
        if (rho * std::sqrt(ds2) / norm_m < 10.0 * tol) rho *= 1.5;
    }
    out.low_rank = std::move(l);
    out.sparse = std::move(s);
    return out;
}

SvdBasis svd_basis(const Tensor& l_star) {
    if (l_star.ndim() != 2 || l_star.dim(0) != l_star.dim(1))
        throw ShapeError("svd_basis: expects square matrix");
    const std::size_t d = l_star.dim(0);
    auto [vals, vecs] = linalg::sym_eig(l_star);
    // ADMM low-rank parts of PSD Grams can carry a mildly negative tail;
    // clip it, but reject grossly indefinite input as not Gram-like.
    const double scale = std::max(1e-12, vals[0]);
    if (vals[d - 1] < -0.5 * scale)
        throw NumericalError("svd_basis: input grossly indefinite (min eig " +
                             std::to_string(vals[d - 1]) + " vs max " +
                             std::to_string(vals[0]) + ")");
    SvdBasis out;
    out.singvals = Tensor({d});
    out.v = vecs;
    for (std::size_t j = 0; j < d; ++j) {
        out.singvals[j] = std::max(0.0, vals[j]);
        // sign convention: first non-negligible entry positive
        for (std::size_t i = 0; i < d; ++i) {
            const double e = out.v[i * d + j];
            if (std::fabs(e) > 1e-12) {
                if (e < 0)
                    for (std::size_t k = 0; k < d; ++k) out.v[k * d + j] = -out.v[k * d + j];
                break;
            }
        }
    }
    return out;
}

std::size_t effective_rank(const Tensor& singvals, double tau) {
    const std::size_t d = singvals.size();
    for (std::size_t i = 1; i < d; ++i)
        if (singvals[i] > singvals[i - 1] + 1e-12)
            throw ShapeError("effective_rank: singvals must be nonincreasing");
    if (d == 0 || singvals[0] <= 0.0) return 0;
    const double thresh = tau * singvals[0];
    std::size_t r = 0;
    for (std::size_t i = 0; i < d; ++i)
        if (singvals[i] > thresh) ++r;
    return r;
}

Projection project_to_null(const Tensor& v_dir, const Tensor& v_b1) {
    const std::size_t d = v_dir.size();
    Projection out;
    Tensor p = v_dir;
    if (v_b1.size() > 0) {
        if (v_b1.ndim() != 2 || v_b1.dim(0) != d)
            throw ShapeError("project_to_null: basis shape mismatch");
        const std::size_t r = v_b1.dim(1);
        for (std::size_t j = 0; j < r; ++j) {
            double c = 0;
            for (std::size_t i = 0; i < d; ++i) c += v_b1[i * r + j] * v_dir[i];
            for (std::size_t i = 0; i < d; ++i) p[i] -= c * v_b1[i * r + j];
        }
    }
    out.pre_norm = norm2(p);
    if (out.pre_norm < 1e-6) return out; // annihilated: no selective direction here
    for (std::size_t i = 0; i < d; ++i) p[i] /= out.pre_norm;
    out.direction = std::move(p);
    out.survived = true;
    return out;
}

Tensor edit_latent(const Tensor& omega, const Tensor& direction, double alpha) {
    if (omega.size() != direction.size())
        throw ShapeError("edit_latent: dimension mismatch");
    Tensor out = omega;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha * direction[i];
    return out;
}

Tensor assemble_jacobian(const std::function<Tensor(const Tensor&)>& jvp, std::size_t d_in,
                         std::size_t rows) {
    Tensor j({rows, d_in});
    Tensor e({d_in});
    for (std::size_t col = 0; col < d_in; ++col) {
        std::fill_n(e.data(), d_in, 0.0);
        e[col] = 1.0;
        Tensor column = jvp(e);
        if (column.size() != rows)
            throw ShapeError("assemble_jacobian: tangent output size " +
                             std::to_string(column.size()) + " != rows " + std::to_string(rows));
        for (std::size_t r = 0; r < rows; ++r) j[r * d_in + col] = column[r];
    }
    return j;
}

namespace {

std::size_t frame_rows(const pairgan::PairGenerator& gen, Frame frame) {
    const std::size_t dx = 3 * gen.config.out_res() * gen.config.out_res();
    return frame == Frame::both ? 2 * dx : dx;
}

// former frame = channels 0..2, latter = 3..5 of the flattened pair
Tensor select_frame_rows(const Tensor& pair_flat, Frame frame, std::size_t dx) {
    if (frame == Frame::both) return pair_flat;
    Tensor out({dx});
    const std::size_t off = frame == Frame::former ? 0 : dx;
    std::copy_n(pair_flat.data() + off, dx, out.data());
    return out;
}

} // namespace

Tensor jacobian(const pairgan::PairGenerator& gen, const Tensor& omega, Frame frame) {
    if (omega.size() != gen.config.d_omega) throw ShapeError("jacobian: |omega| mismatch");
    const std::size_t dx = 3 * gen.config.out_res() * gen.config.out_res();
    pairgan::SynthCache cache = gen.synthesis.forward_cached(omega);
    Tensor j = assemble_jacobian(
        [&](const Tensor& tangent) {
            Tensor full = gen.synthesis.jvp(cache, tangent);
            return select_frame_rows(full.reshaped({full.size()}), frame, dx);
        },
        gen.config.d_omega, frame_rows(gen, frame));
    for (std::size_t i = 0; i < j.size(); ++i)
        if (!std::isfinite(j[i]))
            throw NumericalError("jacobian: non-finite entry at row " +
                                 std::to_string(i / gen.config.d_omega) + ", col " +
                                 std::to_string(i % gen.config.d_omega));
    return j;
}

Tensor jacobian_by_rows(const pairgan::PairGenerator& gen, const Tensor& omega, Frame frame,
                        std::size_t row_begin, std::size_t row_end) {
    if (omega.size() != gen.config.d_omega)
        throw ShapeError("jacobian_by_rows: |omega| mismatch");
    const std::size_t d = gen.config.d_omega;
    const std::size_t dx = 3 * gen.config.out_res() * gen.config.out_res();
    const std::size_t total_rows = frame_rows(gen, frame);
    if (row_end > total_rows || row_begin >= row_end)
        throw ShapeError("jacobian_by_rows: bad row range");

    ad::Var om(omega.reshaped({1, d}), /*requires_grad=*/true);
    ad::Var out = gen.synthesize(om); // [1,6,R,R]
    Tensor j({row_end - row_begin, d});
    Tensor seed(out.shape());
    for (std::size_t r = row_begin; r < row_end; ++r) {
        std::fill_n(seed.data(), seed.size(), 0.0);
        // map frame row to pair output index
        const std::size_t pair_index = (frame == Frame::latter) ? r + dx : r;
        seed[pair_index] = 1.0;
        Tensor g = ad::grad_seeded(out, seed, {om})[0];
        std::copy_n(g.data(), d, j.data() + (r - row_begin) * d);
    }
    return j;
}

double first_order_edit_error(const pairgan::PairGenerator& gen, const Tensor& omega,
                              const Tensor& direction, double alpha) {
    pairgan::SynthCache cache = gen.synthesis.forward_cached(omega);
    Tensor base = cache.pair_out;
    Tensor lin = gen.synthesis.jvp(cache, direction);
    Tensor edited = gen.synthesize_pair(edit_latent(omega, direction, alpha));
    double err2 = 0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        const double e = edited[i] - base[i] - alpha * lin[i];
        err2 += e * e;
    }
    return std::sqrt(err2);
}

std::pair<double, double> edit_displacement(const pairgan::PairGenerator& gen,
                                            const Tensor& omega, const Tensor& direction,
                                            double alpha) {
    const std::size_t dx = 3 * gen.config.out_res() * gen.config.out_res();
    Tensor base = gen.synthesize_pair(omega);
    Tensor edited = gen.synthesize_pair(edit_latent(omega, direction, alpha));
    double former2 = 0, latter2 = 0;
    for (std::size_t i = 0; i < dx; ++i) {
        const double df = edited[i] - base[i];
        former2 += df * df;
        const double dl = edited[dx + i] - base[dx + i];
        latter2 += dl * dl;
    }
    return {std::sqrt(former2), std::sqrt(latter2)};
}

namespace {

struct FrameBasis {
    SvdBasis svd;
    std::size_t rank = 0;
};

FrameBasis frame_basis(const Tensor& gram, const MotionBasisConfig& cfg) {
    RpcaConfig rc = cfg.rpca;
    RpcaResult r = rpca_admm(gram, rc);
    FrameBasis fb;
    fb.svd = svd_basis(r.low_rank);
    fb.rank = effective_rank(fb.svd.singvals, cfg.tau);
    return fb;
}

Tensor gram_of(const Tensor& j) {
    return kern::matmul(kern::transpose(j), j);
}

Tensor columns(const Tensor& v, std::size_t c0, std::size_t c1) {
    const std::size_t d = v.dim(0);
    Tensor out({d, c1 - c0});
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = c0; j < c1; ++j) out[i * (c1 - c0) + (j - c0)] = v[i * d + j];
    return out;
}

// Projects source singular vectors into the protected frame's null space,
// orthonormalizing survivors (Gram-Schmidt in singular-value order) so the
// kept rows form a near-orthogonal set.
Tensor select_codes(const SvdBasis& source, std::size_t source_rank, const Tensor& protect_v1,
                    std::size_t m, std::string_view side) {
    const std::size_t d = source.v.dim(0);
    std::vector<Tensor> kept;
    for (std::size_t idx = 0; idx < source_rank && kept.size() < m; ++idx) {
        Tensor v({d});
        for (std::size_t i = 0; i < d; ++i) v[i] = source.v[i * d + idx];
        Projection p = project_to_null(v, protect_v1);
        if (!p.survived) continue;
        Tensor dir = p.direction;
        for (const auto& prev : kept) {
            double c = dot(prev, dir);
            for (std::size_t i = 0; i < d; ++i) dir[i] -= c * prev[i];
        }
        const double n = norm2(dir);
        if (n < 1e-6) continue;
        for (std::size_t i = 0; i < d; ++i) dir[i] /= n;
        kept.push_back(std::move(dir));
    }
    if (kept.size() < m)
        throw NumericalError("compute_motion_basis: only " + std::to_string(kept.size()) + " " +
                             std::string(side) + " directions survived projection, need " +
                             std::to_string(m));
    Tensor out({m, d});
    for (std::size_t r = 0; r < m; ++r) std::copy_n(kept[r].data(), d, out.data() + r * d);
    return out;
}

Tensor median_selectivity(const pairgan::PairGenerator& gen, const Tensor& codes,
                          const std::vector<Tensor>& anchors, double alpha, bool edit_latter) {
    const std::size_t m = codes.dim(0), d = codes.dim(1);
    Tensor out({m});
    for (std::size_t r = 0; r < m; ++r) {
        Tensor dir({d});
        std::copy_n(codes.data() + r * d, d, dir.data());
        std::vector<double> ratios;
        for (const auto& omega : anchors) {
            auto [dformer, dlatter] = edit_displacement(gen, omega, dir, alpha);
            const double wanted = edit_latter ? dlatter : dformer;
            const double unwanted = edit_latter ? dformer : dlatter;
            ratios.push_back(unwanted / std::max(wanted, 1e-12));
        }
        std::sort(ratios.begin(), ratios.end());
        out[r] = ratios[ratios.size() / 2];
    }
    return out;
}

} // namespace

MotionBasis compute_motion_basis(const pairgan::PairGenerator& gen, const MotionBasisConfig& cfg,
                                 const std::string& generator_hash) {
    if (cfg.m < 1) throw ConfigError("compute_motion_basis: m must be >= 1");
    const std::size_t d = gen.config.d_omega;
    MotionBasis out;
    out.config = cfg;
    out.generator_hash = generator_hash;

    Rng rng(cfg.anchor_seed);
    for (std::size_t a = 0; a < cfg.anchor_count; ++a) {
        Tensor z({gen.config.d_z});
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = rng.normal();
        out.anchors.push_back(gen.map_latent(z));
    }

    if (cfg.average_grams) {
        Tensor gram_former({d, d}), gram_latter({d, d});
        for (const auto& omega : out.anchors) {
            const Tensor j = jacobian(gen, omega, Frame::both);
            const std::size_t dx = j.dim(0) / 2;
            Tensor jf({dx, d}), jl({dx, d});
            std::copy_n(j.data(), dx * d, jf.data());
            std::copy_n(j.data() + dx * d, dx * d, jl.data());
            const Tensor gf = gram_of(jf), gl = gram_of(jl);
            for (std::size_t i = 0; i < d * d; ++i) {
                gram_former[i] += gf[i];
                gram_latter[i] += gl[i];
            }
        }
        const double inv = 1.0 / static_cast<double>(cfg.anchor_count);
        for (std::size_t i = 0; i < d * d; ++i) {
            gram_former[i] *= inv;
            gram_latter[i] *= inv;
        }
        FrameBasis fa = frame_basis(gram_former, cfg);
        FrameBasis fb = frame_basis(gram_latter, cfg);
        out.rank_former = fa.rank;
        out.rank_latter = fb.rank;
        out.singvals_former = fa.svd.singvals;
        out.singvals_latter = fb.svd.singvals;
        // backward codes edit the former frame: project its principal
        // directions into the latter frame's null space (and vice versa)
        out.backward_codes = select_codes(fa.svd, fa.rank, columns(fb.svd.v, 0, fb.rank), cfg.m,
                                          "backward (former-frame)");
        out.forward_codes = select_codes(fb.svd, fb.rank, columns(fa.svd.v, 0, fa.rank), cfg.m,
                                         "forward (latter-frame)");
    } else {
        // per-anchor bases merged round-robin, skipping near-duplicates
        std::vector<Tensor> back_all, fwd_all;
        std::size_t ra_sum = 0, rb_sum = 0;
        for (const auto& omega : out.anchors) {
            const Tensor j = jacobian(gen, omega, Frame::both);
            const std::size_t dx = j.dim(0) / 2;
            Tensor jf({dx, d}), jl({dx, d});
            std::copy_n(j.data(), dx * d, jf.data());
            std::copy_n(j.data() + dx * d, dx * d, jl.data());
            FrameBasis fa = frame_basis(gram_of(jf), cfg);
            FrameBasis fb = frame_basis(gram_of(jl), cfg);
            ra_sum += fa.rank;
            rb_sum += fb.rank;
            auto push_side = [&](const SvdBasis& src, std::size_t rank, const Tensor& protect,
                                 std::vector<Tensor>& sink) {
                for (std::size_t idx = 0; idx < rank; ++idx) {
                    Tensor v({d});
                    for (std::size_t i = 0; i < d; ++i) v[i] = src.v[i * d + idx];
                    Projection p = project_to_null(v, protect);
                    if (p.survived) sink.push_back(p.direction);
                }
            };
            push_side(fa.svd, fa.rank, columns(fb.svd.v, 0, fb.rank), back_all);
            push_side(fb.svd, fb.rank, columns(fa.svd.v, 0, fa.rank), fwd_all);
            if (out.singvals_former.size() == 0) {
                out.singvals_former = fa.svd.singvals;
                out.singvals_latter = fb.svd.singvals;
            }
        }
        out.rank_former = ra_sum / cfg.anchor_count;
        out.rank_latter = rb_sum / cfg.anchor_count;
        auto dedup_take = [&](const std::vector<Tensor>& all, std::string_view side) {
            std::vector<Tensor> kept;
            for (const auto& cand : all) {
                if (kept.size() >= cfg.m) break;
                Tensor dir = cand;
                for (const auto& prev : kept) {
                    const double c = dot(prev, dir);
                    for (std::size_t i = 0; i < d; ++i) dir[i] -= c * prev[i];
                }
                const double n = norm2(dir);
                if (n < 0.3) continue; // near-duplicate of an earlier anchor's code
                for (std::size_t i = 0; i < d; ++i) dir[i] /= n;
                kept.push_back(std::move(dir));
            }
            if (kept.size() < cfg.m)
                throw NumericalError("compute_motion_basis: only " +
                                     std::to_string(kept.size()) + " merged " +
                                     std::string(side) + " directions, need " +
                                     std::to_string(cfg.m));
            Tensor outm({cfg.m, d});
            for (std::size_t r = 0; r < cfg.m; ++r)
                std::copy_n(kept[r].data(), d, outm.data() + r * d);
            return outm;
        };
        out.backward_codes = dedup_take(back_all, "backward");
        out.forward_codes = dedup_take(fwd_all, "forward");
    }

    out.backward_selectivity = median_selectivity(gen, out.backward_codes, out.anchors,
                                                  cfg.diag_alpha, /*edit_latter=*/false);
    out.forward_selectivity = median_selectivity(gen, out.forward_codes, out.anchors,
                                                 cfg.diag_alpha, /*edit_latter=*/true);
    return out;
}

std::string save_basis(const std::string& path, const MotionBasis& basis) {
    std::vector<std::pair<std::string, Tensor>> arrays{
        {"backward_codes", basis.backward_codes},
        {"forward_codes", basis.forward_codes},
        {"backward_selectivity", basis.backward_selectivity},
        {"forward_selectivity", basis.forward_selectivity},
        {"singvals_former", basis.singvals_former},
        {"singvals_latter", basis.singvals_latter},
    };
    Tensor anchors({basis.anchors.size(), basis.anchors[0].size()});
    for (std::size_t i = 0; i < basis.anchors.size(); ++i)
        std::copy_n(basis.anchors[i].data(), basis.anchors[i].size(),
                    anchors.data() + i * basis.anchors[i].size());
    arrays.emplace_back("anchors", anchors);
    io::save_archive(path, arrays);
    const std::string hash = io::file_hash_hex(path);
    nlohmann::json manifest{{"format_version", 1},
                            {"kind", "motion_basis"},
                            {"m", basis.config.m},
                            {"r_a", basis.rank_former},
                            {"r_b", basis.rank_latter},
                            {"tau", basis.config.tau},
                            {"lambda", basis.config.rpca.lambda},
                            {"tol", basis.config.rpca.tol},
                            {"anchor_seed", basis.config.anchor_seed},
                            {"anchor_count", basis.config.anchor_count},
                            {"average_grams", basis.config.average_grams},
                            {"diag_alpha", basis.config.diag_alpha},
                            {"generator_hash", basis.generator_hash},
                            {"archive_hash", hash}};
    io::save_json(path + ".json", manifest);
    return hash;
}

MotionBasis load_basis(const std::string& path) {
    const auto manifest = io::load_json(path + ".json");
    if (manifest.value("kind", "") != "motion_basis")
        throw ConfigError("manifest is not a motion_basis: " + path);
    const std::string expect = manifest.at("archive_hash").get<std::string>();
    const std::string actual = io::file_hash_hex(path);
    if (expect != actual)
        throw HashMismatchError("motion basis archive hash mismatch for " + path);
    auto arrays = io::load_archive(path);
    MotionBasis out;
    out.backward_codes = arrays.at("backward_codes");
    out.forward_codes = arrays.at("forward_codes");
    out.backward_selectivity = arrays.at("backward_selectivity");
    out.forward_selectivity = arrays.at("forward_selectivity");
    out.singvals_former = arrays.at("singvals_former");
    out.singvals_latter = arrays.at("singvals_latter");
    const Tensor& anchors = arrays.at("anchors");
    for (std::size_t i = 0; i < anchors.dim(0); ++i) {
        Tensor a({anchors.dim(1)});
        std::copy_n(anchors.data() + i * anchors.dim(1), anchors.dim(1), a.data());
        out.anchors.push_back(std::move(a));
    }
    out.rank_former = manifest.at("r_a").get<std::size_t>();
    out.rank_latter = manifest.at("r_b").get<std::size_t>();
    out.config.m = manifest.at("m").get<std::size_t>();
    out.config.tau = manifest.at("tau").get<double>();
    out.config.rpca.lambda = manifest.at("lambda").get<double>();
    out.config.rpca.tol = manifest.at("tol").get<double>();
    out.config.anchor_seed = manifest.at("anchor_seed").get<std::uint64_t>();
    out.config.anchor_count = manifest.at("anchor_count").get<std::size_t>();
    out.config.average_grams = manifest.at("average_grams").get<bool>();
    out.config.diag_alpha = manifest.at("diag_alpha").get<double>();
    out.generator_hash = manifest.at("generator_hash").get<std::string>();
    return out;
}

} // namespace mvg::motionspace
