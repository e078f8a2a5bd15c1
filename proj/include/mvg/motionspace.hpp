#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mvg/pairgan.hpp"
#include "mvg/tensor.hpp"

namespace mvg::motionspace {

enum class Frame { former, latter, both };

// ---- robust PCA via ADMM: min |L|_* + lambda |S|_1  s.t.  L + S = M ----
struct RpcaConfig {
    double lambda = 0.0; // 0 -> 1/sqrt(d)
    double rho = 1.0;
    double tol = 1e-6;
    std::size_t max_iter = 1000;
};

struct RpcaResult {
    Tensor low_rank; // L*
    Tensor sparse;   // S*
    std::size_t iterations = 0;
    double residual = 0.0; // relative Frobenius |M-L-S|/|M|
    bool converged = false;
};

RpcaResult rpca_admm(const Tensor& m, double lambda, double rho, double tol,
                     std::size_t max_iter);
RpcaResult rpca_admm(const Tensor& m, const RpcaConfig& cfg);

// ---- SVD of the (PSD) low-rank part ----
struct SvdBasis {
    Tensor v;        // [d,d], columns by descending singular value
    Tensor singvals; // [d]
};

// Negative eigenvalues beyond -1e-8 are rejected, smaller ones clipped to 0.
// Column signs fixed so the first non-negligible entry is positive.
SvdBasis svd_basis(const Tensor& l_star);

std::size_t effective_rank(const Tensor& singvals, double tau);

struct Projection {
    Tensor direction; // unit norm when survived
    bool survived = false;
    double pre_norm = 0.0;
};

// p = (I - V1 V1^T) v, renormalized; discarded if the residual is
// numerically zero (< 1e-6).
Projection project_to_null(const Tensor& v_dir, const Tensor& v_b1);

Tensor edit_latent(const Tensor& omega, const Tensor& direction, double alpha);

// ---- Jacobians of the synthesis network ----
// Exact forward-mode Jacobian: rows ordered as the flattened frame pixels,
// former frame rows above latter frame rows for Frame::both.
Tensor jacobian(const pairgan::PairGenerator& gen, const Tensor& omega, Frame frame);

// Reverse-mode row block (memory-bounded path; must agree with `jacobian`).
Tensor jacobian_by_rows(const pairgan::PairGenerator& gen, const Tensor& omega, Frame frame,
                        std::size_t row_begin, std::size_t row_end);

// Column assembly shared by both paths and by tests with synthetic tangents.
Tensor assemble_jacobian(const std::function<Tensor(const Tensor&)>& jvp, std::size_t d_in,
                         std::size_t rows);

// |G(omega + alpha n) - G(omega) - alpha J n|_2 : local linearization check.
double first_order_edit_error(const pairgan::PairGenerator& gen, const Tensor& omega,
                              const Tensor& direction, double alpha);

// ---- motion basis ----
struct MotionBasisConfig {
    std::size_t anchor_count = 8;
    std::size_t m = 30;
    double tau = 1e-3;
    RpcaConfig rpca;
    std::uint64_t anchor_seed = 99;
    double diag_alpha = 3.0;
    bool average_grams = true; // false: per-anchor bases merged round-robin
};

struct MotionBasis {
    Tensor backward_codes; // [m, d]; rows edit the former frame
    Tensor forward_codes;  // [m, d]; rows edit the latter frame
    std::size_t rank_former = 0; // r_a
    std::size_t rank_latter = 0; // r_b
    std::vector<Tensor> anchors; // latent codes used
    // per-code median over anchors of |unwanted frame change| / |edited frame change|
    Tensor backward_selectivity; // [m]
    Tensor forward_selectivity;  // [m]
    Tensor singvals_former, singvals_latter;
    std::string generator_hash;
    MotionBasisConfig config;
};

MotionBasis compute_motion_basis(const pairgan::PairGenerator& gen, const MotionBasisConfig& cfg,
                                 const std::string& generator_hash);

// Measures |Delta former| and |Delta latter| for an edit at strength alpha.
std::pair<double, double> edit_displacement(const pairgan::PairGenerator& gen,
                                            const Tensor& omega, const Tensor& direction,
                                            double alpha);

std::string save_basis(const std::string& path, const MotionBasis& basis);
MotionBasis load_basis(const std::string& path);

} // namespace mvg::motionspace
