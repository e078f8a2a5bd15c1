#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "mvg/tensor.hpp"

namespace mvg::ad {

class Var;

// Gradient rule: given the upstream gradient g (same shape as the node's
// value) and the node itself, return gradients for each parent, aligned with
// the parent list. Rules are written in terms of the taped ops below, so a
// backward pass is itself differentiable (needed for the R1 penalty).
using VjpFn = std::function<std::vector<Var>(const Var& g, const Var& self)>;

struct Node {
    Tensor value;
    bool requires_grad = false;
    std::uint64_t id = 0;
    std::vector<Var> parents;
    VjpFn vjp; // empty for leaves
};

class Var {
public:
    Var() = default;
    explicit Var(Tensor value, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(n_); }
    const Tensor& value() const { return n_->value; }
    Tensor& mutable_value() { return n_->value; }
    bool requires_grad() const { return n_ && n_->requires_grad; }
    // Leaf freeze/unfreeze; affects graphs built afterwards.
    void set_requires_grad(bool v) { n_->requires_grad = v; }
    const std::vector<std::size_t>& shape() const { return n_->value.shape(); }
    std::size_t size() const { return n_->value.size(); }

    std::shared_ptr<Node> node() const { return n_; }
    static Var from_node(std::shared_ptr<Node> n) {
        Var v;
        v.n_ = std::move(n);
        return v;
    }

private:
    std::shared_ptr<Node> n_;
};

Var make_op(Tensor value, std::vector<Var> parents, VjpFn vjp);
Var constant(Tensor value);
Var detach(const Var& x);

// Reverse-mode gradients of a scalar loss w.r.t. `wrt`. The `_vars` form
// keeps the gradient graph alive so the result can be differentiated again.
std::vector<Tensor> grad(const Var& loss, const std::vector<Var>& wrt);
std::vector<Var> grad_vars(const Var& loss, const std::vector<Var>& wrt);

// Backward pass from a non-scalar output with an explicit cotangent seed.
std::vector<Tensor> grad_seeded(const Var& output, const Tensor& seed,
                                const std::vector<Var>& wrt);

// ---- elementwise ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var neg(const Var& x);
Var scale(const Var& x, double c);
Var add_const(const Var& x, double c);
Var leaky_relu(const Var& x, double slope);
Var tanh_op(const Var& x);
Var sigmoid_op(const Var& x);
Var softplus_op(const Var& x);
Var sqrt_op(const Var& x);

// ---- reductions / broadcasts ----
Var sum_all(const Var& x);                                    // -> [1]
Var mean_all(const Var& x);                                   // -> [1]
Var broadcast_all(const Var& s, std::vector<std::size_t> shape); // [1] -> shape
Var sum_to_c(const Var& x);                                   // [N,C,...] -> [C]
Var bcast_from_c(const Var& b, std::vector<std::size_t> shape);  // [C] -> [N,C,...]
Var col_sum(const Var& x);                                    // [N,D] -> [D]
Var row_broadcast(const Var& b, std::size_t n);               // [D] -> [N,D]
Var batch_sum(const Var& x);                                  // [N,...] -> [...]
Var batch_bcast(const Var& x, std::size_t n);                 // [...] -> [N,...]
Var scale_nc(const Var& x, const Var& s);                     // x[N,C,...] * s[N,C]
Var dot_trail(const Var& a, const Var& b);                    // -> [N,C]

// ---- shape ----
Var reshape(const Var& x, std::vector<std::size_t> shape);
Var concat_ax1(const Var& a, const Var& b);
Var slice_ax1(const Var& x, std::size_t c0, std::size_t c1);
Var embed_ax1(const Var& x, std::size_t c0, std::size_t c_total);
Var stack_time(const std::vector<Var>& frames);               // T x [N,C,H,W] -> [N,C,T,H,W]
Var slice_time(const Var& x, std::size_t t);                  // [N,C,T,H,W] -> [N,C,H,W]
Var embed_time(const Var& x, std::size_t t, std::size_t t_total);

// ---- linear algebra ----
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var bias_cols(const Var& x, const Var& b);   // [N,D] + [D]
Var bias_c(const Var& x, const Var& b);      // [N,C,...] + [C]

// ---- convolution / resampling ----
Var conv2d(const Var& x, const Var& w, int stride, int pad);
Var conv2d_dx(const Var& gy, const Var& w, int stride, int pad,
              std::size_t h, std::size_t w_in);
Var conv2d_dw(const Var& x, const Var& gy, int stride, int pad,
              std::size_t kh, std::size_t kw);
Var conv3d(const Var& x, const Var& w, const int stride[3], const int pad[3]);
Var conv3d_dx(const Var& gy, const Var& w, const int stride[3], const int pad[3],
              std::size_t t, std::size_t h, std::size_t w_in);
Var conv3d_dw(const Var& x, const Var& gy, const int stride[3], const int pad[3],
              std::size_t kt, std::size_t kh, std::size_t kw);
Var upsample2(const Var& x);
Var downsum2(const Var& x);

} // namespace mvg::ad
