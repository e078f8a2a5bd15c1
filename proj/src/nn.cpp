#include "mvg/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace mvg::nn {

using namespace mvg::ad;

Tensor randn_tensor(Rng& rng, std::vector<std::size_t> shape, double sd) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = sd * rng.normal();
    return t;
}

Dense::Dense(Rng& rng, std::size_t in, std::size_t out, double gain, double bias_init)
    : w(randn_tensor(rng, {out, in}), true),
      b(Tensor::full({out}, bias_init), true),
      w_scale(gain / std::sqrt(static_cast<double>(in))) {}

Var Dense::forward(const Var& x) const {
    return bias_cols(matmul(x, transpose(scale(w, w_scale))), b);
}

void Dense::collect(std::vector<Var>& out) {
    out.push_back(w);
    out.push_back(b);
}

Conv2dLayer::Conv2dLayer(Rng& rng, std::size_t ci, std::size_t co, std::size_t k, int stride_,
                         int pad_, double gain)
    : w(randn_tensor(rng, {co, ci, k, k}), true),
      b(Tensor::zeros({co}), true),
      w_scale(gain / std::sqrt(static_cast<double>(ci * k * k))),
      stride(stride_),
      pad(pad_) {}

Var Conv2dLayer::forward(const Var& x) const {
    return bias_c(conv2d(x, scale(w, w_scale), stride, pad), b);
}

void Conv2dLayer::collect(std::vector<Var>& out) {
    out.push_back(w);
    out.push_back(b);
}

Conv3dLayer::Conv3dLayer(Rng& rng, std::size_t ci, std::size_t co, std::size_t kt, std::size_t k,
                         const int stride_[3], double gain)
    : w(randn_tensor(rng, {co, ci, kt, k, k}), true),
      b(Tensor::zeros({co}), true),
      w_scale(gain / std::sqrt(static_cast<double>(ci * kt * k * k))) {
    for (int i = 0; i < 3; ++i) stride[i] = stride_[i];
    pad[0] = static_cast<int>(kt) / 2;
    pad[1] = static_cast<int>(k) / 2;
    pad[2] = static_cast<int>(k) / 2;
}

Var Conv3dLayer::forward(const Var& x) const {
    return bias_c(conv3d(x, scale(w, w_scale), stride, pad), b);
}

void Conv3dLayer::collect(std::vector<Var>& out) {
    out.push_back(w);
    out.push_back(b);
}

ModConv::ModConv(Rng& rng, std::size_t latent_dim, std::size_t ci, std::size_t co, std::size_t k,
                 bool upsample_, bool demodulate_)
    : style(rng, latent_dim, ci, 1.0, 1.0),
      w(randn_tensor(rng, {co, ci, k, k}), true),
      b(Tensor::zeros({co}), true),
      w_scale(1.0 / std::sqrt(static_cast<double>(ci * k * k))),
      demodulate(demodulate_),
      upsample(upsample_),
      pad(static_cast<int>(k) / 2) {}

Var ModConv::forward(const Var& x, const Var& latent) const {
    const std::size_t n = x.shape()[0];
    Var s = style.forward(latent); // [N, ci]
    Var xin = upsample ? upsample2(x) : x;
    Var xs = scale_nc(xin, s);
    Var weff = scale(w, w_scale);
    Var y = conv2d(xs, weff, 1, pad);
    if (demodulate) {
        // ||w_mod||^2 factorizes: sum_{j,k} (s_j w_ijk)^2 = sum_j s_j^2 q_ij
        Var q = dot_trail(weff, weff);           // [co, ci]
        Var e = matmul(mul(s, s), transpose(q)); // [N, co]
        Var ones = constant(Tensor::full({n, w.shape()[0]}, 1.0));
        Var d = div(ones, sqrt_op(add_const(e, 1e-8)));
        y = scale_nc(y, d);
    }
    return bias_c(y, b);
}

void ModConv::collect(std::vector<Var>& out) {
    style.collect(out);
    out.push_back(w);
    out.push_back(b);
}

Var minibatch_stddev(const Var& x) {
    const std::size_t n = x.shape()[0];
    const double inv_n = 1.0 / static_cast<double>(n);
    Var mu = scale(batch_sum(x), inv_n);
    Var d = sub(x, batch_bcast(mu, n));
    Var var = scale(batch_sum(mul(d, d)), inv_n);
    Var sd = sqrt_op(add_const(var, 1e-8));
    Var s = mean_all(sd);
    Var smap = broadcast_all(s, {n, 1, x.shape()[2], x.shape()[3]});
    return concat_ax1(x, smap);
}

LstmCell::LstmCell(Rng& rng, std::size_t input, std::size_t hidden) {
    const double sx = 1.0 / std::sqrt(static_cast<double>(input));
    const double sh = 1.0 / std::sqrt(static_cast<double>(hidden));
    auto mk = [&](std::size_t r, std::size_t c, double sd) {
        return Var(randn_tensor(rng, {r, c}, sd), true);
    };
    wx_i = mk(hidden, input, sx); wh_i = mk(hidden, hidden, sh);
    wx_f = mk(hidden, input, sx); wh_f = mk(hidden, hidden, sh);
    wx_g = mk(hidden, input, sx); wh_g = mk(hidden, hidden, sh);
    wx_o = mk(hidden, input, sx); wh_o = mk(hidden, hidden, sh);
    b_i = Var(Tensor::zeros({hidden}), true);
    b_f = Var(Tensor::full({hidden}, 1.0), true); // standard forget-gate bias
    b_g = Var(Tensor::zeros({hidden}), true);
    b_o = Var(Tensor::zeros({hidden}), true);
}

std::pair<Var, Var> LstmCell::forward(const Var& x, const Var& h, const Var& c) const {
    auto gate = [&](const Var& wx, const Var& wh, const Var& b) {
        return bias_cols(add(matmul(x, transpose(wx)), matmul(h, transpose(wh))), b);
    };
    Var i = sigmoid_op(gate(wx_i, wh_i, b_i));
    Var f = sigmoid_op(gate(wx_f, wh_f, b_f));
    Var g = tanh_op(gate(wx_g, wh_g, b_g));
    Var o = sigmoid_op(gate(wx_o, wh_o, b_o));
    Var c_new = add(mul(f, c), mul(i, g));
    Var h_new = mul(o, tanh_op(c_new));
    return {h_new, c_new};
}

void LstmCell::collect(std::vector<Var>& out) {
    for (auto* v : {&wx_i, &wh_i, &b_i, &wx_f, &wh_f, &b_f, &wx_g, &wh_g, &b_g, &wx_o, &wh_o, &b_o})
        out.push_back(*v);
}

void Adam::init(const std::vector<Var>& params) {
    t = 0;
    m.clear();
    v.clear();
    for (const auto& p : params) {
        m.push_back(Tensor::zeros(p.shape()));
        v.push_back(Tensor::zeros(p.shape()));
    }
}

void Adam::step(std::vector<Var>& params, const std::vector<Tensor>& grads) {
    if (m.size() != params.size()) throw std::logic_error("Adam: not initialized");
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = params[i].mutable_value();
        const Tensor& g = grads[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[i][j] = beta1 * m[i][j] + (1 - beta1) * g[j];
            v[i][j] = beta2 * v[i][j] + (1 - beta2) * g[j] * g[j];
            const double mh = m[i][j] / bc1;
            const double vh = v[i][j] / bc2;
            p[j] -= lr * mh / (std::sqrt(vh) + eps);
        }
    }
}

std::vector<Tensor> snapshot(const std::vector<Var>& params) {
    std::vector<Tensor> out;
    out.reserve(params.size());
    for (const auto& p : params) out.push_back(p.value());
    return out;
}

void restore(std::vector<Var>& params, const std::vector<Tensor>& values) {
    if (params.size() != values.size()) throw std::invalid_argument("restore: arity mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].value().same_shape(values[i]))
            throw std::invalid_argument("restore: shape mismatch at param " + std::to_string(i));
        params[i].mutable_value() = values[i];
    }
}

} // namespace mvg::nn
