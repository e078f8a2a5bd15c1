#pragma once

#include <cstdint>
#include <vector>

#include "mvg/autodiff.hpp"
#include "mvg/rng.hpp"
#include "mvg/tensor.hpp"

namespace mvg::nn {

Tensor randn_tensor(Rng& rng, std::vector<std::size_t> shape, double sd = 1.0);

// Fully connected layer with equalized learning rate: weights are stored
// N(0,1) and multiplied by gain/sqrt(fan_in) at use.
struct Dense {
    ad::Var w; // [out, in]
    ad::Var b; // [out]
    double w_scale = 1.0;

    Dense() = default;
    Dense(Rng& rng, std::size_t in, std::size_t out, double gain, double bias_init);
    ad::Var forward(const ad::Var& x) const; // [N,in] -> [N,out]
    void collect(std::vector<ad::Var>& out);
};

// Plain conv layer with equalized learning rate, optional stride.
struct Conv2dLayer {
    ad::Var w; // [co, ci, k, k]
    ad::Var b; // [co]
    double w_scale = 1.0;
    int stride = 1, pad = 1;

    Conv2dLayer() = default;
    Conv2dLayer(Rng& rng, std::size_t ci, std::size_t co, std::size_t k, int stride, int pad,
                double gain);
    ad::Var forward(const ad::Var& x) const;
    void collect(std::vector<ad::Var>& out);
};

struct Conv3dLayer {
    ad::Var w; // [co, ci, kt, kh, kw]
    ad::Var b;
    double w_scale = 1.0;
    int stride[3] = {1, 1, 1};
    int pad[3] = {1, 1, 1};

    Conv3dLayer() = default;
    Conv3dLayer(Rng& rng, std::size_t ci, std::size_t co, std::size_t kt, std::size_t k,
                const int stride[3], double gain);
    ad::Var forward(const ad::Var& x) const;
    void collect(std::vector<ad::Var>& out);
};

// Style-modulated convolution: per-sample input-channel scaling followed by a
// shared conv and (optionally) per-sample output demodulation. Equivalent to
// modulating the conv weights sample-by-sample, but keeps the conv shared.
struct ModConv {
    Dense style; // latent -> [ci], bias init 1
    ad::Var w;   // [co, ci, k, k]
    ad::Var b;   // [co]
    double w_scale = 1.0;
    bool demodulate = true;
    bool upsample = false;
    int pad = 1;

    ModConv() = default;
    ModConv(Rng& rng, std::size_t latent_dim, std::size_t ci, std::size_t co, std::size_t k,
            bool upsample, bool demodulate);
    ad::Var forward(const ad::Var& x, const ad::Var& latent) const;
    void collect(std::vector<ad::Var>& out);
};

// Appends one channel holding the batch-pooled feature standard deviation.
ad::Var minibatch_stddev(const ad::Var& x);

struct LstmCell {
    ad::Var wx_i, wh_i, b_i;
    ad::Var wx_f, wh_f, b_f;
    ad::Var wx_g, wh_g, b_g;
    ad::Var wx_o, wh_o, b_o;

    LstmCell() = default;
    LstmCell(Rng& rng, std::size_t input, std::size_t hidden);
    // x [N,input], h/c [N,hidden] -> (h', c')
    std::pair<ad::Var, ad::Var> forward(const ad::Var& x, const ad::Var& h,
                                        const ad::Var& c) const;
    void collect(std::vector<ad::Var>& out);
};

struct Adam {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t t = 0;
    std::vector<Tensor> m, v;

    void init(const std::vector<ad::Var>& params);
    void step(std::vector<ad::Var>& params, const std::vector<Tensor>& grads);
};

// Deep copies of parameter values (checkpoint snapshots).
std::vector<Tensor> snapshot(const std::vector<ad::Var>& params);
void restore(std::vector<ad::Var>& params, const std::vector<Tensor>& values);

} // namespace mvg::nn
