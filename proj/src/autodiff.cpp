#include "mvg/autodiff.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "mvg/kernels.hpp"

namespace mvg::ad {

namespace {

std::atomic<std::uint64_t> g_next_id{1};

void check_same_shape(const Var& a, const Var& b, const char* op) {
    if (!a.value().same_shape(b.value()))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    Tensor::shape_str(a.shape()) + " vs " +
                                    Tensor::shape_str(b.shape()));
}

} // namespace

Var::Var(Tensor value, bool requires_grad) {
    n_ = std::make_shared<Node>();
    n_->value = std::move(value);
    n_->requires_grad = requires_grad;
    n_->id = g_next_id.fetch_add(1);
}

Var make_op(Tensor value, std::vector<Var> parents, VjpFn vjp) {
    Var v(std::move(value), false);
    auto n = v.node();
    for (const auto& p : parents)
        if (p.requires_grad()) n->requires_grad = true;
    if (n->requires_grad) {
        n->parents = std::move(parents);
        n->vjp = std::move(vjp);
    }
    return v;
}

Var constant(Tensor value) { return Var(std::move(value), false); }

Var detach(const Var& x) { return constant(x.value()); }

namespace {

std::vector<Var> topo_order(const Var& loss) {
    // Creation ids are monotone along construction order, which is a valid
    // topological order for a define-by-run graph.
    std::vector<Var> nodes;
    std::unordered_map<Node*, bool> seen;
    std::vector<Var> stack{loss};
    while (!stack.empty()) {
        Var v = stack.back();
        stack.pop_back();
        Node* n = v.node().get();
        if (seen.count(n) || !n->requires_grad) continue;
        seen[n] = true;
        nodes.push_back(v);
        for (const auto& p : n->parents) stack.push_back(p);
    }
    std::sort(nodes.begin(), nodes.end(),
              [](const Var& a, const Var& b) { return a.node()->id > b.node()->id; });
    return nodes;
}

std::vector<Var> backward_seeded(const Var& loss, Tensor seed, const std::vector<Var>& wrt) {
    if (!loss.value().same_shape(seed))
        throw std::invalid_argument("grad: seed shape must match output shape");
    std::unordered_map<Node*, Var> gmap;
    gmap[loss.node().get()] = constant(std::move(seed));
    for (const auto& v : topo_order(loss)) {
        Node* n = v.node().get();
        auto it = gmap.find(n);
        if (it == gmap.end()) continue; // unreachable from loss
        if (!n->vjp) continue;          // leaf
        std::vector<Var> pgs = n->vjp(it->second, v);
        if (pgs.size() != n->parents.size())
            throw std::logic_error("grad: vjp arity mismatch");
        for (std::size_t i = 0; i < pgs.size(); ++i) {
            const Var& p = n->parents[i];
            if (!p.requires_grad() || !pgs[i].defined()) continue;
            Node* pn = p.node().get();
            auto pit = gmap.find(pn);
            if (pit == gmap.end())
                gmap[pn] = pgs[i];
            else
                pit->second = add(pit->second, pgs[i]);
        }
    }
    std::vector<Var> out;
    out.reserve(wrt.size());
    for (const auto& w : wrt) {
        auto it = gmap.find(w.node().get());
        if (it == gmap.end())
            out.push_back(constant(Tensor::zeros(w.shape())));
        else
            out.push_back(it->second);
    }
    return out;
}

std::vector<Var> backward(const Var& loss, const std::vector<Var>& wrt) {
    if (loss.size() != 1) throw std::invalid_argument("grad: loss must be scalar");
    return backward_seeded(loss, Tensor::full(loss.shape(), 1.0), wrt);
}

} // namespace

std::vector<Tensor> grad(const Var& loss, const std::vector<Var>& wrt) {
    std::vector<Tensor> out;
    out.reserve(wrt.size());
    for (auto& v : backward(loss, wrt)) out.push_back(v.value());
    return out;
}

std::vector<Var> grad_vars(const Var& loss, const std::vector<Var>& wrt) {
    return backward(loss, wrt);
}

std::vector<Tensor> grad_seeded(const Var& output, const Tensor& seed,
                                const std::vector<Var>& wrt) {
    std::vector<Tensor> out;
    out.reserve(wrt.size());
    for (auto& v : backward_seeded(output, seed, wrt)) out.push_back(v.value());
    return out;
}

// ---------------------------------------------------------------- elementwise

Var add(const Var& a, const Var& b) {
    check_same_shape(a, b, "add");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
    return make_op(std::move(out), {a, b},
                   [](const Var& g, const Var&) { return std::vector<Var>{g, g}; });
}

Var sub(const Var& a, const Var& b) {
    check_same_shape(a, b, "sub");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
    return make_op(std::move(out), {a, b},
                   [](const Var& g, const Var&) { return std::vector<Var>{g, neg(g)}; });
}

Var mul(const Var& a, const Var& b) {
    check_same_shape(a, b, "mul");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
    return make_op(std::move(out), {a, b}, [a, b](const Var& g, const Var&) {
        return std::vector<Var>{mul(g, b), mul(g, a)};
    });
}

Var div(const Var& a, const Var& b) {
    check_same_shape(a, b, "div");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= b.value()[i];
    return make_op(std::move(out), {a, b}, [a, b](const Var& g, const Var& self) {
        Var da = div(g, b);
        Var db = neg(mul(da, self)); // -g*a/b^2 == -(g/b)*(a/b)
        return std::vector<Var>{da, db};
    });
}

Var neg(const Var& x) { return scale(x, -1.0); }

Var scale(const Var& x, double c) {
    Tensor out = x.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
    return make_op(std::move(out), {x},
                   [c](const Var& g, const Var&) { return std::vector<Var>{scale(g, c)}; });
}

Var add_const(const Var& x, double c) {
    Tensor out = x.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c;
    return make_op(std::move(out), {x},
                   [](const Var& g, const Var&) { return std::vector<Var>{g}; });
}

Var leaky_relu(const Var& x, double slope) {
    Tensor out = x.value();
    Tensor mask(out.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const bool pos = out[i] > 0.0;
        mask[i] = pos ? 1.0 : slope;
        if (!pos) out[i] *= slope;
    }
    Var cmask = constant(std::move(mask));
    return make_op(std::move(out), {x}, [cmask](const Var& g, const Var&) {
        return std::vector<Var>{mul(g, cmask)};
    });
}

Var tanh_op(const Var& x) {
    Tensor out = x.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
    return make_op(std::move(out), {x}, [](const Var& g, const Var& self) {
        Var one_minus_sq = add_const(neg(mul(self, self)), 1.0);
        return std::vector<Var>{mul(g, one_minus_sq)};
    });
}

Var sigmoid_op(const Var& x) {
    Tensor out = x.value();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = out[i];
        out[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    return make_op(std::move(out), {x}, [](const Var& g, const Var& self) {
        Var s1 = add_const(neg(self), 1.0);
        return std::vector<Var>{mul(g, mul(self, s1))};
    });
}

Var softplus_op(const Var& x) {
    Tensor out = x.value();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = out[i];
        out[i] = v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
    }
    return make_op(std::move(out), {x}, [x](const Var& g, const Var&) {
        return std::vector<Var>{mul(g, sigmoid_op(x))};
    });
}

Var sqrt_op(const Var& x) {
    Tensor out = x.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(out[i]);
    return make_op(std::move(out), {x}, [](const Var& g, const Var& self) {
        return std::vector<Var>{scale(div(g, self), 0.5)};
    });
}

// ------------------------------------------------------- reductions/broadcast

Var sum_all(const Var& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x.value()[i];
    auto shape = x.shape();
    return make_op(Tensor::scalar(s), {x}, [shape](const Var& g, const Var&) {
        return std::vector<Var>{broadcast_all(g, shape)};
    });
}

Var mean_all(const Var& x) { return scale(sum_all(x), 1.0 / static_cast<double>(x.size())); }

Var broadcast_all(const Var& s, std::vector<std::size_t> shape) {
    if (s.size() != 1) throw std::invalid_argument("broadcast_all: expects scalar");
    Tensor out = Tensor::full(shape, s.value()[0]);
    return make_op(std::move(out), {s}, [](const Var& g, const Var&) {
        return std::vector<Var>{sum_all(g)};
    });
}

Var sum_to_c(const Var& x) {
    if (x.shape().size() < 2) throw std::invalid_argument("sum_to_c: rank must be >= 2");
    const std::size_t n = x.shape()[0], c = x.shape()[1];
    const std::size_t m = x.size() / (n * c);
    Tensor out({c});
    const double* px = x.value().data();
    for (std::size_t in = 0; in < n; ++in)
        for (std::size_t ic = 0; ic < c; ++ic) {
            const double* b = px + (in * c + ic) * m;
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) acc += b[i];
            out[ic] += acc;
        }
    auto shape = x.shape();
    return make_op(std::move(out), {x}, [shape](const Var& g, const Var&) {
        return std::vector<Var>{bcast_from_c(g, shape)};
    });
}

Var bcast_from_c(const Var& b, std::vector<std::size_t> shape) {
    const std::size_t n = shape[0], c = shape[1];
    const std::size_t m = Tensor::count(shape) / (n * c);
    if (b.size() != c) throw std::invalid_argument("bcast_from_c: channel mismatch");
    Tensor out(shape);
    double* po = out.data();
    for (std::size_t in = 0; in < n; ++in)
        for (std::size_t ic = 0; ic < c; ++ic) {
            const double v = b.value()[ic];
            double* blk = po + (in * c + ic) * m;
            for (std::size_t i = 0; i < m; ++i) blk[i] = v;
        }
    return make_op(std::move(out), {b}, [](const Var& g, const Var&) {
        return std::vector<Var>{sum_to_c(g)};
    });
}

Var col_sum(const Var& x) {
    if (x.shape().size() != 2) throw std::invalid_argument("col_sum: expects [N,D]");
    const std::size_t n = x.shape()[0], d = x.shape()[1];
    Tensor out({d});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out[j] += x.value()[i * d + j];
    return make_op(std::move(out), {x}, [n](const Var& g, const Var&) {
        return std::vector<Var>{row_broadcast(g, n)};
    });
}

Var row_broadcast(const Var& b, std::size_t n) {
    const std::size_t d = b.size();
    Tensor out({n, d});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out[i * d + j] = b.value()[j];
    return make_op(std::move(out), {b}, [](const Var& g, const Var&) {
        return std::vector<Var>{col_sum(g)};
    });
}

Var batch_sum(const Var& x) {
    const std::size_t n = x.shape()[0];
    std::vector<std::size_t> rest(x.shape().begin() + 1, x.shape().end());
    const std::size_t m = x.size() / n;
    Tensor out(rest);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) out[j] += x.value()[i * m + j];
    return make_op(std::move(out), {x}, [n](const Var& g, const Var&) {
        return std::vector<Var>{batch_bcast(g, n)};
    });
}

Var batch_bcast(const Var& x, std::size_t n) {
    std::vector<std::size_t> shape{n};
    for (auto d : x.shape()) shape.push_back(d);
    const std::size_t m = x.size();
    Tensor out(shape);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) out[i * m + j] = x.value()[j];
    return make_op(std::move(out), {x}, [](const Var& g, const Var&) {
        return std::vector<Var>{batch_sum(g)};
    });
}

Var scale_nc(const Var& x, const Var& s) {
    const auto& xs = x.shape();
    if (xs.size() < 2 || s.shape().size() != 2 || s.shape()[0] != xs[0] || s.shape()[1] != xs[1])
        throw std::invalid_argument("scale_nc: shape mismatch");
    const std::size_t n = xs[0], c = xs[1], m = x.size() / (n * c);
    Tensor out = x.value();
    double* po = out.data();
    for (std::size_t in = 0; in < n; ++in)
        for (std::size_t ic = 0; ic < c; ++ic) {
            const double v = s.value()[in * c + ic];
            double* blk = po + (in * c + ic) * m;
            for (std::size_t i = 0; i < m; ++i) blk[i] *= v;
        }
    return make_op(std::move(out), {x, s}, [x, s](const Var& g, const Var&) {
        return std::vector<Var>{scale_nc(g, s), dot_trail(g, x)};
    });
}

Var dot_trail(const Var& a, const Var& b) {
    check_same_shape(a, b, "dot_trail");
    const std::size_t n = a.shape()[0], c = a.shape()[1], m = a.size() / (n * c);
    Tensor out({n, c});
    for (std::size_t i = 0; i < n * c; ++i) {
        const double* pa = a.value().data() + i * m;
        const double* pb = b.value().data() + i * m;
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += pa[j] * pb[j];
        out[i] = acc;
    }
    return make_op(std::move(out), {a, b}, [a, b](const Var& g, const Var&) {
        return std::vector<Var>{scale_nc(b, g), scale_nc(a, g)};
    });
}

// --------------------------------------------------------------------- shape

Var reshape(const Var& x, std::vector<std::size_t> shape) {
    auto orig = x.shape();
    return make_op(x.value().reshaped(std::move(shape)), {x},
                   [orig](const Var& g, const Var&) {
                       return std::vector<Var>{reshape(g, orig)};
                   });
}

Var concat_ax1(const Var& a, const Var& b) {
    const auto& sa = a.shape();
    const auto& sb = b.shape();
    if (sa.size() != sb.size() || sa.size() < 2 || sa[0] != sb[0])
        throw std::invalid_argument("concat_ax1: incompatible shapes");
    for (std::size_t i = 2; i < sa.size(); ++i)
        if (sa[i] != sb[i]) throw std::invalid_argument("concat_ax1: trailing dim mismatch");
    const std::size_t n = sa[0], ca = sa[1], cb = sb[1];
    const std::size_t m = a.size() / (n * ca);
    std::vector<std::size_t> os = sa;
    os[1] = ca + cb;
    Tensor out(os);
    for (std::size_t in = 0; in < n; ++in) {
        std::copy_n(a.value().data() + in * ca * m, ca * m, out.data() + in * (ca + cb) * m);
        std::copy_n(b.value().data() + in * cb * m, cb * m,
                    out.data() + (in * (ca + cb) + ca) * m);
    }
    return make_op(std::move(out), {a, b}, [ca, cb](const Var& g, const Var&) {
        return std::vector<Var>{slice_ax1(g, 0, ca), slice_ax1(g, ca, ca + cb)};
    });
}

Var slice_ax1(const Var& x, std::size_t c0, std::size_t c1) {
    const auto& s = x.shape();
    if (s.size() < 2 || c1 > s[1] || c0 >= c1) throw std::invalid_argument("slice_ax1: bad range");
    const std::size_t n = s[0], c = s[1], m = x.size() / (n * c);
    std::vector<std::size_t> os = s;
    os[1] = c1 - c0;
    Tensor out(os);
    for (std::size_t in = 0; in < n; ++in)
        std::copy_n(x.value().data() + (in * c + c0) * m, (c1 - c0) * m,
                    out.data() + in * (c1 - c0) * m);
    const std::size_t c_total = c;
    return make_op(std::move(out), {x}, [c0, c_total](const Var& g, const Var&) {
        return std::vector<Var>{embed_ax1(g, c0, c_total)};
    });
}

Var embed_ax1(const Var& x, std::size_t c0, std::size_t c_total) {
    const auto& s = x.shape();
    const std::size_t n = s[0], c = s[1], m = x.size() / (n * c);
    std::vector<std::size_t> os = s;
    os[1] = c_total;
    Tensor out(os);
    for (std::size_t in = 0; in < n; ++in)
        std::copy_n(x.value().data() + in * c * m, c * m, out.data() + (in * c_total + c0) * m);
    const std::size_t c1 = c0 + c;
    return make_op(std::move(out), {x}, [c0, c1](const Var& g, const Var&) {
        return std::vector<Var>{slice_ax1(g, c0, c1)};
    });
}

Var stack_time(const std::vector<Var>& frames) {
    if (frames.empty()) throw std::invalid_argument("stack_time: no frames");
    const auto& s = frames[0].shape();
    if (s.size() != 4) throw std::invalid_argument("stack_time: frames must be [N,C,H,W]");
    for (const auto& f : frames)
        if (f.shape() != s) throw std::invalid_argument("stack_time: frame shape mismatch");
    const std::size_t n = s[0], c = s[1], h = s[2], w = s[3], t = frames.size();
    Tensor out({n, c, t, h, w});
    for (std::size_t it = 0; it < t; ++it) {
        const double* pf = frames[it].value().data();
        for (std::size_t in = 0; in < n; ++in)
            for (std::size_t ic = 0; ic < c; ++ic)
                std::copy_n(pf + (in * c + ic) * h * w, h * w,
                            out.data() + (((in * c + ic) * t) + it) * h * w);
    }
    return make_op(std::move(out), frames, [t](const Var& g, const Var&) {
        std::vector<Var> pgs;
        pgs.reserve(t);
        for (std::size_t it = 0; it < t; ++it) pgs.push_back(slice_time(g, it));
        return pgs;
    });
}

Var slice_time(const Var& x, std::size_t t) {
    const auto& s = x.shape();
    if (s.size() != 5 || t >= s[2]) throw std::invalid_argument("slice_time: bad index");
    const std::size_t n = s[0], c = s[1], tt = s[2], h = s[3], w = s[4];
    Tensor out({n, c, h, w});
    for (std::size_t in = 0; in < n; ++in)
        for (std::size_t ic = 0; ic < c; ++ic)
            std::copy_n(x.value().data() + (((in * c + ic) * tt) + t) * h * w, h * w,
                        out.data() + (in * c + ic) * h * w);
    return make_op(std::move(out), {x}, [t, tt](const Var& g, const Var&) {
        return std::vector<Var>{embed_time(g, t, tt)};
    });
}

Var embed_time(const Var& x, std::size_t t, std::size_t t_total) {
    const auto& s = x.shape();
    if (s.size() != 4) throw std::invalid_argument("embed_time: expects [N,C,H,W]");
    const std::size_t n = s[0], c = s[1], h = s[2], w = s[3];
    Tensor out({n, c, t_total, h, w});
    for (std::size_t in = 0; in < n; ++in)
        for (std::size_t ic = 0; ic < c; ++ic)
            std::copy_n(x.value().data() + (in * c + ic) * h * w, h * w,
                        out.data() + (((in * c + ic) * t_total) + t) * h * w);
    return make_op(std::move(out), {x}, [t](const Var& g, const Var&) {
        return std::vector<Var>{slice_time(g, t)};
    });
}

// ------------------------------------------------------------ linear algebra

Var matmul(const Var& a, const Var& b) {
    return make_op(kern::matmul(a.value(), b.value()), {a, b},
                   [a, b](const Var& g, const Var&) {
                       return std::vector<Var>{matmul(g, transpose(b)), matmul(transpose(a), g)};
                   });
}

Var transpose(const Var& a) {
    return make_op(kern::transpose(a.value()), {a}, [](const Var& g, const Var&) {
        return std::vector<Var>{transpose(g)};
    });
}

Var bias_cols(const Var& x, const Var& b) {
    if (x.shape().size() != 2 || x.shape()[1] != b.size())
        throw std::invalid_argument("bias_cols: shape mismatch");
    const std::size_t n = x.shape()[0], d = x.shape()[1];
    Tensor out = x.value();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out[i * d + j] += b.value()[j];
    return make_op(std::move(out), {x, b}, [](const Var& g, const Var&) {
        return std::vector<Var>{g, col_sum(g)};
    });
}

Var bias_c(const Var& x, const Var& b) {
    const auto& s = x.shape();
    if (s.size() < 2 || s[1] != b.size()) throw std::invalid_argument("bias_c: shape mismatch");
    const std::size_t n = s[0], c = s[1], m = x.size() / (n * c);
    Tensor out = x.value();
    double* po = out.data();
    for (std::size_t in = 0; in < n; ++in)
        for (std::size_t ic = 0; ic < c; ++ic) {
            const double v = b.value()[ic];
            double* blk = po + (in * c + ic) * m;
            for (std::size_t i = 0; i < m; ++i) blk[i] += v;
        }
    return make_op(std::move(out), {x, b}, [](const Var& g, const Var&) {
        return std::vector<Var>{g, sum_to_c(g)};
    });
}

// ------------------------------------------------------- convolution family

Var conv2d(const Var& x, const Var& w, int stride, int pad) {
    const std::size_t h = x.shape()[2], wi = x.shape()[3];
    const std::size_t kh = w.shape()[2], kw = w.shape()[3];
    return make_op(kern::conv2d(x.value(), w.value(), stride, pad), {x, w},
                   [x, w, stride, pad, h, wi, kh, kw](const Var& g, const Var&) {
                       return std::vector<Var>{conv2d_dx(g, w, stride, pad, h, wi),
                                               conv2d_dw(x, g, stride, pad, kh, kw)};
                   });
}

Var conv2d_dx(const Var& gy, const Var& w, int stride, int pad, std::size_t h, std::size_t w_in) {
    return make_op(kern::conv2d_dx(gy.value(), w.value(), stride, pad, h, w_in), {gy, w},
                   [gy, w, stride, pad](const Var& g, const Var&) {
                       const std::size_t kh = w.shape()[2], kw = w.shape()[3];
                       return std::vector<Var>{conv2d(g, w, stride, pad),
                                               conv2d_dw(g, gy, stride, pad, kh, kw)};
                   });
}

Var conv2d_dw(const Var& x, const Var& gy, int stride, int pad, std::size_t kh, std::size_t kw) {
    return make_op(kern::conv2d_dw(x.value(), gy.value(), stride, pad, kh, kw), {x, gy},
                   [x, gy, stride, pad](const Var& g, const Var&) {
                       const std::size_t h = x.shape()[2], wi = x.shape()[3];
                       return std::vector<Var>{conv2d_dx(gy, g, stride, pad, h, wi),
                                               conv2d(x, g, stride, pad)};
                   });
}

Var conv3d(const Var& x, const Var& w, const int stride[3], const int pad[3]) {
    std::array<int, 3> s{stride[0], stride[1], stride[2]}, p{pad[0], pad[1], pad[2]};
    const std::size_t t = x.shape()[2], h = x.shape()[3], wi = x.shape()[4];
    const std::size_t kt = w.shape()[2], kh = w.shape()[3], kw = w.shape()[4];
    return make_op(kern::conv3d(x.value(), w.value(), stride, pad), {x, w},
                   [x, w, s, p, t, h, wi, kt, kh, kw](const Var& g, const Var&) {
                       return std::vector<Var>{conv3d_dx(g, w, s.data(), p.data(), t, h, wi),
                                               conv3d_dw(x, g, s.data(), p.data(), kt, kh, kw)};
                   });
}

Var conv3d_dx(const Var& gy, const Var& w, const int stride[3], const int pad[3],
              std::size_t t, std::size_t h, std::size_t w_in) {
    std::array<int, 3> s{stride[0], stride[1], stride[2]}, p{pad[0], pad[1], pad[2]};
    return make_op(kern::conv3d_dx(gy.value(), w.value(), stride, pad, t, h, w_in), {gy, w},
                   [gy, w, s, p](const Var& g, const Var&) {
                       const std::size_t kt = w.shape()[2], kh = w.shape()[3], kw = w.shape()[4];
                       return std::vector<Var>{conv3d(g, w, s.data(), p.data()),
                                               conv3d_dw(g, gy, s.data(), p.data(), kt, kh, kw)};
                   });
}

Var conv3d_dw(const Var& x, const Var& gy, const int stride[3], const int pad[3],
              std::size_t kt, std::size_t kh, std::size_t kw) {
    std::array<int, 3> s{stride[0], stride[1], stride[2]}, p{pad[0], pad[1], pad[2]};
    return make_op(kern::conv3d_dw(x.value(), gy.value(), stride, pad, kt, kh, kw), {x, gy},
                   [x, gy, s, p](const Var& g, const Var&) {
                       const std::size_t t = x.shape()[2], h = x.shape()[3], wi = x.shape()[4];
                       return std::vector<Var>{conv3d_dx(gy, g, s.data(), p.data(), t, h, wi),
                                               conv3d(x, g, s.data(), p.data())};
                   });
}

Var upsample2(const Var& x) {
    return make_op(kern::upsample2(x.value()), {x}, [](const Var& g, const Var&) {
        return std::vector<Var>{downsum2(g)};
    });
}

Var downsum2(const Var& x) {
    return make_op(kern::downsum2(x.value()), {x}, [](const Var& g, const Var&) {
        return std::vector<Var>{upsample2(g)};
    });
}

} // namespace mvg::ad
