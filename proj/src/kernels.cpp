#include "mvg/kernels.hpp"

#include <cstdint>
#include <stdexcept>

namespace mvg::kern {

namespace {

inline std::size_t out_dim(std::size_t in, std::size_t k, int stride, int pad) {
    const std::int64_t v = (static_cast<std::int64_t>(in) + 2 * pad - static_cast<std::int64_t>(k));
    if (v < 0) throw std::invalid_argument("conv: kernel larger than padded input");
    return static_cast<std::size_t>(v / stride) + 1;
}

} // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0))
        throw std::invalid_argument("matmul: incompatible shapes " +
                                    Tensor::shape_str(a.shape()) + " x " + Tensor::shape_str(b.shape()));
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor c({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
        double* crow = pc + i * n;
        const double* arow = pa + i * k;
        for (std::size_t l = 0; l < k; ++l) {
            const double av = arow[l];
            if (av == 0.0) continue;
            const double* brow = pb + l * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    return c;
}

Tensor transpose(const Tensor& a) {
    if (a.ndim() != 2) throw std::invalid_argument("transpose: expects rank-2 tensor");
    const std::size_t m = a.dim(0), n = a.dim(1);
    Tensor t({n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) t[j * m + i] = a[i * n + j];
    return t;
}

Tensor conv2d(const Tensor& x, const Tensor& w, int stride, int pad) {
    const std::size_t n = x.dim(0), ci = x.dim(1), h = x.dim(2), wi = x.dim(3);
    const std::size_t co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
    if (w.dim(1) != ci)
        throw std::invalid_argument("conv2d: channel mismatch (input " + std::to_string(ci) +
                                    ", weight expects " + std::to_string(w.dim(1)) + ")");
    const std::size_t ho = out_dim(h, kh, stride, pad), wo = out_dim(wi, kw, stride, pad);
    Tensor y({n, co, ho, wo});
    const double* px = x.data();
    const double* pw = w.data();
    double* py = y.data();

    if (stride == 1 && kh == 3 && kw == 3 && pad == 1 && wi >= 2) {
        // common case: 3x3 same-padding; row-wise three-tap accumulation
#pragma omp parallel for collapse(2) schedule(static)
        for (std::int64_t in = 0; in < static_cast<std::int64_t>(n); ++in) {
            for (std::int64_t ico = 0; ico < static_cast<std::int64_t>(co); ++ico) {
                double* yb = py + (in * co + ico) * ho * wo;
                for (std::size_t ic = 0; ic < ci; ++ic) {
                    const double* xb = px + (in * ci + ic) * h * wi;
                    const double* wb = pw + (ico * ci + ic) * 9;
                    for (std::size_t oy = 0; oy < ho; ++oy) {
                        double* yrow = yb + oy * wo;
                        for (std::size_t ky = 0; ky < 3; ++ky) {
                            const std::int64_t iy = static_cast<std::int64_t>(oy) + ky - 1;
                            if (iy < 0 || iy >= static_cast<std::int64_t>(h)) continue;
                            const double* xrow = xb + iy * wi;
                            const double w0 = wb[ky * 3], w1 = wb[ky * 3 + 1], w2 = wb[ky * 3 + 2];
                            yrow[0] += w1 * xrow[0] + w2 * xrow[1];
                            for (std::size_t ox = 1; ox + 1 < wo; ++ox)
                                yrow[ox] += w0 * xrow[ox - 1] + w1 * xrow[ox] + w2 * xrow[ox + 1];
                            yrow[wo - 1] += w0 * xrow[wo - 2] + w1 * xrow[wo - 1];
                        }
                    }
                }
            }
        }
        return y;
    }

#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t in = 0; in < static_cast<std::int64_t>(n); ++in) {
        for (std::int64_t ico = 0; ico < static_cast<std::int64_t>(co); ++ico) {
            double* yb = py + (in * co + ico) * ho * wo;
            for (std::size_t ic = 0; ic < ci; ++ic) {
                const double* xb = px + (in * ci + ic) * h * wi;
                const double* wb = pw + (ico * ci + ic) * kh * kw;
                for (std::size_t ky = 0; ky < kh; ++ky) {
                    for (std::size_t kx = 0; kx < kw; ++kx) {
                        const double wv = wb[ky * kw + kx];
                        if (wv == 0.0) continue;
                        for (std::size_t oy = 0; oy < ho; ++oy) {
                            const std::int64_t iy = static_cast<std::int64_t>(oy) * stride + ky - pad;
                            if (iy < 0 || iy >= static_cast<std::int64_t>(h)) continue;
                            const double* xrow = xb + iy * wi;
                            double* yrow = yb + oy * wo;
                            const std::int64_t off = static_cast<std::int64_t>(kx) - pad;
                            // valid ox range: 0 <= ox*stride + off < wi
                            std::int64_t o0 = off < 0 ? (-off + stride - 1) / stride : 0;
                            std::int64_t o1 = (static_cast<std::int64_t>(wi) - 1 - off) / stride;
                            o0 = std::max<std::int64_t>(o0, 0);
                            o1 = std::min<std::int64_t>(o1, static_cast<std::int64_t>(wo) - 1);
                            if (stride == 1) {
                                for (std::int64_t ox = o0; ox <= o1; ++ox)
                                    yrow[ox] += wv * xrow[ox + off];
                            } else {
                                for (std::int64_t ox = o0; ox <= o1; ++ox)
                                    yrow[ox] += wv * xrow[ox * stride + off];
                            }
                        }
                    }
                }
            }
        }
    }
    return y;
}

Tensor conv2d_dx(const Tensor& gy, const Tensor& w, int stride, int pad,
                 std::size_t h, std::size_t w_in) {
    const std::size_t n = gy.dim(0), co = gy.dim(1), ho = gy.dim(2), wo = gy.dim(3);
    const std::size_t ci = w.dim(1), kh = w.dim(2), kw = w.dim(3);
    if (w.dim(0) != co) throw std::invalid_argument("conv2d_dx: channel mismatch");
    Tensor dx({n, ci, h, w_in});
    const double* pg = gy.data();
    const double* pw = w.data();
    double* pd = dx.data();

    if (stride == 1 && kh == 3 && kw == 3 && pad == 1 && w_in >= 2 && ho == h && wo == w_in) {
        // adjoint of the 3x3 same-padding case: correlation with flipped taps
#pragma omp parallel for collapse(2) schedule(static)
        for (std::int64_t in = 0; in < static_cast<std::int64_t>(n); ++in) {
            for (std::int64_t ic = 0; ic < static_cast<std::int64_t>(ci); ++ic) {
                double* db = pd + (in * ci + ic) * h * w_in;
                for (std::size_t oc = 0; oc < co; ++oc) {
                    const double* gb = pg + (in * co + oc) * ho * wo;
                    const double* wb = pw + (oc * ci + ic) * 9;
                    for (std::size_t iy = 0; iy < h; ++iy) {
                        double* drow = db + iy * w_in;
                        for (std::size_t ky = 0; ky < 3; ++ky) {
                            const std::int64_t oy = static_cast<std::int64_t>(iy) - ky + 1;
                            if (oy < 0 || oy >= static_cast<std::int64_t>(ho)) continue;
                            const double* grow = gb + oy * wo;
                            const double w0 = wb[ky * 3], w1 = wb[ky * 3 + 1], w2 = wb[ky * 3 + 2];
                            drow[0] += w1 * grow[0] + w0 * grow[1];
                            for (std::size_t ix = 1; ix + 1 < w_in; ++ix)
                                drow[ix] += w2 * grow[ix - 1] + w1 * grow[ix] + w0 * grow[ix + 1];
                            drow[w_in - 1] += w2 * grow[w_in - 2] + w1 * grow[w_in - 1];
                        }
                    }
                }
            }
        }
        return dx;
    }

#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t in = 0; in < static_cast<std::int64_t>(n); ++in) {
        for (std::int64_t ic = 0; ic < static_cast<std::int64_t>(ci); ++ic) {
            double* db = pd + (in * ci + ic) * h * w_in;
            for (std::size_t oc = 0; oc < co; ++oc) {
                const double* gb = pg + (in * co + oc) * ho * wo;
                const double* wb = pw + (oc * ci + ic) * kh * kw;
                for (std::size_t ky = 0; ky < kh; ++ky) {
                    for (std::size_t kx = 0; kx < kw; ++kx) {
                        const double wv = wb[ky * kw + kx];
                        if (wv == 0.0) continue;
                        for (std::size_t oy = 0; oy < ho; ++oy) {
                            const std::int64_t iy = static_cast<std::int64_t>(oy) * stride + ky - pad;
                            if (iy < 0 || iy >= static_cast<std::int64_t>(h)) continue;
                            double* drow = db + iy * w_in;
                            const double* grow = gb + oy * wo;
                            for (std::size_t ox = 0; ox < wo; ++ox) {
                                const std::int64_t ix = static_cast<std::int64_t>(ox) * stride + kx - pad;
                                if (ix < 0 || ix >= static_cast<std::int64_t>(w_in)) continue;
                                drow[ix] += wv * grow[ox];
                            }
                        }
                    }
                }
            }
        }
    }
    return dx;
}

Tensor conv2d_dw(const Tensor& x, const Tensor& gy, int stride, int pad,
                 std::size_t kh, std::size_t kw) {
    const std::size_t n = x.dim(0), ci = x.dim(1), h = x.dim(2), wi = x.dim(3);
    const std::size_t co = gy.dim(1), ho = gy.dim(2), wo = gy.dim(3);
    Tensor dw({co, ci, kh, kw});
    const double* px = x.data();
    const double* pg = gy.data();
    double* pd = dw.data();

    if (stride == 1 && kh == 3 && kw == 3 && pad == 1 && wi >= 2 && ho == h && wo == wi) {
#pragma omp parallel for collapse(2) schedule(static)
        for (std::int64_t oc = 0; oc < static_cast<std::int64_t>(co); ++oc) {
            for (std::int64_t ic = 0; ic < static_cast<std::int64_t>(ci); ++ic) {
                double* wb = pd + (oc * ci + ic) * 9;
                for (std::size_t in = 0; in < n; ++in) {
                    const double* xb = px + (in * ci + ic) * h * wi;
                    const double* gb = pg + (in * co + oc) * ho * wo;
                    for (std::size_t oy = 0; oy < ho; ++oy) {
                        const double* grow = gb + oy * wo;
                        for (std::size_t ky = 0; ky < 3; ++ky) {
                            const std::int64_t iy = static_cast<std::int64_t>(oy) + ky - 1;
                            if (iy < 0 || iy >= static_cast<std::int64_t>(h)) continue;
                            const double* xrow = xb + iy * wi;
                            double a0 = 0, a1 = 0, a2 = 0;
                            a0 += grow[0] * 0.0; // kx=0 needs xrow[-1]: skipped
                            for (std::size_t ox = 1; ox < wo; ++ox) a0 += grow[ox] * xrow[ox - 1];
                            for (std::size_t ox = 0; ox < wo; ++ox) a1 += grow[ox] * xrow[ox];
                            for (std::size_t ox = 0; ox + 1 < wo; ++ox) a2 += grow[ox] * xrow[ox + 1];
                            wb[ky * 3 + 0] += a0;
                            wb[ky * 3 + 1] += a1;
                            wb[ky * 3 + 2] += a2;
                        }
                    }
                }
            }
        }
        return dw;
    }

#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t oc = 0; oc < static_cast<std::int64_t>(co); ++oc) {
        for (std::int64_t ic = 0; ic < static_cast<std::int64_t>(ci); ++ic) {
            double* wb = pd + (oc * ci + ic) * kh * kw;
            for (std::size_t in = 0; in < n; ++in) {
                const double* xb = px + (in * ci + ic) * h * wi;
                const double* gb = pg + (in * co + oc) * ho * wo;
                for (std::size_t ky = 0; ky < kh; ++ky) {
                    for (std::size_t kx = 0; kx < kw; ++kx) {
                        const std::int64_t off = static_cast<std::int64_t>(kx) - pad;
                        std::int64_t o0 = off < 0 ? (-off + stride - 1) / stride : 0;
                        std::int64_t o1 = (static_cast<std::int64_t>(wi) - 1 - off) / stride;
                        o0 = std::max<std::int64_t>(o0, 0);
                        o1 = std::min<std::int64_t>(o1, static_cast<std::int64_t>(wo) - 1);
                        double acc = 0.0;
                        for (std::size_t oy = 0; oy < ho; ++oy) {
                            const std::int64_t iy = static_cast<std::int64_t>(oy) * stride + ky - pad;
                            if (iy < 0 || iy >= static_cast<std::int64_t>(h)) continue;
                            const double* xrow = xb + iy * wi;
                            const double* grow = gb + oy * wo;
                            for (std::int64_t ox = o0; ox <= o1; ++ox)
                                acc += grow[ox] * xrow[ox * stride + off];
                        }
                        wb[ky * kw + kx] += acc;
                    }
                }
            }
        }
    }
    return dw;
}

Tensor conv3d(const Tensor& x, const Tensor& w, const int stride[3], const int pad[3]) {
    const std::size_t n = x.dim(0), ci = x.dim(1), t = x.dim(2), h = x.dim(3), wi = x.dim(4);
    const std::size_t co = w.dim(0), kt = w.dim(2), kh = w.dim(3), kw = w.dim(4);
    if (w.dim(1) != ci) throw std::invalid_argument("conv3d: channel mismatch");
    const std::size_t to = out_dim(t, kt, stride[0], pad[0]);
    const std::size_t ho = out_dim(h, kh, stride[1], pad[1]);
    const std::size_t wo = out_dim(wi, kw, stride[2], pad[2]);
    Tensor y({n, co, to, ho, wo});
    const double* px = x.data();
    const double* pw = w.data();
    double* py = y.data();
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t in = 0; in < static_cast<std::int64_t>(n); ++in) {
        for (std::int64_t oc = 0; oc < static_cast<std::int64_t>(co); ++oc) {
            double* yb = py + (in * co + oc) * to * ho * wo;
            for (std::size_t ic = 0; ic < ci; ++ic) {
                const double* xb = px + (in * ci + ic) * t * h * wi;
                const double* wb = pw + (oc * ci + ic) * kt * kh * kw;
                for (std::size_t ot = 0; ot < to; ++ot) {
                    for (std::size_t dt = 0; dt < kt; ++dt) {
                        const std::int64_t it = static_cast<std::int64_t>(ot) * stride[0] + dt - pad[0];
                        if (it < 0 || it >= static_cast<std::int64_t>(t)) continue;
                        for (std::size_t oy = 0; oy < ho; ++oy) {
                            double* yrow = yb + (ot * ho + oy) * wo;
                            for (std::size_t dy = 0; dy < kh; ++dy) {
                                const std::int64_t iy = static_cast<std::int64_t>(oy) * stride[1] + dy - pad[1];
                                if (iy < 0 || iy >= static_cast<std::int64_t>(h)) continue;
                                const double* xrow = xb + (it * h + iy) * wi;
                                const double* wrow = wb + (dt * kh + dy) * kw;
                                for (std::size_t dx = 0; dx < kw; ++dx) {
                                    const double wv = wrow[dx];
                                    if (wv == 0.0) continue;
                                    const std::int64_t off = static_cast<std::int64_t>(dx) - pad[2];
                                    std::int64_t o0 = off < 0 ? (-off + stride[2] - 1) / stride[2] : 0;
                                    std::int64_t o1 = (static_cast<std::int64_t>(wi) - 1 - off) / stride[2];
                                    o0 = std::max<std::int64_t>(o0, 0);
                                    o1 = std::min<std::int64_t>(o1, static_cast<std::int64_t>(wo) - 1);
                                    if (stride[2] == 2) {
                                        for (std::int64_t ox = o0; ox <= o1; ++ox)
                                            yrow[ox] += wv * xrow[2 * ox + off];
                                    } else {
                                        for (std::int64_t ox = o0; ox <= o1; ++ox)
                                            yrow[ox] += wv * xrow[ox * stride[2] + off];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return y;
}

Tensor conv3d_dx(const Tensor& gy, const Tensor& w, const int stride[3], const int pad[3],
                 std::size_t t, std::size_t h, std::size_t w_in) {
    const std::size_t n = gy.dim(0), co = gy.dim(1), to = gy.dim(2), ho = gy.dim(3), wo = gy.dim(4);
    const std::size_t ci = w.dim(1), kt = w.dim(2), kh = w.dim(3), kw = w.dim(4);
    Tensor dx({n, ci, t, h, w_in});
    const double* pg = gy.data();
    const double* pw = w.data();
    double* pd = dx.data();
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t in = 0; in < static_cast<std::int64_t>(n); ++in) {
        for (std::int64_t ic = 0; ic < static_cast<std::int64_t>(ci); ++ic) {
            double* db = pd + (in * ci + ic) * t * h * w_in;
            for (std::size_t oc = 0; oc < co; ++oc) {
                const double* gb = pg + (in * co + oc) * to * ho * wo;
                const double* wb = pw + (oc * ci + ic) * kt * kh * kw;
                for (std::size_t ot = 0; ot < to; ++ot) {
                    for (std::size_t dt = 0; dt < kt; ++dt) {
                        const std::int64_t it = static_cast<std::int64_t>(ot) * stride[0] + dt - pad[0];
                        if (it < 0 || it >= static_cast<std::int64_t>(t)) continue;
                        for (std::size_t oy = 0; oy < ho; ++oy) {
                            const double* grow = gb + (ot * ho + oy) * wo;
                            for (std::size_t dy = 0; dy < kh; ++dy) {
                                const std::int64_t iy = static_cast<std::int64_t>(oy) * stride[1] + dy - pad[1];
                                if (iy < 0 || iy >= static_cast<std::int64_t>(h)) continue;
                                double* drow = db + (it * h + iy) * w_in;
                                const double* wrow = wb + (dt * kh + dy) * kw;
                                for (std::size_t dx = 0; dx < kw; ++dx) {
                                    const double wv = wrow[dx];
                                    if (wv == 0.0) continue;
                                    const std::int64_t off = static_cast<std::int64_t>(dx) - pad[2];
                                    std::int64_t o0 = off < 0 ? (-off + stride[2] - 1) / stride[2] : 0;
                                    std::int64_t o1 = (static_cast<std::int64_t>(w_in) - 1 - off) / stride[2];
                                    o0 = std::max<std::int64_t>(o0, 0);
                                    o1 = std::min<std::int64_t>(o1, static_cast<std::int64_t>(wo) - 1);
                                    for (std::int64_t ox = o0; ox <= o1; ++ox)
                                        drow[ox * stride[2] + off] += wv * grow[ox];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return dx;
}

Tensor conv3d_dw(const Tensor& x, const Tensor& gy, const int stride[3], const int pad[3],
                 std::size_t kt, std::size_t kh, std::size_t kw) {
    const std::size_t n = x.dim(0), ci = x.dim(1), t = x.dim(2), h = x.dim(3), wi = x.dim(4);
    const std::size_t co = gy.dim(1), to = gy.dim(2), ho = gy.dim(3), wo = gy.dim(4);
    Tensor dw({co, ci, kt, kh, kw});
    const double* px = x.data();
    const double* pg = gy.data();
    double* pd = dw.data();
#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t oc = 0; oc < static_cast<std::int64_t>(co); ++oc) {
        for (std::int64_t ic = 0; ic < static_cast<std::int64_t>(ci); ++ic) {
            double* wb = pd + (oc * ci + ic) * kt * kh * kw;
            for (std::size_t in = 0; in < n; ++in) {
                const double* xb = px + (in * ci + ic) * t * h * wi;
                const double* gb = pg + (in * co + oc) * to * ho * wo;
                for (std::size_t dt = 0; dt < kt; ++dt)
                    for (std::size_t dy = 0; dy < kh; ++dy)
                        for (std::size_t dx = 0; dx < kw; ++dx) {
                            const std::int64_t off = static_cast<std::int64_t>(dx) - pad[2];
                            std::int64_t o0 = off < 0 ? (-off + stride[2] - 1) / stride[2] : 0;
                            std::int64_t o1 = (static_cast<std::int64_t>(wi) - 1 - off) / stride[2];
                            o0 = std::max<std::int64_t>(o0, 0);
                            o1 = std::min<std::int64_t>(o1, static_cast<std::int64_t>(wo) - 1);
                            double acc = 0.0;
                            for (std::size_t ot = 0; ot < to; ++ot) {
                                const std::int64_t it = static_cast<std::int64_t>(ot) * stride[0] + dt - pad[0];
                                if (it < 0 || it >= static_cast<std::int64_t>(t)) continue;
                                for (std::size_t oy = 0; oy < ho; ++oy) {
                                    const std::int64_t iy = static_cast<std::int64_t>(oy) * stride[1] + dy - pad[1];
                                    if (iy < 0 || iy >= static_cast<std::int64_t>(h)) continue;
                                    const double* xrow = xb + (it * h + iy) * wi;
                                    const double* grow = gb + (ot * ho + oy) * wo;
                                    for (std::int64_t ox = o0; ox <= o1; ++ox)
                                        acc += grow[ox] * xrow[ox * stride[2] + off];
                                }
                            }
                            wb[(dt * kh + dy) * kw + dx] += acc;
                        }
            }
        }
    }
    return dw;
}

Tensor upsample2(const Tensor& x) {
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    Tensor y({n, c, h * 2, w * 2});
    const double* px = x.data();
    double* py = y.data();
    for (std::size_t b = 0; b < n * c; ++b) {
        const double* xb = px + b * h * w;
        double* yb = py + b * 4 * h * w;
        for (std::size_t i = 0; i < h; ++i) {
            for (std::size_t j = 0; j < w; ++j) {
                const double v = xb[i * w + j];
                double* r0 = yb + (2 * i) * 2 * w + 2 * j;
                double* r1 = r0 + 2 * w;
                r0[0] = v; r0[1] = v; r1[0] = v; r1[1] = v;
            }
        }
    }
    return y;
}

Tensor downsum2(const Tensor& x) {
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (h % 2 || w % 2) throw std::invalid_argument("downsum2: odd spatial size");
    Tensor y({n, c, h / 2, w / 2});
    const double* px = x.data();
    double* py = y.data();
    for (std::size_t b = 0; b < n * c; ++b) {
        const double* xb = px + b * h * w;
        double* yb = py + b * (h / 2) * (w / 2);
        for (std::size_t i = 0; i < h / 2; ++i) {
            for (std::size_t j = 0; j < w / 2; ++j) {
                const double* r0 = xb + (2 * i) * w + 2 * j;
                const double* r1 = r0 + w;
                yb[i * (w / 2) + j] = r0[0] + r0[1] + r1[0] + r1[1];
            }
        }
    }
    return y;
}

} // namespace mvg::kern
