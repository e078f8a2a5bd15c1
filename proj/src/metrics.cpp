#include "mvg/metrics.hpp"

#include <cmath>

#include "mvg/errors.hpp"
#include "mvg/io.hpp"
#include "mvg/kernels.hpp"
#include "mvg/linalg.hpp"
#include "mvg/rng.hpp"

namespace mvg::metrics {

GaussianStats fit_gaussian(const std::vector<Tensor>& samples) {
    if (samples.size() < 2)
        throw ProtocolError("fit_gaussian: need at least 2 samples, got " +
                            std::to_string(samples.size()));
    const std::size_t n = samples.size(), d = samples[0].size();
    GaussianStats g;
    g.mean = Tensor({d});
    for (const auto& s : samples) {
        if (s.size() != d) throw ShapeError("fit_gaussian: inconsistent sample dims");
        for (std::size_t j = 0; j < d; ++j) g.mean[j] += s[j];
    }
    for (std::size_t j = 0; j < d; ++j) g.mean[j] /= static_cast<double>(n);
    g.cov = Tensor({d, d});
    for (const auto& s : samples) {
        for (std::size_t i = 0; i < d; ++i) {
            const double di = s[i] - g.mean[i];
            if (di == 0.0) continue;
            for (std::size_t j = i; j < d; ++j)
                g.cov[i * d + j] += di * (s[j] - g.mean[j]);
        }
    }
    const double denom = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            g.cov[i * d + j] /= denom;
            g.cov[j * d + i] = g.cov[i * d + j];
        }
    return g;
}

namespace {

// V diag(f(lambda)) V^T for symmetric input, negative eigenvalues clipped.
Tensor psd_sqrt(const Tensor& m) {
    auto [vals, vecs] = linalg::sym_eig(m);
    const std::size_t d = vals.size();
    Tensor scaled = vecs; // columns scaled by sqrt(max(lambda,0))
    for (std::size_t j = 0; j < d; ++j) {
        const double f = std::sqrt(std::max(0.0, vals[j]));
        for (std::size_t i = 0; i < d; ++i) scaled[i * d + j] *= f;
    }
    return kern::matmul(scaled, kern::transpose(vecs));
}

} // namespace

double frechet_gaussian(const GaussianStats& a, const GaussianStats& b) {
    if (a.mean.size() != b.mean.size() || !a.cov.same_shape(b.cov))
        throw ShapeError("frechet_gaussian: dimension mismatch");
    const std::size_t d = a.mean.size();
    double mean_term = 0;
    for (std::size_t i = 0; i < d; ++i) {
        const double diff = a.mean[i] - b.mean[i];
        mean_term += diff * diff;
    }
    double tr_a = 0, tr_b = 0;
    for (std::size_t i = 0; i < d; ++i) {
        tr_a += a.cov[i * d + i];
        tr_b += b.cov[i * d + i];
    }
    const Tensor sa = psd_sqrt(a.cov);
    const Tensor inner = kern::matmul(kern::matmul(sa, b.cov), sa);
    auto [vals, vecs] = linalg::sym_eig(inner);
    double tr_sqrt = 0;
    for (std::size_t i = 0; i < d; ++i) tr_sqrt += std::sqrt(std::max(0.0, vals[i]));
    const double v = mean_term + tr_a + tr_b - 2.0 * tr_sqrt;
    return std::max(0.0, v);
}

FeatureExtractor::FeatureExtractor(std::uint64_t seed, std::size_t in_dim, std::size_t feat_dim) {
    Rng rng(seed ^ 0xfeedbeefcafef00dULL);
    proj = Tensor({feat_dim, in_dim});
    const double sd = 1.0 / std::sqrt(static_cast<double>(in_dim));
    for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = sd * rng.normal();
}

Tensor FeatureExtractor::extract(const Tensor& flat) const {
    const std::size_t f = proj.dim(0), d = proj.dim(1);
    if (flat.size() != d)
        throw ShapeError("FeatureExtractor: input dim " + std::to_string(flat.size()) +
                         " != " + std::to_string(d));
    Tensor y({f});
    for (std::size_t i = 0; i < f; ++i) {
        const double* row = proj.data() + i * d;
        double acc = 0;
        for (std::size_t j = 0; j < d; ++j) acc += row[j] * flat[j];
        y[i] = std::fabs(acc);
    }
    return y;
}

double feature_frechet(const std::vector<Tensor>& set_a, const std::vector<Tensor>& set_b,
                       std::uint64_t extractor_seed, std::size_t feat_dim) {
    if (set_a.size() < 2 || set_b.size() < 2)
        throw ProtocolError("feature_frechet: each set needs >= 2 samples");
    const std::size_t in_dim = set_a[0].size();
    if (set_b[0].size() != in_dim)
        throw ShapeError("feature_frechet: sample dimension mismatch between sets");
    FeatureExtractor fx(extractor_seed, in_dim, feat_dim);
    std::vector<Tensor> fa, fb;
    fa.reserve(set_a.size());
    fb.reserve(set_b.size());
    for (const auto& s : set_a) fa.push_back(fx.extract(s));
    for (const auto& s : set_b) fb.push_back(fx.extract(s));
    return frechet_gaussian(fit_gaussian(fa), fit_gaussian(fb));
}

ContentAttributes extract_content(const Tensor& frame) {
    const std::size_t h = frame.dim(1), w = frame.dim(2);
    ContentAttributes out;
    double sum_sin = 0, sum_cos = 0, area = 0, weight = 0;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const double r = (frame[(0 * h + y) * w + x] + 1) / 2;
            const double g = (frame[(1 * h + y) * w + x] + 1) / 2;
            const double b = (frame[(2 * h + y) * w + x] + 1) / 2;
            const double mx = std::max({r, g, b});
            const double mn = std::min({r, g, b});
            if (mx <= 1e-9) continue;
            const double sat = (mx - mn) / mx;
            double hue = 0;
            const double c = mx - mn;
            if (c > 1e-12) {
                if (mx == r)
                    hue = std::fmod((g - b) / c + 6.0, 6.0) / 6.0;
                else if (mx == g)
                    hue = ((b - r) / c + 2.0) / 6.0;
                else
                    hue = ((r - g) / c + 4.0) / 6.0;
            }
            // foreground evidence: saturated, reasonably bright pixels
            const double alpha = std::min(1.0, std::max(0.0, (sat - 0.10) / 0.40));
            const double wgt = alpha * mx;
            if (wgt <= 0) continue;
            weight += wgt;
            area += alpha;
            sum_sin += wgt * std::sin(2 * 3.14159265358979323846 * hue);
            sum_cos += wgt * std::cos(2 * 3.14159265358979323846 * hue);
        }
    }
    if (weight < 1.0) return out; // blank / no usable foreground
    double hue = std::atan2(sum_sin, sum_cos) / (2 * 3.14159265358979323846);
    if (hue < 0) hue += 1.0;
    out.hue = hue;
    out.size = std::sqrt(area / 3.14159265358979323846);
    out.weight = weight;
    out.valid = true;
    return out;
}

double circular_hue_distance(double a, double b) {
    double d = std::fabs(a - b);
    d = d - std::floor(d);
    return std::min(d, 1.0 - d);
}

double content_consistency(const synthvideo::VideoClip& clip, bool* flagged) {
    if (flagged) *flagged = false;
    std::vector<ContentAttributes> attrs;
    attrs.reserve(clip.frames);
    for (std::size_t t = 0; t < clip.frames; ++t) {
        auto a = extract_content(clip.frame(t));
        if (!a.valid) {
            if (flagged) *flagged = true;
            return 0.0; // maximal drift
        }
        attrs.push_back(a);
    }
    double drift = 0;
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        for (std::size_t j = i + 1; j < attrs.size(); ++j) {
            const double dh = circular_hue_distance(attrs[i].hue, attrs[j].hue) / 0.5;
            // 0.4 px deadband: the rim-based size estimate jitters by a few
            // tenths of a pixel even when the underlying size is constant
            const double ds =
                std::max(0.0, std::fabs(attrs[i].size - attrs[j].size) - 0.4) / 6.0;
            drift = std::max(drift, std::max(dh, ds));
        }
    }
    return 1.0 - std::min(1.0, drift);
}

double hue_drift(const synthvideo::VideoClip& clip) {
    std::vector<double> hues;
    hues.reserve(clip.frames);
    for (std::size_t t = 0; t < clip.frames; ++t) {
        auto a = extract_content(clip.frame(t));
        if (!a.valid) return 0.5; // maximal circular distance
        hues.push_back(a.hue);
    }
    double drift = 0;
    for (std::size_t i = 0; i < hues.size(); ++i)
        for (std::size_t j = i + 1; j < hues.size(); ++j)
            drift = std::max(drift, circular_hue_distance(hues[i], hues[j]));
    return drift;
}

double motion_magnitude(const synthvideo::VideoClip& clip) {
    if (clip.frames < 2) throw ShapeError("motion_magnitude: need T >= 2");
    const std::size_t fsz = 3 * clip.height * clip.width;
    double total = 0;
    for (std::size_t t = 0; t + 1 < clip.frames; ++t) {
        const std::uint8_t* a = clip.frame_ptr(t);
        const std::uint8_t* b = clip.frame_ptr(t + 1);
        double l1 = 0;
        for (std::size_t i = 0; i < fsz; ++i)
            l1 += std::fabs(io::dequant8(a[i]) - io::dequant8(b[i]));
        total += l1 / static_cast<double>(fsz);
    }
    return total / static_cast<double>(clip.frames - 1);
}

double loop_score(const synthvideo::VideoClip& clip) {
    if (clip.frames < 4) throw ShapeError("loop_score: need T >= 4");
    const std::size_t fsz = 3 * clip.height * clip.width;
    double best = 0;
    for (std::size_t p = 2; p <= clip.frames / 2; ++p) {
        double sim_sum = 0;
        std::size_t count = 0;
        for (std::size_t t = 0; t + p < clip.frames; ++t) {
            const std::uint8_t* a = clip.frame_ptr(t);
            const std::uint8_t* b = clip.frame_ptr(t + p);
            double l1 = 0;
            for (std::size_t i = 0; i < fsz; ++i)
                l1 += std::fabs(io::dequant8(a[i]) - io::dequant8(b[i]));
            sim_sum += 1.0 - (l1 / static_cast<double>(fsz)) / 2.0;
            ++count;
        }
        best = std::max(best, sim_sum / static_cast<double>(count));
    }
    return best;
}

std::vector<Tensor> flatten_clips(const std::vector<synthvideo::VideoClip>& clips) {
    std::vector<Tensor> out;
    out.reserve(clips.size());
    for (const auto& c : clips) {
        Tensor t = c.tensor();
        out.push_back(t.reshaped({t.size()}));
    }
    return out;
}

} // namespace mvg::metrics
