#pragma once

#include <cstdint>
#include <vector>

#include "mvg/synthvideo.hpp"
#include "mvg/tensor.hpp"

namespace mvg::metrics {

struct GaussianStats {
    Tensor mean; // [D]
    Tensor cov;  // [D,D], symmetric
};

GaussianStats fit_gaussian(const std::vector<Tensor>& samples);

// Frechet distance between two Gaussians; matrix square roots via symmetric
// eigendecomposition with negative eigenvalues clipped at 0.
double frechet_gaussian(const GaussianStats& a, const GaussianStats& b);

// Fixed seeded random-projection + |.| featurizer. The resulting proxy
// distances order model quality at desk scale; they are NOT comparable to
// FID/FVD values computed with pretrained feature networks.
struct FeatureExtractor {
    Tensor proj; // [feat_dim, in_dim]
    FeatureExtractor() = default;
    FeatureExtractor(std::uint64_t seed, std::size_t in_dim, std::size_t feat_dim);
    Tensor extract(const Tensor& flat) const; // [in_dim] -> [feat_dim]
};

double feature_frechet(const std::vector<Tensor>& set_a, const std::vector<Tensor>& set_b,
                       std::uint64_t extractor_seed, std::size_t feat_dim = 128);

// ---- content oracle over the synthetic corpus ----
struct ContentAttributes {
    double hue = 0.0;    // [0,1)
    double size = 0.0;   // estimated blob radius in pixels
    double weight = 0.0; // total foreground evidence
    bool valid = false;
};

ContentAttributes extract_content(const Tensor& frame); // [3,H,W] in [-1,1]

double circular_hue_distance(double a, double b); // in [0, 0.5]

// 1 - normalized max pairwise attribute drift across frames. Blank frames
// score as maximal drift and set `flagged`.
double content_consistency(const synthvideo::VideoClip& clip, bool* flagged = nullptr);

// Max pairwise circular hue distance across frames (the acceptance oracle).
double hue_drift(const synthvideo::VideoClip& clip);

double motion_magnitude(const synthvideo::VideoClip& clip);

// Max over period p in [2, T/2] of mean frame similarity between the clip and
// its shift by p, similarity = 1 - L1/2. Higher = more loop-like.
double loop_score(const synthvideo::VideoClip& clip);

std::vector<Tensor> flatten_clips(const std::vector<synthvideo::VideoClip>& clips);

} // namespace mvg::metrics
