#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvg/rng.hpp"
#include "mvg/tensor.hpp"

namespace mvg::synthvideo {

enum class MotionKind { bounce, drift };

std::string motion_kind_name(MotionKind k);
MotionKind motion_kind_from_name(const std::string& s);

struct CorpusConfig {
    std::size_t n_videos = 512;
    std::size_t frames = 64; // T
    std::size_t height = 32;
    std::size_t width = 32;
    MotionKind motion_kind = MotionKind::bounce;
    std::uint64_t seed = 7;
};

// Frames are stored 8-bit quantized (the persisted format) and exposed as
// [-1,1] tensors, so in-memory clips and reloaded clips are bit-identical.
struct VideoClip {
    std::size_t frames = 0, height = 0, width = 0;
    std::string content_id;
    int fps_tag = 25;
    std::vector<std::uint8_t> pixels; // [T,3,H,W]

    double at(std::size_t t, std::size_t c, std::size_t y, std::size_t x) const;
    Tensor frame(std::size_t t) const;  // [3,H,W]
    Tensor tensor() const;              // [T,3,H,W]
    const std::uint8_t* frame_ptr(std::size_t t) const {
        return pixels.data() + t * 3 * height * width;
    }
};

struct ImagePair {
    Tensor pixels; // [6,H,W]; channels 0-2 former frame, 3-5 latter frame
    std::string source;
};

std::vector<VideoClip> make_corpus(const CorpusConfig& config);

// Samples [x_t, x_{t+k}] and [x_{t+k}, x_t] with equal probability.
std::vector<ImagePair> sample_pairs(const std::vector<VideoClip>& corpus, std::size_t k,
                                    std::size_t batch, Rng& rng);

std::vector<VideoClip> sample_clips(const std::vector<VideoClip>& corpus, std::size_t t_clip,
                                    std::size_t batch, Rng& rng);

VideoClip reverse_clip(const VideoClip& clip);
VideoClip subsample_clip(const VideoClip& clip, std::size_t stride);

// Directory persistence: one subdirectory per clip with PPM frames and a JSON
// manifest. Returns the corpus content hash.
std::string save_corpus(const std::vector<VideoClip>& corpus, const CorpusConfig& config,
                        const std::string& dir, bool force);
std::vector<VideoClip> load_corpus(const std::string& dir, CorpusConfig* config_out = nullptr);
std::string corpus_hash(const std::string& dir);

// Batch assembly for training: stacks pairs into [N,6,H,W].
Tensor pairs_to_batch(const std::vector<ImagePair>& pairs);

} // namespace mvg::synthvideo
