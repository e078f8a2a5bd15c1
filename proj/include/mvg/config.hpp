#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mvg/motionspace.hpp"
#include "mvg/pairgan.hpp"
#include "mvg/sequencer.hpp"
#include "mvg/synthvideo.hpp"

namespace mvg::config {

struct EvalConfig {
    std::size_t samples = 256;     // generated videos / sampled pairs per set
    std::size_t clip_len = 16;
    std::uint64_t extractor_seed = 0x5eed;
    bool one_clip_per_video = true; // FVD-style protocol: one random clip per real video
    std::uint64_t seed = 1234;
};

struct PipelineConfig {
    synthvideo::CorpusConfig corpus;
    pairgan::PairGanConfig pairgan;
    motionspace::MotionBasisConfig motion;
    sequencer::SequencerConfig seq;
    EvalConfig eval;

    void validate() const;

    // plain-text sections + key=value; '#' comments
    static PipelineConfig from_file(const std::string& path);
    void set_key(const std::string& section, const std::string& key, const std::string& value);
    nlohmann::json to_json() const;
};

} // namespace mvg::config
