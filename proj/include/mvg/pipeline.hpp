#pragma once

#include <string>

#include <json.hpp>

#include "mvg/config.hpp"
#include "mvg/metrics.hpp"
#include "mvg/motionspace.hpp"
#include "mvg/pairgan.hpp"
#include "mvg/sequencer.hpp"
#include "mvg/synthvideo.hpp"

namespace mvg::pipeline {

// Canonical artifact locations inside a work directory.
std::string corpus_dir(const std::string& out);
std::string generator_path(const std::string& out);
std::string basis_path(const std::string& out);
std::string sequencer_path(const std::string& out);

// Each stage writes its artifact(s) plus the resolved config snapshot and
// returns the artifact content hash. Hash-chain checks run before work.
std::string stage_synth_data(const config::PipelineConfig& cfg, const std::string& dir,
                             bool force);

struct PairsArtifacts {
    std::string path;
    std::string hash;
    pairgan::TrainHistory history;
};
PairsArtifacts stage_train_pairs(const config::PipelineConfig& cfg, const std::string& corpus_d,
                                 const std::string& ckpt_path, bool force);

struct BasisArtifacts {
    std::string path;
    std::string hash;
    motionspace::MotionBasis basis;
};
BasisArtifacts stage_extract_motions(const config::PipelineConfig& cfg,
                                     const std::string& generator_file,
                                     const std::string& basis_file, bool force);

struct SequencerArtifacts {
    std::string path;
    std::string hash;
    sequencer::TrainedSequencer trained;
};
SequencerArtifacts stage_train_sequencer(const config::PipelineConfig& cfg,
                                         const std::string& corpus_d,
                                         const std::string& generator_file,
                                         const std::string& basis_file,
                                         const std::string& seq_file, bool force);

// Generated videos as frame directories video_%04d/frame_%05d.ppm.
std::string stage_generate(const config::PipelineConfig& cfg, const std::string& generator_file,
                           const std::string& basis_file, const std::string& seq_file,
                           const std::string& out_dir, std::size_t count, std::size_t n_frames,
                           std::uint64_t seed, bool long_mode, const std::string& long_mode_name,
                           bool force, bool gif);

nlohmann::json stage_evaluate(const config::PipelineConfig& cfg, const std::string& corpus_d,
                              const std::string& generator_file, const std::string& basis_file,
                              const std::string& seq_file, const std::string& report_file,
                              const std::string& csv_file);

nlohmann::json stage_ablate(const config::PipelineConfig& cfg, const std::string& axis,
                            const std::vector<std::uint64_t>& seeds, const std::string& work_dir,
                            const std::string& report_file, const std::string& csv_file);

// Helpers shared with the acceptance suite.
std::vector<synthvideo::VideoClip> generate_videos(const pairgan::PairGenerator& gen,
                                                   const sequencer::TrainedSequencer& seq,
                                                   const motionspace::MotionBasis& basis,
                                                   std::size_t count, std::size_t n_frames,
                                                   std::uint64_t seed);

struct EvalSummary {
    double proxy_frechet_clips = 0;
    double content_pass_rate = 0; // hue drift < 0.1
    double median_loop_score = 0;
    double mean_motion_magnitude = 0;
    double mean_consistency = 0;
    std::size_t n_generated = 0, n_real = 0;
};
EvalSummary evaluate_model(const config::PipelineConfig& cfg,
                           const std::vector<synthvideo::VideoClip>& corpus,
                           const pairgan::PairGenerator& gen,
                           const sequencer::TrainedSequencer& seq,
                           const motionspace::MotionBasis& basis);

motionspace::MotionBasis randomize_basis(const motionspace::MotionBasis& basis,
                                         std::uint64_t seed);

} // namespace mvg::pipeline
