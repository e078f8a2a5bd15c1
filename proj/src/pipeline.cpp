#include "mvg/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "mvg/errors.hpp"
#include "mvg/io.hpp"

namespace mvg::pipeline {

namespace fs = std::filesystem;

std::string corpus_dir(const std::string& out) { return (fs::path(out) / "corpus").string(); }
std::string generator_path(const std::string& out) {
    return (fs::path(out) / "pairgan.narc").string();
}
std::string basis_path(const std::string& out) {
    return (fs::path(out) / "motion_basis.narc").string();
}
std::string sequencer_path(const std::string& out) {
    return (fs::path(out) / "sequencer.narc").string();
}

namespace {

void dump_config(const config::PipelineConfig& cfg, const std::string& beside,
                 const nlohmann::json& extra) {
    nlohmann::json j = cfg.to_json();
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    io::save_json(beside + ".config.json", j);
}

void refuse_existing(const std::string& path, bool force) {
    if (!force && fs::exists(path))
        throw ConfigError("output exists (use --force): " + path);
}

std::string require_corpus_hash(const std::string& corpus_d) {
    if (!fs::exists(corpus_d)) throw ConfigError("corpus directory missing: " + corpus_d);
    return synthvideo::corpus_hash(corpus_d);
}

} // namespace

std::string stage_synth_data(const config::PipelineConfig& cfg, const std::string& dir,
                             bool force) {
    cfg.validate();
    auto corpus = synthvideo::make_corpus(cfg.corpus);
    const std::string hash = synthvideo::save_corpus(corpus, cfg.corpus, dir, force);
    dump_config(cfg, dir, {{"stage", "synth-data"}, {"content_hash", hash}});
    return hash;
}

PairsArtifacts stage_train_pairs(const config::PipelineConfig& cfg, const std::string& corpus_d,
                                 const std::string& ckpt_path, bool force) {
    cfg.validate();
    refuse_existing(ckpt_path, force);
    const std::string chash = require_corpus_hash(corpus_d);
    auto corpus = synthvideo::load_corpus(corpus_d);
    auto trained = pairgan::train_pairgan(corpus, cfg.pairgan);
    if (trained.history.diverged) {
        // checkpoint of the last finite step is still written before aborting
        pairgan::save_generator(ckpt_path, trained.gen, trained.history.last_finite_step,
                                cfg.pairgan.seed, chash);
        throw NumericalError("train_pairs: loss diverged at step " +
                             std::to_string(trained.history.last_finite_step + 1) +
                             "; checkpoint of last finite step written to " + ckpt_path);
    }
    PairsArtifacts out;
    out.path = ckpt_path;
    out.hash = pairgan::save_generator(ckpt_path, trained.gen, trained.history.best_step,
                                       cfg.pairgan.seed, chash);
    out.history = std::move(trained.history);
    nlohmann::json hist{{"stage", "train-pairs"},
                        {"best_step", out.history.best_step},
                        {"best_proxy_frechet", out.history.best_frechet},
                        {"eval_steps", out.history.eval_step},
                        {"proxy_frechet", out.history.proxy_frechet},
                        {"corpus_hash", chash},
                        {"archive_hash", out.hash}};
    dump_config(cfg, ckpt_path, hist);
    return out;
}

BasisArtifacts stage_extract_motions(const config::PipelineConfig& cfg,
                                     const std::string& generator_file,
                                     const std::string& basis_file, bool force) {
    refuse_existing(basis_file, force);
    pairgan::PairGenerator gen = pairgan::load_generator(generator_file);
    const std::string ghash = pairgan::generator_hash(generator_file);
    BasisArtifacts out;
    out.basis = motionspace::compute_motion_basis(gen, cfg.motion, ghash);
    out.path = basis_file;
    out.hash = motionspace::save_basis(basis_file, out.basis);
    dump_config(cfg, basis_file,
                {{"stage", "extract-motions"},
                 {"generator_hash", ghash},
                 {"r_a", out.basis.rank_former},
                 {"r_b", out.basis.rank_latter},
                 {"archive_hash", out.hash}});
    return out;
}

SequencerArtifacts stage_train_sequencer(const config::PipelineConfig& cfg,
                                         const std::string& corpus_d,
                                         const std::string& generator_file,
                                         const std::string& basis_file,
                                         const std::string& seq_file, bool force) {
    cfg.validate();
    refuse_existing(seq_file, force);
    const std::string chash = require_corpus_hash(corpus_d);
    pairgan::PairGenerator gen = pairgan::load_generator(generator_file);
    const std::string ghash = pairgan::generator_hash(generator_file);
    // verify the corpus the generator was trained on is the corpus given now
    const auto gman = io::load_json(generator_file + ".json");
    const std::string trained_on = gman.value("corpus_hash", "");
    if (!trained_on.empty() && trained_on != chash)
        throw HashMismatchError("train_sequencer: generator was trained on corpus " + trained_on +
                                " but corpus directory hashes to " + chash);
    motionspace::MotionBasis basis = motionspace::load_basis(basis_file);
    const std::string bhash = io::file_hash_hex(basis_file);
    auto corpus = synthvideo::load_corpus(corpus_d);

    SequencerArtifacts out;
    out.trained = sequencer::train_sequencer(gen, ghash, basis, bhash, corpus, cfg.seq);
    out.trained.corpus_hash = chash;
    if (!out.trained.history.finite)
        throw NumericalError("train_sequencer: non-finite loss encountered");
    out.path = seq_file;
    out.hash = sequencer::save_sequencer(seq_file, out.trained);
    dump_config(cfg, seq_file,
                {{"stage", "train-sequencer"},
                 {"generator_hash", ghash},
                 {"basis_hash", bhash},
                 {"corpus_hash", chash},
                 {"archive_hash", out.hash}});
    return out;
}

std::vector<synthvideo::VideoClip> generate_videos(const pairgan::PairGenerator& gen,
                                                   const sequencer::TrainedSequencer& seq,
                                                   const motionspace::MotionBasis& basis,
                                                   std::size_t count, std::size_t n_frames,
                                                   std::uint64_t seed) {
    Rng rng(seed);
    std::vector<synthvideo::VideoClip> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Tensor z({gen.config.d_z});
        for (std::size_t j = 0; j < z.size(); ++j) z[j] = rng.normal();
        const Tensor omega0 = gen.map_latent(z);
        if (n_frames <= seq.config.n_frames)
            out.push_back(sequencer::generate_video(gen, seq.params, basis, omega0, n_frames,
                                                    seq.config.first, seq.config.edit_cap));
        else
            out.push_back(sequencer::generate_long_video(
                gen, seq, basis, omega0, n_frames,
                seq.config.subsample_stride > 1 ? sequencer::LongVideoMode::subsampled_model
                                                : sequencer::LongVideoMode::interpolate));
    }
    return out;
}

std::string stage_generate(const config::PipelineConfig& cfg, const std::string& generator_file,
                           const std::string& basis_file, const std::string& seq_file,
                           const std::string& out_dir, std::size_t count, std::size_t n_frames,
                           std::uint64_t seed, bool long_mode, const std::string& long_mode_name,
                           bool force, bool gif) {
    pairgan::PairGenerator gen = pairgan::load_generator(generator_file);
    const std::string ghash = pairgan::generator_hash(generator_file);
    motionspace::MotionBasis basis = motionspace::load_basis(basis_file);
    if (basis.generator_hash != ghash)
        throw HashMismatchError("generate: motion basis extracted from generator " +
                                basis.generator_hash + ", checkpoint file hashes to " + ghash);
    sequencer::TrainedSequencer seq = sequencer::load_sequencer(seq_file, gen.config.d_omega);
    const std::string shash = io::file_hash_hex(seq_file);
    if (seq.generator_hash != ghash || seq.basis_hash != io::file_hash_hex(basis_file))
        throw HashMismatchError("generate: sequencer was trained against different artifacts");

    if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
        if (!force) throw ConfigError("output directory exists (use --force): " + out_dir);
        fs::remove_all(out_dir);
    }
    fs::create_directories(out_dir);

    Rng rng(seed);
    for (std::size_t v = 0; v < count; ++v) {
        Tensor z({gen.config.d_z});
        for (std::size_t j = 0; j < z.size(); ++j) z[j] = rng.normal();
        const Tensor omega0 = gen.map_latent(z);
        synthvideo::VideoClip clip;
        if (long_mode) {
            const auto mode = long_mode_name == "subsampled"
                                  ? sequencer::LongVideoMode::subsampled_model
                                  : sequencer::LongVideoMode::interpolate;
            clip = sequencer::generate_long_video(gen, seq, basis, omega0, n_frames, mode);
        } else {
            clip = sequencer::generate_video(gen, seq.params, basis, omega0, n_frames,
                                             seq.config.first, seq.config.edit_cap);
        }
        char sub[32];
        std::snprintf(sub, sizeof(sub), "video_%04zu", v);
        const fs::path vdir = fs::path(out_dir) / sub;
        fs::create_directories(vdir);
        std::vector<const std::uint8_t*> frame_ptrs;
        for (std::size_t t = 0; t < clip.frames; ++t) {
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%05zu.ppm", t);
            io::write_ppm((vdir / name).string(), clip.frame_ptr(t), clip.height, clip.width);
            frame_ptrs.push_back(clip.frame_ptr(t));
        }
        if (gif) io::write_gif((vdir / "preview.gif").string(), frame_ptrs, clip.height, clip.width, 8);
        nlohmann::json m{{"n_frames", clip.frames},
                         {"H", clip.height},
                         {"W", clip.width},
                         {"seed", seed},
                         {"video_index", v},
                         {"long_mode", long_mode ? long_mode_name : "none"},
                         {"generator_hash", ghash},
                         {"basis_hash", basis.generator_hash.empty() ? "" : io::file_hash_hex(basis_file)},
                         {"sequencer_hash", shash}};
        io::save_json((vdir / "manifest.json").string(), m);
    }
    dump_config(cfg, out_dir, {{"stage", long_mode ? "generate-long" : "generate"},
                               {"count", count},
                               {"n_frames", n_frames},
                               {"seed", seed}});
    return out_dir;
}

EvalSummary evaluate_model(const config::PipelineConfig& cfg,
                           const std::vector<synthvideo::VideoClip>& corpus,
                           const pairgan::PairGenerator& gen,
                           const sequencer::TrainedSequencer& seq,
                           const motionspace::MotionBasis& basis) {
    EvalSummary out;
    const std::size_t n = cfg.eval.samples;
    auto fakes = generate_videos(gen, seq, basis, n, cfg.eval.clip_len, cfg.eval.seed);

    // real side: FVD-style protocol, one random clip per real video
    Rng rng(cfg.eval.seed ^ 0x9e37ULL);
    std::vector<synthvideo::VideoClip> reals;
    if (cfg.eval.one_clip_per_video) {
        for (std::size_t i = 0; i < corpus.size() && reals.size() < n; ++i) {
            auto one = synthvideo::sample_clips({corpus[i]}, cfg.eval.clip_len, 1, rng);
            reals.push_back(std::move(one[0]));
        }
    } else {
        reals = synthvideo::sample_clips(corpus, cfg.eval.clip_len, n, rng);
    }

    out.n_generated = fakes.size();
    out.n_real = reals.size();
    out.proxy_frechet_clips =
        metrics::feature_frechet(metrics::flatten_clips(fakes), metrics::flatten_clips(reals),
                                 cfg.eval.extractor_seed);

    std::size_t pass = 0;
    std::vector<double> loops;
    double motion_sum = 0, consistency_sum = 0;
    for (const auto& clip : fakes) {
        if (metrics::hue_drift(clip) < 0.1) ++pass;
        loops.push_back(metrics::loop_score(clip));
        motion_sum += metrics::motion_magnitude(clip);
        consistency_sum += metrics::content_consistency(clip);
    }
    std::sort(loops.begin(), loops.end());
    out.content_pass_rate = static_cast<double>(pass) / static_cast<double>(fakes.size());
    out.median_loop_score = loops[loops.size() / 2];
    out.mean_motion_magnitude = motion_sum / static_cast<double>(fakes.size());
    out.mean_consistency = consistency_sum / static_cast<double>(fakes.size());
    return out;
}

nlohmann::json stage_evaluate(const config::PipelineConfig& cfg, const std::string& corpus_d,
                              const std::string& generator_file, const std::string& basis_file,
                              const std::string& seq_file, const std::string& report_file,
                              const std::string& csv_file) {
    auto corpus = synthvideo::load_corpus(corpus_d);
    pairgan::PairGenerator gen = pairgan::load_generator(generator_file);
    motionspace::MotionBasis basis = motionspace::load_basis(basis_file);
    sequencer::TrainedSequencer seq = sequencer::load_sequencer(seq_file, gen.config.d_omega);
    const std::string ghash = pairgan::generator_hash(generator_file);
    if (basis.generator_hash != ghash || seq.generator_hash != ghash)
        throw HashMismatchError("evaluate: artifact hash chain broken");

    EvalSummary s = evaluate_model(cfg, corpus, gen, seq, basis);
    nlohmann::json report{{"metrics",
                           {{"proxy_frechet_clips", s.proxy_frechet_clips},
                            {"content_pass_rate", s.content_pass_rate},
                            {"median_loop_score", s.median_loop_score},
                            {"mean_motion_magnitude", s.mean_motion_magnitude},
                            {"mean_content_consistency", s.mean_consistency}}},
                          {"sample_counts", {{"generated", s.n_generated}, {"real", s.n_real}}},
                          {"seeds", {{"eval_seed", cfg.eval.seed}, {"extractor_seed", cfg.eval.extractor_seed}}},
                          {"protocol", cfg.eval.one_clip_per_video ? "one_clip_per_video" : "uniform_clips"},
                          {"config", cfg.to_json()}};
    if (!report_file.empty()) io::save_json(report_file, report);
    if (!csv_file.empty()) {
        std::string csv = "metric,value\n";
        for (auto it = report["metrics"].begin(); it != report["metrics"].end(); ++it)
            csv += it.key() + "," + std::to_string(it.value().get<double>()) + "\n";
        io::atomic_write_file(csv_file, csv);
    }
    return report;
}

motionspace::MotionBasis randomize_basis(const motionspace::MotionBasis& basis,
                                         std::uint64_t seed) {
    motionspace::MotionBasis out = basis;
    Rng rng(seed ^ 0xabcdef12345ULL);
    auto fill_random_rows = [&](Tensor& codes) {
        const std::size_t m = codes.dim(0), d = codes.dim(1);
        for (std::size_t r = 0; r < m; ++r) {
            double norm = 0;
            for (std::size_t c = 0; c < d; ++c) {
                codes[r * d + c] = rng.normal();
                norm += codes[r * d + c] * codes[r * d + c];
            }
            norm = std::sqrt(norm);
            for (std::size_t c = 0; c < d; ++c) codes[r * d + c] /= norm;
        }
    };
    fill_random_rows(out.backward_codes);
    fill_random_rows(out.forward_codes);
    return out;
}

nlohmann::json stage_ablate(const config::PipelineConfig& cfg, const std::string& axis,
                            const std::vector<std::uint64_t>& seeds, const std::string& work_dir,
                            const std::string& report_file, const std::string& csv_file) {
    fs::create_directories(work_dir);
    nlohmann::json rows = nlohmann::json::array();

    auto eval_variant = [&](const std::string& name, std::uint64_t seed,
                            const std::vector<synthvideo::VideoClip>& corpus,
                            pairgan::PairGenerator& gen, const std::string& ghash,
                            const motionspace::MotionBasis& basis,
                            const sequencer::SequencerConfig& scfg) {
        auto trained = sequencer::train_sequencer(gen, ghash, basis, "ablate", corpus, scfg);
        config::PipelineConfig ecfg = cfg;
        EvalSummary s = evaluate_model(ecfg, corpus, gen, trained, basis);
        rows.push_back({{"variant", name},
                        {"seed", seed},
                        {"proxy_frechet_clips", s.proxy_frechet_clips},
                        {"content_pass_rate", s.content_pass_rate},
                        {"median_loop_score", s.median_loop_score},
                        {"mean_motion_magnitude", s.mean_motion_magnitude}});
    };

    if (axis == "discriminators") {
        // Table-V rows: shared stage-1/2 artifacts per seed
        const std::string cd = corpus_dir(work_dir);
        if (!fs::exists(cd)) stage_synth_data(cfg, cd, true);
        auto corpus = synthvideo::load_corpus(cd);
        const std::string gp = generator_path(work_dir);
        if (!fs::exists(gp)) stage_train_pairs(cfg, cd, gp, true);
        pairgan::PairGenerator gen = pairgan::load_generator(gp);
        const std::string ghash = pairgan::generator_hash(gp);
        const std::string bp = basis_path(work_dir);
        if (!fs::exists(bp)) stage_extract_motions(cfg, gp, bp, true);
        auto basis = motionspace::load_basis(bp);
        for (const auto& setname : {"TVD", "BVD", "BVD+TVD+ID", "BVD+TVD"}) {
            for (std::uint64_t seed : seeds) {
                sequencer::SequencerConfig scfg = cfg.seq;
                scfg.disc_set = sequencer::disc_set_from_name(setname);
                scfg.seed = seed;
                eval_variant(setname, seed, corpus, gen, ghash, basis, scfg);
            }
        }
    } else if (axis == "interval_k") {
        for (std::size_t k : {2, 3, 4, 5}) {
            config::PipelineConfig vcfg = cfg;
            vcfg.pairgan.k = k;
            const std::string vdir = (fs::path(work_dir) / ("k" + std::to_string(k))).string();
            fs::create_directories(vdir);
            const std::string cd = corpus_dir(work_dir);
            if (!fs::exists(cd)) stage_synth_data(vcfg, cd, true);
            auto corpus = synthvideo::load_corpus(cd);
            for (std::uint64_t seed : seeds) {
                config::PipelineConfig scfg = vcfg;
                scfg.pairgan.seed = seed;
                scfg.seq.seed = seed;
                auto trained = pairgan::train_pairgan(corpus, scfg.pairgan);
                const std::string gp =
                    (fs::path(vdir) / ("pairgan_s" + std::to_string(seed) + ".narc")).string();
                pairgan::save_generator(gp, trained.gen, trained.history.best_step,
                                        scfg.pairgan.seed, "");
                pairgan::PairGenerator gen = pairgan::load_generator(gp);
                const std::string ghash = pairgan::generator_hash(gp);
                auto basis = motionspace::compute_motion_basis(gen, scfg.motion, ghash);
                eval_variant("k=" + std::to_string(k), seed, corpus, gen, ghash, basis, scfg.seq);
            }
        }
    } else if (axis == "motion_codes") {
        const std::string cd = corpus_dir(work_dir);
        if (!fs::exists(cd)) stage_synth_data(cfg, cd, true);
        auto corpus = synthvideo::load_corpus(cd);
        const std::string gp = generator_path(work_dir);
        if (!fs::exists(gp)) stage_train_pairs(cfg, cd, gp, true);
        pairgan::PairGenerator gen = pairgan::load_generator(gp);
        const std::string ghash = pairgan::generator_hash(gp);
        const std::string bp = basis_path(work_dir);
        if (!fs::exists(bp)) stage_extract_motions(cfg, gp, bp, true);
        auto basis = motionspace::load_basis(bp);
        for (std::uint64_t seed : seeds) {
            sequencer::SequencerConfig scfg = cfg.seq;
            scfg.seed = seed;
            eval_variant("computed", seed, corpus, gen, ghash, basis, scfg);
            auto random_basis = randomize_basis(basis, seed);
            eval_variant("random", seed, corpus, gen, ghash, random_basis, scfg);
        }
    } else {
        throw UsageError("ablate: unknown axis '" + axis +
                         "' (expected discriminators | interval_k | motion_codes)");
    }

    nlohmann::json report{{"axis", axis}, {"seeds", seeds}, {"rows", rows},
                          {"config", cfg.to_json()}};
    if (!report_file.empty()) io::save_json(report_file, report);
    if (!csv_file.empty()) {
        std::string csv =
            "variant,seed,proxy_frechet_clips,content_pass_rate,median_loop_score,mean_motion_"
            "magnitude\n";
        for (const auto& r : rows) {
            csv += r["variant"].get<std::string>() + "," +
                   std::to_string(r["seed"].get<std::uint64_t>()) + "," +
                   std::to_string(r["proxy_frechet_clips"].get<double>()) + "," +
                   std::to_string(r["content_pass_rate"].get<double>()) + "," +
                   std::to_string(r["median_loop_score"].get<double>()) + "," +
                   std::to_string(r["mean_motion_magnitude"].get<double>()) + "\n";
        }
        io::atomic_write_file(csv_file, csv);
    }
    return report;
}

} // namespace mvg::pipeline
