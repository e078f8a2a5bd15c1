#include "mvg/cli.hpp"

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "mvg/errors.hpp"
#include "mvg/io.hpp"
#include "mvg/pipeline.hpp"

namespace mvg::cli {

namespace fs = std::filesystem;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out = "artifacts";
    std::int64_t seed = -1; // overrides the running stage's seed when >= 0
    bool force = false;
};

config::PipelineConfig resolve_config(const GlobalArgs& g) {
    config::PipelineConfig cfg;
    if (!g.config_path.empty()) cfg = config::PipelineConfig::from_file(g.config_path);
    return cfg;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
    std::vector<std::uint64_t> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t next = s.find(',', pos);
        if (next == std::string::npos) next = s.size();
        out.push_back(std::stoull(s.substr(pos, next - pos)));
        pos = next + 1;
    }
    if (out.empty()) throw UsageError("empty seed list");
    return out;
}

} // namespace

int run(int argc, char** argv) {
    CLI::App app{"MotionVideoGAN-style three-stage video generator (desk scale)"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "pipeline config file (sections + key=value)");
    app.add_option("--out", g.out, "artifact directory")->capture_default_str();
    app.add_option("--seed", g.seed, "override the running stage's seed");
    app.add_flag("--force", g.force, "overwrite existing outputs");

    // synth-data
    auto* synth = app.add_subcommand("synth-data", "generate the synthetic video corpus");

    // train-pairs
    auto* pairs = app.add_subcommand("train-pairs", "train the image-pair generator");
    std::string corpus_opt, gen_opt, basis_opt, seq_opt;
    pairs->add_option("--corpus", corpus_opt, "corpus directory");

    // extract-motions
    auto* motions = app.add_subcommand("extract-motions", "compute the motion-code basis");
    motions->add_option("--generator", gen_opt, "pair-generator checkpoint");

    // train-sequencer
    auto* seqc = app.add_subcommand("train-sequencer", "train the latent code generator");
    std::string disc_opt;
    std::size_t subsample_opt = 0;
    seqc->add_option("--corpus", corpus_opt, "corpus directory");
    seqc->add_option("--generator", gen_opt, "pair-generator checkpoint");
    seqc->add_option("--basis", basis_opt, "motion basis file");
    seqc->add_option("--discriminators", disc_opt, "TVD | BVD | BVD+TVD | BVD+TVD+ID");
    seqc->add_option("--subsample", subsample_opt, "train on stride-subsampled clips");

    // generate / generate-long
    auto* gen_cmd = app.add_subcommand("generate", "generate videos as frame directories");
    std::size_t frames_opt = 0, count_opt = 8;
    bool gif_opt = false;
    std::string long_mode_opt = "interpolate";
    for (auto* c : {gen_cmd}) {
        c->add_option("--generator", gen_opt, "pair-generator checkpoint");
        c->add_option("--basis", basis_opt, "motion basis file");
        c->add_option("--sequencer", seq_opt, "sequencer checkpoint");
        c->add_option("--frames", frames_opt, "frames per video");
        c->add_option("--count", count_opt, "number of videos")->capture_default_str();
        c->add_flag("--gif", gif_opt, "also write an animated preview gif");
    }
    auto* genl_cmd = app.add_subcommand("generate-long", "long-sequence generation");
    genl_cmd->add_option("--generator", gen_opt, "pair-generator checkpoint");
    genl_cmd->add_option("--basis", basis_opt, "motion basis file");
    genl_cmd->add_option("--sequencer", seq_opt, "sequencer checkpoint");
    genl_cmd->add_option("--frames", frames_opt, "total frames");
    genl_cmd->add_option("--count", count_opt, "number of videos");
    genl_cmd->add_option("--mode", long_mode_opt, "interpolate | subsampled")
        ->capture_default_str();
    genl_cmd->add_flag("--gif", gif_opt, "also write an animated preview gif");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "metrics report for a trained model");
    std::string csv_opt;
    eval_cmd->add_option("--corpus", corpus_opt, "corpus directory");
    eval_cmd->add_option("--generator", gen_opt, "pair-generator checkpoint");
    eval_cmd->add_option("--basis", basis_opt, "motion basis file");
    eval_cmd->add_option("--sequencer", seq_opt, "sequencer checkpoint");
    eval_cmd->add_option("--csv", csv_opt, "also write a CSV table");

    // ablate
    auto* abl_cmd = app.add_subcommand("ablate", "train/evaluate ablation variants");
    std::string axis_opt, seeds_opt = "1,2,3";
    abl_cmd->add_option("--axis", axis_opt, "discriminators | interval_k | motion_codes")
        ->required();
    abl_cmd->add_option("--seeds", seeds_opt, "comma-separated seed list")
        ->capture_default_str();
    abl_cmd->add_option("--csv", csv_opt, "also write a CSV table");

    try {
        app.parse(argc, argv);

        config::PipelineConfig cfg = resolve_config(g);
        const std::string out = g.out;
        if (corpus_opt.empty()) corpus_opt = pipeline::corpus_dir(out);
        if (gen_opt.empty()) gen_opt = pipeline::generator_path(out);
        if (basis_opt.empty()) basis_opt = pipeline::basis_path(out);
        if (seq_opt.empty()) seq_opt = pipeline::sequencer_path(out);

        if (synth->parsed()) {
            if (g.seed >= 0) cfg.corpus.seed = static_cast<std::uint64_t>(g.seed);
            const std::string hash = pipeline::stage_synth_data(cfg, corpus_opt, g.force);
            std::cout << "corpus written to " << corpus_opt << "\ncontent_hash " << hash << "\n";
        } else if (pairs->parsed()) {
            if (g.seed >= 0) cfg.pairgan.seed = static_cast<std::uint64_t>(g.seed);
            auto a = pipeline::stage_train_pairs(cfg, corpus_opt, gen_opt, g.force);
            std::cout << "generator checkpoint " << a.path << "\narchive_hash " << a.hash
                      << "\nbest_step " << a.history.best_step << " proxy_frechet "
                      << a.history.best_frechet << "\n";
        } else if (motions->parsed()) {
            if (g.seed >= 0) cfg.motion.anchor_seed = static_cast<std::uint64_t>(g.seed);
            auto a = pipeline::stage_extract_motions(cfg, gen_opt, basis_opt, g.force);
            std::cout << "motion basis " << a.path << "\narchive_hash " << a.hash << "\nr_a "
                      << a.basis.rank_former << " r_b " << a.basis.rank_latter << "\n";
            std::cout << "code  sing_former  sing_latter  back_sel  fwd_sel\n";
            for (std::size_t i = 0; i < a.basis.config.m; ++i) {
                std::printf("%4zu  %10.4g  %10.4g  %8.4f  %8.4f\n", i,
                            i < a.basis.singvals_former.size() ? a.basis.singvals_former[i] : 0.0,
                            i < a.basis.singvals_latter.size() ? a.basis.singvals_latter[i] : 0.0,
                            a.basis.backward_selectivity[i], a.basis.forward_selectivity[i]);
            }
        } else if (seqc->parsed()) {
            if (g.seed >= 0) cfg.seq.seed = static_cast<std::uint64_t>(g.seed);
            if (!disc_opt.empty()) cfg.seq.disc_set = sequencer::disc_set_from_name(disc_opt);
            if (subsample_opt > 0) cfg.seq.subsample_stride = subsample_opt;
            auto a = pipeline::stage_train_sequencer(cfg, corpus_opt, gen_opt, basis_opt, seq_opt,
                                                     g.force);
            std::cout << "sequencer checkpoint " << a.path << "\narchive_hash " << a.hash << "\n";
        } else if (gen_cmd->parsed() || genl_cmd->parsed()) {
            const bool long_mode = genl_cmd->parsed();
            std::uint64_t seed = g.seed >= 0 ? static_cast<std::uint64_t>(g.seed) : 7;
            std::size_t frames = frames_opt;
            if (frames == 0) frames = long_mode ? 128 : cfg.seq.n_frames;
            const std::string vdir =
                (fs::path(out) / (long_mode ? "generated_long" : "generated")).string();
            pipeline::stage_generate(cfg, gen_opt, basis_opt, seq_opt, vdir, count_opt, frames,
                                     seed, long_mode,
                                     long_mode_opt == "subsampled" ? "subsampled" : "interpolate",
                                     g.force, gif_opt);
            std::cout << "videos written to " << vdir << "\n";
        } else if (eval_cmd->parsed()) {
            if (g.seed >= 0) cfg.eval.seed = static_cast<std::uint64_t>(g.seed);
            const std::string report = (fs::path(out) / "report.json").string();
            auto j = pipeline::stage_evaluate(cfg, corpus_opt, gen_opt, basis_opt, seq_opt, report,
                                              csv_opt);
            std::cout << j["metrics"].dump(2) << "\nreport written to " << report << "\n";
        } else if (abl_cmd->parsed()) {
            auto seeds = parse_seeds(seeds_opt);
            const std::string report = (fs::path(out) / ("ablation_" + axis_opt + ".json")).string();
            const std::string wdir = (fs::path(out) / ("ablate_" + axis_opt)).string();
            auto j = pipeline::stage_ablate(cfg, axis_opt, seeds, wdir, report, csv_opt);
            std::cout << "rows " << j["rows"].size() << "\nreport written to " << report << "\n";
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints help or the parse error
        return code == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const HashMismatchError& e) {
        std::cerr << "hash-chain failure: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "precondition failure: " << e.what() << "\n";
        return 3;
    } catch (const SamplingError& e) {
        std::cerr << "precondition failure: " << e.what() << "\n";
        return 3;
    } catch (const ProtocolError& e) {
        std::cerr << "precondition failure: " << e.what() << "\n";
        return 3;
    } catch (const ShapeError& e) {
        std::cerr << "precondition failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace mvg::cli
