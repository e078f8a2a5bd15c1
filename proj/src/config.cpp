#include "mvg/config.hpp"

#include <fstream>
#include <sstream>

#include "mvg/errors.hpp"

namespace mvg::config {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::size_t> parse_size_list(const std::string& v) {
    std::vector<std::size_t> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(std::stoul(tok));
    }
    if (out.empty()) throw UsageError("empty list value: " + v);
    return out;
}

} // namespace

void PipelineConfig::validate() const {
    if (corpus.frames < 2 * pairgan.k + 1)
        throw ConfigError("config: corpus T=" + std::to_string(corpus.frames) +
                          " must be >= 2k+1 for pair interval k=" + std::to_string(pairgan.k));
    if (corpus.height != pairgan.out_res() || corpus.width != pairgan.out_res())
        throw ConfigError("config: corpus resolution " + std::to_string(corpus.height) + "x" +
                          std::to_string(corpus.width) + " must match generator output " +
                          std::to_string(pairgan.out_res()));
    if (motion.m < 1) throw ConfigError("config: motion.m must be >= 1");
    if (seq.n_frames < 2) throw ConfigError("config: sequencer.n_frames must be >= 2");
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open config file: " + path);
    PipelineConfig cfg;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config " + path + ":" + std::to_string(lineno) +
                             ": expected key = value");
        cfg.set_key(section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

void PipelineConfig::set_key(const std::string& section, const std::string& key,
                             const std::string& value) {
    auto bad = [&]() -> void {
        throw UsageError("unknown config key [" + section + "] " + key);
    };
    try {
        if (section == "corpus") {
            if (key == "n_videos") corpus.n_videos = std::stoul(value);
            else if (key == "frames" || key == "T") corpus.frames = std::stoul(value);
            else if (key == "height" || key == "H") corpus.height = std::stoul(value);
            else if (key == "width" || key == "W") corpus.width = std::stoul(value);
            else if (key == "motion_kind") corpus.motion_kind = synthvideo::motion_kind_from_name(value);
            else if (key == "seed") corpus.seed = std::stoull(value);
            else bad();
        } else if (section == "pairgan") {
            if (key == "d_z") pairgan.d_z = std::stoul(value);
            else if (key == "d_omega") pairgan.d_omega = std::stoul(value);
            else if (key == "map_layers") pairgan.map_layers = std::stoul(value);
            else if (key == "synth_channels") pairgan.synth_channels = parse_size_list(value);
            else if (key == "disc_channels") pairgan.disc_channels = parse_size_list(value);
            else if (key == "disc_fc") pairgan.disc_fc = std::stoul(value);
            else if (key == "lr") pairgan.lr = std::stod(value);
            else if (key == "gamma") pairgan.gamma_r1 = std::stod(value);
            else if (key == "batch") pairgan.batch = std::stoul(value);
            else if (key == "k") pairgan.k = std::stoul(value);
            else if (key == "steps") pairgan.steps = std::stoul(value);
            else if (key == "eval_every") pairgan.eval_every = std::stoul(value);
            else if (key == "eval_samples") pairgan.eval_samples = std::stoul(value);
            else if (key == "seed") pairgan.seed = std::stoull(value);
            else bad();
        } else if (section == "motion") {
            if (key == "m") motion.m = std::stoul(value);
            else if (key == "tau") motion.tau = std::stod(value);
            else if (key == "lambda") motion.rpca.lambda = std::stod(value);
            else if (key == "rho") motion.rpca.rho = std::stod(value);
            else if (key == "tol") motion.rpca.tol = std::stod(value);
            else if (key == "max_iter") motion.rpca.max_iter = std::stoul(value);
            else if (key == "anchor_count") motion.anchor_count = std::stoul(value);
            else if (key == "anchor_seed") motion.anchor_seed = std::stoull(value);
            else if (key == "diag_alpha") motion.diag_alpha = std::stod(value);
            else if (key == "average_grams") motion.average_grams = (value == "true" || value == "1");
            else bad();
        } else if (section == "sequencer") {
            if (key == "n_frames") seq.n_frames = std::stoul(value);
            else if (key == "lr") seq.lr = std::stod(value);
            else if (key == "disc_lr") seq.disc_lr = std::stod(value);
            else if (key == "epochs") seq.epochs = std::stoul(value);
            else if (key == "batch") seq.batch = std::stoul(value);
            else if (key == "video_disc_channels") seq.video_disc_channels = parse_size_list(value);
            else if (key == "subsample_stride") seq.subsample_stride = std::stoul(value);
            else if (key == "first") seq.first = sequencer::first_frame_from_name(value);
            else if (key == "discriminators") seq.disc_set = sequencer::disc_set_from_name(value);
            else if (key == "seed") seq.seed = std::stoull(value);
            else if (key == "edit_cap") seq.edit_cap = std::stod(value);
            else bad();
        } else if (section == "eval") {
            if (key == "samples") eval.samples = std::stoul(value);
            else if (key == "clip_len") eval.clip_len = std::stoul(value);
            else if (key == "extractor_seed") eval.extractor_seed = std::stoull(value);
            else if (key == "one_clip_per_video") eval.one_clip_per_video = (value == "true" || value == "1");
            else if (key == "seed") eval.seed = std::stoull(value);
            else bad();
        } else {
            throw UsageError("unknown config section [" + section + "]");
        }
    } catch (const std::invalid_argument&) {
        throw UsageError("bad value for [" + section + "] " + key + ": " + value);
    } catch (const std::out_of_range&) {
        throw UsageError("value out of range for [" + section + "] " + key + ": " + value);
    }
}

nlohmann::json PipelineConfig::to_json() const {
    return nlohmann::json{
        {"corpus",
         {{"n_videos", corpus.n_videos},
          {"T", corpus.frames},
          {"H", corpus.height},
          {"W", corpus.width},
          {"motion_kind", synthvideo::motion_kind_name(corpus.motion_kind)},
          {"seed", corpus.seed}}},
        {"pairgan",
         {{"d_z", pairgan.d_z},
          {"d_omega", pairgan.d_omega},
          {"map_layers", pairgan.map_layers},
          {"synth_channels", pairgan.synth_channels},
          {"disc_channels", pairgan.disc_channels},
          {"disc_fc", pairgan.disc_fc},
          {"lr", pairgan.lr},
          {"gamma", pairgan.gamma_r1},
          {"batch", pairgan.batch},
          {"k", pairgan.k},
          {"steps", pairgan.steps},
          {"eval_every", pairgan.eval_every},
          {"eval_samples", pairgan.eval_samples},
          {"seed", pairgan.seed}}},
        {"motion",
         {{"m", motion.m},
          {"tau", motion.tau},
          {"lambda", motion.rpca.lambda},
          {"rho", motion.rpca.rho},
          {"tol", motion.rpca.tol},
          {"max_iter", motion.rpca.max_iter},
          {"anchor_count", motion.anchor_count},
          {"anchor_seed", motion.anchor_seed},
          {"diag_alpha", motion.diag_alpha},
          {"average_grams", motion.average_grams}}},
        {"sequencer",
         {{"n_frames", seq.n_frames},
          {"lr", seq.lr},
          {"disc_lr", seq.disc_lr},
          {"epochs", seq.epochs},
          {"batch", seq.batch},
          {"video_disc_channels", seq.video_disc_channels},
          {"subsample_stride", seq.subsample_stride},
          {"first", sequencer::first_frame_name(seq.first)},
          {"discriminators", sequencer::disc_set_name(seq.disc_set)},
          {"edit_cap", seq.edit_cap},
          {"seed", seq.seed}}},
        {"eval",
         {{"samples", eval.samples},
          {"clip_len", eval.clip_len},
          {"extractor_seed", eval.extractor_seed},
          {"one_clip_per_video", eval.one_clip_per_video},
          {"seed", eval.seed}}}};
}

} // namespace mvg::config
