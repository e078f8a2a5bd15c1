#include "mvg/synthvideo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "mvg/errors.hpp"
#include "mvg/io.hpp"

namespace mvg::synthvideo {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kBoundaryHarmonics = 10;
constexpr int kGratings = 8;

struct Hsv {
    double h, s, v;
};

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
    h = h - std::floor(h);
    const double c = v * s;
    const double hp = h * 6.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r1 = 0, g1 = 0, b1 = 0;
    if (hp < 1)      { r1 = c; g1 = x; }
    else if (hp < 2) { r1 = x; g1 = c; }
    else if (hp < 3) { g1 = c; b1 = x; }
    else if (hp < 4) { g1 = x; b1 = c; }
    else if (hp < 5) { r1 = x; b1 = c; }
    else             { r1 = c; b1 = x; }
    const double m = v - c;
    r = r1 + m;
    g = g1 + m;
    b = b1 + m;
}

// One textured deformable blob. Static attributes are the clip's content;
// the per-frame state (position, rotation, boundary phases, texture phases)
// is the motion. Many independent phase dimensions give the pair generator a
// rich per-frame motion manifold to learn.
struct BlobScene {
    // content
    double hue, sat, base_radius;
    double bdry_amp[kBoundaryHarmonics];
    double grat_angle[kGratings], grat_freq[kGratings], grat_contrast[kGratings];
    // motion state
    double cx, cy, vx, vy;
    double rot, rot_speed;
    double bdry_phase[kBoundaryHarmonics], bdry_speed[kBoundaryHarmonics];
    double grat_phase[kGratings], grat_speed[kGratings];
    double cont_phase[kGratings], cont_speed[kGratings];
    double pulse_phase, pulse_speed;
    double margin;

    void init(Rng& rng, std::size_t w, std::size_t h, MotionKind kind) {
        hue = rng.uniform();
        sat = 0.85;
        base_radius = rng.uniform(6.0, 8.5);
        double amp_budget = 0.22;
        for (int i = 0; i < kBoundaryHarmonics; ++i) {
            bdry_amp[i] = amp_budget / kBoundaryHarmonics * rng.uniform(0.6, 1.4);
            bdry_phase[i] = rng.uniform(0.0, 2 * kPi);
            const double sp = rng.uniform(0.3, 0.8);
            bdry_speed[i] = rng.bernoulli(0.5) ? sp : -sp;
        }
        for (int i = 0; i < kGratings; ++i) {
            grat_angle[i] = rng.uniform(0.0, kPi);
            grat_freq[i] = 2 * kPi / rng.uniform(5.0, 12.0);
            grat_contrast[i] = rng.uniform(0.5, 1.0);
            grat_phase[i] = rng.uniform(0.0, 2 * kPi);
            const double sp = rng.uniform(0.35, 0.9);
            grat_speed[i] = rng.bernoulli(0.5) ? sp : -sp;
            cont_phase[i] = rng.uniform(0.0, 2 * kPi);
            const double cs = rng.uniform(0.2, 0.5);
            cont_speed[i] = rng.bernoulli(0.5) ? cs : -cs;
        }
        rot = rng.uniform(0.0, 2 * kPi);
        rot_speed = rng.uniform(-0.18, 0.18);
        pulse_phase = rng.uniform(0.0, 2 * kPi);
        pulse_speed = rng.uniform(0.15, 0.3);

        margin = base_radius * (1.0 + amp_budget) + 2.0;
        cx = rng.uniform(margin, w - 1 - margin);
        cy = rng.uniform(margin, h - 1 - margin);
        const double speed =
            kind == MotionKind::bounce ? rng.uniform(1.4, 2.2) : rng.uniform(1.0, 1.25);
        const double dir = rng.uniform(0.0, 2 * kPi);
        vx = speed * std::cos(dir);
        vy = speed * std::sin(dir);
    }

    void advance(std::size_t w, std::size_t h) {
        cx += vx;
        cy += vy;
        if (cx < margin)        { cx = 2 * margin - cx; vx = -vx; }
        if (cx > w - 1 - margin) { cx = 2 * (w - 1 - margin) - cx; vx = -vx; }
        if (cy < margin)        { cy = 2 * margin - cy; vy = -vy; }
        if (cy > h - 1 - margin) { cy = 2 * (h - 1 - margin) - cy; vy = -vy; }
        rot += rot_speed;
        for (int i = 0; i < kBoundaryHarmonics; ++i) bdry_phase[i] += bdry_speed[i];
        for (int i = 0; i < kGratings; ++i) {
            grat_phase[i] += grat_speed[i];
            cont_phase[i] += cont_speed[i];
        }
        pulse_phase += pulse_speed;
    }

    // Renders at 2x supersampling, averaged down. Output [3,H,W] quantized.
    void render(std::uint8_t* out, std::size_t w, std::size_t h) const {
        const double bg = 0.08;
        const int ss = 2;
        std::vector<double> acc(3 * h * w, 0.0);
        double cont_now[kGratings], cont_sum = 0.0;
        for (int i = 0; i < kGratings; ++i) {
            cont_now[i] = grat_contrast[i] * (0.6 + 0.4 * std::sin(cont_phase[i]));
            cont_sum += cont_now[i];
        }
        const double pulse = 0.06 * std::sin(pulse_phase);
        const double cr = std::cos(-rot), sr = std::sin(-rot);
        for (std::size_t py = 0; py < h; ++py) {
            for (std::size_t px = 0; px < w; ++px) {
                double rgb[3] = {0, 0, 0};
                for (int sy = 0; sy < ss; ++sy) {
                    for (int sx = 0; sx < ss; ++sx) {
                        const double x = px + (sx + 0.5) / ss - 0.5;
                        const double y = py + (sy + 0.5) / ss - 0.5;
                        const double dx = x - cx, dy = y - cy;
                        const double u = cr * dx - sr * dy;
                        const double v = sr * dx + cr * dy;
                        const double r = std::sqrt(u * u + v * v);
                        const double th = std::atan2(v, u);
                        double radius = base_radius;
                        for (int i = 0; i < kBoundaryHarmonics; ++i)
                            radius += base_radius * bdry_amp[i] *
                                      std::cos((i + 1) * th - bdry_phase[i]);
                        const double edge = 0.9;
                        double alpha = (radius - r) / edge + 0.5;
                        alpha = std::min(1.0, std::max(0.0, alpha));
                        alpha = alpha * alpha * (3 - 2 * alpha); // smoothstep
                        double pr = bg, pg = bg, pb = bg;
                        if (alpha > 0.0) {
                            double pat = 0.0;
                            for (int i = 0; i < kGratings; ++i) {
                                const double proj = u * std::cos(grat_angle[i]) +
                                                    v * std::sin(grat_angle[i]);
                                pat += cont_now[i] * std::cos(proj * grat_freq[i] + grat_phase[i]);
                            }
                            pat /= std::max(cont_sum, 1e-9);
                            const double val = 0.55 + 0.38 * pat + pulse;
                            double br, bgc, bb;
                            hsv_to_rgb(hue, sat, std::min(0.95, std::max(0.15, val)), br, bgc, bb);
                            pr = bg + alpha * (br - bg);
                            pg = bg + alpha * (bgc - bg);
                            pb = bg + alpha * (bb - bg);
                        }
                        rgb[0] += pr;
                        rgb[1] += pg;
                        rgb[2] += pb;
                    }
                }
                for (int c = 0; c < 3; ++c) {
                    const double v01 = rgb[c] / (ss * ss);
                    out[(c * h + py) * w + px] = io::quant8(2.0 * v01 - 1.0);
                }
            }
        }
    }
};

} // namespace

std::string motion_kind_name(MotionKind k) {
    return k == MotionKind::bounce ? "bounce" : "drift";
}

MotionKind motion_kind_from_name(const std::string& s) {
    if (s == "bounce") return MotionKind::bounce;
    if (s == "drift") return MotionKind::drift;
    throw ConfigError("unknown motion_kind: " + s);
}

double VideoClip::at(std::size_t t, std::size_t c, std::size_t y, std::size_t x) const {
    return io::dequant8(pixels[((t * 3 + c) * height + y) * width + x]);
}

Tensor VideoClip::frame(std::size_t t) const {
    Tensor out({3, height, width});
    const std::uint8_t* p = frame_ptr(t);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = io::dequant8(p[i]);
    return out;
}

Tensor VideoClip::tensor() const {
    Tensor out({frames, 3, height, width});
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = io::dequant8(pixels[i]);
    return out;
}

std::vector<VideoClip> make_corpus(const CorpusConfig& config) {
    if (config.n_videos < 1) throw ConfigError("make_corpus: n_videos must be >= 1");
    if (config.frames < 2) throw ConfigError("make_corpus: T must be >= 2");
    if (config.height < 24 || config.width < 24 || config.height > 64 || config.width > 64)
        throw ConfigError("make_corpus: spatial size must be in [24, 64]");
    Rng master(config.seed);
    std::vector<VideoClip> corpus;
    corpus.reserve(config.n_videos);
    for (std::size_t ci = 0; ci < config.n_videos; ++ci) {
        Rng rng = master.split(ci);
        BlobScene scene;
        scene.init(rng, config.width, config.height, config.motion_kind);
        VideoClip clip;
        clip.frames = config.frames;
        clip.height = config.height;
        clip.width = config.width;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "blob_hue%.4f_r%.2f", scene.hue, scene.base_radius);
        clip.content_id = buf;
        clip.pixels.resize(config.frames * 3 * config.height * config.width);
        for (std::size_t t = 0; t < config.frames; ++t) {
            scene.render(clip.pixels.data() + t * 3 * config.height * config.width,
                         config.width, config.height);
            scene.advance(config.width, config.height);
        }
        corpus.push_back(std::move(clip));
    }
    return corpus;
}

std::vector<ImagePair> sample_pairs(const std::vector<VideoClip>& corpus, std::size_t k,
                                    std::size_t batch, Rng& rng) {
    if (k < 1) throw SamplingError("sample_pairs: k must be >= 1");
    if (corpus.empty()) throw SamplingError("sample_pairs: empty corpus");
    std::vector<ImagePair> out;
    out.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        const std::size_t ci = static_cast<std::size_t>(rng.uniform_int(0, corpus.size() - 1));
        const VideoClip& clip = corpus[ci];
        if (clip.frames < k + 1)
            throw SamplingError("sample_pairs: clip " + std::to_string(ci) + " (" +
                                clip.content_id + ") has " + std::to_string(clip.frames) +
                                " frames, too short for interval k=" + std::to_string(k));
        const std::size_t t = static_cast<std::size_t>(rng.uniform_int(0, clip.frames - 1 - k));
        const bool forward = rng.bernoulli(0.5);
        const std::size_t a = forward ? t : t + k;
        const std::size_t b = forward ? t + k : t;
        ImagePair pair;
        pair.pixels = Tensor({6, clip.height, clip.width});
        const std::size_t fsz = 3 * clip.height * clip.width;
        const std::uint8_t* pa = clip.frame_ptr(a);
        const std::uint8_t* pb = clip.frame_ptr(b);
        for (std::size_t j = 0; j < fsz; ++j) {
            pair.pixels[j] = io::dequant8(pa[j]);
            pair.pixels[fsz + j] = io::dequant8(pb[j]);
        }
        pair.source = "clip=" + std::to_string(ci) + ";t=" + std::to_string(a) +
                      ";t2=" + std::to_string(b);
        out.push_back(std::move(pair));
    }
    return out;
}

std::vector<VideoClip> sample_clips(const std::vector<VideoClip>& corpus, std::size_t t_clip,
                                    std::size_t batch, Rng& rng) {
    if (t_clip < 1) throw SamplingError("sample_clips: T_clip must be >= 1");
    std::vector<std::size_t> valid;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (corpus[i].frames >= t_clip) valid.push_back(i);
    if (valid.empty())
        throw SamplingError("sample_clips: no clip is long enough for T_clip=" +
                            std::to_string(t_clip));
    std::vector<VideoClip> out;
    out.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        const VideoClip& src =
            corpus[valid[static_cast<std::size_t>(rng.uniform_int(0, valid.size() - 1))]];
        const std::size_t t0 =
            static_cast<std::size_t>(rng.uniform_int(0, src.frames - t_clip));
        VideoClip window;
        window.frames = t_clip;
        window.height = src.height;
        window.width = src.width;
        window.content_id = src.content_id;
        window.fps_tag = src.fps_tag;
        const std::size_t fsz = 3 * src.height * src.width;
        window.pixels.assign(src.pixels.begin() + t0 * fsz,
                             src.pixels.begin() + (t0 + t_clip) * fsz);
        out.push_back(std::move(window));
    }
    return out;
}

VideoClip reverse_clip(const VideoClip& clip) {
    VideoClip out = clip;
    const std::size_t fsz = 3 * clip.height * clip.width;
    for (std::size_t t = 0; t < clip.frames; ++t)
        std::copy_n(clip.pixels.data() + (clip.frames - 1 - t) * fsz, fsz,
                    out.pixels.data() + t * fsz);
    return out;
}

VideoClip subsample_clip(const VideoClip& clip, std::size_t stride) {
    if (stride < 1) throw ConfigError("subsample_clip: stride must be >= 1");
    VideoClip out;
    out.height = clip.height;
    out.width = clip.width;
    out.content_id = clip.content_id;
    out.fps_tag = clip.fps_tag;
    const std::size_t fsz = 3 * clip.height * clip.width;
    for (std::size_t t = 0; t < clip.frames; t += stride) {
        out.pixels.insert(out.pixels.end(), clip.pixels.begin() + t * fsz,
                          clip.pixels.begin() + (t + 1) * fsz);
        ++out.frames;
    }
    return out;
}

std::string save_corpus(const std::vector<VideoClip>& corpus, const CorpusConfig& config,
                        const std::string& dir, bool force) {
    if (fs::exists(dir) && !fs::is_empty(dir)) {
        if (!force) throw ConfigError("corpus directory exists (use --force): " + dir);
        fs::remove_all(dir);
    }
    fs::create_directories(dir);
    for (std::size_t ci = 0; ci < corpus.size(); ++ci) {
        const VideoClip& clip = corpus[ci];
        char sub[32];
        std::snprintf(sub, sizeof(sub), "clip_%05zu", ci);
        const fs::path cdir = fs::path(dir) / sub;
        fs::create_directories(cdir);
        for (std::size_t t = 0; t < clip.frames; ++t) {
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%05zu.ppm", t);
            io::write_ppm((cdir / name).string(), clip.frame_ptr(t), clip.height, clip.width);
        }
        nlohmann::json m{{"content_id", clip.content_id},
                         {"T", clip.frames},
                         {"H", clip.height},
                         {"W", clip.width},
                         {"seed", config.seed},
                         {"motion_kind", motion_kind_name(config.motion_kind)},
                         {"fps", clip.fps_tag}};
        io::save_json((cdir / "manifest.json").string(), m);
    }
    nlohmann::json top{{"format_version", 1},
                       {"n_videos", corpus.size()},
                       {"T", config.frames},
                       {"H", config.height},
                       {"W", config.width},
                       {"seed", config.seed},
                       {"motion_kind", motion_kind_name(config.motion_kind)}};
    io::save_json((fs::path(dir) / "manifest.json").string(), top);
    const std::string h = corpus_hash(dir);
    nlohmann::json top2 = top;
    top2["content_hash"] = h;
    io::save_json((fs::path(dir) / "manifest.json").string(), top2);
    return h;
}

std::string corpus_hash(const std::string& dir) {
    std::vector<std::string> parts;
    std::vector<fs::path> clips;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory()) clips.push_back(e.path());
    std::sort(clips.begin(), clips.end());
    for (const auto& cdir : clips) {
        std::vector<fs::path> files;
        for (const auto& f : fs::directory_iterator(cdir))
            if (f.path().extension() == ".ppm") files.push_back(f.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files)
            parts.push_back(f.filename().string() + ":" + io::file_hash_hex(f.string()));
    }
    return io::combine_hashes(parts);
}

std::vector<VideoClip> load_corpus(const std::string& dir, CorpusConfig* config_out) {
    if (!fs::exists(dir)) throw ConfigError("corpus directory not found: " + dir);
    const auto top = io::load_json((fs::path(dir) / "manifest.json").string());
    if (config_out) {
        config_out->n_videos = top.at("n_videos").get<std::size_t>();
        config_out->frames = top.at("T").get<std::size_t>();
        config_out->height = top.at("H").get<std::size_t>();
        config_out->width = top.at("W").get<std::size_t>();
        config_out->seed = top.at("seed").get<std::uint64_t>();
        config_out->motion_kind = motion_kind_from_name(top.at("motion_kind").get<std::string>());
    }
    std::vector<fs::path> cdirs;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory()) cdirs.push_back(e.path());
    std::sort(cdirs.begin(), cdirs.end());
    std::vector<VideoClip> corpus;
    corpus.reserve(cdirs.size());
    for (const auto& cdir : cdirs) {
        const auto m = io::load_json((cdir / "manifest.json").string());
        VideoClip clip;
        clip.frames = m.at("T").get<std::size_t>();
        clip.height = m.at("H").get<std::size_t>();
        clip.width = m.at("W").get<std::size_t>();
        clip.content_id = m.at("content_id").get<std::string>();
        clip.fps_tag = m.value("fps", 25);
        clip.pixels.resize(clip.frames * 3 * clip.height * clip.width);
        for (std::size_t t = 0; t < clip.frames; ++t) {
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%05zu.ppm", t);
            std::size_t h = 0, w = 0;
            auto data = io::read_ppm((cdir / name).string(), h, w);
            if (h != clip.height || w != clip.width)
                throw ConfigError("frame size mismatch in " + cdir.string());
            std::copy(data.begin(), data.end(),
                      clip.pixels.begin() + t * 3 * clip.height * clip.width);
        }
        corpus.push_back(std::move(clip));
    }
    return corpus;
}

Tensor pairs_to_batch(const std::vector<ImagePair>& pairs) {
    if (pairs.empty()) throw SamplingError("pairs_to_batch: empty batch");
    const auto& s = pairs[0].pixels.shape();
    Tensor out({pairs.size(), s[0], s[1], s[2]});
    const std::size_t m = pairs[0].pixels.size();
    for (std::size_t i = 0; i < pairs.size(); ++i)
        std::copy_n(pairs[i].pixels.data(), m, out.data() + i * m);
    return out;
}

} // namespace mvg::synthvideo
