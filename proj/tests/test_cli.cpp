#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mvg/cli.hpp"
#include "mvg/io.hpp"
#include "mvg/synthvideo.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(std::vector<std::string> args) {
    std::vector<char*> argv;
    args.insert(args.begin(), "mvg");
    for (auto& a : args) argv.push_back(a.data());
    return mvg::cli::run(static_cast<int>(argv.size()), argv.data());
}

const char* kTinyConfig = R"(# tiny end-to-end pipeline
[corpus]
n_videos = 6
T = 12
H = 32
W = 32
motion_kind = bounce
seed = 7

[pairgan]
d_z = 8
d_omega = 8
map_layers = 2
synth_channels = 8,6,6,6
disc_channels = 6,8,8,8
disc_fc = 16
k = 2
batch = 2
steps = 3
eval_every = 3
eval_samples = 4
seed = 5

[motion]
m = 2
tau = 0.05
anchor_count = 2
anchor_seed = 11

[sequencer]
n_frames = 4
epochs = 1
batch = 2
video_disc_channels = 4,6
seed = 9

[eval]
samples = 4
clip_len = 4
seed = 21
)";

struct TempWorkspace {
    fs::path root;
    std::string config_file;

    TempWorkspace() {
        root = fs::temp_directory_path() / "mvg_cli_test";
        fs::remove_all(root);
        fs::create_directories(root);
        config_file = (root / "pipeline.cfg").string();
        std::ofstream f(config_file);
        f << kTinyConfig;
    }
    ~TempWorkspace() { fs::remove_all(root); }

    std::string out() const { return (root / "artifacts").string(); }
};

std::string dir_hash(const std::string& dir) {
    std::vector<std::string> parts;
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
        parts.push_back(f.filename().string() + ":" + mvg::io::file_hash_hex(f.string()));
    return mvg::io::combine_hashes(parts);
}

} // namespace

TEST_CASE("cli: full tiny pipeline end to end") {
    TempWorkspace ws;
    const std::string out = ws.out();

    // stage 1: corpus
    CHECK(run_cli({"--config", ws.config_file, "--out", out, "synth-data"}) == 0);
    CHECK(fs::exists(fs::path(out) / "corpus" / "manifest.json"));
    CHECK(fs::exists(fs::path(out) / "corpus" / "clip_00000" / "frame_00000.ppm"));
    // refuses overwrite without --force
    CHECK(run_cli({"--config", ws.config_file, "--out", out, "synth-data"}) == 3);
    CHECK(run_cli({"--config", ws.config_file, "--out", out, "--force", "synth-data"}) == 0);

    // stage 2: pair generator
    CHECK(run_cli({"--config", ws.config_file, "--out", out, "train-pairs"}) == 0);
    CHECK(fs::exists(fs::path(out) / "pairgan.narc"));
    const auto gman = mvg::io::load_json((fs::path(out) / "pairgan.narc.json").string());
    CHECK(gman.at("archive_hash").get<std::string>() ==
          mvg::io::file_hash_hex((fs::path(out) / "pairgan.narc").string()));
    CHECK(gman.at("corpus_hash").get<std::string>() ==
          mvg::synthvideo::corpus_hash((fs::path(out) / "corpus").string()));

    // stage 3: motion basis
    CHECK(run_cli({"--config", ws.config_file, "--out", out, "extract-motions"}) == 0);
    CHECK(fs::exists(fs::path(out) / "motion_basis.narc"));

    // stage 4: sequencer
    CHECK(run_cli({"--config", ws.config_file, "--out", out, "train-sequencer"}) == 0);
    CHECK(fs::exists(fs::path(out) / "sequencer.narc"));

    // generate: bit-identical across runs with the same seed
    CHECK(run_cli({"--config", ws.config_file, "--out", out, "--seed", "3", "generate",
                   "--count", "2", "--frames", "4"}) == 0);
    const std::string gdir = (fs::path(out) / "generated").string();
    const std::string h1 = dir_hash(gdir);
    CHECK(run_cli({"--config", ws.config_file, "--out", out, "--seed", "3", "--force",
                   "generate", "--count", "2", "--frames", "4"}) == 0);
    CHECK(dir_hash(gdir) == h1);

    // generate-long via interpolation
    CHECK(run_cli({"--config", ws.config_file, "--out", out, "--seed", "3", "generate-long",
                   "--count", "1", "--frames", "16"}) == 0);
    std::size_t frame_count = 0;
    for (const auto& e :
         fs::directory_iterator(fs::path(out) / "generated_long" / "video_0000"))
        if (e.path().extension() == ".ppm") ++frame_count;
    CHECK(frame_count == 16);

    // evaluate
    CHECK(run_cli({"--config", ws.config_file, "--out", out, "evaluate"}) == 0);
    const auto report = mvg::io::load_json((fs::path(out) / "report.json").string());
    CHECK(report.at("metrics").contains("proxy_frechet_clips"));
    CHECK(report.at("metrics").contains("content_pass_rate"));
    CHECK(report.at("sample_counts").at("generated").get<int>() == 4);

    // hash-chain break: corrupt the basis archive -> exit 3
    {
        const std::string bpath = (fs::path(out) / "motion_basis.narc").string();
        std::string content = mvg::io::read_file(bpath);
        content[content.size() / 2] ^= 0x01;
        mvg::io::atomic_write_file(bpath, content);
    }
    CHECK(run_cli({"--config", ws.config_file, "--out", out, "--force", "train-sequencer"}) == 3);
}

TEST_CASE("cli: usage errors exit 2") {
    TempWorkspace ws;
    CHECK(run_cli({}) == 2);
    CHECK(run_cli({"ablate"}) == 2); // missing required --axis
    // bad config key
    const std::string bad = (ws.root / "bad.cfg").string();
    std::ofstream f(bad);
    f << "[corpus]\nbogus_key = 3\n";
    f.close();
    CHECK(run_cli({"--config", bad, "--out", ws.out(), "synth-data"}) == 2);
}

TEST_CASE("cli: config validation failures exit 3") {
    TempWorkspace ws;
    const std::string bad = (ws.root / "badval.cfg").string();
    std::ofstream f(bad);
    f << "[corpus]\nT = 3\n[pairgan]\nk = 4\nsynth_channels = 8,6,6,6\n";
    f.close();
    CHECK(run_cli({"--config", bad, "--out", ws.out(), "synth-data"}) == 3);
}
