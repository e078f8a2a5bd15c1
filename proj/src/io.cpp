#include "mvg/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "mvg/errors.hpp"

namespace mvg::io {

namespace {

constexpr char kMagic[4] = {'M', 'V', 'G', 'A'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& buf, T v) {
    buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(const std::string& buf, std::size_t& off) {
    if (off + sizeof(T) > buf.size()) throw ConfigError("archive: truncated file");
    T v;
    std::memcpy(&v, buf.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

} // namespace

void save_archive(const std::string& path,
                  const std::vector<std::pair<std::string, Tensor>>& arrays) {
    std::string buf;
    buf.append(kMagic, 4);
    put<std::uint32_t>(buf, kVersion);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(arrays.size()));
    for (const auto& [name, t] : arrays) {
        put<std::uint32_t>(buf, static_cast<std::uint32_t>(name.size()));
        buf.append(name);
        put<std::uint32_t>(buf, static_cast<std::uint32_t>(t.ndim()));
        for (auto d : t.shape()) put<std::uint64_t>(buf, d);
        buf.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(double));
    }
    atomic_write_file(path, buf);
}

std::map<std::string, Tensor> load_archive(const std::string& path) {
    const std::string buf = read_file(path);
    std::size_t off = 0;
    if (buf.size() < 12 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw ConfigError("archive: bad magic in " + path);
    off = 4;
    const auto version = take<std::uint32_t>(buf, off);
    if (version != kVersion)
        throw ConfigError("archive: unsupported version " + std::to_string(version));
    const auto count = take<std::uint32_t>(buf, off);
    std::map<std::string, Tensor> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = take<std::uint32_t>(buf, off);
        if (off + name_len > buf.size()) throw ConfigError("archive: truncated name");
        std::string name(buf.data() + off, name_len);
        off += name_len;
        const auto ndim = take<std::uint32_t>(buf, off);
        std::vector<std::size_t> shape(ndim);
        for (auto& d : shape) d = static_cast<std::size_t>(take<std::uint64_t>(buf, off));
        Tensor t(shape);
        const std::size_t bytes = t.size() * sizeof(double);
        if (off + bytes > buf.size()) throw ConfigError("archive: truncated data for " + name);
        std::memcpy(t.data(), buf.data() + off, bytes);
        off += bytes;
        out.emplace(std::move(name), std::move(t));
    }
    return out;
}

std::string bytes_hash_hex(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string file_hash_hex(const std::string& path) {
    const std::string content = read_file(path);
    return bytes_hash_hex(content.data(), content.size());
}

std::string combine_hashes(const std::vector<std::string>& parts) {
    std::string joined;
    for (const auto& p : parts) {
        joined += p;
        joined += '\n';
    }
    return bytes_hash_hex(joined.data(), joined.size());
}

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("cannot write " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw ConfigError("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + path);
    std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return content;
}

void save_json(const std::string& path, const nlohmann::json& j) {
    atomic_write_file(path, j.dump(2) + "\n");
}

nlohmann::json load_json(const std::string& path) {
    return nlohmann::json::parse(read_file(path));
}

std::uint8_t quant8(double v) {
    const double q = std::lround((v + 1.0) * 127.5);
    return static_cast<std::uint8_t>(std::min(255.0, std::max(0.0, q)));
}

double dequant8(std::uint8_t q) { return static_cast<double>(q) / 127.5 - 1.0; }

void write_ppm(const std::string& path, const std::uint8_t* rgb_chw, std::size_t h, std::size_t w) {
    std::string buf = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    buf.reserve(buf.size() + h * w * 3);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c)
                buf.push_back(static_cast<char>(rgb_chw[(c * h + y) * w + x]));
    atomic_write_file(path, buf);
}

std::vector<std::uint8_t> read_ppm(const std::string& path, std::size_t& h, std::size_t& w) {
    const std::string buf = read_file(path);
    std::size_t pos = 0;
    auto token = [&]() {
        while (pos < buf.size() && std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
        if (pos < buf.size() && buf[pos] == '#') {
            while (pos < buf.size() && buf[pos] != '\n') ++pos;
            while (pos < buf.size() && std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
        }
        const std::size_t start = pos;
        while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
        return buf.substr(start, pos - start);
    };
    if (token() != "P6") throw ConfigError("not a binary PPM: " + path);
    w = std::stoul(token());
    h = std::stoul(token());
    if (token() != "255") throw ConfigError("PPM must be 8-bit: " + path);
    ++pos; // single whitespace after maxval
    if (pos + h * w * 3 > buf.size()) throw ConfigError("PPM truncated: " + path);
    std::vector<std::uint8_t> out(3 * h * w);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c)
                out[(c * h + y) * w + x] = static_cast<std::uint8_t>(buf[pos + (y * w + x) * 3 + c]);
    return out;
}

namespace {

// LZW stream that re-emits CLEAR often enough to keep all codes at the
// initial width, which keeps the encoder trivial and still valid GIF.
class GifCodeWriter {
public:
    explicit GifCodeWriter(std::string& out) : out_(out) {}

    void put_code(std::uint32_t code, int bits) {
        acc_ |= static_cast<std::uint64_t>(code) << nbits_;
        nbits_ += bits;
        while (nbits_ >= 8) {
            block_.push_back(static_cast<char>(acc_ & 0xff));
            acc_ >>= 8;
            nbits_ -= 8;
            if (block_.size() == 255) flush_block();
        }
    }

    void finish() {
        if (nbits_ > 0) {
            block_.push_back(static_cast<char>(acc_ & 0xff));
            acc_ = 0;
            nbits_ = 0;
        }
        if (!block_.empty()) flush_block();
        out_.push_back('\0'); // block terminator
    }

private:
    void flush_block() {
        out_.push_back(static_cast<char>(block_.size()));
        out_.append(block_);
        block_.clear();
    }

    std::string& out_;
    std::string block_;
    std::uint64_t acc_ = 0;
    int nbits_ = 0;
};

} // namespace

void write_gif(const std::string& path, const std::vector<const std::uint8_t*>& frames_chw,
               std::size_t h, std::size_t w, int delay_cs) {
    if (frames_chw.empty()) throw ConfigError("write_gif: no frames");
    std::string out;
    out += "GIF89a";
    auto put16 = [&](std::uint16_t v) {
        out.push_back(static_cast<char>(v & 0xff));
        out.push_back(static_cast<char>(v >> 8));
    };
    put16(static_cast<std::uint16_t>(w));
    put16(static_cast<std::uint16_t>(h));
    out.push_back(static_cast<char>(0xf7)); // global color table, 256 entries
    out.push_back(0);                       // background
    out.push_back(0);                       // aspect
    // 6-level color cube + gray padding
    for (int r = 0; r < 6; ++r)
        for (int g = 0; g < 6; ++g)
            for (int b = 0; b < 6; ++b) {
                out.push_back(static_cast<char>(r * 51));
                out.push_back(static_cast<char>(g * 51));
                out.push_back(static_cast<char>(b * 51));
            }
    for (int i = 216; i < 256; ++i) {
        const char v = static_cast<char>((i - 216) * 6);
        out.push_back(v);
        out.push_back(v);
        out.push_back(v);
    }
    // loop forever
    out += std::string("\x21\xff\x0bNETSCAPE2.0\x03\x01", 19);
    put16(0);
    out.push_back('\0');

    for (const auto* frame : frames_chw) {
        // graphic control: delay
        out += std::string("\x21\xf9\x04\x00", 4);
        put16(static_cast<std::uint16_t>(delay_cs));
        out.push_back(0);
        out.push_back('\0');
        // image descriptor
        out.push_back(0x2c);
        put16(0);
        put16(0);
        put16(static_cast<std::uint16_t>(w));
        put16(static_cast<std::uint16_t>(h));
        out.push_back(0); // no local table
        out.push_back(8); // LZW min code size
        GifCodeWriter cw(out);
        const std::uint32_t kClear = 256, kEnd = 257;
        cw.put_code(kClear, 9);
        int since_clear = 0;
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const int r = (frame[(0 * h + y) * w + x] * 6) / 256;
                const int g = (frame[(1 * h + y) * w + x] * 6) / 256;
                const int b = (frame[(2 * h + y) * w + x] * 6) / 256;
                cw.put_code(static_cast<std::uint32_t>(36 * r + 6 * g + b), 9);
                if (++since_clear == 254) { // keep code width fixed at 9 bits
                    cw.put_code(kClear, 9);
                    since_clear = 0;
                }
            }
        }
        cw.put_code(kEnd, 9);
        cw.finish();
    }
    out.push_back(0x3b); // trailer
    atomic_write_file(path, out);
}

} // namespace mvg::io
