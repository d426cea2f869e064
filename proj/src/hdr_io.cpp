// Radiance RGBE (.hdr) and portable float map (.pfm) containers.

#include "glossmap/envmap.hpp"
#include "glossmap/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

namespace glossmap::envmap {

namespace {

using Bytes = std::vector<std::uint8_t>;

Bytes read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoErrorCode::open_failed, "cannot open " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_all(const std::filesystem::path& path, const Bytes& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(IoErrorCode::open_failed, "cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(IoErrorCode::write_failed, "write failed for " + path.string());
}

void append(Bytes& out, const std::string& s) { out.insert(out.end(), s.begin(), s.end()); }

class Cursor {
public:
    explicit Cursor(const Bytes& bytes) : bytes_(bytes) {}

    bool done() const { return pos_ >= bytes_.size(); }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    /// Line without the trailing newline; false when the buffer ends first.
    bool line(std::string& out) {
        out.clear();
        while (pos_ < bytes_.size()) {
            const char c = static_cast<char>(bytes_[pos_++]);
            if (c == '\n') return true;
            out.push_back(c);
        }
        return false;
    }

    std::uint8_t byte() { return bytes_[pos_++]; }
    const std::uint8_t* here() const { return bytes_.data() + pos_; }
    void skip(std::size_t n) { pos_ += n; }

private:
    const Bytes& bytes_;
    std::size_t pos_ = 0;
};

// -- RGBE ------------------------------------------------------------------

std::array<std::uint8_t, 4> encode_rgbe(double r, double g, double b) {
    r = std::max(r, 0.0);
    g = std::max(g, 0.0);
    b = std::max(b, 0.0);
    const double v = std::max({r, g, b});
    if (v < 1e-32) return {0, 0, 0, 0};
    int e = 0;
    const double mantissa = std::frexp(v, &e);
    const double scale = mantissa * 256.0 / v;
    auto q = [&](double c) { return static_cast<std::uint8_t>(std::min(255.0, c * scale)); };
    return {q(r), q(g), q(b), static_cast<std::uint8_t>(e + 128)};
}

Rgb decode_rgbe(const std::uint8_t* p) {
    if (p[3] == 0) return {0.0, 0.0, 0.0};
    const double f = std::ldexp(1.0, static_cast<int>(p[3]) - (128 + 8));
    return {(p[0] + 0.5) * f, (p[1] + 0.5) * f, (p[2] + 0.5) * f};
}

void read_rgbe_scanline(Cursor& cur, int width, std::vector<std::uint8_t>& scan) {
    auto corrupt = [] { throw IoError(IoErrorCode::corrupt_data, "RGBE pixel data truncated or malformed"); };
    scan.assign(static_cast<std::size_t>(width) * 4, 0);
    if (cur.remaining() < 4) corrupt();
    const std::uint8_t* head = cur.here();
    const bool rle = width >= 8 && width < 32768 && head[0] == 2 && head[1] == 2 && (head[2] & 0x80) == 0;
    if (!rle) {
        if (cur.remaining() < scan.size()) corrupt();
        std::memcpy(scan.data(), cur.here(), scan.size());
        cur.skip(scan.size());
        return;
    }
    if (((head[2] << 8) | head[3]) != width) corrupt();
    cur.skip(4);
    // New-style RLE stores each of the four components as its own run-length stream.
    for (int comp = 0; comp < 4; ++comp) {
        int x = 0;
        while (x < width) {
            if (cur.done()) corrupt();
            int count = cur.byte();
            if (count > 128) {
                count -= 128;
                if (count == 0 || x + count > width || cur.done()) corrupt();
                const std::uint8_t value = cur.byte();
                for (int i = 0; i < count; ++i) scan[static_cast<std::size_t>(x++) * 4 + comp] = value;
            } else {
                if (count == 0 || x + count > width || cur.remaining() < static_cast<std::size_t>(count)) corrupt();
                for (int i = 0; i < count; ++i) scan[static_cast<std::size_t>(x++) * 4 + comp] = cur.byte();
            }
        }
    }
}

EquirectMap load_rgbe(const Bytes& bytes) {
    Cursor cur(bytes);
    std::string line;
    auto corrupt = [](const std::string& why) { throw IoError(IoErrorCode::corrupt_header, "RGBE header: " + why); };

    if (!cur.line(line) || line.rfind("#?", 0) != 0) corrupt("missing #? signature");
    double exposure = 1.0;
    bool blank = false;
    while (cur.line(line)) {
        if (line.empty()) {
            blank = true;
            break;
        }
        if (line.rfind("FORMAT=", 0) == 0) {
            if (line != "FORMAT=32-bit_rle_rgbe")
                throw IoError(IoErrorCode::unknown_container, "unsupported RGBE pixel format " + line);
        } else if (line.rfind("EXPOSURE=", 0) == 0) {
            double value = 0.0;
            if (!(std::istringstream(line.substr(9)) >> value)) corrupt("bad EXPOSURE line");
            exposure *= value;
        }
    }
    if (!blank) corrupt("header not terminated");
    if (!cur.line(line)) corrupt("missing resolution line");

    std::istringstream res(line);
    std::string ytag, xtag;
    int height = 0, width = 0;
    if (!(res >> ytag >> height >> xtag >> width) || (ytag != "-Y" && ytag != "+Y") || xtag != "+X" ||
        height <= 0 || width <= 0)
        corrupt("unsupported resolution line '" + line + "'");
    if (width != 2 * height)
        throw IoError(IoErrorCode::bad_aspect, "map is " + std::to_string(width) + "x" +
                                                   std::to_string(height) + ", expected 2:1");
    if (!(exposure > 0.0)) corrupt("non-positive EXPOSURE");

    std::vector<double> rgb(static_cast<std::size_t>(width) * height * 3);
    std::vector<std::uint8_t> scan;
    for (int y = 0; y < height; ++y) {
        read_rgbe_scanline(cur, width, scan);
        const int row = ytag == "-Y" ? y : height - 1 - y;
        for (int x = 0; x < width; ++x) {
            const Rgb c = decode_rgbe(&scan[static_cast<std::size_t>(x) * 4]);
            for (int ch = 0; ch < 3; ++ch)
                rgb[(static_cast<std::size_t>(row) * width + x) * 3 + ch] = c[ch] / exposure;
        }
    }
    return EquirectMap(width, height, std::move(rgb));
}

void write_rle_component(Bytes& out, const std::vector<std::uint8_t>& data) {
    const std::size_t n = data.size();
    std::size_t i = 0;
    while (i < n) {
        // Find the next run of at least 4 identical bytes.
        std::size_t run_start = i;
        std::size_t run_len = 0;
        while (run_start < n) {
            run_len = 1;
            while (run_start + run_len < n && run_len < 127 && data[run_start + run_len] == data[run_start]) ++run_len;
            if (run_len >= 4) break;
            run_start += run_len;
        }
        if (run_start >= n) run_len = 0;
        // Literal bytes before the run.
        while (i < run_start) {
            const std::size_t count = std::min<std::size_t>(128, run_start - i);
            out.push_back(static_cast<std::uint8_t>(count));
            out.insert(out.end(), data.begin() + static_cast<std::ptrdiff_t>(i),
                       data.begin() + static_cast<std::ptrdiff_t>(i + count));
            i += count;
        }
        if (run_len >= 4) {
            out.push_back(static_cast<std::uint8_t>(128 + run_len));
            out.push_back(data[run_start]);
            i = run_start + run_len;
        }
    }
}

Bytes encode_rgbe_file(const EquirectMap& map) {
    Bytes out;
    append(out, "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n");
    append(out, "-Y " + std::to_string(map.height()) + " +X " + std::to_string(map.width()) + "\n");
    const int w = map.width();
    const bool rle = w >= 8 && w < 32768;
    std::array<std::vector<std::uint8_t>, 4> comps;
    for (auto& c : comps) c.resize(w);
    for (int r = 0; r < map.height(); ++r) {
        for (int c = 0; c < w; ++c) {
            const auto px = encode_rgbe(map.at(r, c, 0), map.at(r, c, 1), map.at(r, c, 2));
            if (rle) {
                for (int k = 0; k < 4; ++k) comps[k][c] = px[k];
            } else {
                out.insert(out.end(), px.begin(), px.end());
            }
        }
        if (!rle) continue;
        out.push_back(2);
        out.push_back(2);
        out.push_back(static_cast<std::uint8_t>(w >> 8));
        out.push_back(static_cast<std::uint8_t>(w & 0xff));
        for (const auto& comp : comps) write_rle_component(out, comp);
    }
    return out;
}

// -- PFM -------------------------------------------------------------------

float to_host(float v, bool little) {
    if ((std::endian::native == std::endian::little) == little) return v;
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    u = (u >> 24) | ((u >> 8) & 0xff00) | ((u << 8) & 0xff0000) | (u << 24);
    std::memcpy(&v, &u, 4);
    return v;
}

EquirectMap load_pfm(const Bytes& bytes) {
    Cursor cur(bytes);
    std::string magic, dims, scale_line;
    auto corrupt = [](const std::string& why) { throw IoError(IoErrorCode::corrupt_header, "PFM header: " + why); };
    if (!cur.line(magic) || (magic != "PF" && magic != "Pf")) corrupt("bad magic");
    if (!cur.line(dims) || !cur.line(scale_line)) corrupt("truncated");
    int width = 0, height = 0;
    double scale = 0.0;
    if (!(std::istringstream(dims) >> width >> height) || width <= 0 || height <= 0) corrupt("bad dimensions");
    if (!(std::istringstream(scale_line) >> scale) || scale == 0.0) corrupt("bad scale");
    if (width != 2 * height)
        throw IoError(IoErrorCode::bad_aspect, "map is " + std::to_string(width) + "x" +
                                                   std::to_string(height) + ", expected 2:1");
    const int channels = magic == "PF" ? 3 : 1;
    const bool little = scale < 0.0;
    const std::size_t count = static_cast<std::size_t>(width) * height * channels;
    if (cur.remaining() < count * 4) throw IoError(IoErrorCode::corrupt_data, "PFM pixel data truncated");

    std::vector<double> rgb(static_cast<std::size_t>(width) * height * 3);
    const std::uint8_t* src = cur.here();
    for (int y = 0; y < height; ++y) {
        const int row = height - 1 - y;  // PFM stores the bottom row first
        for (int x = 0; x < width; ++x)
            for (int ch = 0; ch < 3; ++ch) {
                float v;
                const std::size_t idx = (static_cast<std::size_t>(y) * width + x) * channels + (channels == 3 ? ch : 0);
                std::memcpy(&v, src + idx * 4, 4);
                rgb[(static_cast<std::size_t>(row) * width + x) * 3 + ch] = to_host(v, little);
            }
    }
    return EquirectMap(width, height, std::move(rgb));
}

Bytes encode_pfm_file(const EquirectMap& map) {
    Bytes out;
    append(out, "PF\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n-1.0\n");
    for (int y = map.height() - 1; y >= 0; --y)
        for (int x = 0; x < map.width(); ++x)
            for (int ch = 0; ch < 3; ++ch) {
                const float v = to_host(static_cast<float>(std::max(map.at(y, x, ch), 0.0)), true);
                std::uint8_t b[4];
                std::memcpy(b, &v, 4);
                out.insert(out.end(), b, b + 4);
            }
    return out;
}

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

}  // namespace

EquirectMap load(const std::filesystem::path& path) {
    const Bytes bytes = read_all(path);
    if (bytes.size() >= 2 && bytes[0] == '#' && bytes[1] == '?') return load_rgbe(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == 'F' || bytes[1] == 'f')) return load_pfm(bytes);
    if (bytes.size() < 2) throw IoError(IoErrorCode::corrupt_header, path.string() + " is too short to identify");
    throw IoError(IoErrorCode::unknown_container, path.string() + " is neither Radiance RGBE nor PFM");
}

void save(const EquirectMap& map, const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".hdr" || ext == ".pic" || ext == ".rgbe") return save(map, path, Container::rgbe);
    if (ext == ".pfm") return save(map, path, Container::pfm);
    throw IoError(IoErrorCode::unknown_container, "cannot infer HDR container from extension '" + ext + "'");
}

void save(const EquirectMap& map, const std::filesystem::path& path, Container container) {
    if (map.empty()) throw DomainError("cannot save an empty map");
    write_all(path, container == Container::rgbe ? encode_rgbe_file(map) : encode_pfm_file(map));
}

}  // namespace glossmap::envmap
