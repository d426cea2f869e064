#include "glossmap/envmap.hpp"
#include "glossmap/error.hpp"
#include "glossmap/synthetic.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

using namespace glossmap;
using namespace glossmap::envmap;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream(p, std::ios::binary) << bytes;
}

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

IoErrorCode load_error(const std::filesystem::path& p) {
    try {
        load(p);
    } catch (const IoError& e) {
        return e.code();
    }
    FAIL("load did not throw");
    return IoErrorCode::open_failed;
}

std::string flat_rgbe(const char* yflag, int w, int h, const std::string& pixels, const std::string& extra = "") {
    return "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n" + extra + "\n" + yflag + " " + std::to_string(h) + " +X " +
           std::to_string(w) + "\n" + pixels;
}

std::string pixel(int r, int g, int b, int e) {
    return {static_cast<char>(r), static_cast<char>(g), static_cast<char>(b), static_cast<char>(e)};
}

std::string be_float(float v) {
    unsigned char b[4];
    std::memcpy(b, &v, 4);
    return {static_cast<char>(b[3]), static_cast<char>(b[2]), static_cast<char>(b[1]), static_cast<char>(b[0])};
}

}  // namespace

TEST_CASE("RGBE round trip stays within the mantissa precision") {
    testing::TempDir dir("rgbe");
    const EquirectMap m = synthetic::noise(128, 21, 0.0, 50.0);
    save(m, dir / "m.hdr");
    const EquirectMap back = load(dir / "m.hdr");
    REQUIRE(back.width() == 128);
    for (int r = 0; r < m.height(); ++r)
        for (int c = 0; c < m.width(); ++c) {
            const auto a = m.rgb(r, c);
            const auto b = back.rgb(r, c);
            const double peak = std::max({a[0], a[1], a[2]});
            for (int ch = 0; ch < 3; ++ch) CHECK(std::abs(a[ch] - b[ch]) <= 0.01 * peak);
        }
}

TEST_CASE("RGBE round trip of narrow maps uses flat scanlines") {
    testing::TempDir dir("rgbe_narrow");
    const EquirectMap m = synthetic::noise(4, 3, 0.5, 2.0);
    save(m, dir / "m.hdr");
    const EquirectMap back = load(dir / "m.hdr");
    for (std::size_t i = 0; i < m.data().size(); ++i) CHECK(back.data()[i] == doctest::Approx(m.data()[i]).epsilon(0.01));
}

TEST_CASE("hand-built flat RGBE decodes texel centers and row order") {
    testing::TempDir dir("rgbe_hand");
    // Mantissa 128 with exponent 129 decodes to 128.5 / 128.
    std::string px;
    px += pixel(128, 64, 0, 129) + pixel(0, 0, 0, 0) + pixel(0, 0, 0, 0) + pixel(0, 0, 0, 0);
    px += pixel(128, 128, 128, 130) + pixel(0, 0, 0, 0) + pixel(0, 0, 0, 0) + pixel(0, 0, 0, 0);
    write_bytes(dir / "top.hdr", flat_rgbe("-Y", 4, 2, px));
    const EquirectMap top = load(dir / "top.hdr");
    CHECK(top.at(0, 0, 0) == doctest::Approx(128.5 / 128.0));
    CHECK(top.at(0, 0, 1) == doctest::Approx(64.5 / 128.0));
    CHECK(top.at(0, 1, 0) == 0.0);
    CHECK(top.at(1, 0, 0) == doctest::Approx(128.5 / 64.0));

    write_bytes(dir / "bottom.hdr", flat_rgbe("+Y", 4, 2, px));
    CHECK(load(dir / "bottom.hdr").at(1, 0, 0) == doctest::Approx(128.5 / 128.0));

    write_bytes(dir / "exposed.hdr", flat_rgbe("-Y", 4, 2, px, "EXPOSURE=2\n"));
    CHECK(load(dir / "exposed.hdr").at(0, 0, 0) == doctest::Approx(128.5 / 256.0));
}

TEST_CASE("PFM round trip is exact to float precision") {
    testing::TempDir dir("pfm");
    const EquirectMap m = synthetic::noise(64, 4, 0.0, 1000.0);
    save(m, dir / "m.pfm");
    const EquirectMap back = load(dir / "m.pfm");
    for (std::size_t i = 0; i < m.data().size(); ++i)
        CHECK(back.data()[i] == doctest::Approx(static_cast<float>(m.data()[i])).epsilon(1e-7));
}

TEST_CASE("big-endian and grayscale PFM are read") {
    testing::TempDir dir("pfm_be");
    std::string body;
    // Bottom row first: row 1 then row 0.
    for (float v : {1.f, 2.f, 3.f, 4.f, 5.f, 6.f, 7.f, 8.f}) body += be_float(v);
    write_bytes(dir / "g.pfm", "Pf\n4 2\n1.0\n" + body);
    const EquirectMap g = load(dir / "g.pfm");
    CHECK(g.at(1, 0, 0) == 1.0);
    CHECK(g.at(0, 0, 2) == 5.0);
    CHECK(g.at(0, 3, 1) == 8.0);
}

TEST_CASE("saving clamps negative radiance") {
    testing::TempDir dir("neg");
    EquirectMap m = EquirectMap::constant(8, 4, 1.0);
    m.at(0, 0, 0) = -3.0;
    save(m, dir / "n.pfm");
    CHECK(load(dir / "n.pfm").at(0, 0, 0) == 0.0);
}

TEST_CASE("container errors are typed") {
    testing::TempDir dir("errors");
    const EquirectMap m = synthetic::noise(32, 1);
    save(m, dir / "ok.hdr");
    const std::string full = read_bytes(dir / "ok.hdr");

    write_bytes(dir / "truncated.hdr", full.substr(0, full.size() - 40));
    CHECK(load_error(dir / "truncated.hdr") == IoErrorCode::corrupt_data);

    write_bytes(dir / "aspect.hdr", flat_rgbe("-Y", 3, 2, std::string(24, '\0')));
    CHECK(load_error(dir / "aspect.hdr") == IoErrorCode::bad_aspect);

    write_bytes(dir / "xyz.hdr", "#?RADIANCE\nFORMAT=32-bit_rle_xyze\n\n-Y 2 +X 4\n");
    CHECK(load_error(dir / "xyz.hdr") == IoErrorCode::unknown_container);

    write_bytes(dir / "png.hdr", "\x89PNG\r\n\x1a\n");
    CHECK(load_error(dir / "png.hdr") == IoErrorCode::unknown_container);

    write_bytes(dir / "empty.hdr", "");
    CHECK(load_error(dir / "empty.hdr") == IoErrorCode::corrupt_header);

    write_bytes(dir / "noterm.hdr", "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n");
    CHECK(load_error(dir / "noterm.hdr") == IoErrorCode::corrupt_header);

    write_bytes(dir / "badexp.hdr", flat_rgbe("-Y", 4, 2, std::string(32, '\0'), "EXPOSURE=abc\n"));
    CHECK(load_error(dir / "badexp.hdr") == IoErrorCode::corrupt_header);

    write_bytes(dir / "short.pfm", "PF\n4 2\n-1.0\n" + std::string(10, '\0'));
    CHECK(load_error(dir / "short.pfm") == IoErrorCode::corrupt_data);

    write_bytes(dir / "aspect.pfm", "PF\n4 4\n-1.0\n" + std::string(4 * 4 * 12, '\0'));
    CHECK(load_error(dir / "aspect.pfm") == IoErrorCode::bad_aspect);

    CHECK(load_error(dir / "missing.hdr") == IoErrorCode::open_failed);
    CHECK_THROWS_AS(save(m, dir / "m.exr"), IoError);
}
