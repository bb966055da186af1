#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "miss/mask_io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace miss;

namespace {

std::vector<std::uint8_t> pgm_bytes(const std::string& header, const std::vector<std::uint8_t>& pixels) {
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("miss_mask_io_" + name); }

}  // namespace

TEST(MaskIo, CenterPixelPgm) {
  std::vector<std::uint8_t> px(9, 0);
  px[4] = 255;
  const auto m = decode_mask(pgm_bytes("P5\n3 3\n255\n", px), 0);
  EXPECT_EQ(m.count(), 1u);
  EXPECT_TRUE(m.at(1, 1));
}

TEST(MaskIo, AllZeroImageLoadsAsEmptyMask) {
  const auto m = decode_mask(pgm_bytes("P5\n5 5\n255\n", std::vector<std::uint8_t>(25, 0)), 0);
  EXPECT_EQ(m.width(), 5);
  EXPECT_EQ(m.count(), 0u);
  EXPECT_THROW(extract_contour(m), Error);
}

TEST(MaskIo, RampThreshold) {
  std::vector<std::uint8_t> px(256);
  for (int i = 0; i < 256; ++i) px[i] = static_cast<std::uint8_t>(i);
  const auto m = decode_mask(pgm_bytes("P5\n256 1\n255\n", px), 127);
  EXPECT_EQ(m.count(), 128u);
  EXPECT_FALSE(m.at(127, 0));
  EXPECT_TRUE(m.at(128, 0));
}

TEST(MaskIo, PgmHeaderComments) {
  const auto m = decode_mask(pgm_bytes("P5\n# made by hand\n2 1 # size\n255\n", {0, 9}), 0);
  EXPECT_EQ(m.count(), 1u);
  EXPECT_TRUE(m.at(1, 0));
}

TEST(MaskIo, RejectsUnknownFormat) {
  const std::string text = "not an image";
  try {
    decode_mask({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unsupported_format);
  }
}

TEST(MaskIo, RejectsTruncatedPgm) {
  EXPECT_THROW(decode_mask(pgm_bytes("P5\n4 4\n255\n", {1, 2, 3})), Error);
}

TEST(MaskIo, RejectsSixteenBitPgm) {
  EXPECT_THROW(decode_mask(pgm_bytes("P5\n1 1\n65535\n", {0, 0})), Error);
}

TEST(MaskIo, RoundTripBothFormats) {
  SeededRng rng(7);
  const auto m = fixtures::random_ellipse(rng, 37, 23);
  for (auto fmt : {MaskFormat::pgm, MaskFormat::png}) {
    const auto bytes = encode_mask(m, fmt);
    EXPECT_EQ(detect_format(bytes), fmt);
    EXPECT_EQ(decode_mask(bytes), m);
  }
}

TEST(MaskIo, FileRoundTrip) {
  const auto m = fixtures::rect_mask(8, 6, 1, 1, 6, 4);
  for (auto fmt : {MaskFormat::pgm, MaskFormat::png}) {
    const auto path = temp_path(std::string("rect") + extension(fmt));
    save_mask(path, m, fmt);
    EXPECT_EQ(load_mask(path), m);
    fs::remove(path);
  }
}

TEST(MaskIo, MissingFileIsIoError) {
  try {
    load_mask(temp_path("does_not_exist.pgm"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
}

TEST(MaskIo, ContourTextRoundTrip) {
  Contour c{{{1.5, 2.0}, {-3.25, 4.0}, {0.1, 0.2}}};
  const auto back = parse_contour(format_contour(c));
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(back.points[i], c.points[i]);
}
