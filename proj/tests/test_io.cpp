#include <gtest/gtest.h>

#include <filesystem>

#include "sasc/io.hpp"
#include "support/fixtures.hpp"

namespace {

using namespace sasc;

TEST(FloatFormat, HeaderLayoutIsBitExact)
{
    Image img(2, 3);
    img(0, 0) = 1.0;
    const auto bytes = io::encode_float(img);
    ASSERT_EQ(bytes.size(), 8u + 4 + 4 + 6 * 4);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "SASCF32\n");
    EXPECT_EQ(bytes[8], 2);  // height, little endian
    EXPECT_EQ(bytes[12], 3); // width
    // 1.0f = 0x3f800000 little endian
    EXPECT_EQ(bytes[16], 0x00);
    EXPECT_EQ(bytes[19], 0x3f);
    EXPECT_EQ(bytes[18], 0x80);
}

TEST(FloatFormat, RoundTripOfFloatRepresentableValuesIsExact)
{
    Image img = test::random_image(7, 5, 11);
    for (auto& v : img.pixels()) v = static_cast<float>(v);
    EXPECT_EQ(io::decode_float(io::encode_float(img)), img);
}

TEST(FloatFormat, TruncatedAndBadMagicAreErrors)
{
    auto bytes = io::encode_float(test::random_image(4, 4, 12));
    bytes.pop_back();
    EXPECT_THROW(io::decode_float(bytes), error);
    bytes[0] = 'X';
    EXPECT_THROW(io::decode_float(bytes), error);
}

TEST(Pgm, RoundTripQuantizesToEightBits)
{
    Image img(3, 4);
    for (int i = 0; i < 12; ++i) img.pixels()[static_cast<std::size_t>(i)] = i * 20 / 255.0;
    const auto bytes = io::encode_pgm(img);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 11), "P5\n4 3\n255\n");
    const Image back = io::decode_pgm(bytes);
    for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(back.pixels()[i], img.pixels()[i], 1e-12);
}

TEST(Pgm, ClampsOutOfRangeValues)
{
    Image img(1, 2);
    img(0, 0) = -0.3;
    img(0, 1) = 1.7;
    const Image back = io::decode_pgm(io::encode_pgm(img));
    EXPECT_EQ(back(0, 0), 0.0);
    EXPECT_EQ(back(0, 1), 1.0);
}

TEST(Pgm, AcceptsHeaderComments)
{
    const std::string s = "P5\n# made by hand\n2 1\n255\n";
    binary::Bytes b(s.begin(), s.end());
    b.push_back(0);
    b.push_back(255);
    const Image img = io::decode_pgm(b);
    EXPECT_EQ(img.width(), 2);
    EXPECT_EQ(img(0, 1), 1.0);
}

TEST(Pgm, RejectsOtherMaxvalAndAsciiFormat)
{
    const std::string ascii = "P2\n1 1\n255\n0\n";
    EXPECT_THROW(io::decode_pgm(binary::Bytes(ascii.begin(), ascii.end())), error);
    const std::string deep = "P5\n1 1\n65535\n";
    EXPECT_THROW(io::decode_pgm(binary::Bytes(deep.begin(), deep.end())), error);
}

TEST(ImageFiles, ExtensionSelectsFormatAndReaderSniffsContent)
{
    const auto dir = std::filesystem::temp_directory_path();
    const Image img = test::random_image(5, 6, 13);
    const auto pgm = (dir / "sasc_io_test.pgm").string();
    const auto raw = (dir / "sasc_io_test.f32").string();
    io::write_image(pgm, img);
    io::write_image(raw, img);
    EXPECT_EQ(binary::read_file(pgm)[0], 'P');
    EXPECT_EQ(binary::read_file(raw)[0], 'S');
    EXPECT_EQ(io::read_image(raw).width(), 6);
    EXPECT_EQ(io::read_image(pgm).height(), 5);
    std::filesystem::remove(pgm);
    std::filesystem::remove(raw);
}

TEST(Fixtures, CameramanLoads)
{
    const Image img = test::cameraman();
    EXPECT_EQ(img.height(), 128);
    EXPECT_EQ(img.width(), 128);
}

} // namespace
