#include <gtest/gtest.h>

#include <filesystem>
#include <cstring>
#include <limits>

#include "softpool/errors.hpp"
#include "softpool/io.hpp"
#include "test_util.hpp"

using namespace softpool;
namespace fs = std::filesystem;

namespace {

PointCloud awkward_cloud() {
  return PointCloud({{0.1, -0.0, 1e-300},
                     {std::numeric_limits<double>::max(), std::numeric_limits<double>::denorm_min(), -3.5},
                     {1.0 / 3.0, 2.0 / 7.0, -123456789.123456789}});
}

}  // namespace

TEST(Ply, RoundTripIsBitIdentical) {
  for (const auto& cloud : {awkward_cloud(), test::random_cloud(257, 1, 10.0), PointCloud{}}) {
    const PointCloud back = io::parse_ply(io::format_ply(cloud));
    ASSERT_EQ(back.size(), cloud.size());
    EXPECT_EQ(std::memcmp(back.flat().data(), cloud.flat().data(), cloud.size() * 3 * sizeof(double)), 0);
  }
}

TEST(Ply, TruncatedBodyIsRejected) {
  const std::string bytes = io::format_ply(test::random_cloud(10, 2));
  EXPECT_THROW(io::parse_ply(bytes.substr(0, bytes.size() - 1)), ParseError);
  EXPECT_THROW(io::parse_ply(bytes + "x"), ParseError);
}

TEST(Ply, MalformedHeaderReportsLine) {
  const std::string good = io::format_ply(test::random_cloud(2, 3));
  std::string bad = good;
  bad.replace(bad.find("double y"), 8, "float  y");
  try {
    io::parse_ply(bad);
    FAIL() << "accepted a float property";
  } catch (const ParseError& e) {
    EXPECT_GT(e.line(), 1u);
  }
  EXPECT_THROW(io::parse_ply("plx\n"), ParseError);
  EXPECT_THROW(io::parse_ply("ply\nformat ascii 1.0\nend_header\n"), ParseError);
}

TEST(Xyz, RoundTripIsExact) {
  const auto cloud = awkward_cloud();
  EXPECT_EQ(io::parse_xyz(io::format_xyz(cloud)), cloud);
  const auto random = test::random_cloud(100, 4);
  EXPECT_EQ(io::parse_xyz(io::format_xyz(random)), random);
}

TEST(Xyz, AcceptsCrlfTabsAndBlankLines) {
  const auto cloud = io::parse_xyz("1 2 3\r\n\r\n4\t5   6\r\n");
  ASSERT_EQ(cloud.size(), 2u);
  EXPECT_EQ(cloud[1], (Point3{4, 5, 6}));
  EXPECT_EQ(io::parse_xyz("1 2 3"), PointCloud({{1, 2, 3}}));
}

TEST(Xyz, MalformedRowsReportLine) {
  const std::vector<std::pair<std::string, std::size_t>> cases{
      {"1 2 3\n4 5\n", 2}, {"1 2 3\n\n1 2 3 4\n", 3}, {"a b c\n", 1}, {"1,5 2 3\n", 1}, {"1 2 nan\n", 1}};
  for (const auto& [text, line] : cases) {
    try {
      io::parse_xyz(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << text;
    }
  }
}

TEST(Files, ExtensionDispatchAndErrors) {
  const fs::path dir = fs::temp_directory_path() / "softpool_test_io";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto cloud = test::random_cloud(20, 5);
  for (const char* name : {"c.ply", "c.xyz"}) {
    io::write_point_cloud(dir / name, cloud);
    EXPECT_EQ(io::read_point_cloud(dir / name), cloud);
    EXPECT_FALSE(fs::exists(dir / (std::string(name) + ".tmp")));
  }
  EXPECT_THROW(io::write_point_cloud(dir / "c.obj", cloud), InvalidInput);
  EXPECT_THROW(io::read_point_cloud(dir / "missing.ply"), IoError);
  io::write_file_atomic(dir / "bad.xyz", "1 2 3\n4 5 x\n");
  try {
    io::read_point_cloud(dir / "bad.xyz");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  fs::remove_all(dir);
}
