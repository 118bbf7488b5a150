#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "halfmoll/error.hpp"
#include "halfmoll/serialize.hpp"

namespace hm = halfmoll;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "halfmoll_unit";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Serialize, BinaryRoundTripIsBitwise) {
  const hm::StripGrid g(2, 0.5, 0.5, 0.125);
  const auto f = hm::SampledField::sample(g, hm::time_axis(0.25, 0.125), [](std::span<const double> x, double t) {
    return std::sin(3.0 * x[0]) * std::exp(x[1]) + t / 3.0;
  });
  const auto path = scratch("roundtrip.hmf");
  hm::write_binary(f, path);
  const auto back = hm::read_binary(path);
  EXPECT_EQ(back.grid(), f.grid());
  ASSERT_TRUE(back.time().has_value());
  EXPECT_EQ(*back.time(), *f.time());
  ASSERT_EQ(back.values().size(), f.values().size());
  for (std::size_t i = 0; i < f.values().size(); ++i) EXPECT_EQ(back.values()[i], f.values()[i]);
}

TEST(Serialize, BoundaryFieldRoundTrip) {
  const hm::StripGrid g(2, 0.5, 0.5, 0.25);
  const hm::BoundaryGrid face(g, hm::time_axis(0.5, 0.25));
  const auto h = hm::SampledField::sample(face, [](std::span<const double> x, double t) { return x[0] - t; });
  const auto path = scratch("boundary.hmf");
  hm::write_binary(h, path);
  const auto back = hm::read_binary(path);
  EXPECT_EQ(back.support(), hm::Support::boundary);
  EXPECT_EQ(back.values().size(), h.values().size());
}

TEST(Serialize, HeaderNamesExtents) {
  const hm::StripGrid g(1, 0.0, 1.0, 0.5);
  const auto f = hm::SampledField::sample(g, std::nullopt, [](std::span<const double> x, double) { return x[0]; });
  const std::string header = hm::field_header_json(f);
  EXPECT_NE(header.find("\"extents\""), std::string::npos);
  EXPECT_NE(header.find("\"spacing\":0.5"), std::string::npos);
  EXPECT_NE(header.find("\"time\":null"), std::string::npos);
}

TEST(Serialize, RejectsForeignFiles) {
  const auto path = scratch("garbage.hmf");
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a field";
  }
  try {
    (void)hm::read_binary(path);
    FAIL() << "expected io error";
  } catch (const hm::Error& e) {
    EXPECT_EQ(e.kind(), hm::ErrorKind::io);
  }
  EXPECT_THROW((void)hm::read_binary(scratch("missing.hmf")), hm::Error);
}

TEST(Serialize, CsvHasOneRowPerNode) {
  const hm::StripGrid g(1, 0.0, 1.0, 0.25);
  const auto f = hm::SampledField::sample(g, hm::time_axis(0.5, 0.25),
                                          [](std::span<const double> x, double t) { return x[0] + t; });
  const auto path = scratch("field.csv");
  hm::write_csv(f, path);
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++rows;
  EXPECT_EQ(rows, 15 + 1);  // header row plus 3 x 5 nodes
}
