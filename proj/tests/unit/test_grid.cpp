#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "halfmoll/error.hpp"
#include "halfmoll/grid.hpp"
#include "support.hpp"

namespace hm = halfmoll;

namespace {

hm::ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const hm::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return hm::ErrorKind::io;
}

}  // namespace

TEST(Grid, AxisSpanning) {
  const auto a = hm::Axis::spanning(-1.0, 1.0, 0.25);
  EXPECT_EQ(a.count, 9u);
  EXPECT_DOUBLE_EQ(a.hi(), 1.0);
  EXPECT_EQ(kind_of([] { (void)hm::Axis::spanning(0.0, 1.0, 0.3); }), hm::ErrorKind::invalid_parameter);
  EXPECT_EQ(kind_of([] { (void)hm::Axis::spanning(0.0, 1.0, 0.0); }), hm::ErrorKind::invalid_parameter);
  const auto t = hm::time_axis(0.5, 0.125);
  EXPECT_EQ(t.lo, 0.0);
  EXPECT_EQ(t.count, 5u);
}

TEST(Grid, StripShape) {
  const hm::StripGrid g(3, 0.5, 1.0, 0.125);
  EXPECT_EQ(g.dimension(), 3);
  EXPECT_EQ(g.axis(0).count, 9u);
  EXPECT_EQ(g.normal_axis().count, 9u);
  EXPECT_EQ(g.normal_axis().lo, 0.0);
  EXPECT_TRUE(g.is_half_space());
  EXPECT_EQ(g.node_count(), 729u);
  const hm::StripGrid line(1, 0.0, 1.0, 0.25);
  EXPECT_EQ(line.node_count(), 5u);
  EXPECT_EQ(kind_of([] { (void)hm::StripGrid(2, 0.5, -1.0, 0.1); }), hm::ErrorKind::invalid_parameter);
}

TEST(Grid, LayoutIsTimeSlowest) {
  const hm::StripGrid g(2, 0.5, 0.5, 0.25);
  const auto f = hm::SampledField::sample(g, hm::time_axis(1.0, 0.5), [](std::span<const double> x, double t) {
    return 100.0 * t + 10.0 * x[0] + x[1];
  });
  ASSERT_EQ(f.layout().size(), 3u);
  EXPECT_EQ(f.values().size(), 3u * 5u * 3u);
  const std::vector<std::size_t> idx{2, 1, 2};
  EXPECT_DOUBLE_EQ(f.at(idx), 100.0 + 10.0 * -0.25 + 0.5);
  const auto node = f.spatial_node(7);
  EXPECT_DOUBLE_EQ(node[0], 0.0);
  EXPECT_DOUBLE_EQ(node[1], 0.25);
  EXPECT_EQ(kind_of([&] { (void)f.at(std::vector<std::size_t>{3, 0, 0}); }), hm::ErrorKind::domain);
}

TEST(Grid, InterpolationIsExactForMultilinear) {
  hm::testing::Draw draw;
  const hm::StripGrid g(2, 1.0, 1.0, 0.125);
  auto bilinear = [](std::span<const double> x, double t) {
    return (1.0 + 2.0 * x[0]) * (3.0 - x[1]) * (1.0 + t);
  };
  const auto f = hm::SampledField::sample(g, hm::time_axis(1.0, 0.25), bilinear);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> x{draw.uniform(-1.0, 1.0), draw.uniform(0.0, 1.0)};
    const double t = draw.uniform(0.0, 1.0);
    EXPECT_NEAR(f.interpolate(x, t), bilinear(x, t), 1e-12);
  }
  EXPECT_EQ(kind_of([&] { (void)f.interpolate(std::vector<double>{0.0, 1.5}, 0.0); }), hm::ErrorKind::domain);
}

TEST(Grid, RejectsNonFiniteSamples) {
  const hm::StripGrid g(1, 0.0, 1.0, 0.5);
  EXPECT_THROW(hm::SampledField(g, std::nullopt, {0.0, std::numeric_limits<double>::quiet_NaN(), 1.0}), hm::Error);
  EXPECT_EQ(kind_of([&] { hm::SampledField(g, std::nullopt, {0.0, 1.0}); }), hm::ErrorKind::dimension);
}

TEST(Grid, TrapezoidIntegratesLinearsExactly) {
  const hm::StripGrid g(2, 1.0, 2.0, 0.25);
  const auto f = hm::SampledField::sample(g, std::nullopt,
                                          [](std::span<const double> x, double) { return 1.0 + x[0] + 3.0 * x[1]; });
  // int_{-1}^{1} int_0^2 (1 + x + 3y) = 2*2 + 0 + 2*6
  EXPECT_NEAR(hm::integrate(f), 16.0, 1e-12);
  // Boundary face y = 0: int (1 + x) dx over [-1, 1].
  EXPECT_NEAR(hm::integrate(f, hm::Region::boundary), 2.0, 1e-12);
}

TEST(Grid, LpNorms) {
  const hm::StripGrid g(1, 0.0, 1.0, 1.0 / 1024);
  const auto f = hm::SampledField::sample(g, std::nullopt, [](std::span<const double> x, double) { return -x[0]; });
  EXPECT_NEAR(hm::lp_norm(f, 1.0), 0.5, 1e-6);
  EXPECT_NEAR(hm::lp_norm(f, 2.0), std::sqrt(1.0 / 3.0), 1e-6);
  EXPECT_DOUBLE_EQ(hm::lp_norm(f, std::numeric_limits<double>::infinity()), 1.0);
  EXPECT_THROW((void)hm::lp_norm(f, 0.5), hm::Error);
}

TEST(Grid, HalfValueAtTheBoundary) {
  const hm::StripGrid g(1, 0.0, 1.0, 1.0 / 64);
  const auto one = hm::SampledField::sample(g, std::nullopt, [](std::span<const double>, double) { return 1.0; });
  const std::vector<double> origin{0.0};
  EXPECT_NEAR(hm::convolve_standard(one, 0.1, origin), 0.5, 1e-14);
  EXPECT_NEAR(hm::convolve_half_space(one, hm::HalfSpaceKernel(1, 0.1), origin), 1.0, 1e-14);
  // Away from the floor both see the full kernel.
  const std::vector<double> inside{0.5};
  EXPECT_NEAR(hm::convolve_standard(one, 0.1, inside), 1.0, 1e-14);
}

TEST(Grid, HalfSpaceConvolutionShiftsLinearsByFirstMoment) {
  const double eta = 0.2;
  const hm::StripGrid g(2, 1.0, 1.0, 1.0 / 32);
  const auto ramp = hm::SampledField::sample(g, std::nullopt, [](std::span<const double> x, double) { return x[1]; });
  const std::vector<double> x{0.1, 0.3};
  EXPECT_NEAR(hm::convolve_half_space(ramp, hm::HalfSpaceKernel(2, eta), x), 0.3 + eta * hm::moment(1), 1e-9);
  const std::vector<double> overhang{0.1, 0.9};
  EXPECT_EQ(kind_of([&] { (void)hm::convolve_half_space(ramp, hm::HalfSpaceKernel(2, eta), overhang); }),
            hm::ErrorKind::truncation);
}

TEST(Grid, BoundarySpaceTimeConvolution) {
  const hm::StripGrid g(2, 1.0, 0.5, 0.125);
  const hm::BoundaryGrid face(g, hm::time_axis(1.0, 0.125));
  const auto h = hm::SampledField::sample(face, [](std::span<const double> x, double t) { return x[0] + t; });
  const std::vector<double> at{0.25};
  EXPECT_NEAR(hm::convolve_boundary_spacetime(h, 0.25, at, 0.5), 0.75 + 0.25 * hm::moment(1), 1e-9);
  EXPECT_EQ(kind_of([&] { (void)hm::convolve_boundary_spacetime(h, 0.25, at, 0.9); }), hm::ErrorKind::out_of_horizon);
}

TEST(Grid, TimeAndBoundarySlices) {
  const hm::StripGrid g(2, 0.5, 0.5, 0.25);
  const auto f = hm::SampledField::sample(g, hm::time_axis(0.5, 0.25),
                                          [](std::span<const double> x, double t) { return t + x[0] + 2.0 * x[1]; });
  const auto s = f.time_slice(1);
  EXPECT_FALSE(s.time().has_value());
  EXPECT_DOUBLE_EQ(s.interpolate(std::vector<double>{0.25, 0.5}), 0.25 + 0.25 + 1.0);
  const auto b = f.boundary_slice();
  EXPECT_EQ(b.support(), hm::Support::boundary);
  EXPECT_DOUBLE_EQ(b.interpolate(std::vector<double>{-0.5}, 0.5), 0.0);
  const auto m = f.map([](double v) { return 2.0 * v; });
  EXPECT_DOUBLE_EQ(m.values()[5], 2.0 * f.values()[5]);
}
