#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "halfmoll/error.hpp"
#include "halfmoll/kernels.hpp"
#include "halfmoll/stencil.hpp"
#include "support.hpp"

namespace hm = halfmoll;
using hm::StencilRole;

namespace {

double mass(const hm::Stencil1D& s) { return std::accumulate(s.weights.begin(), s.weights.end(), 0.0); }

double first_moment(const hm::Stencil1D& s) {
  double m = 0.0;
  for (std::size_t k = 0; k < s.weights.size(); ++k) m += s.weights[k] * s.offset(k);
  return m;
}

}  // namespace

TEST(Stencil, OffsetsFollowRole) {
  const auto sym = hm::value_stencil(StencilRole::symmetric, 1.0, 0.125);
  EXPECT_EQ(sym.first, -8);
  EXPECT_EQ(sym.last(), 8);
  const auto fwd = hm::value_stencil(StencilRole::forward, 1.0, 0.125);
  EXPECT_EQ(fwd.first, 0);
  EXPECT_EQ(fwd.last(), 8);
  const auto bwd = hm::value_stencil(StencilRole::backward, 1.0, 0.125);
  EXPECT_EQ(bwd.first, -8);
  EXPECT_EQ(bwd.last(), 0);
}

TEST(Stencil, ValueStencilsHaveUnitMass) {
  hm::testing::Draw draw;
  for (int i = 0; i < 50; ++i) {
    const double eta = draw.uniform(0.01, 1.0);
    const int n = draw.integer(2, 80);
    for (auto role : {StencilRole::symmetric, StencilRole::forward, StencilRole::backward}) {
      const auto s = hm::value_stencil(role, eta, eta / n);
      EXPECT_NEAR(mass(s), 1.0, 1e-14);
      for (double w : s.weights) EXPECT_GE(w, 0.0);
    }
  }
}

TEST(Stencil, BackwardMirrorsForwardBitwise) {
  for (int n : {3, 5, 16, 64}) {
    const auto fwd = hm::value_stencil(StencilRole::forward, 0.3, 0.3 / n);
    const auto bwd = hm::value_stencil(StencilRole::backward, 0.3, 0.3 / n);
    ASSERT_EQ(fwd.weights.size(), bwd.weights.size());
    for (std::size_t k = 0; k < fwd.weights.size(); ++k)
      EXPECT_EQ(fwd.weights[k], bwd.weights[bwd.weights.size() - 1 - k]);
    const auto dfwd = hm::derivative_stencil(StencilRole::forward, 0.3, 0.3 / n);
    const auto dbwd = hm::derivative_stencil(StencilRole::backward, 0.3, 0.3 / n);
    for (std::size_t k = 0; k < dfwd.weights.size(); ++k)
      EXPECT_EQ(dfwd.weights[k], -dbwd.weights[dbwd.weights.size() - 1 - k]);
  }
}

TEST(Stencil, DerivativeStencilDifferentiatesLinears) {
  for (auto role : {StencilRole::symmetric, StencilRole::forward, StencilRole::backward}) {
    const auto d = hm::derivative_stencil(role, 0.2, 0.2 / 32);
    EXPECT_NEAR(first_moment(d), 1.0, 1e-14);
    EXPECT_NEAR(mass(d), 0.0, 1e-12);
  }
}

TEST(Stencil, ForwardFirstMomentApproachesContinuum) {
  const double eta = 0.4;
  const auto s = hm::value_stencil(StencilRole::forward, eta, eta / 64);
  EXPECT_NEAR(first_moment(s), eta * hm::moment(1), 1e-12);
  double second = 0.0;
  for (std::size_t k = 0; k < s.weights.size(); ++k) second += s.weights[k] * s.offset(k) * s.offset(k);
  EXPECT_NEAR(second, eta * eta * hm::moment(2), 1e-8);
}

TEST(Stencil, UnderResolvedKernelIsRejected) {
  try {
    (void)hm::value_stencil(StencilRole::forward, 0.1, 0.06);
    FAIL() << "expected under_resolved";
  } catch (const hm::Error& e) {
    EXPECT_EQ(e.kind(), hm::ErrorKind::under_resolved);
  }
}

TEST(Stencil, TensorQuadratureIntegratesProducts) {
  const auto sx = hm::value_stencil(StencilRole::symmetric, 0.2, 0.01);
  const auto sy = hm::value_stencil(StencilRole::forward, 0.2, 0.01);
  const std::vector<const hm::Stencil1D*> st{&sx, &sy};
  const std::vector<double> centre{0.3, 0.1};
  // Symmetric stencil is exact on odd parts, so a linear in x averages to its centre value.
  const double v = hm::tensor_quadrature(st, centre, [](std::span<const double> p) { return 2.0 * p[0] + 1.0; });
  EXPECT_NEAR(v, 1.6, 1e-14);
  const double w = hm::tensor_quadrature(st, centre, [](std::span<const double> p) { return p[1]; });
  EXPECT_NEAR(w, 0.1 + first_moment(sy), 1e-14);
}

TEST(Stencil, RefineAxisIsExactForLinears) {
  hm::DenseArray a({3, 5});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 5; ++j) a.data[i * 5 + j] = 2.0 * i - 3.0 * j;
  const auto r = hm::refine_axis(a, 1, 4);
  ASSERT_EQ(r.shape, (std::vector<std::size_t>{3, 17}));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 17; ++j) EXPECT_NEAR(r.data[i * 17 + j], 2.0 * i - 3.0 * (j / 4.0), 1e-13);
}

TEST(Stencil, ConvolveAxisMatchesDirectSum) {
  hm::testing::Draw draw(11);
  hm::DenseArray a({4, 40});
  for (double& v : a.data) v = draw.uniform(-1.0, 1.0);
  const auto s = hm::value_stencil(StencilRole::forward, 0.5, 0.1);
  const auto out = hm::convolve_axis(a, 1, s, 2, 3, 10);
  for (std::size_t row = 0; row < 4; ++row) {
    for (std::size_t j = 0; j < 10; ++j) {
      double expect = 0.0;
      for (std::size_t k = 0; k < s.weights.size(); ++k)
        expect += s.weights[k] * a.data[row * 40 + 2 + 3 * j + static_cast<std::size_t>(s.first) + k];
      EXPECT_NEAR(out.data[row * 10 + j], expect, 1e-14);
    }
  }
  EXPECT_THROW((void)hm::convolve_axis(a, 1, s, 2, 3, 20), hm::Error);
}
