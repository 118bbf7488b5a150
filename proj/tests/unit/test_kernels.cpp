#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <vector>

#include "halfmoll/error.hpp"
#include "halfmoll/kernels.hpp"
#include "support.hpp"

namespace hm = halfmoll;
using boost::math::quadrature::tanh_sinh;

namespace {

// Raw profiles written out again here so the normalizations are checked
// against a different quadrature than the library uses.
double raw_symmetric(double x) {
  const double q = 1.0 - x * x;
  return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}
double raw_one_sided(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double s = 4.0 * (x - 0.5) * (x - 0.5) - 1.0;
  return s < 0.0 ? std::exp(1.0 / s) : 0.0;
}

}  // namespace

TEST(Kernels, FrozenNormalizations) {
  EXPECT_NEAR(hm::symmetric_normalization(), 2.2522836210435817, 1e-13);
  EXPECT_NEAR(hm::one_sided_normalization(), 4.504567242087163, 1e-13);
  // The one-sided bump is the symmetric one squeezed onto (0, 1).
  EXPECT_NEAR(hm::one_sided_normalization(), 2.0 * hm::symmetric_normalization(), 1e-13);
}

TEST(Kernels, NormalizationsAgreeWithTanhSinh) {
  tanh_sinh<double> ts;
  const double sym = ts.integrate(raw_symmetric, -1.0, 1.0);
  const double one = ts.integrate(raw_one_sided, 0.0, 1.0);
  EXPECT_NEAR(1.0 / sym, hm::symmetric_normalization(), 1e-12);
  EXPECT_NEAR(1.0 / one, hm::one_sided_normalization(), 1e-12);
}

TEST(Kernels, FrozenMoments) {
  EXPECT_NEAR(hm::moment(0), 1.0, 1e-13);
  EXPECT_NEAR(hm::moment(1), 0.5, 1e-13);
  EXPECT_NEAR(hm::moment(2), 0.28952840906632954, 1e-12);
  tanh_sinh<double> ts;
  const double c = 1.0 / ts.integrate(raw_one_sided, 0.0, 1.0);
  const double m2 = c * ts.integrate([](double z) { return z * z * raw_one_sided(z); }, 0.0, 1.0);
  EXPECT_NEAR(hm::moment(2), m2, 1e-12);
}

TEST(Kernels, SupportIsClosedAndExact) {
  for (double eta : {1.0, 0.1, 0.01}) {
    EXPECT_EQ(hm::eval_symmetric(eta, eta), 0.0);
    EXPECT_EQ(hm::eval_symmetric(-eta, eta), 0.0);
    EXPECT_EQ(hm::eval_symmetric(1.5 * eta, eta), 0.0);
    EXPECT_EQ(hm::eval_one_sided(0.0, eta), 0.0);
    EXPECT_EQ(hm::eval_one_sided(-0.5 * eta, eta), 0.0);
    EXPECT_EQ(hm::eval_one_sided(eta, eta), 0.0);
    EXPECT_GT(hm::eval_one_sided(0.5 * eta, eta), 0.0);
  }
  // Normal factor of the product kernel looks at x_d in [-eta, 0].
  const std::vector<double> below{0.0, -0.05};
  const std::vector<double> above{0.0, 0.05};
  EXPECT_GT(hm::eval_half_space_kernel(below, 0.1, 2), 0.0);
  EXPECT_EQ(hm::eval_half_space_kernel(above, 0.1, 2), 0.0);
}

TEST(Kernels, ScaledMassIsOne) {
  tanh_sinh<double> ts;
  for (double eta : {1.0, 0.1, 0.01}) {
    const double sym = ts.integrate([eta](double x) { return hm::eval_symmetric(x, eta); }, -eta, eta);
    const double one = ts.integrate([eta](double x) { return hm::eval_one_sided(x, eta); }, 0.0, eta);
    EXPECT_NEAR(sym, 1.0, 1e-10) << "eta=" << eta;
    EXPECT_NEAR(one, 1.0, 1e-10) << "eta=" << eta;
  }
}

TEST(Kernels, DerivativesMatchCentralDifferences) {
  hm::testing::Draw draw;
  for (int i = 0; i < 200; ++i) {
    const double eta = draw.uniform(0.05, 2.0);
    const double x = draw.uniform(-0.95, 0.95) * eta;
    const double dx = 1e-6 * eta;
    const double fd = (hm::eval_symmetric(x + dx, eta) - hm::eval_symmetric(x - dx, eta)) / (2 * dx);
    EXPECT_NEAR(hm::symmetric_derivative(x, eta), fd, 1e-5 * (1.0 + std::abs(fd)));
    const double y = draw.uniform(0.05, 0.95) * eta;
    const double fd1 = (hm::eval_one_sided(y + dx, eta) - hm::eval_one_sided(y - dx, eta)) / (2 * dx);
    EXPECT_NEAR(hm::one_sided_derivative(y, eta), fd1, 1e-5 * (1.0 + std::abs(fd1)));
  }
}

TEST(Kernels, ProductKernelGradientMatchesDifferences) {
  hm::testing::Draw draw(7);
  for (int d = 1; d <= 3; ++d) {
    const hm::HalfSpaceKernel k(d, 0.3);
    for (int i = 0; i < 40; ++i) {
      std::vector<double> x = draw.point(static_cast<std::size_t>(d), -0.28, 0.28);
      x.back() = draw.uniform(-0.28, -0.02);
      const auto g = k.gradient(x);
      for (int j = 0; j < d; ++j) {
        auto xp = x;
        auto xm = x;
        xp[j] += 1e-6;
        xm[j] -= 1e-6;
        const double fd = (k(xp) - k(xm)) / 2e-6;
        EXPECT_NEAR(g[static_cast<std::size_t>(j)], fd, 1e-4 * (1.0 + std::abs(fd)));
      }
    }
  }
}

TEST(Kernels, BoundaryTimeKernelIsProduct) {
  const double eta = 0.2;
  const std::vector<double> tangential{0.05, -0.1};
  const double t = -0.07;
  const double expect = hm::eval_symmetric(0.05, eta) * hm::eval_symmetric(-0.1, eta) * hm::eval_one_sided(0.07, eta);
  EXPECT_DOUBLE_EQ(hm::eval_boundary_time_kernel(tangential, t, eta), expect);
  EXPECT_EQ(hm::eval_boundary_time_kernel(tangential, 0.07, eta), 0.0);
}

TEST(Kernels, RejectsBadScale) {
  EXPECT_THROW(hm::Kernel1D(hm::KernelKind::symmetric, 0.0), hm::Error);
  EXPECT_THROW(hm::Kernel1D(hm::KernelKind::one_sided, -1.0), hm::Error);
  EXPECT_THROW(hm::HalfSpaceKernel(0, 0.1), hm::Error);
}
