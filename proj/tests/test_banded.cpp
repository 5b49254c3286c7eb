#include "fsical/banded.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <random>

using fsical::BandedLu;
using fsical::BandedMatrix;

namespace {

BandedMatrix<double> random_spd(Eigen::Index n, int band, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  BandedMatrix<double> a(n, band, band);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i <= std::min<Eigen::Index>(n - 1, j + band); ++i) {
      const double v = u(rng);
      a(i, j) = v;
      a(j, i) = v;
    }
  // Diagonal dominance makes it SPD.
  for (Eigen::Index i = 0; i < n; ++i) a(i, i) = 2.0 * band + 1.0 + std::abs(u(rng));
  return a;
}

}  // namespace

TEST(BandedMatrix, StoresOnlyBandEntries) {
  BandedMatrix<double> a(5, 1, 2);
  a(0, 2) = 3.0;
  a(3, 2) = -1.0;
  EXPECT_EQ(a(0, 2), 3.0);
  EXPECT_EQ(a(3, 2), -1.0);
  EXPECT_EQ(static_cast<const BandedMatrix<double>&>(a)(4, 0), 0.0);
  EXPECT_THROW(a(4, 0) = 1.0, std::out_of_range);
  EXPECT_THROW(a(0, 3) = 1.0, std::out_of_range);
}

TEST(BandedMatrix, ProductMatchesDense) {
  std::mt19937_64 rng(7);
  const auto a = random_spd(12, 2, rng);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(12, -1.0, 2.0);
  EXPECT_LT((a * x - a.to_dense() * x).norm(), 1e-13);
}

TEST(BandedLu, RoundTripResidualOnRandomSpdSystems) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 3 + trial * 7;
    const int band = 1 + trial % 4;
    const auto a = random_spd(n, band, rng);
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = u(rng);
    const Eigen::VectorXd b = a * x;
    const BandedLu<double> lu(a);
    const Eigen::VectorXd sol = lu.solve(b);
    EXPECT_LE((a * sol - b).norm() / b.norm(), 1e-10) << "n=" << n << " band=" << band;
    EXPECT_LE((sol - x).norm() / x.norm(), 1e-10);
  }
}

TEST(BandedLu, AgreesWithDenseSolveOnNonsymmetricBand) {
  BandedMatrix<double> a(6, 1, 2);
  for (Eigen::Index i = 0; i < 6; ++i) {
    a(i, i) = 5.0 + i;
    if (i + 1 < 6) a(i, i + 1) = -1.0;
    if (i + 2 < 6) a(i, i + 2) = 0.5;
    if (i >= 1) a(i, i - 1) = 2.0;
  }
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(6);
  const Eigen::VectorXd ref = a.to_dense().lu().solve(b);
  EXPECT_LT((BandedLu<double>(a).solve(b) - ref).norm(), 1e-13);
}

TEST(BandedLu, FloatScalar) {
  std::mt19937_64 rng(3);
  BandedMatrix<float> a(8, 2, 2);
  for (Eigen::Index i = 0; i < 8; ++i) {
    a(i, i) = 6.0f;
    if (i + 1 < 8) a(i, i + 1) = a(i + 1, i) = -1.0f;
  }
  const Eigen::VectorXf x = Eigen::VectorXf::LinSpaced(8, 0.0f, 1.0f);
  EXPECT_LT((BandedLu<float>(a).solve(a * x) - x).norm(), 1e-5f);
}

TEST(BandedLu, ZeroPivotThrows) {
  BandedMatrix<double> a(3, 1, 1);
  a(0, 0) = 0.0;
  a(0, 1) = 1.0;
  a(1, 0) = 1.0;
  a(1, 1) = 1.0;
  a(2, 2) = 1.0;
  EXPECT_THROW(BandedLu<double>{a}, std::runtime_error);
}

TEST(BandedLu, SolveBeforeFactorAndSizeMismatch) {
  BandedLu<double> lu;
  EXPECT_THROW(lu.solve(Eigen::VectorXd::Ones(3)), std::logic_error);
  BandedMatrix<double> a(3, 1, 1);
  for (int i = 0; i < 3; ++i) a(i, i) = 1.0;
  lu.compute(a);
  EXPECT_THROW(lu.solve(Eigen::VectorXd::Ones(4)), std::invalid_argument);
}
