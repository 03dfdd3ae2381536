#include <gtest/gtest.h>

#include <random>

#include "../support/oracles.hpp"
#include "treeqcqp/qcqp.hpp"

using namespace treeqcqp;

TEST(RelintOracle, GridOracleSanity) {
  EXPECT_TRUE(oracle::simplex_grid_inside({Complex(1, 1), Complex(-1, 1), Complex(0, -2)}));
  EXPECT_FALSE(oracle::simplex_grid_inside({Complex(0, 0), Complex(1, 0)}));
  EXPECT_FALSE(oracle::simplex_grid_inside({Complex(1, 0)}));
  EXPECT_TRUE(oracle::simplex_grid_inside({Complex(0, 0)}));
}

TEST(RelintOracle, AgreesOnThousandInstances) {
  std::mt19937_64 rng(1000);
  int inside = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto fam = static_cast<oracle::PointFamily>(t % 4);
    const auto pts = oracle::random_point_set(fam, rng);
    const bool expect = oracle::simplex_grid_inside(pts);
    const RelintResult r = origin_in_relint(pts);
    EXPECT_EQ(r.in_relint, expect) << "trial " << t << " family " << (t % 4);
    if (fam == oracle::PointFamily::inside) EXPECT_TRUE(expect);
    if (fam == oracle::PointFamily::half_plane || fam == oracle::PointFamily::boundary) EXPECT_FALSE(expect);
    if (r.in_relint) {
      ++inside;
      ASSERT_EQ(r.weights.size(), static_cast<Eigen::Index>(pts.size()));
      Complex s(0.0, 0.0);
      double scale = 0.0;
      for (size_t l = 0; l < pts.size(); ++l) {
        EXPECT_GT(r.weights(static_cast<Eigen::Index>(l)), 0.0);
        s += r.weights(static_cast<Eigen::Index>(l)) * pts[l];
        scale = std::max(scale, std::abs(pts[l]));
      }
      EXPECT_NEAR(r.weights.sum(), 1.0, 1e-12);
      EXPECT_LE(std::abs(s), 1e-9 * std::max(scale, 1.0));
    }
    if (fam == oracle::PointFamily::boundary) EXPECT_TRUE(r.on_boundary) << "trial " << t;
  }
  EXPECT_GT(inside, 200);
}
