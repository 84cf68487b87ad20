#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "wow/sliced.hpp"

using namespace wow;

TEST_CASE("sample_directions basics", "[sliced]") {
  DirectionSet d1 = sample_directions(1, 16, 42);
  for (int l = 0; l < 16; ++l) CHECK(std::abs(std::abs(d1.vectors(0, l)) - 1.0) <= 1e-12);

  DirectionSet d3 = sample_directions(3, 1000, 7);
  for (int l = 0; l < 1000; ++l) CHECK(std::abs(d3.vectors.col(l).norm() - 1.0) <= 1e-12);
  CHECK(d3.vectors.rowwise().mean().norm() <= 0.1);

  DirectionSet again = sample_directions(3, 1000, 7);
  CHECK((d3.vectors - again.vectors).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(sample_directions(0, 4, 1), InputError);
}

TEST_CASE("sliced_w2 is zero on identical clouds", "[sliced]") {
  PointCloud a = oracle::random_cloud(2, 10, 3);
  CHECK(sliced_w2(a, a, sample_directions(2, 32, 5)) <= 1e-18);
}

TEST_CASE("sliced_w2 in 1D equals the exact distance", "[sliced]") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    PointCloud a = oracle::random_cloud(1, 7, 500 + seed);
    PointCloud b = oracle::random_cloud(1, 7, 600 + seed);
    double sw = sliced_w2(a, b, sample_directions(1, 4, seed));
    double w2 = wasserstein2(a, b).distance_sq;
    CHECK(sw == Catch::Approx(w2).epsilon(0).margin(1e-9));
  }
}

TEST_CASE("sliced_w2 2D estimate is consistent with a high-L reference", "[sliced]") {
  PointCloud a = oracle::random_cloud(2, 12, 31);
  PointCloud b = oracle::random_cloud(2, 12, 32);
  double coarse = sliced_w2(a, b, sample_directions(2, 20000, 1));
  double fine = sliced_w2(a, b, sample_directions(2, 200000, 2));
  CHECK(coarse == Catch::Approx(fine).epsilon(0.05));
}

TEST_CASE("sliced_w2 stays below the exact distance plus noise", "[sliced]") {
  // projections contract distances, so E[SW2^2] <= W2^2 per direction
  std::mt19937_64 rng(8);
  int L = 128;
  for (int trial = 0; trial < 100; ++trial) {
    int n = 4 + static_cast<int>(rng() % 8);
    PointCloud a = oracle::random_cloud(2, n, rng());
    PointCloud b = oracle::random_cloud(2, n, rng());
    DirectionSet dirs = sample_directions(2, L, rng());
    // empirical std over single-direction estimates
    double mean = 0.0, sq = 0.0;
    for (int l = 0; l < L; ++l) {
      DirectionSet single{dirs.vectors.col(l)};
      double v = sliced_w2(a, b, single);
      mean += v;
      sq += v * v;
    }
    mean /= L;
    double var = sq / L - mean * mean;
    double sd = std::sqrt(std::max(var, 0.0));
    double w2 = wasserstein2(a, b).distance_sq;
    CHECK(mean <= w2 + 3.0 * sd / std::sqrt(static_cast<double>(L)) + 1e-12);
  }
}

TEST_CASE("sliced_w2 is rotation invariant in distribution", "[sliced]") {
  PointCloud a = oracle::random_cloud(2, 10, 71);
  PointCloud b = oracle::random_cloud(2, 10, 72);
  double theta = 0.83;
  Eigen::Matrix2d rot;
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  PointCloud ra(rot * a.coords), rb(rot * b.coords);
  double plain = 0.0, rotated = 0.0;
  int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    plain += sliced_w2(a, b, sample_directions(2, 256, 900 + static_cast<std::uint64_t>(s)));
    rotated += sliced_w2(ra, rb, sample_directions(2, 256, 1900 + static_cast<std::uint64_t>(s)));
  }
  CHECK(plain / seeds == Catch::Approx(rotated / seeds).epsilon(0.05));
}

TEST_CASE("sliced_plan monotone matching and identity", "[sliced]") {
  Eigen::MatrixXd a(1, 4), b(1, 4);
  a << 3, 1, 2, 0;
  b << 10, 13, 11, 12;
  InnerPlan plan = sliced_plan(PointCloud(a), PointCloud(b), sample_directions(1, 1, 3));
  REQUIRE(plan.is_permutation());
  // rank matching is invariant to the direction's sign: a's k-th smallest
  // pairs with b's k-th smallest either way
  CHECK(plan.perm == std::vector<int>{1, 2, 3, 0});

  PointCloud c = oracle::random_cloud(2, 6, 4);
  InnerPlan self = sliced_plan(c, c, sample_directions(2, 8, 9));
  REQUIRE(self.is_permutation());
  CHECK(self.perm == Permutation::identity(6).map);
}

TEST_CASE("sliced_plan marginals are exact", "[sliced]") {
  PointCloud a = oracle::random_cloud(2, 9, 13);
  PointCloud b = oracle::random_cloud(2, 9, 14);
  for (int L : {1, 2, 8, 33}) {
    InnerPlan plan = sliced_plan(a, b, sample_directions(2, L, 100 + static_cast<std::uint64_t>(L)));
    Eigen::MatrixXd w = plan.to_matrix();
    CHECK((w.rowwise().sum().array() - 1.0 / 9).abs().maxCoeff() <= 1e-12);
    CHECK((w.colwise().sum().array() - 1.0 / 9).abs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("sliced_plan in 1D equals the exact OT matching", "[sliced]") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PointCloud a = oracle::random_cloud(1, 6, 700 + seed);
    PointCloud b = oracle::random_cloud(1, 6, 800 + seed);
    InnerPlan sp = sliced_plan(a, b, sample_directions(1, 3, seed));
    W2Result exact = wasserstein2(a, b);
    CHECK((sp.to_matrix() - exact.plan.to_matrix()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}
