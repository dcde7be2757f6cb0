#include <doctest.h>

#include "flowguard/foe_ttc.hpp"
#include "oracles.hpp"

using namespace flowguard;

TEST_CASE("buildFoeSystem stacks flow-line constraints") {
  // One vector p=(2,3), v=(4,5): the row is (v, -u) and b = x*v - y*u, the
  // sign-consistent reading for which A*foe = b on a radial field.
  std::vector<FlowVector> vectors = {{{2, 3}, {4, 5}}, {{1, 1}, {1, 1}}};
  const FoeSystem sys = buildFoeSystem(vectors);
  CHECK(sys.A(0, 0) == 5.0);
  CHECK(sys.A(0, 1) == -4.0);
  CHECK(sys.b(0) == 2.0 * 5.0 - 3.0 * 4.0);
}

TEST_CASE("a radial field satisfies A*foe = b exactly") {
  oracles::TestRng rng(51);
  const Eigen::Vector2d foe(41.0, 77.5);
  const auto field = oracles::radialField(foe, 12, rng);
  const FoeSystem sys = buildFoeSystem(field);
  CHECK(((sys.A * foe - sys.b).array().abs() < 1e-9).all());
}

TEST_CASE("buildFoeSystem needs at least two vectors") {
  CHECK_THROWS_AS(buildFoeSystem(std::vector<FlowVector>{}), InsufficientData);
  CHECK_THROWS_AS(buildFoeSystem(std::vector<FlowVector>{{{1, 1}, {1, 0}}}), InsufficientData);
}

TEST_CASE("solveFoe recovers a constructed radial field exactly") {
  std::vector<FlowVector> vectors = {
      {{74, 64}, {1, 0}},
      {{64, 80}, {0, 1.6}},
      {{44, 44}, {-2, -2}},
  };
  const FocusOfExpansion foe = solveFoe(buildFoeSystem(vectors));
  CHECK(foe.foe.x() == doctest::Approx(64.0).epsilon(1e-9));
  CHECK(foe.foe.y() == doctest::Approx(64.0).epsilon(1e-9));
  CHECK(foe.residualRms < 1e-9);
  CHECK(foe.nVectors == 3);
}

TEST_CASE("parallel flow is degenerate") {
  std::vector<FlowVector> vectors = {
      {{10, 10}, {1, 0}}, {{40, 90}, {1, 0}}, {{80, 30}, {1, 0}}};
  CHECK_THROWS_AS(solveFoe(buildFoeSystem(vectors)), DegenerateGeometry);
}

TEST_CASE("noisy radial field comes back near the truth and matches the oracle") {
  oracles::TestRng rng(52);
  const Eigen::Vector2d truth(31.5, 88.25);
  std::vector<FlowVector> field;
  while (static_cast<int>(field.size()) < 200) {
    const Eigen::Vector2d p(rng.uniform(0.0, 128.0), rng.uniform(0.0, 128.0));
    if ((p - truth).norm() < 2.0) continue;
    const Eigen::Vector2d radial = p - truth;
    const double angle = std::atan2(radial.y(), radial.x()) + 0.05 * rng.gaussian();
    const double mag = rng.uniform(0.2, 2.0);
    field.push_back({p, mag * Eigen::Vector2d(std::cos(angle), std::sin(angle))});
  }
  const FoeSystem sys = buildFoeSystem(field);
  const FocusOfExpansion foe = solveFoe(sys);
  CHECK((foe.foe - truth).norm() < 2.0);

  const auto [oracleFoe, cond] = oracles::normalEquationsSolve(sys.A, sys.b);
  REQUIRE(cond < 1e8);
  CHECK((foe.foe - oracleFoe).norm() < 1e-6);
}

TEST_CASE("ttcOfVector evaluates the distance-over-speed form") {
  CHECK(ttcOfVector({100, 64}, {3, 0}, {64, 64}) == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(ttcOfVector({64, 64}, {1, 1}, {64, 64}) == doctest::Approx(0.0));
  CHECK(ttcOfVector({10, 20}, {1, 2}, {4, 12}) ==
        doctest::Approx(std::sqrt(20.0)).epsilon(1e-12));
  CHECK_THROWS_AS(ttcOfVector({10, 20}, {0, 0}, {4, 12}), DegenerateGeometry);
}

TEST_CASE("ttc is invariant under uniform spatial rescaling") {
  oracles::TestRng rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Vector2d p(rng.uniform(0, 128), rng.uniform(0, 128));
    const Eigen::Vector2d v(rng.uniform(-3, 3), rng.uniform(-3, 3));
    const Eigen::Vector2d foe(rng.uniform(0, 128), rng.uniform(0, 128));
    if (v.squaredNorm() < 1e-6) continue;
    const double s = rng.uniform(0.1, 10.0);
    CHECK(ttcOfVector(p, v, foe) ==
          doctest::Approx(ttcOfVector(s * p, s * v, s * foe)).epsilon(1e-9));
  }
}

TEST_CASE("accumulateGrid assigns to the nearest cell center") {
  std::vector<FlowVector> vectors = {{{4, 4}, {1, 0}}};
  std::vector<double> ttcs = {7.0};
  const TtcGrid grid = accumulateGrid(vectors, ttcs, 128, 128);
  CHECK(grid.sums(0, 0) == 7.0);
  CHECK(grid.counts(0, 0) == 1);
  CHECK(grid.totalCount() == 1);

  const TtcGrid withMeans = gridMeans(grid);
  int defined = 0;
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c)
      if (std::isfinite(withMeans.means(r, c))) {
        ++defined;
        CHECK(withMeans.means(r, c) == 7.0);
      }
  CHECK(defined == 1);
}

TEST_CASE("accumulateGrid sums within a cell") {
  std::vector<FlowVector> vectors = {{{100, 30}, {1, 0}}, {{101, 29}, {0, 1}}};
  std::vector<double> ttcs = {3.0, 5.0};
  const TtcGrid grid = gridMeans(accumulateGrid(vectors, ttcs, 128, 128));
  CHECK(grid.sums(3, 12) == 8.0);
  CHECK(grid.counts(3, 12) == 2);
  CHECK(grid.means(3, 12) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("cell boundaries tie toward the smaller index") {
  // x = 8 on a 128-wide image is equidistant to the centers of columns 0
  // and 1; same for y along rows.
  std::vector<FlowVector> vectors = {{{8, 8}, {1, 0}}};
  std::vector<double> ttcs = {1.0};
  const TtcGrid grid = accumulateGrid(vectors, ttcs, 128, 128);
  CHECK(grid.counts(0, 0) == 1);
}

TEST_CASE("grid accumulation conserves the sample count") {
  oracles::TestRng rng(54);
  std::vector<FlowVector> vectors;
  std::vector<double> ttcs;
  for (int i = 0; i < 500; ++i) {
    vectors.push_back({{rng.uniform(0, 120), rng.uniform(0, 90)}, {1, 0}});
    ttcs.push_back(rng.uniform(0.1, 50.0));
  }
  const TtcGrid grid = gridMeans(accumulateGrid(vectors, ttcs, 120, 90));
  CHECK(grid.totalCount() == 500);

  double sumOfSums = 0.0;
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) {
      sumOfSums += grid.sums(r, c);
      if (grid.counts(r, c) > 0) {
        CHECK(grid.means(r, c) ==
              doctest::Approx(grid.sums(r, c) / grid.counts(r, c)).epsilon(1e-9));
      } else {
        CHECK_FALSE(std::isfinite(grid.means(r, c)));
      }
    }
  double total = 0.0;
  for (double t : ttcs) total += t;
  CHECK(sumOfSums == doctest::Approx(total).epsilon(1e-9));
}

TEST_CASE("every mean lies between its cell's min and max sample") {
  oracles::TestRng rng(55);
  std::vector<FlowVector> vectors;
  std::vector<double> ttcs;
  Eigen::Matrix<double, 16, 16> lo = Eigen::Matrix<double, 16, 16>::Constant(1e300);
  Eigen::Matrix<double, 16, 16> hi = Eigen::Matrix<double, 16, 16>::Constant(-1e300);
  for (int i = 0; i < 300; ++i) {
    const Eigen::Vector2d p(rng.uniform(0, 128), rng.uniform(0, 128));
    const double t = rng.uniform(0.5, 40.0);
    vectors.push_back({p, {1, 0}});
    ttcs.push_back(t);
  }
  const TtcGrid grid = gridMeans(accumulateGrid(vectors, ttcs, 128, 128));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const int r = flowguard::detail::nearestCell(vectors[i].p.y(), 8.0);
    const int c = flowguard::detail::nearestCell(vectors[i].p.x(), 8.0);
    lo(r, c) = std::min(lo(r, c), ttcs[i]);
    hi(r, c) = std::max(hi(r, c), ttcs[i]);
  }
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c)
      if (grid.counts(r, c) > 0) {
        CHECK(grid.means(r, c) >= lo(r, c) - 1e-9);
        CHECK(grid.means(r, c) <= hi(r, c) + 1e-9);
      }
}

TEST_CASE("grid input validation") {
  std::vector<FlowVector> vectors = {{{4, 4}, {1, 0}}};
  std::vector<double> ttcs = {1.0, 2.0};
  CHECK_THROWS_AS(accumulateGrid(vectors, ttcs, 128, 128), InvalidInput);
  ttcs.resize(1);
  CHECK_THROWS_AS(accumulateGrid(vectors, ttcs, 8, 128), InvalidInput);
}
