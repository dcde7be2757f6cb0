#include <doctest.h>

#include <map>
#include <set>

#include "flowguard/features.hpp"
#include "oracles.hpp"

using namespace flowguard;

namespace {

Image<double> checkerboard(Index size, Index cell, double dark = 0.1, double bright = 0.9) {
  Image<double> img(size, size);
  for (Index y = 0; y < size; ++y)
    for (Index x = 0; x < size; ++x)
      img(y, x) = ((x / cell + y / cell) % 2 == 0) ? dark : bright;
  return img;
}

std::set<std::pair<int, int>> positions(const std::vector<Corner>& corners) {
  std::set<std::pair<int, int>> out;
  for (const Corner& c : corners) out.insert({c.x, c.y});
  return out;
}

}  // namespace

TEST_CASE("fastDetect finds nothing in a constant image") {
  Image<double> img(32, 32);
  img.setConstant(0.5);
  CHECK(fastDetect(img, {}).empty());
}

TEST_CASE("fastDetect fires exactly on an isolated bright dot") {
  Image<double> img(21, 21);
  img.setConstant(0.05);
  img(10, 10) = 0.95;
  FastParams params;
  params.threshold = 0.1;
  params.arcLength = 9;
  const auto corners = fastDetect(img, params);
  REQUIRE(corners.size() == 1);
  CHECK(corners[0].x == 10);
  CHECK(corners[0].y == 10);
  CHECK(corners[0].score == doctest::Approx(16 * (0.9 - 0.1)).epsilon(1e-9));
}

TEST_CASE("fastDetect on a checkerboard stays within 1 px of junctions") {
  // The segment test cannot fire at an ideal 4-cell junction (same-polarity
  // arcs top out at ~6 < 9 contiguous pixels), so this checks soundness:
  // anything detected must sit at a junction, and the detector must agree
  // exactly with the brute-force oracle.
  const auto img = checkerboard(40, 8);
  FastParams params;
  params.threshold = 0.1;
  params.nonmax = false;
  params.maxCorners = 100000;
  const auto corners = fastDetect(img, params);
  for (const Corner& c : corners) {
    const double dx = std::abs(std::fmod(c.x + 0.5, 8.0) - 0.5);
    const double dy = std::abs(std::fmod(c.y + 0.5, 8.0) - 0.5);
    CHECK(dx <= 1.0);
    CHECK(dy <= 1.0);
  }
  const auto oracle = oracles::fastSegmentOracle(img, params.threshold, params.arcLength);
  CHECK(positions(corners) == positions(oracle));
}

TEST_CASE("fastDetect equals the 16-rotation oracle on random images") {
  oracles::TestRng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const auto img = oracles::randomImage<double>(64, 64, rng);
    FastParams params;
    params.threshold = 0.05;
    params.nonmax = false;
    params.maxCorners = 1000000;
    const auto got = fastDetect(img, params);
    const auto want = oracles::fastSegmentOracle(img, params.threshold, params.arcLength);
    REQUIRE(positions(got) == positions(want));
    // Scores share one definition, modulo summation order.
    std::map<std::pair<int, int>, double> wantScores;
    for (const Corner& c : want) wantScores[{c.x, c.y}] = c.score;
    for (const Corner& c : got)
      CHECK(c.score == doctest::Approx(wantScores.at({c.x, c.y})).epsilon(1e-12));
  }
}

TEST_CASE("fastDetect is invariant under additive intensity shift") {
  oracles::TestRng rng(32);
  const Image<double> img = oracles::randomImage<double>(48, 48, rng) * 0.7;
  const Image<double> shifted = img + 0.25;  // headroom keeps values in [0,1]
  FastParams params;
  params.threshold = 0.04;
  params.nonmax = false;
  params.maxCorners = 1000000;
  CHECK(positions(fastDetect(img, params)) == positions(fastDetect(shifted, params)));
}

TEST_CASE("raising the threshold never adds corners") {
  oracles::TestRng rng(33);
  const auto img = oracles::randomImage<double>(48, 48, rng);
  FastParams loose;
  loose.threshold = 0.03;
  loose.nonmax = false;
  loose.maxCorners = 1000000;
  FastParams tight = loose;
  tight.threshold = 0.12;
  const auto fewer = positions(fastDetect(img, tight));
  const auto more = positions(fastDetect(img, loose));
  for (const auto& p : fewer) CHECK(more.count(p) == 1);
}

TEST_CASE("nonmax suppression keeps only strict maxima") {
  Image<double> img(21, 28);
  img.setConstant(0.05);
  img(10, 10) = 0.95;
  img(10, 11) = 0.95;  // twin candidates with identical scores die together
  FastParams params;
  params.threshold = 0.1;
  params.nonmax = true;
  CHECK(fastDetect(img, params).empty());
  params.nonmax = false;
  CHECK(fastDetect(img, params).size() >= 2);
}

TEST_CASE("results are sorted by score with y/x tie-breaks and capped") {
  oracles::TestRng rng(34);
  const auto img = oracles::randomImage<double>(64, 64, rng);
  FastParams params;
  params.threshold = 0.03;
  params.nonmax = false;
  params.maxCorners = 1000000;
  const auto all = fastDetect(img, params);
  REQUIRE(all.size() > 10);
  for (std::size_t i = 1; i < all.size(); ++i) {
    const Corner& a = all[i - 1];
    const Corner& b = all[i];
    const bool ordered = a.score > b.score ||
                         (a.score == b.score && (a.y < b.y || (a.y == b.y && a.x < b.x)));
    CHECK(ordered);
  }
  params.maxCorners = 10;
  const auto capped = fastDetect(img, params);
  REQUIRE(capped.size() == 10);
  for (std::size_t i = 0; i < capped.size(); ++i) {
    CHECK(capped[i].x == all[i].x);
    CHECK(capped[i].y == all[i].y);
  }
}

TEST_CASE("fastDetect validates its parameters") {
  Image<double> img(16, 16);
  img.setConstant(0.5);
  FastParams params;
  params.threshold = 0.0;
  CHECK_THROWS_AS(fastDetect(img, params), InvalidParameter);
  params.threshold = 1.0;
  CHECK_THROWS_AS(fastDetect(img, params), InvalidParameter);
  params.threshold = 0.1;
  params.arcLength = 8;
  CHECK_THROWS_AS(fastDetect(img, params), InvalidParameter);
  params.arcLength = 17;
  CHECK_THROWS_AS(fastDetect(img, params), InvalidParameter);

  Image<double> tiny(6, 6);
  tiny.setConstant(0.5);
  CHECK(fastDetect(tiny, {}).empty());  // no full circle fits, no corners
}

TEST_CASE("shouldRefresh follows the 50-iteration policy with a starvation guard") {
  CHECK(shouldRefresh(0, 0));
  CHECK(shouldRefresh(50, 300));
  CHECK(shouldRefresh(100, 300));
  CHECK_FALSE(shouldRefresh(49, 300));
  CHECK(shouldRefresh(49, 10));  // fell below min_tracked

  RefreshPolicy pure;
  pure.minTracked = 0;
  CHECK_FALSE(shouldRefresh(49, 0, pure));  // pure periodic policy
  CHECK(shouldRefresh(150, 0, pure));

  CHECK_THROWS_AS(shouldRefresh(-1, 10), InvalidParameter);
}
