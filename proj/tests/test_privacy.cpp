#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>

#include "gpata/privacy.hpp"
#include "gpata/rng.hpp"

using namespace gpata;
using namespace gpata::privacy;

namespace {

// Two cities, two streets each, three POIs per street on a small lattice.
LocationHierarchy small_world() {
  std::vector<City> cities;
  for (int c = 0; c < 2; ++c) {
    City city{"c" + std::to_string(c), {}};
    for (int s = 0; s < 2; ++s) {
      Street street{city.name + "s" + std::to_string(s), {}};
      for (int p = 0; p < 3; ++p) {
        street.pois.push_back({{10.0 * c + p, 2.0 * s}, 1.0});
      }
      city.streets.push_back(street);
    }
    cities.push_back(city);
  }
  return LocationHierarchy(cities);
}

DeviceState device_at(Point p, double freq, double usage) {
  DeviceState d;
  d.id = 3;
  d.cpu_freq = freq;
  d.cpu_usage = usage;
  d.location = p;
  return d;
}

// Independent enclosure oracle: the cell is the lattice interval
// (k*res, (k+1)*res] for the smallest k with value <= (k+1)*res.
std::pair<double, double> lattice_cell(double value, double res) {
  int k = 0;
  while (value > (k + 1) * res) ++k;
  return {k * res, (k + 1) * res};
}

}  // namespace

TEST_CASE("grid cells enclose the value on the resolution lattice") {
  const auto c = grid_cell(2.4, 0.5, 5.0);
  CHECK(c.lo == doctest::Approx(2.0));
  CHECK(c.hi == doctest::Approx(2.5));
  // Right-closed: a lattice point belongs to the cell below it.
  const auto b = grid_cell(2.5, 0.5, 5.0);
  CHECK(b.lo == doctest::Approx(2.0));
  CHECK(b.hi == doctest::Approx(2.5));
  // Clipped to the upper bound.
  const auto u = grid_cell(0.9, 0.5, 0.95);
  CHECK(u.hi == doctest::Approx(0.95));
  // Zero sits in the first cell.
  const auto z = grid_cell(0.0, 0.2, 1.0);
  CHECK(z.contains(0.0));
  CHECK(z.hi == doctest::Approx(0.2));

  Rng rng(17);
  for (double res : {0.2, 0.5, 2.0}) {
    for (int i = 0; i < 2000; ++i) {
      const double v = std::round(rng.uniform(0.0, 5.0) * 100.0) / 100.0;
      const auto cell = grid_cell(v, res, 100.0);
      const auto [lo, hi] = lattice_cell(v, res);
      REQUIRE(cell.contains(v));
      CHECK(cell.lo == doctest::Approx(lo));
      CHECK(cell.hi == doctest::Approx(hi));
    }
  }
}

TEST_CASE("cloak discloses each attribute at its level") {
  const auto world = small_world();
  const GlobalBounds bounds{5.0};
  const auto d = device_at({1.0, 2.0}, 2.5, 0.3);

  auto v = cloak(d, {0, 0, 0}, world, bounds);
  CHECK(v.freq.lo == 2.5);
  CHECK(v.freq.hi == 2.5);
  CHECK(v.usage.lo == 0.3);
  CHECK(v.location.points.size() == 1);

  v = cloak(device_at({1.0, 2.0}, 2.4, 0.3), {1, 1, 1}, world, bounds);
  CHECK(v.freq.lo == doctest::Approx(2.0));
  CHECK(v.freq.hi == doctest::Approx(2.5));
  CHECK(v.usage.lo == doctest::Approx(0.2));
  CHECK(v.usage.hi == doctest::Approx(0.4));
  CHECK(v.location.points.size() == 3);

  v = cloak(d, {2, 2, 2}, world, bounds);
  CHECK(v.freq.lo == doctest::Approx(2.0));
  CHECK(v.freq.hi == doctest::Approx(4.0));
  CHECK(v.usage.lo == doctest::Approx(0.0));
  CHECK(v.usage.hi == doctest::Approx(0.5));
  CHECK(v.location.points.size() == 6);

  v = cloak(d, {3, 3, 3}, world, bounds);
  CHECK(v.freq.lo == 0.0);
  CHECK(v.freq.hi == 5.0);
  CHECK(v.usage.lo == 0.0);
  CHECK(v.usage.hi == 1.0);
  CHECK(v.location.points.size() == world.poi_count());
}

TEST_CASE("cloak rejects states it cannot disclose") {
  const auto world = small_world();
  CHECK_THROWS_AS(cloak(device_at({1.0, 2.0}, 6.0, 0.1), {0, 0, 0}, world, {5.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(cloak(device_at({1.5, 2.0}, 2.0, 0.1), {0, 0, 0}, world, {5.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(cloak(device_at({1.0, 2.0}, 2.0, 0.1), {4, 0, 0}, world, {5.0}),
                  std::invalid_argument);
}

TEST_CASE("hierarchy validation") {
  CHECK_THROWS_AS(LocationHierarchy({City{"empty", {}}}), std::invalid_argument);
  CHECK_THROWS_AS(LocationHierarchy({City{"c", {Street{"s", {}}}}}), std::invalid_argument);
  CHECK_THROWS_AS(
      LocationHierarchy({City{"c", {Street{"s", {{{0, 0}, 1.0}, {{0, 0}, 1.0}}}}}}),
      std::invalid_argument);
  CHECK_THROWS_AS(LocationHierarchy({City{"c", {Street{"s", {{{0, 0}, 0.0}}}}}}),
                  std::invalid_argument);
}

TEST_CASE("weighted POIs produce a normalized PDF") {
  LocationHierarchy h({City{"c", {Street{"s", {{{1, 0}, 9.0}, {{11, 0}, 1.0}}}}}});
  const auto region = h.street_region({0, 0});
  REQUIRE(region.pdf() == PdfLabel::kWeighted);
  CHECK(region.weight(0) == doctest::Approx(0.9));
  CHECK(expected_distance(region, {0, 0}) == doctest::Approx(2.0));
}

TEST_CASE("conservative estimation takes the worst case of each region") {
  DisclosedView v;
  v.freq = {1.0, 3.0};
  v.usage = {0.5, 1.0};
  v.location.points = {{0, 1}, {0, 4}, {3, 0}};
  const auto e = estimate_conservative(v, {0, 0});
  CHECK(e.freq == 1.0);
  CHECK(e.usage == 1.0);
  CHECK(e.distance == doctest::Approx(4.0));
}

TEST_CASE("anchor estimation") {
  Rng rng(3);
  DisclosedView exact;
  exact.freq = {2.7, 2.7};
  exact.usage = {0.15, 0.15};
  exact.location.points = {{3, 4}};
  for (int k : {1, 7, 64}) {
    const auto e = estimate_anchor(exact, {0, 0}, k, rng);
    CHECK(e.freq == 2.7);
    CHECK(e.usage == 0.15);
    CHECK(e.distance == 5.0);
  }

  DisclosedView wide;
  wide.freq = {1.0, 3.0};
  wide.usage = {0.0, 0.5};
  wide.location.points = {{0, 2}, {2, 0}};  // both at distance 2
  const auto big = estimate_anchor(wide, {0, 0}, 100000, rng);
  CHECK(std::abs(big.freq - 2.0) < 0.02);
  CHECK(std::abs(big.usage - 0.25) < 0.01);
  CHECK(big.distance == doctest::Approx(2.0));
  CHECK_THROWS_AS(estimate_anchor(wide, {0, 0}, 0, rng), std::invalid_argument);

  // Same seed, same estimate.
  Rng a(99), b(99);
  const auto ea = estimate_anchor(wide, {1, 1}, 16, a);
  const auto eb = estimate_anchor(wide, {1, 1}, 16, b);
  CHECK(ea.freq == eb.freq);
  CHECK(ea.usage == eb.usage);
  CHECK(ea.distance == eb.distance);
}

TEST_CASE("usage cells at levels 1 and 2 do not nest around one half") {
  const auto world = small_world();
  const auto d = device_at({1.0, 2.0}, 2.0, 0.5);
  const auto fine = cloak(d, {0, 0, 1}, world, {5.0});
  const auto coarse = cloak(d, {0, 0, 2}, world, {5.0});
  CHECK(fine.usage.lo == doctest::Approx(0.4));
  CHECK(fine.usage.hi == doctest::Approx(0.6));
  CHECK(coarse.usage.lo == doctest::Approx(0.0));
  CHECK(coarse.usage.hi == doctest::Approx(0.5));
}

TEST_CASE("randomized views contain the truth, grow with the level and dominate conservatively") {
  const auto world = small_world();
  const auto points = world.all_points();
  const GlobalBounds bounds{5.0};
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const auto d = device_at(points[rng.below(points.size())], rng.uniform(0.1, 5.0),
                             rng.uniform(0.0, 1.0));
    const Point server{rng.uniform(-5, 15), rng.uniform(-5, 5)};
    PrivacyProfile prev{0, 0, 0};
    DisclosedView prev_view = cloak(d, prev, world, bounds);
    for (int level = 0; level <= kMaxLevel; ++level) {
      const PrivacyProfile p{level, level, level};
      const auto v = cloak(d, p, world, bounds);
      REQUIRE(v.freq.contains(d.cpu_freq));
      REQUIRE(v.usage.contains(d.cpu_usage));
      REQUIRE(v.location.contains(d.location));
      // Regions never get narrower as the level rises.
      CHECK(v.freq.width() >= prev_view.freq.width());
      CHECK(v.usage.width() >= prev_view.usage.width());
      CHECK(v.location.points.size() >= prev_view.location.points.size());
      // Set inclusion wherever the lattices nest. Frequency cells of 0.5 nest
      // in cells of 2; usage cells of 0.2 nest in cells of 0.5 unless the fine
      // cell straddles 0.5.
      CHECK(v.freq.lo <= prev_view.freq.lo);
      CHECK(v.freq.hi >= prev_view.freq.hi);
      const bool straddles = level == 2 && prev_view.usage.lo < 0.5 && prev_view.usage.hi > 0.5;
      if (!straddles) {
        CHECK(v.usage.lo <= prev_view.usage.lo);
        CHECK(v.usage.hi >= prev_view.usage.hi);
      }
      for (const auto& pt : prev_view.location.points) CHECK(v.location.contains(pt));
      const auto e = estimate_conservative(v, server);
      CHECK(e.freq <= d.cpu_freq);
      CHECK(e.usage >= d.cpu_usage);
      CHECK(e.distance >= distance(d.location, server));
      prev_view = v;
    }
    // Level-0 round trip in both modes.
    const auto v0 = cloak(d, {0, 0, 0}, world, bounds);
    const auto c0 = estimate_conservative(v0, server);
    const auto a0 = estimate_anchor(v0, server, 8, rng);
    CHECK(c0.freq == d.cpu_freq);
    CHECK(c0.usage == d.cpu_usage);
    CHECK(c0.distance == distance(d.location, server));
    CHECK(a0.freq == d.cpu_freq);
    CHECK(a0.usage == d.cpu_usage);
    CHECK(a0.distance == distance(d.location, server));
  }
}
