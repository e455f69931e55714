#include <doctest.h>

#include "rwrc/lattice.hpp"

#include <cmath>
#include <set>

using namespace rwrc::lattice;

TEST_CASE("box sites are exactly alpha*G intersect Z^d") {
  SUBCASE("d=1, alpha=4, G=(0,1)") {
    const auto box = build_box(1, 4.0, Domain::unit_cube(1));
    REQUIRE(box.size() == 3);
    const auto sites = box.sites();
    for (std::int64_t expected = 1; expected <= 3; ++expected)
      CHECK(sites[expected - 1][0] == expected);
  }
  SUBCASE("d=2, alpha=2, G=(-1,1)^2") {
    const auto box = build_box(2, 2.0, Domain::centered(2, 1.0));
    CHECK(box.size() == 9);
    for (const auto& z : box.sites()) {
      CHECK(z[0] >= -1);
      CHECK(z[0] <= 1);
    }
  }
  SUBCASE("empty intersection is an error") {
    CHECK_THROWS_WITH_AS(build_box(1, 0.5, Domain::unit_cube(1)),
                         doctest::Contains("degenerate box"), std::invalid_argument);
  }
}

TEST_CASE("neighbors come with correct in-box flags") {
  SUBCASE("interior site in d=2") {
    const auto box = build_box(2, 4.0, Domain::unit_cube(2));
    Coord z{2, 2};
    const auto nbs = box.neighbors(std::span<const std::int64_t>(z.data(), 2));
    REQUIRE(nbs.size() == 4);
    for (const auto& e : nbs) CHECK(e.in_box);
  }
  SUBCASE("boundary site in d=1") {
    const auto box = build_box(1, 4.0, Domain::unit_cube(1));
    Coord z{1};
    const auto nbs = box.neighbors(std::span<const std::int64_t>(z.data(), 1));
    REQUIRE(nbs.size() == 2);
    CHECK(nbs[0].site[0] == 2);
    CHECK(nbs[0].in_box);
    CHECK(nbs[1].site[0] == 0);
    CHECK_FALSE(nbs[1].in_box);
  }
  SUBCASE("corner-adjacent site in d=3 has 6 entries") {
    const auto box = build_box(3, 3.0, Domain::unit_cube(3));
    Coord z{1, 1, 1};
    const auto nbs = box.neighbors(std::span<const std::int64_t>(z.data(), 3));
    REQUIRE(nbs.size() == 6);
    int out = 0;
    for (const auto& e : nbs)
      if (!e.in_box) ++out;
    CHECK(out == 3);  // the three faces touching the corner
  }
  SUBCASE("site outside the box is an error") {
    const auto box = build_box(1, 4.0, Domain::unit_cube(1));
    Coord z{0};
    CHECK_THROWS_AS(box.neighbors(std::span<const std::int64_t>(z.data(), 1)),
                    std::invalid_argument);
  }
}

TEST_CASE("embed maps z to z/alpha and floors back") {
  const auto box = build_box(1, 4.0, Domain::unit_cube(1));
  Coord z{2};
  CHECK(box.embed(std::span<const std::int64_t>(z.data(), 1))[0] == doctest::Approx(0.5));

  const auto box2 = build_box(2, 2.0, Domain::centered(2, 1.0));
  Coord w{1, 1};
  const auto y = box2.embed(std::span<const std::int64_t>(w.data(), 2));
  CHECK(y[0] == doctest::Approx(0.5));
  CHECK(y[1] == doctest::Approx(0.5));

  // round trip over every site
  for (const auto& s : box2.sites()) {
    const auto pt = box2.embed(std::span<const std::int64_t>(s.data(), 2));
    for (int i = 0; i < 2; ++i)
      CHECK(static_cast<std::int64_t>(std::floor(box2.alpha() * pt[i])) == s[i]);
  }
}

TEST_CASE("site count grows like alpha^d vol(G)") {
  for (int d = 1; d <= 2; ++d) {
    const auto box = build_box(d, 100.0, Domain::unit_cube(d));
    const double ratio = static_cast<double>(box.size()) / std::pow(100.0, d);
    CHECK(std::abs(ratio - 1.0) < 0.05);
  }
}

TEST_CASE("neighbor relation is symmetric") {
  const auto box = build_box(2, 5.0, Domain::centered(2, 0.7));
  for (const auto& z : box.sites()) {
    for (const auto& e : box.neighbors(std::span<const std::int64_t>(z.data(), 2))) {
      if (!e.in_box) continue;
      bool found = false;
      for (const auto& back :
           box.neighbors(std::span<const std::int64_t>(e.site.data(), 2)))
        if (back.site == z) found = true;
      CHECK(found);
    }
  }
}

TEST_CASE("index map is a bijection onto 0..|B|-1") {
  const auto box = build_box(3, 3.5, Domain::centered(3, 0.6));
  std::set<std::int64_t> seen;
  for (const auto& z : box.sites())
    seen.insert(box.index(std::span<const std::int64_t>(z.data(), 3)));
  CHECK(static_cast<std::int64_t>(seen.size()) == box.size());
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == box.size() - 1);
  for (std::int64_t k = 0; k < box.size(); ++k) {
    const auto z = box.site(k);
    CHECK(box.index(std::span<const std::int64_t>(z.data(), 3)) == k);
  }
}

TEST_CASE("cube_box matches the centered cube") {
  const auto q = cube_box(2, 3);
  CHECK(q.size() == 49);
  CHECK(q.lo(0) == -3);
  CHECK(q.hi(0) == 3);
}
