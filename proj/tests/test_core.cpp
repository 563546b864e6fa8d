#include <doctest.h>

#include <cmath>
#include <vector>

#include "manet/core.hpp"
#include "manet/rng.hpp"

using namespace manet;

TEST_CASE("distance") {
  CHECK(distance({0, 0}, {0, 0}) == 0.0);
  CHECK(distance({0, 0}, {3, 4}) == doctest::Approx(5.0));
  CHECK(distance({100, 100}, {160, 180}) == doctest::Approx(100.0));
  CHECK(distance({7, -2}, {1, 5}) == distance({1, 5}, {7, -2}));
}

TEST_CASE("triangle inequality on random points") {
  Rng rng(11);
  for (int i = 0; i < 10'000; ++i) {
    Position a{rng.uniform(0, 500), rng.uniform(0, 500)};
    Position b{rng.uniform(0, 500), rng.uniform(0, 500)};
    Position c{rng.uniform(0, 500), rng.uniform(0, 500)};
    REQUIRE(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9);
  }
}

TEST_CASE("rng is deterministic per seed") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.uniform() == b.uniform());
  CHECK(Rng(1).uniform() != Rng(2).uniform());
  CHECK(Rng::substream(5, 3).next_u64() == Rng::substream(5, 3).next_u64());
  CHECK(Rng::substream(5, 3).next_u64() != Rng::substream(5, 4).next_u64());
}

TEST_CASE("rng uniform mean") {
  Rng rng(7);
  double sum = 0;
  for (int i = 0; i < 1'000'000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  const double mean = sum / 1e6;
  CHECK(mean >= 0.497);
  CHECK(mean <= 0.503);
}

TEST_CASE("rng below and exponential") {
  Rng rng(3);
  std::vector<int> hist(6, 0);
  for (int i = 0; i < 60'000; ++i) ++hist[rng.below(6)];
  for (int h : hist) CHECK(std::abs(h - 10'000) < 500);
  double sum = 0;
  for (int i = 0; i < 200'000; ++i) sum += rng.exponential(0.5);
  CHECK(sum / 200'000 == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("config validation") {
  ScenarioConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.node_count = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.speed_range = {30, 10};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  // 512 bytes at 2 Mbps is 2.048 ms, rounded up
  CHECK(cfg.airtime(512 * 8) == 3);
  CHECK(cfg.airtime(1) == 1);
}

TEST_CASE("protocol names round trip") {
  for (Protocol p : kAllProtocols) CHECK(parse_protocol(to_string(p)) == p);
  CHECK(parse_variant(to_string(Variant::MinusHello)) == Variant::MinusHello);
  CHECK_THROWS(parse_protocol("dsr"));
}
