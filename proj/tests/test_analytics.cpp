#include <doctest.h>

#include <cmath>
#include <vector>

#include "manet/analytics.hpp"
#include "manet/rng.hpp"

using namespace manet;

TEST_CASE("lifetime closed forms") {
  // 10 J, 0.1 HELLO/ms at 1 mJ, 0.05 packets/ms at 2 mJ
  const LifetimeParams p{10.0, 0.1, 1e-3, 0.05, 2e-3};
  CHECK(lifetime_classical(p) == doctest::Approx(30'000));
  CHECK(lifetime_minus_hello(p) == doctest::Approx(60'000));
  CHECK(lifetime_gain(p) == doctest::Approx(30'000));
  LifetimeParams quiet = p;
  quiet.hello_rate = 0;
  CHECK(lifetime_classical(quiet) == lifetime_minus_hello(quiet));
  CHECK_THROWS_AS(lifetime_minus_hello({10.0, 0.1, 1e-3, 0.0, 2e-3}), InvalidParameter);
}

TEST_CASE("queue closed forms") {
  // per second here; the forms are unit agnostic
  CHECK(avg_wait(2, 5) == doctest::Approx(2.0 / 15));
  CHECK(avg_req(2, 5) == doctest::Approx(4.0 / 15));
  CHECK(wait_gain({2, 5, 0}) == 0.0);
  CHECK(avg_req(1e-9, 5) < 1e-15);
  CHECK_THROWS_AS(avg_wait(5, 5), UnstableQueue);
  CHECK_THROWS_AS(avg_req(6, 5), UnstableQueue);
  CHECK_THROWS_AS(occupancy_gain({1, 5, -0.5}), InvalidParameter);
  double prev = 0;
  for (double l = 0.05; l < 5; l += 0.05) {
    REQUIRE(avg_req(l, 5) > prev);
    prev = avg_req(l, 5);
  }
}

TEST_CASE("positivity over random draws") {
  Rng rng(13);
  for (int k = 0; k < 10'000; ++k) {
    const LifetimeParams lp{rng.uniform(1, 10), rng.uniform(1e-3, 0.2), rng.uniform(1e-5, 1e-3),
                            rng.uniform(1e-4, 0.1), rng.uniform(1e-4, 1e-2)};
    REQUIRE(lifetime_gain(lp) > 0);
    const double mu = rng.uniform(0.01, 1);
    const double lambda = rng.uniform(0.01, 0.98) * mu;
    const double dl = rng.uniform(1e-6, 0.999) * (mu - lambda);
    REQUIRE(wait_gain({lambda, mu, dl}) > 0);
    REQUIRE(occupancy_gain({lambda, mu, dl}) > 0);
  }
}

TEST_CASE("packet loss cases") {
  const auto c3 = packet_loss_case(10, 12, 8);
  CHECK(c3.label == LossCase::Case3);
  CHECK(c3.k1 == 2);
  CHECK(c3.k2 == -2);
  const auto c4 = packet_loss_case(10, 12, 11);
  CHECK(c4.label == LossCase::Case4);
  CHECK(c4.k2 < c4.k1);
  const auto flat = packet_loss_case(10, 9, 9);
  CHECK_FALSE(flat.premise_holds);
  CHECK(flat.label == LossCase::NoneApplicable);
  CHECK(to_string(LossCase::Case3) == "case3");
  CHECK(to_string(LossCase::NoneApplicable) == "none-applicable");
  for (auto c : {LossCase::Case1, LossCase::Case2, LossCase::Case5}) CHECK_FALSE(loss_case_reachable(c));
  CHECK(loss_case_reachable(LossCase::Case3));
  CHECK(loss_case_reachable(LossCase::Case4));
}

TEST_CASE("expected hop count") {
  CHECK(neighbor_density(100, 500, 500, 50) == doctest::Approx(3.14159).epsilon(1e-5));
  CHECK(expected_hop_count(100, 500, 500, 50) == doctest::Approx(8.1965).epsilon(1e-4));
  Rng rng(4);
  for (int k = 0; k < 1000; ++k) {
    const double n = rng.uniform(20, 500), x = rng.uniform(100, 1000), y = rng.uniform(100, 1000),
                 r = rng.uniform(50, 100);
    REQUIRE(std::abs(std::log2(expected_hop_count(n, x, y, r)) - expected_hop_count_log2(n, x, y, r)) < 1e-9);
  }
  // dense limit
  CHECK(expected_hop_count(1e9, 500, 500, 50) == doctest::Approx(std::hypot(500, 500) / 100).epsilon(1e-6));
  CHECK_THROWS_AS(expected_hop_count(0, 500, 500, 50), InvalidParameter);
  CHECK_THROWS_AS(expected_hop_count(10, -5, 500, 50), InvalidParameter);
}

TEST_CASE("greedy forwarding estimate is reproducible") {
  const auto a = greedy_hop_count(100, 500, 500, 50, 40, 9);
  const auto b = greedy_hop_count(100, 500, 500, 50, 40, 9);
  CHECK(a.mean_hops == b.mean_hops);
  CHECK(a.delivered + a.stuck == 40);
  CHECK(a.mean_hops > 1.0);
}

TEST_CASE("route liveness") {
  const std::vector<double> up{0.9, 0.8};
  const std::vector<int> links{1, 1, 1};
  CHECK(route_liveness_probability(up, links) == doctest::Approx(0.72));
  const std::vector<int> broken{1, 0, 1};
  CHECK(route_liveness_probability(up, broken) == 0.0);
  const std::vector<double> sure{1, 1, 1};
  CHECK(route_liveness_probability(sure, links) == 1.0);
  const std::vector<double> bad{1.2};
  CHECK_THROWS_AS(route_liveness_probability(bad, links), InvalidParameter);
  CHECK(saved_energy(10, 0.002) == doctest::Approx(0.02));
}
