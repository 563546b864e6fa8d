#include <doctest.h>

#include "manet/energy.hpp"
#include "manet/rng.hpp"

using namespace manet;

TEST_CASE("40 percent liveness") {
  Battery b(10.0);
  CHECK(b.is_up());
  b.charge(1000.0, 5000.0, EnergyCategory::Tx);  // 5 J
  CHECK(b.residual_joules() == doctest::Approx(5.0));
  CHECK(b.is_up());
  b.charge(1000.0, 1000.0, EnergyCategory::Tx);  // down to 4 J
  CHECK(b.residual_nj() == 4 * kNanojoulesPerJoule);
  CHECK_FALSE(b.is_up());
}

TEST_CASE("charge") {
  Battery b(1.0);
  CHECK(b.charge(0.0, 1000.0, EnergyCategory::Rx) == 0);
  CHECK(b.residual_nj() == b.max_nj());
  b.charge(300.0, 1000.0, EnergyCategory::Tx);
  CHECK(b.consumed_nj(EnergyCategory::Tx) == 300'000'000);
  CHECK(energy_nj(1.0, 1.0) == 1000);
  // floored at empty
  CHECK(b.charge(1e6, 1e6, EnergyCategory::Hello) == 700'000'000);
  CHECK(b.residual_nj() == 0);
}

TEST_CASE("ledger sums to the drawn total") {
  Rng rng(5);
  Battery b(10.0);
  std::int64_t drawn = 0;
  for (int i = 0; i < 10'000; ++i) {
    drawn += b.charge(rng.uniform(0, 600), rng.uniform(0, 5), static_cast<EnergyCategory>(rng.below(3)));
    REQUIRE(b.consumed_total_nj() == drawn);
    REQUIRE(b.residual_nj() + drawn == b.max_nj());
  }
}

TEST_CASE("Friis power") {
  CHECK(trans_power(50, 0, 1) == 0.0);
  CHECK(trans_power(50, 100, 1) == doctest::Approx(500'000));
  CHECK(trans_power_nonopt(50, 100, 1) == doctest::Approx(500'000));
  CHECK(trans_power(50, 100, 1) == doctest::Approx(trans_power_nonopt(50, 100, 1)));
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const double r = rng.uniform(50, 100);
    const double d = rng.uniform(0, r);
    CHECK(saved_power(rng.uniform(50, 300), d, r, 1.0) >= 0.0);
  }
}

TEST_CASE("power model calibration") {
  PowerModel pm(1.0, 300.0);
  RadioProfile r{100.0, 100.0, 450.0};
  CHECK(pm.draw_mw(r, pm.full_power(r)) == doctest::Approx(450.0));
  CHECK(pm.draw_mw(r, pm.full_power(r) / 4) == doctest::Approx(112.5));
  CHECK(pm.draw_mw(r, pm.full_power(r) * 4) == doctest::Approx(450.0));
  CHECK(pm.reach(r, pm.full_power(r), 300.0) == doctest::Approx(100.0));
  CHECK(pm.reach(r, pm.unicast_power(300.0, 40.0), 300.0) == doctest::Approx(40.0));
  CHECK(broadcast_cost_joules(r, 3) == doctest::Approx(450.0 * 3 / 1e6));
}
