#include "manet/analytics.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "manet/rng.hpp"

namespace manet {

namespace {

void check_lifetime(const LifetimeParams& p) {
  if (!(p.max_eng > 0.0)) throw InvalidParameter("max_eng must be positive");
  if (p.hello_rate < 0.0 || p.broad < 0.0 || p.rt < 0.0 || p.avg_trans < 0.0 || p.rx_rate < 0.0) {
    throw InvalidParameter("lifetime rates and costs must be non-negative");
  }
}

double lifetime(double max_eng, double drain) {
  if (!(drain > 0.0)) throw InvalidParameter("zero energy drain: lifetime is unbounded");
  return 0.6 * max_eng / drain;
}

void check_queue(double lambda, double mu) {
  if (!(mu > 0.0)) throw InvalidParameter("mu must be positive");
  if (lambda < 0.0) throw InvalidParameter("lambda must be non-negative");
  if (lambda >= mu) throw UnstableQueue("unstable queue: lambda must be below mu");
}

}  // namespace

double lifetime_classical(const LifetimeParams& p) {
  check_lifetime(p);
  return lifetime(p.max_eng, p.hello_rate * p.broad + p.rt * p.avg_trans + p.rx_rate);
}

double lifetime_minus_hello(const LifetimeParams& p) {
  check_lifetime(p);
  return lifetime(p.max_eng, p.rt * p.avg_trans + p.rx_rate);
}

double lifetime_gain(const LifetimeParams& p) { return lifetime_minus_hello(p) - lifetime_classical(p); }

double avg_wait(double lambda, double mu) {
  check_queue(lambda, mu);
  return lambda / (mu * (mu - lambda));
}

double avg_req(double lambda, double mu) {
  check_queue(lambda, mu);
  return lambda * lambda / (mu * (mu - lambda));
}

double wait_gain(const QueueParams& q) {
  if (q.delta_lambda < 0.0) throw InvalidParameter("delta_lambda must be non-negative");
  return avg_wait(q.lambda + q.delta_lambda, q.mu) - avg_wait(q.lambda, q.mu);
}

double occupancy_gain(const QueueParams& q) {
  if (q.delta_lambda < 0.0) throw InvalidParameter("delta_lambda must be non-negative");
  return avg_req(q.lambda + q.delta_lambda, q.mu) - avg_req(q.lambda, q.mu);
}

std::string_view to_string(LossCase c) {
  switch (c) {
    case LossCase::Case1: return "case1";
    case LossCase::Case2: return "case2";
    case LossCase::Case3: return "case3";
    case LossCase::Case4: return "case4";
    case LossCase::Case5: return "case5";
    case LossCase::NoneApplicable: return "none-applicable";
  }
  return "?";
}

LossAnalysis packet_loss_case(double mq, double req_classical, double req_minus) {
  LossAnalysis a;
  a.k1 = req_classical - mq;
  a.k2 = req_minus - mq;
  a.premise_holds = req_classical > req_minus;
  if (!a.premise_holds) return a;
  if (a.k1 > 0.0 && a.k2 > 0.0) {
    a.label = LossCase::Case4;  // k2 < k1 follows from the premise
  } else if (a.k1 > 0.0) {
    a.label = LossCase::Case3;
  }
  return a;
}

bool loss_case_reachable(LossCase c) { return c == LossCase::Case3 || c == LossCase::Case4; }

double neighbor_density(double n, double x, double y, double r_min) {
  if (!(n > 0.0) || !(x > 0.0) || !(y > 0.0) || !(r_min > 0.0)) {
    throw InvalidParameter("hop count needs positive N, X, Y and R_min");
  }
  return n / (x * y) * std::numbers::pi * r_min * r_min;
}

double expected_hop_count(double n, double x, double y, double r_min) {
  const double xi = neighbor_density(n, x, y, r_min);
  return (2.0 * xi + 1.0) * std::hypot(x, y) / (4.0 * xi * r_min);
}

double expected_hop_count_log2(double n, double x, double y, double r_min) {
  const double xi = neighbor_density(n, x, y, r_min);
  return std::log2(2.0 * xi + 1.0) + 0.5 * std::log2(x * x + y * y) - 2.0 - std::log2(xi) - std::log2(r_min);
}

double printed_hop_count_log2(double n, double x, double y, double r_min) {
  neighbor_density(n, x, y, r_min);
  return std::log2(x) + std::log2(y) + 0.5 * std::log2(x * x + y * y) - 3.0 - std::log2(n) - std::log2(r_min);
}

namespace {

// Hops greedy forwarding takes from pts[0] to pts[1], or -1 when it stalls.
int greedy_walk(const std::vector<Position>& pts, double r) {
  std::size_t cur = 0;
  int hops = 0;
  while (true) {
    double best_d = distance(pts[cur], pts[1]);
    if (best_d <= r) return hops + 1;
    std::size_t best = cur;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (distance(pts[cur], pts[i]) > r) continue;
      const double di = distance(pts[i], pts[1]);
      if (di < best_d) {
        best_d = di;
        best = i;
      }
    }
    if (best == cur) return -1;
    cur = best;
    ++hops;
  }
}

}  // namespace

GreedyHopEstimate greedy_hop_count(int n, double x, double y, double r_min, int trials, std::uint64_t seed,
                                   int max_resamples) {
  if (n < 2 || trials < 1 || max_resamples < 1) {
    throw InvalidParameter("greedy hop count needs two nodes, one trial and one placement");
  }
  neighbor_density(n, x, y, r_min);
  Rng rng(splitmix64(seed));
  std::vector<Position> pts(static_cast<std::size_t>(n));
  GreedyHopEstimate est;
  double total = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Position s{rng.uniform(0.0, x), rng.uniform(0.0, y)};
    const Position d{rng.uniform(0.0, x), rng.uniform(0.0, y)};
    int hops = -1;
    for (int k = 0; k < max_resamples && hops < 0; ++k) {
      pts[0] = s;
      pts[1] = d;
      for (std::size_t i = 2; i < pts.size(); ++i) pts[i] = {rng.uniform(0.0, x), rng.uniform(0.0, y)};
      hops = greedy_walk(pts, r_min);
      if (hops < 0) ++est.resamples;
    }
    if (hops < 0) {
      ++est.stuck;
    } else {
      ++est.delivered;
      total += hops;
    }
  }
  est.mean_hops = est.delivered > 0 ? total / est.delivered : 0.0;
  return est;
}

double route_liveness_probability(std::span<const double> node_up, std::span<const int> links) {
  double p = 1.0;
  for (double v : node_up) {
    if (v < 0.0 || v > 1.0) throw InvalidParameter("node probabilities must lie in [0, 1]");
    p *= v;
  }
  for (int l : links) {
    if (l != 0 && l != 1) throw InvalidParameter("link indicators must be 0 or 1");
    p *= l;
  }
  return p;
}

double saved_energy(double hello_rounds, double avg_hello_energy) {
  if (hello_rounds < 0.0 || avg_hello_energy < 0.0) throw InvalidParameter("saved energy inputs must be non-negative");
  return hello_rounds * avg_hello_energy;
}

}  // namespace manet
