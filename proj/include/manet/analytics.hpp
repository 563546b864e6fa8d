// Closed forms for node lifetime, queueing delay and occupancy, the
// packet-loss case analysis, expected hop count, route liveness, plus a
// Monte-Carlo greedy-forwarding hop counter to check the estimate.

#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "manet/core.hpp"

namespace manet {

/// Thrown when lambda >= mu.
class UnstableQueue : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

// ---------------------------------------------------------------------------
// Lifetime

struct LifetimeParams {
  double max_eng = 0.0;    // J
  double hello_rate = 0.0; // HELLOs per ms (y)
  double broad = 0.0;      // J per broadcast
  double rt = 0.0;         // packets per ms
  double avg_trans = 0.0;  // J per packet
  /// Reception draw in J per ms. Zero reproduces the closed forms exactly,
  /// which leave reception out.
  double rx_rate = 0.0;
};

/// 0.6 max_eng / (y broad + rt avg_trans [+ rx]), in ms.
double lifetime_classical(const LifetimeParams& p);
/// 0.6 max_eng / (rt avg_trans [+ rx]), in ms.
double lifetime_minus_hello(const LifetimeParams& p);
/// lifetime_minus_hello - lifetime_classical.
double lifetime_gain(const LifetimeParams& p);

// ---------------------------------------------------------------------------
// Queueing (M/M/1, rates per ms)

struct QueueParams {
  double lambda = 0.0;        // HELLO-free arrival rate
  double mu = 0.0;            // service rate, equal in both variants
  double delta_lambda = 0.0;  // extra arrivals the classical variant sees
};

/// Mean time queued before service: lambda / (mu (mu - lambda)).
double avg_wait(double lambda, double mu);
/// Mean number queued: lambda^2 / (mu (mu - lambda)).
double avg_req(double lambda, double mu);
/// Classical minus HELLO-free waiting time at lambda + delta_lambda vs lambda.
double wait_gain(const QueueParams& q);
/// Classical minus HELLO-free occupancy.
double occupancy_gain(const QueueParams& q);

enum class LossCase { Case1, Case2, Case3, Case4, Case5, NoneApplicable };
std::string_view to_string(LossCase c);

struct LossAnalysis {
  LossCase label = LossCase::NoneApplicable;
  double k1 = 0.0;  // classical overflow, req_classical - mq
  double k2 = 0.0;  // HELLO-free overflow, req_minus - mq
  bool premise_holds = false;  // req_classical > req_minus
};

/// Classifies a queue pair. With the classical occupancy strictly larger,
/// only Case 3 (classical alone overflows) and Case 4 (both overflow, the
/// classical one more) can occur; anything else is NoneApplicable.
LossAnalysis packet_loss_case(double mq, double req_classical, double req_minus);
/// Whether the case can arise at all when req_classical > req_minus.
bool loss_case_reachable(LossCase c);

// ---------------------------------------------------------------------------
// Hop count

/// Expected neighbours inside the smallest radio disk: N / (XY) pi R^2.
double neighbor_density(double n, double x, double y, double r_min);
/// (2 xi + 1) sqrt(X^2 + Y^2) / (4 xi R_min).
double expected_hop_count(double n, double x, double y, double r_min);
/// log2 of expected_hop_count expanded term by term.
double expected_hop_count_log2(double n, double x, double y, double r_min);
/// The printed log form: log2 X + log2 Y + log2 sqrt(X^2+Y^2) - 3 - log2 N - log2 R_min.
/// It omits the density factor and does not equal log2 of expected_hop_count.
double printed_hop_count_log2(double n, double x, double y, double r_min);

struct GreedyHopEstimate {
  double mean_hops = 0.0;
  int delivered = 0;  // pairs greedy forwarding connected
  int stuck = 0;      // pairs that stalled on every placement
  std::int64_t resamples = 0;
};

/// Places source and destination uniformly, fills the area with n - 2 more
/// uniform nodes and forwards greedily to the neighbour closest to the
/// destination. A stalled walk re-draws the other nodes but keeps the pair,
/// so the pair-distance distribution is not skewed towards short pairs.
GreedyHopEstimate greedy_hop_count(int n, double x, double y, double r_min, int trials, std::uint64_t seed,
                                   int max_resamples = 1000);

// ---------------------------------------------------------------------------
// Routes and savings

/// Product of node up-probabilities and link indicators (each 0 or 1).
double route_liveness_probability(std::span<const double> node_up, std::span<const int> links);

/// Energy a HELLO-free node saves by skipping x HELLO rounds.
double saved_energy(double hello_rounds, double avg_hello_energy);

}  // namespace manet
