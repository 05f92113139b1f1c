#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bmc/chain.hpp"

namespace bmc {

// One simulation experiment. Trials are independent given (seed, trial
// index); individuals within a trial get substreams by birth order, so
// every outcome is reproducible under any parallel schedule.
struct SimConfig {
  ChainSpec chain;
  double alpha = 1.0;
  long long trials = 10'000;
  long long max_steps_per_individual = 1'000'000;
  long long birth_cap = 10'000;
  long long time_horizon = 1'000'000'000;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct TrialOutcome {
  enum class Status { extinct, survived_by_cap, censored_at_horizon };

  Status status = Status::extinct;
  long long at_step = 0;      // extinct: cumulative steps at extinction
  long long alive_count = 0;  // censored: pending individuals at horizon
  long long total_births = 0;
  long long peak_population = 0;
  long long steps_executed = 0;

  friend bool operator==(const TrialOutcome&, const TrialOutcome&) = default;
};

struct SurvivalEstimate {
  long long trials = 0;
  long long survived = 0;
  long long censored = 0;
  double survived_fraction = 0.0;
  double censored_fraction = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
};

// Empirical law of "returns before death" (the offspring count).
struct OffspringHistogram {
  std::vector<long long> counts;  // index j
  long long samples = 0;
};

struct IndividualRun {
  long long returns = 0;
  long long steps = 0;
  bool censored = false;  // still alive at max_steps
};

// One individual's life: a death coin at 1-alpha before every step
// (including the first), then a chain step; each arrival at the origin
// counts one return. Birth at the origin itself is not a return.
IndividualRun run_individual(const ChainSpec& chain, double alpha,
                             long long max_steps, Rng& rng);

OffspringHistogram sample_offspring_counts(const ChainSpec& chain,
                                           double alpha, long long n,
                                           std::uint64_t seed);

// Genealogy-order population run: a FIFO of pending individuals, one
// birth per return. Deterministic function of (config.seed, trial_index).
TrialOutcome simulate_population(const SimConfig& config,
                                 long long trial_index);

// Runs config.trials independent trials on a worker pool and aggregates.
// Censored trials are reported separately, never counted as survived.
// Pass outcomes to retain the per-trial log (indexed by trial).
SurvivalEstimate estimate_survival(const SimConfig& config,
                                   std::vector<TrialOutcome>* outcomes =
                                       nullptr);

// 95% Wilson score interval for k successes out of n.
std::pair<double, double> wilson_interval(long long k, long long n);

// Total variation distance between the histogram and geometric(b).
double total_variation(const OffspringHistogram& hist, double b);

}  // namespace bmc
