#include "bmc/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "bmc/criticality.hpp"
#include "bmc/parallel.hpp"

namespace bmc {

namespace {

// Compact walker states so the inner loop stays allocation-free.

struct BiasedStepper {
  double p;
  std::int64_t pos = 0;
  void reset() { pos = 0; }
  void step(Rng& rng) { pos += rng.next_double() < p ? 1 : -1; }
  bool at_origin() const { return pos == 0; }
};

struct LatticeStepper {
  int d;
  std::array<std::int64_t, 4> x{};
  void reset() { x = {}; }
  void step(Rng& rng) {
    int k = int(rng.next_double() * 2.0 * double(d));
    if (k >= 2 * d) k = 2 * d - 1;
    x[std::size_t(k >> 1)] += (k & 1) ? 1 : -1;
  }
  bool at_origin() const {
    for (int a = 0; a < d; ++a)
      if (x[std::size_t(a)] != 0) return false;
    return true;
  }
};

struct FiniteStepper {
  const FiniteStochastic* m;
  int s = 0;
  void reset() { s = m->origin; }
  void step(Rng& rng) {
    const double u = rng.next_double();
    const double* cdf =
        m->row_cdf.data() + std::size_t(s) * std::size_t(m->n_states);
    int y = 0;
    while (y + 1 < m->n_states && u >= cdf[y]) ++y;
    s = y;
  }
  bool at_origin() const { return s == m->origin; }
};

struct LifeResult {
  long long returns = 0;
  long long steps = 0;
  bool censored = false;
  bool budget_hit = false;  // stopped early because the trial's cap was met
};

template <class Stepper>
LifeResult live(Stepper& st, double alpha, long long max_steps,
                long long birth_budget, Rng& rng) {
  st.reset();
  const double death = 1.0 - alpha;
  LifeResult r;
  while (r.steps < max_steps) {
    if (rng.next_double() < death) return r;
    st.step(rng);
    ++r.steps;
    if (st.at_origin()) {
      ++r.returns;
      if (r.returns >= birth_budget) {
        r.budget_hit = true;
        return r;
      }
    }
  }
  r.censored = true;
  return r;
}

template <class Stepper>
TrialOutcome run_trial(Stepper& st, const SimConfig& cfg, long long trial) {
  long long births = 0;
  long long processed = 0;
  long long steps_total = 0;
  long long peak = 1;
  // step-censored individuals are alive but no longer followed; they keep
  // the trial from being declared extinct
  long long censored_alive = 0;

  while (true) {
    Rng rng = Rng::substream(cfg.seed, std::uint64_t(trial),
                             std::uint64_t(processed));
    const LifeResult r = live(st, cfg.alpha, cfg.max_steps_per_individual,
                              cfg.birth_cap - births, rng);
    births += r.returns;
    ++processed;
    steps_total += r.steps;
    if (r.censored) ++censored_alive;
    const long long pending = births + 1 - processed;
    peak = std::max(peak, pending + censored_alive);

    TrialOutcome out;
    out.total_births = births;
    out.peak_population = peak;
    out.steps_executed = steps_total;
    if (r.budget_hit || births >= cfg.birth_cap) {
      out.status = TrialOutcome::Status::survived_by_cap;
      return out;
    }
    if (pending == 0) {
      if (censored_alive > 0) {
        out.status = TrialOutcome::Status::censored_at_horizon;
        out.alive_count = censored_alive;
      } else {
        out.status = TrialOutcome::Status::extinct;
        out.at_step = steps_total;
      }
      return out;
    }
    if (steps_total > cfg.time_horizon) {
      out.status = TrialOutcome::Status::censored_at_horizon;
      out.alive_count = pending + censored_alive;
      return out;
    }
  }
}

void validate(const SimConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0))
    throw DomainError("simulation needs alpha in (0,1]");
  if (cfg.trials < 1) throw DomainError("trials must be >= 1");
  if (cfg.birth_cap < 1) throw DomainError("birth_cap must be >= 1");
  if (cfg.max_steps_per_individual < 1)
    throw DomainError("max_steps_per_individual must be >= 1");
  if (cfg.time_horizon < 1) throw DomainError("time_horizon must be >= 1");
}

}  // namespace

IndividualRun run_individual(const ChainSpec& chain, double alpha,
                             long long max_steps, Rng& rng) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("run_individual needs alpha in (0,1]");
  constexpr long long kNoBudget = std::numeric_limits<long long>::max();
  LifeResult r;
  switch (chain.kind()) {
    case ChainKind::biased_walk_z: {
      BiasedStepper st{chain.biased().p};
      r = live(st, alpha, max_steps, kNoBudget, rng);
      break;
    }
    case ChainKind::simple_walk_zd: {
      LatticeStepper st{chain.lattice().d, {}};
      r = live(st, alpha, max_steps, kNoBudget, rng);
      break;
    }
    case ChainKind::finite: {
      FiniteStepper st{&chain.finite()};
      r = live(st, alpha, max_steps, kNoBudget, rng);
      break;
    }
  }
  return {r.returns, r.steps, r.censored};
}

OffspringHistogram sample_offspring_counts(const ChainSpec& chain,
                                           double alpha, long long n,
                                           std::uint64_t seed) {
  if (n < 1) throw DomainError("sample count must be >= 1");
  OffspringHistogram hist;
  hist.samples = n;
  for (long long i = 0; i < n; ++i) {
    Rng rng = Rng::substream(seed, std::uint64_t(i), 0);
    const IndividualRun r = run_individual(chain, alpha, 1'000'000, rng);
    const std::size_t j = std::size_t(r.returns);
    if (hist.counts.size() <= j) hist.counts.resize(j + 1, 0);
    ++hist.counts[j];
  }
  return hist;
}

TrialOutcome simulate_population(const SimConfig& config,
                                 long long trial_index) {
  validate(config);
  switch (config.chain.kind()) {
    case ChainKind::biased_walk_z: {
      BiasedStepper st{config.chain.biased().p};
      return run_trial(st, config, trial_index);
    }
    case ChainKind::simple_walk_zd: {
      LatticeStepper st{config.chain.lattice().d, {}};
      return run_trial(st, config, trial_index);
    }
    case ChainKind::finite: {
      FiniteStepper st{&config.chain.finite()};
      return run_trial(st, config, trial_index);
    }
  }
  throw Error("unreachable");
}

SurvivalEstimate estimate_survival(const SimConfig& config,
                                   std::vector<TrialOutcome>* outcomes) {
  validate(config);
  std::vector<TrialOutcome> local;
  std::vector<TrialOutcome>& out = outcomes != nullptr ? *outcomes : local;
  out.assign(std::size_t(config.trials), TrialOutcome{});

  parallel_for(config.trials, config.workers, [&](long long i) {
    out[std::size_t(i)] = simulate_population(config, i);
  });

  SurvivalEstimate est;
  est.trials = config.trials;
  for (const TrialOutcome& t : out) {
    if (t.status == TrialOutcome::Status::survived_by_cap) ++est.survived;
    if (t.status == TrialOutcome::Status::censored_at_horizon) ++est.censored;
  }
  est.survived_fraction = double(est.survived) / double(est.trials);
  est.censored_fraction = double(est.censored) / double(est.trials);
  std::tie(est.wilson_lo, est.wilson_hi) =
      wilson_interval(est.survived, est.trials);
  return est;
}

std::pair<double, double> wilson_interval(long long k, long long n) {
  const double z = 1.959963984540054;  // 97.5% normal quantile
  const double nn = double(n);
  const double ph = double(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (ph + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(ph * (1.0 - ph) / nn + z2 / (4.0 * nn * nn)) / denom;
  const double lo = k == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = k == n ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

double total_variation(const OffspringHistogram& hist, double b) {
  const double n = double(hist.samples);
  double tv = 0.0;
  double covered = 0.0;
  for (std::size_t j = 0; j < hist.counts.size(); ++j) {
    const double pj = offspring_pmf(b, (long long)j);
    tv += std::abs(double(hist.counts[j]) / n - pj);
    covered += pj;
  }
  tv += std::max(0.0, 1.0 - covered);  // model mass beyond the observed range
  return 0.5 * tv;
}

}  // namespace bmc
