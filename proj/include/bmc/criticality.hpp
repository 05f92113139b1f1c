#pragma once

#include <optional>

#include "bmc/return_series.hpp"

namespace bmc {

// One evaluation of the offspring-mean generating function
//   mu(alpha) = sum_{n>=1} alpha^n p_n(O,O)
// together with F(alpha) = sum alpha^n f_n when the first-return series is
// available. mu may be +inf (recurrent chain at alpha = 1); that is a
// value, not an error.
struct GenFunEval {
  double alpha = 0.0;
  double mu = 0.0;
  std::optional<double> F;
  double truncation_bound = 0.0;

  bool divergent() const;
};

enum class Regime { no_survival, transition };

struct Classification {
  Regime regime = Regime::no_survival;
  bool marginal = false;  // 1/2 lies within value +- uncertainty
};

// Verdict for one chain: the survival dichotomy, and the critical death
// parameter when the supercritical window exists.
struct CriticalityReport {
  BetaEstimate beta;
  double mu_at_one = 0.0;  // +inf for recurrent chains
  Regime regime = Regime::no_survival;
  bool marginal = false;
  std::optional<double> alpha_c;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double bracket_width = 0.0;
  double truncation_at_alpha_c = 0.0;
};

// Truncated series plus tail extrapolation. p_tail must target the
// p-series (or be none). alpha = 1 is allowed; divergence shows up as
// mu = +inf.
GenFunEval mu_of_alpha(const ReturnSeries& series, const TailModel& p_tail,
                       double alpha);

// beta/(1-beta); +inf at beta = 1.
double mu_at_one(double beta);

// Geometric offspring law (1-b) b^j. Not a distribution at b = 1.
double offspring_pmf(double b, long long j);

// Smallest fixed point of s -> (1-b)/(1-b s): 1 up to b = 1/2, then
// (1-b)/b.
double extinction_probability(double b);

Classification classify(const BetaEstimate& beta);

// Bisection for mu(alpha_c) = 1 over the initial bracket [1e-6, 1], using
// mu(1) = beta/(1-beta) (or +inf) at the top. Requires a supercritical
// beta estimate; stops once the bracket is narrower than bracket_tol.
CriticalityReport alpha_critical(const ReturnSeries& series,
                                 const TailModel& p_tail,
                                 const BetaEstimate& beta,
                                 double bracket_tol = 1e-6);

// Same report for either regime: alpha_c is absent below the transition.
CriticalityReport criticality_report(const ReturnSeries& series,
                                     const TailModel& p_tail,
                                     const BetaEstimate& beta,
                                     double bracket_tol = 1e-6);

}  // namespace bmc
