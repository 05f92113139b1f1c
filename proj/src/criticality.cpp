#include "bmc/criticality.hpp"

#include <cmath>
#include <limits>

namespace bmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// alpha-weighted model mass beyond n_max. Converges for alpha < 1; at
// alpha = 1 it is the plain tail mass (possibly +inf).
double weighted_tail(const TailModel& tail, int n_max, double alpha) {
  if (tail.kind == TailKind::none) return 0.0;
  if (alpha >= 1.0) return tail.tail_mass;
  double s = 0.0;
  double m = std::floor(double(n_max) / 2.0) + 1.0;
  const double la = 2.0 * std::log(alpha);
  const double a2 = alpha * alpha;
  for (std::int64_t it = 0;; ++it, m += 1.0) {
    const double t = tail.at(m) * std::exp(m * la);
    s += t;
    if (t < 1e-17) break;
    if (it >= 10'000'000) {
      s += t * a2 / (1.0 - a2);  // geometric remainder, alpha close to 1
      break;
    }
  }
  return s;
}

bool series_summable(const ReturnSeries& series) {
  const int k = std::min(10, series.n_max);
  double avg = 0.0;
  for (int n = series.n_max - k + 1; n <= series.n_max; ++n)
    avg += series.p[std::size_t(n)];
  return avg / double(k) <= 1e-13;
}

}  // namespace

bool GenFunEval::divergent() const { return std::isinf(mu); }

GenFunEval mu_of_alpha(const ReturnSeries& series, const TailModel& p_tail,
                       double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("mu(alpha) needs alpha in (0,1]");
  if (p_tail.kind != TailKind::none && p_tail.target != SeriesTarget::p)
    throw Error("mu_of_alpha needs a tail model fitted to the p-series");

  GenFunEval ev;
  ev.alpha = alpha;

  const int n_max = series.n_max;
  double sum_p = 0.0, sum_f = 0.0, sum_f1 = 0.0;
  double apow = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    apow *= alpha;
    sum_p += apow * series.p[std::size_t(n)];
    if (series.has_f()) {
      sum_f += apow * series.f[std::size_t(n)];
      sum_f1 += series.f[std::size_t(n)];
    }
  }

  const double fp_noise = double(n_max) * 1.1e-16 * (1.0 + sum_p);

  if (alpha == 1.0) {
    const bool divergent = p_tail.kind == TailKind::none
                               ? !series_summable(series)
                               : !std::isfinite(p_tail.tail_mass);
    if (divergent) {
      ev.mu = kInf;
      ev.truncation_bound = kInf;
    } else {
      ev.mu = sum_p + p_tail.tail_mass;
      double rem = 0.0;
      if (p_tail.kind == TailKind::none) {
        // terms died out; allow for a same-length continuation of the last few
        const int k = std::min(10, n_max);
        double avg = 0.0;
        for (int n = n_max - k + 1; n <= n_max; ++n)
          avg += series.p[std::size_t(n)];
        rem = double(n_max) * (avg / double(k));
      }
      ev.truncation_bound = p_tail.uncertainty + rem + fp_noise;
    }
  } else {
    const double ext = weighted_tail(p_tail, n_max, alpha);
    ev.mu = sum_p + ext;
    const double cut = std::pow(alpha, double(n_max) + 1.0);
    double bound;
    if (p_tail.kind == TailKind::none) {
      bound = cut / (1.0 - alpha);  // p_n <= 1 beyond the truncation
    } else {
      bound = p_tail.tail_mass > 0.0 && std::isfinite(p_tail.tail_mass)
                  ? ext * (p_tail.uncertainty / p_tail.tail_mass)
                  : 0.0;
    }
    if (series.has_f()) {
      // the F truncation feeds the renewal comparison mu vs F/(1-F)
      const double f_err = cut * std::max(0.0, 1.0 - sum_f1);
      const double denom = std::max(1e-6, 1.0 - std::min(1.0, sum_f));
      bound += f_err / (denom * denom);
    }
    ev.truncation_bound = bound + fp_noise;
  }

  if (series.has_f()) ev.F = std::min(1.0, sum_f);
  return ev;
}

double mu_at_one(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw DomainError("beta must lie in [0,1]");
  if (beta == 1.0) return kInf;
  return beta / (1.0 - beta);
}

double offspring_pmf(double b, long long j) {
  if (!(b >= 0.0 && b < 1.0))
    throw DomainError("offspring law needs b in [0,1)");
  if (j < 0) throw DomainError("offspring count must be >= 0");
  return (1.0 - b) * std::pow(b, double(j));
}

double extinction_probability(double b) {
  if (!(b >= 0.0 && b < 1.0))
    throw DomainError("extinction probability needs b in [0,1)");
  if (b <= 0.5) return 1.0;
  return (1.0 - b) / b;
}

Classification classify(const BetaEstimate& beta) {
  Classification c;
  c.regime = beta.value > 0.5 ? Regime::transition : Regime::no_survival;
  c.marginal = std::abs(beta.value - 0.5) <= beta.uncertainty;
  return c;
}

CriticalityReport alpha_critical(const ReturnSeries& series,
                                 const TailModel& p_tail,
                                 const BetaEstimate& beta,
                                 double bracket_tol) {
  const Classification cls = classify(beta);
  if (cls.regime != Regime::transition)
    throw NotSupercritical("alpha_critical needs beta > 1/2");

  CriticalityReport rep;
  rep.beta = beta;
  rep.regime = cls.regime;
  rep.marginal = cls.marginal;
  rep.mu_at_one = mu_at_one(std::min(beta.value, 1.0));

  // top of the bracket: mu(1) from the series itself must clear 1
  const GenFunEval at_one = mu_of_alpha(series, p_tail, 1.0);
  if (!(at_one.mu > 1.0))
    throw BracketFailure(
        "mu(1) <= 1 from the series; inconsistent with a supercritical beta");

  double lo = 1e-6;
  double hi = 1.0;
  if (mu_of_alpha(series, p_tail, lo).mu >= 1.0)
    throw BracketFailure("mu(1e-6) >= 1; series is not a probability series");

  while (hi - lo >= bracket_tol) {
    const double mid = 0.5 * (lo + hi);
    const GenFunEval ev = mu_of_alpha(series, p_tail, mid);
    if (ev.mu > 1.0)
      hi = mid;
    else
      lo = mid;
  }

  rep.alpha_c = 0.5 * (lo + hi);
  rep.bracket_lo = lo;
  rep.bracket_hi = hi;
  rep.bracket_width = hi - lo;
  rep.truncation_at_alpha_c =
      mu_of_alpha(series, p_tail, *rep.alpha_c).truncation_bound;
  return rep;
}

CriticalityReport criticality_report(const ReturnSeries& series,
                                     const TailModel& p_tail,
                                     const BetaEstimate& beta,
                                     double bracket_tol) {
  const Classification cls = classify(beta);
  if (cls.regime == Regime::transition)
    return alpha_critical(series, p_tail, beta, bracket_tol);
  CriticalityReport rep;
  rep.beta = beta;
  rep.regime = cls.regime;
  rep.marginal = cls.marginal;
  rep.mu_at_one = mu_at_one(std::min(beta.value, 1.0));
  return rep;
}

}  // namespace bmc
