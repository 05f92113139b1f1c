#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "bmc/chain.hpp"

namespace bmc {

// n-step return probabilities p_n(O,O) and their first-return
// decomposition f_n, linked by the renewal identity
//   p_n = sum_{k=1..n} f_k p_{n-k}.
struct ReturnSeries {
  ChainSpec chain;
  int n_max = 0;
  std::vector<double> p;  // size n_max+1, p[0] == 1
  std::vector<double> f;  // size n_max+1 once inverted, f[0] == 0
  int clamped = 0;        // inversion entries snapped to 0 from [-1e-12, 0)

  bool has_f() const { return !f.empty(); }
};

enum class TailKind { none, power_law, geometric };
enum class SeriesTarget { p, f };

// Fitted extrapolation of a series beyond n_max, on even indices n = 2m:
//   power_law:  y[2m] ~ C m^-gamma exp(correction/m)
//   geometric:  y[2m] ~ C r^m m^-correction
// The correction term absorbs the leading finite-m drift so the headline
// parameter (gamma or ratio) is read off the window without bias.
struct TailModel {
  TailKind kind = TailKind::none;
  SeriesTarget target = SeriesTarget::p;
  double coefficient = 0.0;            // C
  double exponent = 0.0;               // gamma, power_law only
  double ratio = 0.0;                  // r, geometric only
  double correction = 0.0;
  std::pair<int, int> fit_window{0, 0};
  double tail_mass = 0.0;      // model mass beyond n_max; +inf if divergent
  double quality = 0.0;        // rms log-residual over the window
  double uncertainty = 0.0;    // split-window spread of tail_mass

  // Model value at even index n = 2m.
  double at(double m) const;
};

struct BetaEstimate {
  enum class Method { exact_formula, series_tail, finite_chain };

  double lower_bound = 0.0;  // partial sum of f
  double value = 0.0;        // lower_bound + tail mass, clipped to <= 1
  double uncertainty = 0.0;
  Method method = Method::series_tail;
};

struct GreenSum {
  enum class Verdict { recurrent, transient, inconclusive };

  double G = 0.0;  // +inf when the series diverges
  Verdict verdict = Verdict::inconclusive;
  std::optional<double> beta_check;  // 1 - 1/G, transient chains only
  double uncertainty = 0.0;
};

struct AbelRow {
  double alpha;
  double sum;  // sum_{n>=1} alpha^n p[n]
};

struct AbelTable {
  std::vector<AbelRow> rows;  // sorted by alpha
  bool nondecreasing = false;
  bool bounded_by_green = true;  // vs. partial sum + tail mass, if given
};

// Exact distribution evolution from the point mass at the origin. Mass is
// conserved to 1e-9 at every step; the reachable-state budget is checked
// before allocation (throws BudgetExceeded above ~1e8 lattice sites).
ReturnSeries return_probabilities_dp(const ChainSpec& chain, int n_max);

// Fills f from p via the renewal recursion, O(n_max^2).
ReturnSeries first_return_inversion(ReturnSeries series);

// Least-squares tail fit on even indices inside the window.
TailModel fit_tail(const ReturnSeries& series, std::pair<int, int> window,
                   TailKind kind, SeriesTarget target);

// [n_max/2, n_max] shrunk to where the target series is usable.
std::pair<int, int> default_fit_window(const ReturnSeries& series,
                                       SeriesTarget target);

// Chain-appropriate tail family: geometric for off-critical biased walks,
// power law for lattice walks, none for finite chains.
TailKind auto_tail_kind(const ChainSpec& chain);

// Fits auto_tail_kind on the default window, falling back to none when the
// series has too few usable terms (degenerate walks, tiny n_max).
TailModel auto_fit_tail(const ReturnSeries& series, SeriesTarget target);

BetaEstimate beta_from_f(const ReturnSeries& series, const TailModel& tail);

GreenSum green_sum(const ReturnSeries& series, const TailModel& tail);

// Abel sums sum alpha^n p[n] for each alpha, with monotonicity and
// boundedness diagnostics.
AbelTable abel_consistency(const ReturnSeries& series,
                           std::vector<double> alphas,
                           const TailModel* p_tail = nullptr);

// CSV with header "n,p_n,f_n", 17 significant digits.
void write_series_csv(const ReturnSeries& series, std::ostream& os);

}  // namespace bmc
