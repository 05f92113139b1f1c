#include "bmc/return_series.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <sstream>

#include "bmc/io.hpp"

namespace bmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLatticeBudget = 1e8;   // flat DP buffer entries
constexpr double kFiniteWorkBudget = 4e10;  // n_max * s^2 multiply-adds

// Distribution evolution on Z^d over a zero-padded box of side 2*n_max+3.
// Mass at step n lives on sites of parity n, so the update can gather in
// place: writes touch parity-n cells, reads touch parity-(n-1) cells.
class LatticeDp {
 public:
  LatticeDp(int d, int n_max, std::array<double, 4> plus,
            std::array<double, 4> minus)
      : d_(d), n_max_(n_max), side_(2 * std::int64_t(n_max) + 3),
        plus_(plus), minus_(minus) {
    double entries = 1.0;
    for (int a = 0; a < d_; ++a) entries *= double(side_);
    if (entries > kLatticeBudget) {
      std::ostringstream msg;
      msg << "lattice DP needs " << entries << " sites (limit "
          << kLatticeBudget << "); reduce n_max or dimension";
      throw BudgetExceeded(msg.str());
    }
    stride_[std::size_t(d_ - 1)] = 1;
    for (int a = d_ - 2; a >= 0; --a)
      stride_[std::size_t(a)] = stride_[std::size_t(a + 1)] * side_;
    buf_.assign(std::size_t(entries), 0.0);
    center_flat_ = 0;
    for (int a = 0; a < d_; ++a)
      center_flat_ += (std::int64_t(n_max_) + 1) * stride_[std::size_t(a)];
    buf_[std::size_t(center_flat_)] = 1.0;
  }

  // Advances one step and returns the total mass written.
  double step(int n) {
    mass_ = 0.0;
    if (d_ == 1) {
      inner_loop(center_flat_, 0, n);
    } else {
      outer_axes(0, center_flat_, 0, n);
    }
    return mass_;
  }

  double origin_value() const { return buf_[std::size_t(center_flat_)]; }

 private:
  void outer_axes(int axis, std::int64_t base, int coord_sum, int n) {
    if (axis == d_ - 1) {
      inner_loop(base, coord_sum, n);
      return;
    }
    const std::int64_t st = stride_[std::size_t(axis)];
    for (int x = -n; x <= n; ++x)
      outer_axes(axis + 1, base + std::int64_t(x) * st, coord_sum + x, n);
  }

  void inner_loop(std::int64_t base, int coord_sum, int n) {
    int x0 = -n;
    if (((x0 + coord_sum - n) & 1) != 0) ++x0;
    double* b = buf_.data();
    double acc = 0.0;
    for (int x = x0; x <= n; x += 2) {
      const std::int64_t i = base + x;
      double v = 0.0;
      for (int a = 0; a < d_; ++a) {
        const std::int64_t st = stride_[std::size_t(a)];
        v += plus_[std::size_t(a)] * b[i - st] +
             minus_[std::size_t(a)] * b[i + st];
      }
      b[i] = v;
      acc += v;
    }
    mass_ += acc;
  }

  int d_;
  int n_max_;
  std::int64_t side_;
  std::array<double, 4> plus_;
  std::array<double, 4> minus_;
  std::array<std::int64_t, 4> stride_{};
  std::vector<double> buf_;
  std::int64_t center_flat_ = 0;
  double mass_ = 0.0;
};

ReturnSeries lattice_series(const ChainSpec& chain, int n_max, int d,
                            std::array<double, 4> plus,
                            std::array<double, 4> minus) {
  ReturnSeries out{chain, n_max, {}, {}, 0};
  out.p.assign(std::size_t(n_max) + 1, 0.0);
  out.p[0] = 1.0;
  LatticeDp dp(d, n_max, plus, minus);
  for (int n = 1; n <= n_max; ++n) {
    const double mass = dp.step(n);
    if (std::abs(mass - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg << "mass conservation violated at step " << n << ": " << mass;
      throw Error(msg.str());
    }
    out.p[std::size_t(n)] = (n % 2 == 0) ? dp.origin_value() : 0.0;
  }
  return out;
}

ReturnSeries finite_series(const ChainSpec& chain, int n_max) {
  const auto& m = chain.finite();
  const int s = m.n_states;
  if (double(n_max) * double(s) * double(s) > kFiniteWorkBudget)
    throw BudgetExceeded("finite-chain DP work budget exceeded");

  ReturnSeries out{chain, n_max, {}, {}, 0};
  out.p.assign(std::size_t(n_max) + 1, 0.0);
  out.p[0] = 1.0;

  std::vector<double> v(std::size_t(s), 0.0), w(std::size_t(s), 0.0);
  v[std::size_t(m.origin)] = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    std::fill(w.begin(), w.end(), 0.0);
    for (int x = 0; x < s; ++x) {
      const double vx = v[std::size_t(x)];
      if (vx == 0.0) continue;
      const double* row = m.rows.data() + std::size_t(x) * std::size_t(s);
      for (int y = 0; y < s; ++y) w[std::size_t(y)] += vx * row[y];
    }
    v.swap(w);
    double mass = 0.0;
    for (double x : v) mass += x;
    if (std::abs(mass - 1.0) > 1e-9)
      throw Error("mass conservation violated in finite-chain DP");
    out.p[std::size_t(n)] = v[std::size_t(m.origin)];
  }
  return out;
}

struct FitPoint {
  double m;   // half-index
  double ly;  // log value
};

// Solves the 3x3 normal equations for ly ~ c0*b0(m) + c1*b1(m) + c2*b2(m).
std::array<double, 3> solve_lsq3(const std::vector<FitPoint>& pts,
                                 double (*b1)(double), double (*b2)(double)) {
  double a[3][4] = {};
  for (const auto& q : pts) {
    const double col[3] = {1.0, b1(q.m), b2(q.m)};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) a[i][j] += col[i] * col[j];
      a[i][3] += col[i] * q.ly;
    }
  }
  // Gaussian elimination with partial pivoting
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    if (std::abs(a[c][c]) < 1e-30) throw DegenerateFit("singular fit system");
    for (int r = c + 1; r < 3; ++r) {
      const double k = a[r][c] / a[c][c];
      for (int j = c; j < 4; ++j) a[r][j] -= k * a[c][j];
    }
  }
  std::array<double, 3> x{};
  for (int r = 2; r >= 0; --r) {
    double acc = a[r][3];
    for (int j = r + 1; j < 3; ++j) acc -= a[r][j] * x[std::size_t(j)];
    x[std::size_t(r)] = acc / a[r][r];
  }
  return x;
}

double basis_log(double m) { return std::log(m); }
double basis_inv(double m) { return 1.0 / m; }
double basis_id(double m) { return m; }

double power_tail_sum(double C, double gamma, double corr, double m0) {
  if (gamma <= 1.0) return kInf;
  double s = 0.0;
  double m = m0 + 1.0;
  for (std::int64_t it = 0;; ++it, m += 1.0) {
    const double t = C * std::exp(-gamma * std::log(m) + corr / m);
    s += t;
    if (t < 1e-16) break;
    if (it >= 2'000'000) {
      // integral remainder for the slowly decaying case
      s += C * std::exp(corr / m) *
           (std::pow(m, 1.0 - gamma) / (gamma - 1.0) +
            0.5 * std::pow(m, -gamma));
      break;
    }
  }
  return s;
}

double geometric_tail_sum(double C, double r, double corr, double m0) {
  if (r >= 1.0 || r <= 0.0) return r <= 0.0 ? 0.0 : kInf;
  double s = 0.0;
  double m = m0 + 1.0;
  const double lr = std::log(r);
  for (std::int64_t it = 0;; ++it, m += 1.0) {
    const double t = C * std::exp(m * lr - corr * std::log(m));
    if (t < 1e-18 || !std::isfinite(t)) break;
    s += t;
    if (it >= 4'000'000) {
      s += t * r / (1.0 - r);
      break;
    }
  }
  return s;
}

struct FitResult {
  double coefficient = 0.0;
  double exponent = 0.0;
  double ratio = 0.0;
  double correction = 0.0;
  double quality = 0.0;
  double tail_mass = 0.0;
};

FitResult fit_on_points(const std::vector<FitPoint>& pts, TailKind kind,
                        double m0) {
  FitResult res;
  if (kind == TailKind::power_law) {
    auto c = solve_lsq3(pts, basis_log, basis_inv);
    res.coefficient = std::exp(c[0]);
    res.exponent = -c[1];
    res.correction = c[2];
    double rss = 0.0;
    for (const auto& q : pts) {
      const double pred = c[0] - res.exponent * std::log(q.m) + c[2] / q.m;
      rss += (q.ly - pred) * (q.ly - pred);
    }
    res.quality = std::sqrt(rss / double(pts.size()));
    res.tail_mass =
        power_tail_sum(res.coefficient, res.exponent, res.correction, m0);
  } else {
    auto c = solve_lsq3(pts, basis_id, basis_log);
    res.coefficient = std::exp(c[0]);
    res.ratio = std::exp(c[1]);
    res.correction = -c[2];
    double rss = 0.0;
    for (const auto& q : pts) {
      const double pred = c[0] + c[1] * q.m - res.correction * std::log(q.m);
      rss += (q.ly - pred) * (q.ly - pred);
    }
    res.quality = std::sqrt(rss / double(pts.size()));
    res.tail_mass =
        geometric_tail_sum(res.coefficient, res.ratio, res.correction, m0);
  }
  return res;
}

std::vector<FitPoint> collect_points(const std::vector<double>& arr, int lo,
                                     int hi, int* even_slots) {
  std::vector<FitPoint> pts;
  *even_slots = 0;
  for (int n = lo + (lo % 2); n <= hi; n += 2) {
    ++*even_slots;
    const double y = arr[std::size_t(n)];
    if (y > 1e-300) pts.push_back({double(n) / 2.0, std::log(y)});
  }
  return pts;
}

}  // namespace

double TailModel::at(double m) const {
  switch (kind) {
    case TailKind::none:
      return 0.0;
    case TailKind::power_law:
      return coefficient * std::exp(-exponent * std::log(m) + correction / m);
    case TailKind::geometric:
      return coefficient *
             std::exp(m * std::log(ratio) - correction * std::log(m));
  }
  return 0.0;
}

ReturnSeries return_probabilities_dp(const ChainSpec& chain, int n_max) {
  if (n_max < 1) throw DomainError("n_max must be >= 1");
  switch (chain.kind()) {
    case ChainKind::biased_walk_z: {
      const double p = chain.biased().p;
      return lattice_series(chain, n_max, 1, {p, 0, 0, 0},
                            {1.0 - p, 0, 0, 0});
    }
    case ChainKind::simple_walk_zd: {
      const int d = chain.lattice().d;
      const double w = 1.0 / (2.0 * d);
      std::array<double, 4> u{};
      for (int a = 0; a < d; ++a) u[std::size_t(a)] = w;
      return lattice_series(chain, n_max, d, u, u);
    }
    case ChainKind::finite:
      return finite_series(chain, n_max);
  }
  throw Error("unreachable");
}

ReturnSeries first_return_inversion(ReturnSeries series) {
  const int n_max = series.n_max;
  if (series.p.size() != std::size_t(n_max) + 1)
    throw Error("series has no p array");
  series.f.assign(std::size_t(n_max) + 1, 0.0);
  series.clamped = 0;
  const double* p = series.p.data();
  double* f = series.f.data();
  double f_sum = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    double acc = 0.0;
    for (int k = 1; k < n; ++k) acc += f[k] * p[n - k];
    double v = p[n] - acc;
    if (v < 0.0) {
      if (v >= -1e-12) {
        v = 0.0;
        ++series.clamped;
      } else {
        std::ostringstream msg;
        msg << "first-return inversion produced f[" << n << "] = " << v
            << "; input series is inconsistent";
        throw NegativeFirstReturn(msg.str());
      }
    }
    f[n] = v;
    f_sum += v;
  }
  if (f_sum > 1.0 + 1e-9)
    throw Error("first-return masses exceed 1; input series is inconsistent");
  return series;
}

TailModel fit_tail(const ReturnSeries& series, std::pair<int, int> window,
                   TailKind kind, SeriesTarget target) {
  if (kind == TailKind::none)
    return TailModel{TailKind::none, target, 0, 0, 0, 0, window, 0, 0, 0};
  const auto& arr = target == SeriesTarget::p ? series.p : series.f;
  if (arr.empty()) throw Error("requested series is not filled");
  int lo = std::max(1, window.first);
  int hi = std::min(series.n_max, window.second);
  if (lo >= hi) throw InsufficientData("empty fit window");

  int even_slots = 0;
  auto pts = collect_points(arr, lo, hi, &even_slots);
  if (even_slots < 8)
    throw InsufficientData("fit window must contain >= 8 even-index terms");
  if (int(pts.size()) < 8)
    throw DegenerateFit("fewer than 8 positive even-index terms in window");

  const double m0 = std::floor(double(series.n_max) / 2.0);
  FitResult full = fit_on_points(pts, kind, m0);

  // uncertainty = spread of the tail mass across half-window refits
  double spread = 0.0;
  bool have_spread = false;
  const int mid = (lo + hi) / 2;
  int slots_a = 0, slots_b = 0;
  auto pts_a = collect_points(arr, lo, mid, &slots_a);
  auto pts_b = collect_points(arr, mid, hi, &slots_b);
  if (pts_a.size() >= 4 && pts_b.size() >= 4) {
    try {
      FitResult ra = fit_on_points(pts_a, kind, m0);
      FitResult rb = fit_on_points(pts_b, kind, m0);
      if (std::isfinite(full.tail_mass) && std::isfinite(ra.tail_mass) &&
          std::isfinite(rb.tail_mass)) {
        spread = 2.0 * std::max(std::abs(ra.tail_mass - full.tail_mass),
                                std::abs(rb.tail_mass - full.tail_mass));
        have_spread = true;
      }
    } catch (const Error&) {
      // fall through to the residual-based estimate
    }
  }
  if (!have_spread && std::isfinite(full.tail_mass))
    spread = full.tail_mass * std::expm1(2.0 * full.quality) + 1e-15;

  TailModel tm;
  tm.kind = kind;
  tm.target = target;
  tm.coefficient = full.coefficient;
  tm.exponent = full.exponent;
  tm.ratio = full.ratio;
  tm.correction = full.correction;
  tm.fit_window = {lo, hi};
  tm.tail_mass = full.tail_mass;
  tm.quality = full.quality;
  tm.uncertainty = std::isfinite(full.tail_mass) ? spread : kInf;
  return tm;
}

std::pair<int, int> default_fit_window(const ReturnSeries& series,
                                       SeriesTarget target) {
  const auto& arr = target == SeriesTarget::p ? series.p : series.f;
  int last = 0;
  for (int n = series.n_max; n >= 1; --n) {
    if (!arr.empty() && arr[std::size_t(n)] > 1e-250) {
      last = n;
      break;
    }
  }
  if (last == 0) return {std::max(1, series.n_max / 2), series.n_max};
  return {std::max(1, last / 2), last};
}

TailKind auto_tail_kind(const ChainSpec& chain) {
  switch (chain.kind()) {
    case ChainKind::finite:
      return TailKind::none;
    case ChainKind::simple_walk_zd:
      return TailKind::power_law;
    case ChainKind::biased_walk_z: {
      const double p = chain.biased().p;
      return std::abs(4.0 * p * (1.0 - p) - 1.0) < 1e-3 ? TailKind::power_law
                                                        : TailKind::geometric;
    }
  }
  return TailKind::none;
}

TailModel auto_fit_tail(const ReturnSeries& series, SeriesTarget target) {
  const TailKind kind = auto_tail_kind(series.chain);
  if (kind == TailKind::none)
    return fit_tail(series, {1, series.n_max}, TailKind::none, target);
  try {
    return fit_tail(series, default_fit_window(series, target), kind, target);
  } catch (const InsufficientData&) {
  } catch (const DegenerateFit&) {
  }
  return fit_tail(series, {1, series.n_max}, TailKind::none, target);
}

BetaEstimate beta_from_f(const ReturnSeries& series, const TailModel& tail) {
  if (!series.has_f()) throw Error("first-return series is not filled");
  if (tail.kind != TailKind::none && tail.target != SeriesTarget::f)
    throw Error("beta_from_f needs a tail model fitted to the f-series");

  BetaEstimate est;
  double lower = 0.0;
  for (int n = 1; n <= series.n_max; ++n) lower += series.f[std::size_t(n)];
  est.lower_bound = std::min(1.0, lower);
  if (std::isfinite(tail.tail_mass)) {
    est.value = std::min(1.0, lower + tail.tail_mass);
    est.uncertainty = tail.kind == TailKind::none
                          ? std::max(0.0, 1.0 - est.value)
                          : tail.uncertainty + 1e-15;
  } else {
    // divergent tail model: only the trivial bound survives
    est.value = 1.0;
    est.uncertainty = std::max(0.0, 1.0 - lower);
  }
  est.method = series.chain.kind() == ChainKind::finite
                   ? BetaEstimate::Method::finite_chain
                   : BetaEstimate::Method::series_tail;
  return est;
}

GreenSum green_sum(const ReturnSeries& series, const TailModel& tail) {
  if (tail.kind != TailKind::none && tail.target != SeriesTarget::p)
    throw Error("green_sum needs a tail model fitted to the p-series");

  GreenSum g;
  double partial = 0.0;
  for (int n = 0; n <= series.n_max; ++n) partial += series.p[std::size_t(n)];
  const double noise = double(series.n_max) * 1e-16;

  bool divergent = false;
  switch (tail.kind) {
    case TailKind::power_law:
      divergent = tail.exponent <= 1.0;
      break;
    case TailKind::geometric:
      divergent = tail.ratio >= 1.0;
      break;
    case TailKind::none: {
      // without a model, decide by whether the terms have died out
      const int k = std::min(10, series.n_max);
      double avg = 0.0;
      for (int n = series.n_max - k + 1; n <= series.n_max; ++n)
        avg += series.p[std::size_t(n)];
      avg /= double(k);
      divergent = avg > 1e-13;
      break;
    }
  }

  if (divergent || !std::isfinite(tail.tail_mass)) {
    g.G = kInf;
    g.verdict = GreenSum::Verdict::recurrent;
    g.uncertainty = kInf;
    return g;
  }

  g.G = partial + tail.tail_mass;
  g.uncertainty = tail.uncertainty + noise;
  const double rel = g.uncertainty / g.G;
  if (rel < 0.1) {
    g.verdict = GreenSum::Verdict::transient;
    g.beta_check = 1.0 - 1.0 / g.G;
  } else {
    g.verdict = GreenSum::Verdict::inconclusive;
  }
  return g;
}

AbelTable abel_consistency(const ReturnSeries& series,
                           std::vector<double> alphas,
                           const TailModel* p_tail) {
  for (double a : alphas)
    if (!(a > 0.0 && a < 1.0))
      throw DomainError("abel sums need alpha in (0,1)");
  std::sort(alphas.begin(), alphas.end());

  AbelTable table;
  for (double a : alphas) {
    double s = 0.0;
    double apow = 1.0;
    for (int n = 1; n <= series.n_max; ++n) {
      apow *= a;
      s += apow * series.p[std::size_t(n)];
    }
    table.rows.push_back({a, s});
  }
  table.nondecreasing = true;
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    if (table.rows[i].sum < table.rows[i - 1].sum - 1e-12)
      table.nondecreasing = false;

  if (p_tail != nullptr) {
    double bound = 0.0;
    for (int n = 1; n <= series.n_max; ++n) bound += series.p[std::size_t(n)];
    bound += p_tail->tail_mass;  // +inf is fine here
    table.bounded_by_green = true;
    for (const auto& row : table.rows)
      if (row.sum > bound + 1e-9) table.bounded_by_green = false;
  }
  return table;
}

void write_series_csv(const ReturnSeries& series, std::ostream& os) {
  os << "n,p_n,f_n\n";
  for (int n = 0; n <= series.n_max; ++n) {
    os << n << ',' << format_g17(series.p[std::size_t(n)]) << ',';
    if (series.has_f()) os << format_g17(series.f[std::size_t(n)]);
    os << '\n';
  }
}

}  // namespace bmc
