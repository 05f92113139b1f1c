#include "bmc/phase.hpp"

#include <cmath>

#include "bmc/monte_carlo.hpp"
#include "bmc/parallel.hpp"
#include "bmc/rng.hpp"

namespace bmc {

std::vector<double> linspace_grid(double lo, double hi, int steps) {
  if (steps < 2) throw DomainError("grid needs at least 2 steps");
  if (!(lo <= hi)) throw DomainError("grid range is inverted");
  std::vector<double> out;
  out.reserve(std::size_t(steps));
  const double h = (hi - lo) / double(steps - 1);
  for (int i = 0; i < steps; ++i) {
    double v = lo + double(i) * h;
    v = std::round(v * 1e12) / 1e12;
    out.push_back(v);
  }
  return out;
}

PhaseGrid phase_sweep(const PhaseParams& params) {
  if (!(params.p_lo >= 0.0 && params.p_hi <= 1.0))
    throw DomainError("p range must lie in [0,1]");
  if (!(params.alpha_lo > 0.0 && params.alpha_hi <= 1.0))
    throw DomainError("alpha range must lie in (0,1]");

  PhaseGrid grid;
  grid.p_values = linspace_grid(params.p_lo, params.p_hi, params.grid_steps);
  grid.alpha_values =
      linspace_grid(params.alpha_lo, params.alpha_hi, params.grid_steps);
  const std::size_t na = grid.alpha_values.size();
  grid.cells.assign(grid.p_values.size() * na, PhaseCell{});

  // Per-p analytic pass: exact beta, series, alpha_c, mu per alpha.
  parallel_for(
      (long long)grid.p_values.size(), params.workers, [&](long long ip) {
        const double p = grid.p_values[std::size_t(ip)];
        const ChainSpec chain = make_biased_walk(p);

        BetaEstimate beta;
        beta.method = BetaEstimate::Method::exact_formula;
        beta.value = *exact_return_beta(chain);
        beta.lower_bound = beta.value;
        beta.uncertainty = 0.0;

        const ReturnSeries series = first_return_inversion(
            return_probabilities_dp(chain, params.n_max));
        const TailModel p_tail = auto_fit_tail(series, SeriesTarget::p);
        const CriticalityReport report =
            criticality_report(series, p_tail, beta, params.bracket_tol);

        for (std::size_t ia = 0; ia < na; ++ia) {
          PhaseCell& cell = grid.cells[std::size_t(ip) * na + ia];
          cell.regime = report.regime;
          cell.marginal = report.marginal;
          cell.alpha_c = report.alpha_c;
          cell.mu = mu_of_alpha(series, p_tail, grid.alpha_values[ia]).mu;
        }
      });

  if (params.trials_per_cell > 0) {
    parallel_for(
        (long long)grid.cells.size(), params.workers, [&](long long idx) {
          const std::size_t ip = std::size_t(idx) / na;
          const std::size_t ia = std::size_t(idx) % na;
          SimConfig cfg;
          cfg.chain = make_biased_walk(grid.p_values[ip]);
          cfg.alpha = grid.alpha_values[ia];
          cfg.trials = params.trials_per_cell;
          cfg.birth_cap = params.birth_cap;
          cfg.seed = substream_state(params.seed, std::uint64_t(ip),
                                     std::uint64_t(ia));
          cfg.workers = 1;  // cells are already parallel
          grid.cells[std::size_t(idx)].mc_survival =
              estimate_survival(cfg).survived_fraction;
        });
  }
  return grid;
}

}  // namespace bmc
