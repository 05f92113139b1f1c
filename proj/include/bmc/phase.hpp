#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bmc/criticality.hpp"

namespace bmc {

// One (p, alpha) cell of the biased-walk phase diagram. regime, marginal
// and alpha_c are per-p quantities, repeated across the row's cells.
struct PhaseCell {
  Regime regime = Regime::no_survival;
  bool marginal = false;
  std::optional<double> alpha_c;
  double mu = 0.0;
  std::optional<double> mc_survival;
};

struct PhaseGrid {
  std::vector<double> p_values;
  std::vector<double> alpha_values;
  std::vector<PhaseCell> cells;  // row-major: [ip * alpha_count + ia]

  const PhaseCell& at(std::size_t ip, std::size_t ia) const {
    return cells[ip * alpha_values.size() + ia];
  }
};

struct PhaseParams {
  double p_lo = 0.05;
  double p_hi = 0.95;
  double alpha_lo = 0.5;
  double alpha_hi = 0.99;
  int grid_steps = 19;  // points per axis
  long long trials_per_cell = 0;
  std::uint64_t seed = 0;
  int n_max = 2000;
  long long birth_cap = 10'000;
  int workers = 1;
  double bracket_tol = 1e-6;
};

// Evenly spaced points from lo to hi, snapped to 12 decimals so grid
// values like 0.25 are exact.
std::vector<double> linspace_grid(double lo, double hi, int steps);

// Analytic classification per p (exact beta formula), alpha_c where the
// transition exists, mu per cell, and optional Monte Carlo survival.
PhaseGrid phase_sweep(const PhaseParams& params);

}  // namespace bmc
