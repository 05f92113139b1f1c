#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bmc/errors.hpp"
#include "bmc/rng.hpp"

namespace bmc {

// Chain state: an integer coordinate tuple for lattice chains (length d),
// or a single state index for finite chains. Inline storage, compared
// lexicographically, which fixes the deterministic output ordering.
class State {
 public:
  State() = default;
  State(std::initializer_list<std::int32_t> cs) {
    for (std::int32_t c : cs) push_back(c);
  }

  static State zeros(int dim) {
    State s;
    for (int i = 0; i < dim; ++i) s.push_back(0);
    return s;
  }
  static State index(std::int32_t i) { return State{i}; }

  int size() const { return n_; }
  std::int32_t operator[](int i) const { return c_[std::size_t(i)]; }
  std::int32_t& operator[](int i) { return c_[std::size_t(i)]; }

  void push_back(std::int32_t v) { c_[std::size_t(n_++)] = v; }

  friend auto operator<=>(const State&, const State&) = default;

 private:
  std::array<std::int32_t, 4> c_{};
  std::int8_t n_ = 0;
};

// Nearest-neighbour walk on Z with right-step probability p. p in {0,1}
// is accepted but flagged degenerate: the walk never revisits its start.
struct BiasedWalkZ {
  double p = 0.5;
  bool degenerate = false;
};

// Simple symmetric random walk on Z^d, each of the 2d moves at 1/(2d).
struct SimpleWalkZd {
  int d = 1;
};

// Finite irreducible stochastic matrix with a distinguished origin state.
struct FiniteStochastic {
  int n_states = 0;
  int origin = 0;
  std::vector<double> rows;     // row-major, n_states * n_states
  std::vector<double> row_cdf;  // per-row cumulative sums, for sampling

  double at(int i, int j) const {
    return rows[std::size_t(i) * std::size_t(n_states) + std::size_t(j)];
  }
};

enum class ChainKind { biased_walk_z, simple_walk_zd, finite };

// Immutable chain definition. Values are safe to share across workers.
class ChainSpec {
 public:
  using Variant = std::variant<BiasedWalkZ, SimpleWalkZd, FiniteStochastic>;

  ChainSpec() : v_(BiasedWalkZ{}) {}
  explicit ChainSpec(Variant v) : v_(std::move(v)) {}

  ChainKind kind() const {
    return static_cast<ChainKind>(v_.index());
  }
  const Variant& value() const { return v_; }

  const BiasedWalkZ& biased() const { return std::get<BiasedWalkZ>(v_); }
  const SimpleWalkZd& lattice() const { return std::get<SimpleWalkZd>(v_); }
  const FiniteStochastic& finite() const {
    return std::get<FiniteStochastic>(v_);
  }

  // 0 for finite chains, d otherwise.
  int lattice_dim() const;
  State origin() const;
  bool degenerate() const;
  bool valid_state(const State& s) const;

 private:
  Variant v_;
};

ChainSpec make_biased_walk(double p);
ChainSpec make_simple_walk(int d);
ChainSpec make_finite(const std::vector<std::vector<double>>& rows,
                      int origin);

// One-step law from s, positive-probability moves only, sorted by state.
// Masses sum to 1 within 1e-12.
std::vector<std::pair<State, double>> step_distribution(const ChainSpec& chain,
                                                        const State& s);

// Draws one transition from s; consumes exactly one uniform.
State step_sample(const ChainSpec& chain, const State& s, Rng& rng);

// Closed-form return probability where one is known: 1-|1-2p| for the
// biased walk, 1 for finite chains and for Z^1, Z^2. Absent for Z^d, d>=3.
std::optional<double> exact_return_beta(const ChainSpec& chain);

// Wire format used by the CLI --chain flag:
//   {"kind":"biased_walk_z","p":0.5}
//   {"kind":"simple_walk_zd","d":3}
//   {"kind":"finite","rows":[[...],...],"origin":0}
ChainSpec chain_from_json(const std::string& text);
std::string chain_to_json(const ChainSpec& chain);

}  // namespace bmc
