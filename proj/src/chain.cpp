#include "bmc/chain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include <nlohmann/json.hpp>

namespace bmc {

namespace {

// Strong connectivity of the positive-entry digraph: every state reachable
// from 0 and 0 reachable from every state.
bool strongly_connected(const FiniteStochastic& m) {
  const int n = m.n_states;
  auto bfs = [&](bool forward) {
    std::vector<char> seen(std::size_t(n), 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int count = 1;
    while (!queue.empty()) {
      int x = queue.front();
      queue.pop_front();
      for (int y = 0; y < n; ++y) {
        double w = forward ? m.at(x, y) : m.at(y, x);
        if (w > 0.0 && !seen[std::size_t(y)]) {
          seen[std::size_t(y)] = 1;
          ++count;
          queue.push_back(y);
        }
      }
    }
    return count == n;
  };
  return bfs(true) && bfs(false);
}

void build_row_cdf(FiniteStochastic& m) {
  const int n = m.n_states;
  m.row_cdf.assign(std::size_t(n) * std::size_t(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      acc += m.at(i, j);
      m.row_cdf[std::size_t(i) * std::size_t(n) + std::size_t(j)] = acc;
    }
    // last entry pinned so the sampling scan always terminates
    m.row_cdf[std::size_t(i) * std::size_t(n) + std::size_t(n - 1)] = 1.0;
  }
}

}  // namespace

int ChainSpec::lattice_dim() const {
  switch (kind()) {
    case ChainKind::biased_walk_z:
      return 1;
    case ChainKind::simple_walk_zd:
      return lattice().d;
    case ChainKind::finite:
      return 0;
  }
  return 0;
}

State ChainSpec::origin() const {
  if (kind() == ChainKind::finite)
    return State::index(std::int32_t(finite().origin));
  return State::zeros(lattice_dim());
}

bool ChainSpec::degenerate() const {
  return kind() == ChainKind::biased_walk_z && biased().degenerate;
}

bool ChainSpec::valid_state(const State& s) const {
  if (kind() == ChainKind::finite)
    return s.size() == 1 && s[0] >= 0 && s[0] < finite().n_states;
  return s.size() == lattice_dim();
}

ChainSpec make_biased_walk(double p) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0)
    throw InvalidChain("biased walk: p must be a finite probability in [0,1]");
  return ChainSpec(BiasedWalkZ{p, p == 0.0 || p == 1.0});
}

ChainSpec make_simple_walk(int d) {
  if (d < 1) throw InvalidChain("simple walk: dimension must be >= 1");
  if (d > 4)
    throw InvalidChain(
        "simple walk: dimension capped at 4 (return-series memory budget)");
  return ChainSpec(SimpleWalkZd{d});
}

ChainSpec make_finite(const std::vector<std::vector<double>>& rows,
                      int origin) {
  const int n = int(rows.size());
  if (n < 1) throw InvalidChain("finite chain: empty matrix");
  if (origin < 0 || origin >= n)
    throw InvalidChain("finite chain: origin out of range");

  FiniteStochastic m;
  m.n_states = n;
  m.origin = origin;
  m.rows.assign(std::size_t(n) * std::size_t(n), 0.0);
  for (int i = 0; i < n; ++i) {
    if (int(rows[std::size_t(i)].size()) != n)
      throw InvalidChain("finite chain: matrix must be square");
    for (double v : rows[std::size_t(i)]) {
      if (!std::isfinite(v))
        throw NegativeEntry("finite chain: non-finite entry");
      if (v < 0.0) throw NegativeEntry("finite chain: negative entry");
    }
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      double v = rows[std::size_t(i)][std::size_t(j)];
      if (v > 1.0) throw RowSumError("finite chain: entry above 1");
      m.rows[std::size_t(i) * std::size_t(n) + std::size_t(j)] = v;
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      std::ostringstream msg;
      msg << "finite chain: row " << i << " sums to " << sum;
      throw RowSumError(msg.str());
    }
  }
  if (!strongly_connected(m))
    throw NotIrreducible("finite chain: matrix is not irreducible");
  build_row_cdf(m);
  return ChainSpec(std::move(m));
}

std::vector<std::pair<State, double>> step_distribution(const ChainSpec& chain,
                                                        const State& s) {
  if (!chain.valid_state(s)) throw InvalidState("state does not fit chain");
  std::vector<std::pair<State, double>> out;
  switch (chain.kind()) {
    case ChainKind::biased_walk_z: {
      const double p = chain.biased().p;
      State left = s, right = s;
      left[0] -= 1;
      right[0] += 1;
      if (1.0 - p > 0.0) out.emplace_back(left, 1.0 - p);
      if (p > 0.0) out.emplace_back(right, p);
      break;
    }
    case ChainKind::simple_walk_zd: {
      const int d = chain.lattice().d;
      const double w = 1.0 / (2.0 * d);
      for (int a = 0; a < d; ++a) {
        for (int dir : {-1, +1}) {
          State t = s;
          t[a] += dir;
          out.emplace_back(t, w);
        }
      }
      break;
    }
    case ChainKind::finite: {
      const auto& m = chain.finite();
      const int x = s[0];
      for (int y = 0; y < m.n_states; ++y)
        if (m.at(x, y) > 0.0) out.emplace_back(State::index(y), m.at(x, y));
      break;
    }
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

State step_sample(const ChainSpec& chain, const State& s, Rng& rng) {
  if (!chain.valid_state(s)) throw InvalidState("state does not fit chain");
  switch (chain.kind()) {
    case ChainKind::biased_walk_z: {
      State t = s;
      t[0] += rng.next_double() < chain.biased().p ? 1 : -1;
      return t;
    }
    case ChainKind::simple_walk_zd: {
      const int d = chain.lattice().d;
      int k = int(rng.next_double() * 2.0 * d);
      if (k >= 2 * d) k = 2 * d - 1;
      State t = s;
      t[k >> 1] += (k & 1) ? 1 : -1;
      return t;
    }
    case ChainKind::finite: {
      const auto& m = chain.finite();
      const double u = rng.next_double();
      const double* cdf =
          m.row_cdf.data() + std::size_t(s[0]) * std::size_t(m.n_states);
      int y = 0;
      while (y + 1 < m.n_states && u >= cdf[y]) ++y;
      return State::index(y);
    }
  }
  throw InvalidState("unreachable");
}

std::optional<double> exact_return_beta(const ChainSpec& chain) {
  switch (chain.kind()) {
    case ChainKind::biased_walk_z:
      return 1.0 - std::abs(1.0 - 2.0 * chain.biased().p);
    case ChainKind::simple_walk_zd:
      return chain.lattice().d <= 2 ? std::optional<double>(1.0)
                                    : std::nullopt;
    case ChainKind::finite:
      // finite irreducible chains are recurrent
      return 1.0;
  }
  return std::nullopt;
}

ChainSpec chain_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidChain(std::string("chain JSON: ") + e.what());
  }
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "biased_walk_z") return make_biased_walk(j.at("p").get<double>());
    if (kind == "simple_walk_zd") return make_simple_walk(j.at("d").get<int>());
    if (kind == "finite") {
      auto rows = j.at("rows").get<std::vector<std::vector<double>>>();
      int origin = j.value("origin", 0);
      return make_finite(rows, origin);
    }
    throw InvalidChain("chain JSON: unknown kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw InvalidChain(std::string("chain JSON: ") + e.what());
  }
}

std::string chain_to_json(const ChainSpec& chain) {
  nlohmann::json j;
  switch (chain.kind()) {
    case ChainKind::biased_walk_z:
      j = {{"kind", "biased_walk_z"}, {"p", chain.biased().p}};
      break;
    case ChainKind::simple_walk_zd:
      j = {{"kind", "simple_walk_zd"}, {"d", chain.lattice().d}};
      break;
    case ChainKind::finite: {
      const auto& m = chain.finite();
      std::vector<std::vector<double>> rows(std::size_t(m.n_states));
      for (int i = 0; i < m.n_states; ++i)
        for (int k = 0; k < m.n_states; ++k)
          rows[std::size_t(i)].push_back(m.at(i, k));
      j = {{"kind", "finite"}, {"rows", rows}, {"origin", m.origin}};
      break;
    }
  }
  return j.dump();
}

}  // namespace bmc
