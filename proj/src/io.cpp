#include "bmc/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "bmc/version.hpp"

namespace bmc {

namespace {

nlohmann::json number_or_inf(double x) {
  if (std::isinf(x)) return "inf";
  return x;
}

}  // namespace

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string iso8601_utc_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                (unsigned long long)fnv1a64(bytes));
  return buf;
}

std::string regime_name(Regime regime) {
  return regime == Regime::transition ? "transition" : "no_survival";
}

std::string method_name(BetaEstimate::Method method) {
  switch (method) {
    case BetaEstimate::Method::exact_formula:
      return "exact_formula";
    case BetaEstimate::Method::series_tail:
      return "series_tail";
    case BetaEstimate::Method::finite_chain:
      return "finite_chain";
  }
  return "series_tail";
}

std::string verdict_name(GreenSum::Verdict verdict) {
  switch (verdict) {
    case GreenSum::Verdict::recurrent:
      return "recurrent";
    case GreenSum::Verdict::transient:
      return "transient";
    case GreenSum::Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

std::string status_name(TrialOutcome::Status status) {
  switch (status) {
    case TrialOutcome::Status::extinct:
      return "extinct";
    case TrialOutcome::Status::survived_by_cap:
      return "survived_by_cap";
    case TrialOutcome::Status::censored_at_horizon:
      return "censored_at_horizon";
  }
  return "extinct";
}

nlohmann::json beta_to_json(const BetaEstimate& beta) {
  return nlohmann::json{{"lower_bound", beta.lower_bound},
                        {"value", beta.value},
                        {"uncertainty", beta.uncertainty},
                        {"method", method_name(beta.method)}};
}

nlohmann::json tail_to_json(const TailModel& tail) {
  nlohmann::json j;
  switch (tail.kind) {
    case TailKind::none:
      j["kind"] = "none";
      break;
    case TailKind::power_law:
      j["kind"] = "power_law";
      j["exponent"] = tail.exponent;
      j["coefficient"] = tail.coefficient;
      j["correction"] = tail.correction;
      break;
    case TailKind::geometric:
      j["kind"] = "geometric";
      j["ratio"] = tail.ratio;
      j["coefficient"] = tail.coefficient;
      j["correction"] = tail.correction;
      break;
  }
  j["target"] = tail.target == SeriesTarget::p ? "p" : "f";
  j["fit_window"] = {tail.fit_window.first, tail.fit_window.second};
  j["tail_mass"] = number_or_inf(tail.tail_mass);
  j["quality"] = tail.quality;
  j["uncertainty"] = number_or_inf(tail.uncertainty);
  return j;
}

nlohmann::json beta_green_to_json(const BetaEstimate& beta,
                                  const GreenSum& green) {
  nlohmann::json j = beta_to_json(beta);
  j["G"] = number_or_inf(green.G);
  j["verdict"] = verdict_name(green.verdict);
  if (green.beta_check) j["beta_check"] = *green.beta_check;
  return j;
}

nlohmann::json criticality_to_json(const CriticalityReport& report) {
  nlohmann::json j;
  j["beta"] = beta_to_json(report.beta);
  j["mu_at_one"] = number_or_inf(report.mu_at_one);
  j["regime"] = regime_name(report.regime);
  j["marginal"] = report.marginal;
  if (report.alpha_c) {
    j["alpha_c"] = *report.alpha_c;
    j["bracket"] = {report.bracket_lo, report.bracket_hi};
    j["bracket_width"] = report.bracket_width;
    j["truncation_at_alpha_c"] = report.truncation_at_alpha_c;
  } else {
    j["alpha_c"] = nullptr;
    j["bracket"] = nullptr;
  }
  return j;
}

nlohmann::json survival_to_json(const SurvivalEstimate& estimate,
                                const SimConfig& config) {
  return nlohmann::json{
      {"trials", estimate.trials},
      {"survived", estimate.survived},
      {"censored", estimate.censored},
      {"survived_fraction", estimate.survived_fraction},
      {"censored_fraction", estimate.censored_fraction},
      {"wilson_interval", {estimate.wilson_lo, estimate.wilson_hi}},
      {"alpha", config.alpha},
      {"birth_cap", config.birth_cap},
      {"max_steps_per_individual", config.max_steps_per_individual},
      {"time_horizon", config.time_horizon},
      {"seed", config.seed}};
}

nlohmann::json trial_to_json(long long index, const TrialOutcome& outcome) {
  return nlohmann::json{{"trial", index},
                        {"status", status_name(outcome.status)},
                        {"births", outcome.total_births},
                        {"peak_pop", outcome.peak_population},
                        {"steps", outcome.steps_executed}};
}

nlohmann::json phase_to_json(const PhaseGrid& grid) {
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t ip = 0; ip < grid.p_values.size(); ++ip) {
    for (std::size_t ia = 0; ia < grid.alpha_values.size(); ++ia) {
      const PhaseCell& c = grid.at(ip, ia);
      nlohmann::json jc{{"p", grid.p_values[ip]},
                        {"alpha", grid.alpha_values[ia]},
                        {"regime", regime_name(c.regime)},
                        {"marginal", c.marginal},
                        {"mu", c.mu}};
      jc["alpha_c"] = c.alpha_c ? nlohmann::json(*c.alpha_c)
                                : nlohmann::json(nullptr);
      jc["mc_survival"] = c.mc_survival ? nlohmann::json(*c.mc_survival)
                                        : nlohmann::json(nullptr);
      cells.push_back(std::move(jc));
    }
  }
  return nlohmann::json{{"p_values", grid.p_values},
                        {"alpha_values", grid.alpha_values},
                        {"cells", std::move(cells)}};
}

std::string phase_to_csv(const PhaseGrid& grid) {
  std::ostringstream os;
  os << "p,alpha,regime,marginal,alpha_c,mu,mc_survival\n";
  for (std::size_t ip = 0; ip < grid.p_values.size(); ++ip) {
    for (std::size_t ia = 0; ia < grid.alpha_values.size(); ++ia) {
      const PhaseCell& c = grid.at(ip, ia);
      os << format_g17(grid.p_values[ip]) << ','
         << format_g17(grid.alpha_values[ia]) << ',' << regime_name(c.regime)
         << ',' << (c.marginal ? 1 : 0) << ',';
      if (c.alpha_c) os << format_g17(*c.alpha_c);
      os << ',' << format_g17(c.mu) << ',';
      if (c.mc_survival) os << format_g17(*c.mc_survival);
      os << '\n';
    }
  }
  return os.str();
}

std::string histogram_to_csv(const OffspringHistogram& hist) {
  std::ostringstream os;
  os << "j,count\n";
  for (std::size_t j = 0; j < hist.counts.size(); ++j)
    os << j << ',' << hist.counts[j] << '\n';
  return os.str();
}

nlohmann::json manifest_to_json(const RunManifest& manifest) {
  nlohmann::json outputs = nlohmann::json::object();
  for (const auto& [file, digest] : manifest.outputs) outputs[file] = digest;
  nlohmann::json j{{"command_line", manifest.command_line},
                   {"chain", manifest.chain_json},
                   {"n_max", manifest.n_max},
                   {"version", manifest.version},
                   {"timestamp", manifest.timestamp},
                   {"outputs", std::move(outputs)}};
  j["seed"] = manifest.seed ? nlohmann::json(*manifest.seed)
                            : nlohmann::json(nullptr);
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << content;
  if (!os) throw Error("write failed: " + path);
}

}  // namespace bmc
