#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bmc/criticality.hpp"
#include "bmc/monte_carlo.hpp"
#include "bmc/phase.hpp"
#include "bmc/return_series.hpp"

namespace bmc {

// 17 significant digits: round-trips any double, the golden-file format.
std::string format_g17(double x);

std::string iso8601_utc_now();

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

nlohmann::json beta_to_json(const BetaEstimate& beta);

nlohmann::json tail_to_json(const TailModel& tail);

// Combined beta + Green record:
// {lower_bound, value, uncertainty, method, G, verdict}
nlohmann::json beta_green_to_json(const BetaEstimate& beta,
                                  const GreenSum& green);

// {beta:{...}, mu_at_one: number|"inf", regime, alpha_c: number|null,
//  bracket:[lo,hi], marginal}
nlohmann::json criticality_to_json(const CriticalityReport& report);

nlohmann::json survival_to_json(const SurvivalEstimate& estimate,
                                const SimConfig& config);

// JSON-lines record for one trial.
nlohmann::json trial_to_json(long long index, const TrialOutcome& outcome);

nlohmann::json phase_to_json(const PhaseGrid& grid);
std::string phase_to_csv(const PhaseGrid& grid);

// CSV "j,count".
std::string histogram_to_csv(const OffspringHistogram& hist);

std::string regime_name(Regime regime);
std::string method_name(BetaEstimate::Method method);
std::string verdict_name(GreenSum::Verdict verdict);
std::string status_name(TrialOutcome::Status status);

// Everything needed to reproduce a run, plus digests of what it wrote.
struct RunManifest {
  std::string command_line;
  std::string chain_json;
  long long n_max = 0;
  std::optional<std::uint64_t> seed;
  std::string version;
  std::string timestamp;
  std::vector<std::pair<std::string, std::string>> outputs;  // file, digest
};

nlohmann::json manifest_to_json(const RunManifest& manifest);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace bmc
