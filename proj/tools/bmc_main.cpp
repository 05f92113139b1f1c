// bmc: survival phase transitions of branching Markov chains.
//
// Subcommands: returns, alpha-c, simulate, phase, offspring.
// Structured results go to stdout as JSON; --out writes series/grid files
// plus a manifest with digests. Exit codes: 0 ok, 2 bad input, 3 budget.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bmc/criticality.hpp"
#include "bmc/io.hpp"
#include "bmc/monte_carlo.hpp"
#include "bmc/phase.hpp"
#include "bmc/return_series.hpp"
#include "bmc/version.hpp"

namespace {

using nlohmann::json;

// Accepts inline JSON (leading '{') or a path to a JSON file.
bmc::ChainSpec load_chain(const std::string& arg) {
  std::string text = arg;
  if (text.empty() || text[0] != '{') {
    std::ifstream is(arg);
    if (!is) throw bmc::InvalidChain("cannot read chain file: " + arg);
    std::ostringstream buf;
    buf << is.rdbuf();
    text = buf.str();
  }
  return bmc::chain_from_json(text);
}

int default_n_max(const bmc::ChainSpec& chain) {
  switch (chain.kind()) {
    case bmc::ChainKind::biased_walk_z:
      return 2000;
    case bmc::ChainKind::simple_walk_zd:
      switch (chain.lattice().d) {
        case 1:
          return 2000;
        case 2:
          return 600;
        case 3:
          return 60;
        default:
          return 40;
      }
    case bmc::ChainKind::finite:
      return 2000;
  }
  return 2000;
}

bmc::TailKind parse_tail_mode(const std::string& mode,
                              const bmc::ChainSpec& chain) {
  if (mode == "auto") return bmc::auto_tail_kind(chain);
  if (mode == "none") return bmc::TailKind::none;
  if (mode == "geometric") return bmc::TailKind::geometric;
  if (mode == "power") return bmc::TailKind::power_law;
  throw bmc::DomainError("unknown tail mode: " + mode);
}

std::pair<int, int> parse_range_int(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw bmc::DomainError("expected lo:hi, got " + text);
  try {
    return {std::stoi(text.substr(0, colon)),
            std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw bmc::DomainError("expected integer lo:hi, got " + text);
  }
}

std::pair<double, double> parse_range_double(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw bmc::DomainError("expected lo:hi, got " + text);
  try {
    return {std::stod(text.substr(0, colon)),
            std::stod(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw bmc::DomainError("expected numeric lo:hi, got " + text);
  }
}

// Fits the requested family, falling back to none if the series cannot
// support a fit (degenerate walks, all-zero tails).
bmc::TailModel fit_or_none(const bmc::ReturnSeries& series,
                           bmc::TailKind kind, bmc::SeriesTarget target,
                           const std::string& window_arg) {
  if (kind == bmc::TailKind::none)
    return bmc::fit_tail(series, {1, series.n_max}, kind, target);
  std::pair<int, int> window = window_arg.empty()
                                   ? bmc::default_fit_window(series, target)
                                   : parse_range_int(window_arg);
  try {
    return bmc::fit_tail(series, window, kind, target);
  } catch (const bmc::InsufficientData&) {
  } catch (const bmc::DegenerateFit&) {
  }
  return bmc::fit_tail(series, {1, series.n_max}, bmc::TailKind::none, target);
}

// Output directory collector; files are digested into the manifest.
struct OutDir {
  std::filesystem::path dir;
  std::vector<std::pair<std::string, std::string>> outputs;
  bool enabled = false;

  explicit OutDir(const std::string& path) {
    if (path.empty()) return;
    enabled = true;
    dir = path;
    std::filesystem::create_directories(dir);
  }

  void write(const std::string& name, const std::string& content) {
    if (!enabled) return;
    bmc::write_text_file((dir / name).string(), content);
    outputs.emplace_back(name, bmc::fnv1a64_hex(content));
  }

  void finish(const bmc::RunManifest& base) {
    if (!enabled) return;
    bmc::RunManifest m = base;
    m.version = bmc::kVersion;
    m.timestamp = bmc::iso8601_utc_now();
    m.outputs = outputs;
    bmc::write_text_file((dir / "manifest.json").string(),
                         bmc::manifest_to_json(m).dump(2) + "\n");
  }
};

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

// JSON flavor of CLI11's config file support; command line wins over
// config values, per the library's normal precedence.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool,
                        std::string) const override {
    return "{}\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::FileError(std::string("config JSON: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    add_items(j, {}, items);
    return items;
  }

 private:
  static void add_items(const json& j, std::vector<std::string> parents,
                        std::vector<CLI::ConfigItem>& items) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it->is_object()) {
        auto sub = parents;
        sub.push_back(it.key());
        add_items(*it, sub, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = it.key();
      if (it->is_string())
        item.inputs = {it->get<std::string>()};
      else if (it->is_boolean())
        item.inputs = {it->get<bool>() ? "true" : "false"};
      else
        item.inputs = {it->dump()};
      items.push_back(std::move(item));
    }
  }
};

struct CommonArgs {
  std::string chain_arg;
  int n_max = 0;  // 0: chain-dependent default
  std::string tail_mode = "auto";
  std::string window;
  std::string out_path;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_tail = true) {
  cmd->add_option("--chain", args.chain_arg,
                  "chain JSON (inline or a file path)")
      ->required();
  cmd->add_option("--n-max", args.n_max,
                  "series length (default: chain-dependent)");
  if (with_tail) {
    cmd->add_option("--tail", args.tail_mode,
                    "tail family: auto|none|geometric|power")
        ->check(CLI::IsMember({"auto", "none", "geometric", "power"}));
    cmd->add_option("--window", args.window, "fit window lo:hi (series index)");
  }
  cmd->add_option("--out", args.out_path, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"survival phase transitions of branching Markov chains"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with default flag values");
  app.set_version_flag("--version", bmc::kVersion);

  const std::string command_line = join_args(argc, argv);

  // returns ----------------------------------------------------------
  auto* cmd_returns = app.add_subcommand(
      "returns", "return/first-return series, beta and Green-sum estimates");
  cmd_returns->configurable();
  cmd_returns->fallthrough();
  CommonArgs ret_args;
  add_common(cmd_returns, ret_args);
  cmd_returns->callback([&] {
    const bmc::ChainSpec chain = load_chain(ret_args.chain_arg);
    const int n_max =
        ret_args.n_max > 0 ? ret_args.n_max : default_n_max(chain);
    const bmc::ReturnSeries series =
        bmc::first_return_inversion(bmc::return_probabilities_dp(chain, n_max));
    const bmc::TailKind kind = parse_tail_mode(ret_args.tail_mode, chain);
    const bmc::TailModel f_tail =
        fit_or_none(series, kind, bmc::SeriesTarget::f, ret_args.window);
    const bmc::TailModel p_tail =
        fit_or_none(series, kind, bmc::SeriesTarget::p, ret_args.window);
    const bmc::BetaEstimate beta = bmc::beta_from_f(series, f_tail);
    const bmc::GreenSum green = bmc::green_sum(series, p_tail);

    json sidecar = bmc::beta_green_to_json(beta, green);
    sidecar["chain"] = json::parse(bmc::chain_to_json(chain));
    sidecar["n_max"] = n_max;
    sidecar["tail_f"] = bmc::tail_to_json(f_tail);
    sidecar["tail_p"] = bmc::tail_to_json(p_tail);

    std::ostringstream csv;
    bmc::write_series_csv(series, csv);

    OutDir out(ret_args.out_path);
    out.write("series.csv", csv.str());
    out.write("beta.json", sidecar.dump(2) + "\n");
    out.finish({command_line, bmc::chain_to_json(chain), n_max, std::nullopt,
                "", "", {}});
    std::cout << sidecar.dump(2) << "\n";
    if (out.enabled) std::cerr << "returns: wrote " << out.dir << "\n";
  });

  // alpha-c ----------------------------------------------------------
  auto* cmd_alpha = app.add_subcommand(
      "alpha-c", "criticality report: regime and critical death parameter");
  cmd_alpha->configurable();
  cmd_alpha->fallthrough();
  CommonArgs ac_args;
  double ac_tol = 1e-6;
  add_common(cmd_alpha, ac_args);
  cmd_alpha->add_option("--tol", ac_tol, "bisection bracket width");
  cmd_alpha->callback([&] {
    const bmc::ChainSpec chain = load_chain(ac_args.chain_arg);
    const int n_max = ac_args.n_max > 0 ? ac_args.n_max : default_n_max(chain);
    const bmc::ReturnSeries series =
        bmc::first_return_inversion(bmc::return_probabilities_dp(chain, n_max));
    const bmc::TailKind kind = parse_tail_mode(ac_args.tail_mode, chain);
    const bmc::TailModel p_tail =
        fit_or_none(series, kind, bmc::SeriesTarget::p, ac_args.window);

    bmc::BetaEstimate beta;
    if (auto exact = bmc::exact_return_beta(chain)) {
      beta.method = bmc::BetaEstimate::Method::exact_formula;
      beta.value = beta.lower_bound = *exact;
      beta.uncertainty = 0.0;
    } else {
      const bmc::TailModel f_tail =
          fit_or_none(series, kind, bmc::SeriesTarget::f, ac_args.window);
      beta = bmc::beta_from_f(series, f_tail);
    }

    const bmc::CriticalityReport report =
        bmc::criticality_report(series, p_tail, beta, ac_tol);
    const json j = bmc::criticality_to_json(report);

    OutDir out(ac_args.out_path);
    out.write("report.json", j.dump(2) + "\n");
    out.finish({command_line, bmc::chain_to_json(chain), n_max, std::nullopt,
                "", "", {}});
    std::cout << j.dump(2) << "\n";
  });

  // simulate ---------------------------------------------------------
  auto* cmd_sim = app.add_subcommand(
      "simulate", "Monte Carlo survival estimate for the branching process");
  cmd_sim->configurable();
  cmd_sim->fallthrough();
  std::string sim_chain, sim_out;
  double sim_alpha = 0.0;
  long long sim_trials = 10'000;
  long long sim_birth_cap = 10'000;
  long long sim_max_steps = 1'000'000;
  long long sim_horizon = 1'000'000'000;
  std::uint64_t sim_seed = 0;
  int sim_workers = 4;
  bool sim_trial_log = false;
  cmd_sim->add_option("--chain", sim_chain, "chain JSON (inline or path)")
      ->required();
  cmd_sim->add_option("--alpha", sim_alpha, "survival parameter in (0,1]")
      ->required();
  cmd_sim->add_option("--trials", sim_trials, "independent trials");
  cmd_sim->add_option("--seed", sim_seed, "RNG seed (required)")->required();
  cmd_sim->add_option("--birth-cap", sim_birth_cap,
                      "births before declaring survival");
  cmd_sim->add_option("--max-steps", sim_max_steps,
                      "per-individual step cap");
  cmd_sim->add_option("--horizon", sim_horizon,
                      "total-step censoring horizon");
  cmd_sim->add_option("--workers", sim_workers, "worker threads");
  cmd_sim->add_flag("--trial-log", sim_trial_log,
                    "write per-trial JSON lines (needs --out)");
  cmd_sim->add_option("--out", sim_out, "output directory");
  cmd_sim->callback([&] {
    bmc::SimConfig cfg;
    cfg.chain = load_chain(sim_chain);
    cfg.alpha = sim_alpha;
    cfg.trials = sim_trials;
    cfg.birth_cap = sim_birth_cap;
    cfg.max_steps_per_individual = sim_max_steps;
    cfg.time_horizon = sim_horizon;
    cfg.seed = sim_seed;
    cfg.workers = sim_workers;

    std::vector<bmc::TrialOutcome> outcomes;
    const bmc::SurvivalEstimate est = bmc::estimate_survival(
        cfg, sim_trial_log ? &outcomes : nullptr);
    const json j = bmc::survival_to_json(est, cfg);

    OutDir out(sim_out);
    out.write("survival.json", j.dump(2) + "\n");
    if (sim_trial_log) {
      std::string lines;
      for (std::size_t i = 0; i < outcomes.size(); ++i)
        lines += bmc::trial_to_json((long long)i, outcomes[i]).dump() + "\n";
      out.write("trials.jsonl", lines);
    }
    out.finish({command_line, bmc::chain_to_json(cfg.chain), 0, sim_seed, "",
                "", {}});
    std::cout << j.dump(2) << "\n";
  });

  // phase ------------------------------------------------------------
  auto* cmd_phase = app.add_subcommand(
      "phase", "(p, alpha) phase diagram for the biased walk family");
  cmd_phase->configurable();
  cmd_phase->fallthrough();
  std::string ph_prange = "0.05:0.95", ph_arange = "0.5:0.99", ph_out;
  bmc::PhaseParams ph;
  cmd_phase->add_option("--p-range", ph_prange, "p range lo:hi");
  cmd_phase->add_option("--alpha-range", ph_arange, "alpha range lo:hi");
  cmd_phase->add_option("--grid-steps", ph.grid_steps, "points per axis");
  cmd_phase->add_option("--trials-per-cell", ph.trials_per_cell,
                        "Monte Carlo trials per cell (0: analytic only)");
  cmd_phase->add_option("--seed", ph.seed, "RNG seed for cell simulations");
  bool ph_seed_set = false;
  cmd_phase->add_option("--n-max", ph.n_max, "series length per p");
  cmd_phase->add_option("--birth-cap", ph.birth_cap, "survival birth cap");
  cmd_phase->add_option("--workers", ph.workers, "worker threads");
  cmd_phase->add_option("--tol", ph.bracket_tol, "alpha_c bracket width");
  cmd_phase->add_option("--out", ph_out, "output directory");
  cmd_phase->callback([&] {
    ph_seed_set = cmd_phase->count("--seed") > 0;
    if (ph.trials_per_cell > 0 && !ph_seed_set)
      throw bmc::DomainError("--seed is required when --trials-per-cell > 0");
    std::tie(ph.p_lo, ph.p_hi) = parse_range_double(ph_prange);
    std::tie(ph.alpha_lo, ph.alpha_hi) = parse_range_double(ph_arange);

    const bmc::PhaseGrid grid = bmc::phase_sweep(ph);
    const json j = bmc::phase_to_json(grid);

    OutDir out(ph_out);
    out.write("phase.csv", bmc::phase_to_csv(grid));
    out.write("phase.json", j.dump(2) + "\n");
    out.finish({command_line, "", ph.n_max,
                ph_seed_set ? std::optional<std::uint64_t>(ph.seed)
                            : std::nullopt,
                "", "", {}});
    std::cout << j.dump(2) << "\n";
  });

  // offspring --------------------------------------------------------
  auto* cmd_off = app.add_subcommand(
      "offspring", "empirical offspring law vs. the geometric model");
  cmd_off->configurable();
  cmd_off->fallthrough();
  CommonArgs off_args;
  double off_alpha = 0.0;
  long long off_samples = 100'000;
  std::uint64_t off_seed = 0;
  add_common(cmd_off, off_args);
  cmd_off->add_option("--alpha", off_alpha, "survival parameter in (0,1]")
      ->required();
  cmd_off->add_option("--samples", off_samples, "individuals to sample");
  cmd_off->add_option("--seed", off_seed, "RNG seed (required)")->required();
  cmd_off->callback([&] {
    const bmc::ChainSpec chain = load_chain(off_args.chain_arg);
    const int n_max =
        off_args.n_max > 0 ? off_args.n_max : default_n_max(chain);

    const bmc::OffspringHistogram hist =
        bmc::sample_offspring_counts(chain, off_alpha, off_samples, off_seed);

    const bmc::ReturnSeries series =
        bmc::first_return_inversion(bmc::return_probabilities_dp(chain, n_max));
    const bmc::TailKind kind = parse_tail_mode(off_args.tail_mode, chain);
    const bmc::TailModel p_tail =
        fit_or_none(series, kind, bmc::SeriesTarget::p, off_args.window);
    const bmc::GenFunEval ev = bmc::mu_of_alpha(series, p_tail, off_alpha);
    const double b = ev.F.value_or(0.0);

    double mean = 0.0;
    for (std::size_t jj = 0; jj < hist.counts.size(); ++jj)
      mean += double(jj) * double(hist.counts[jj]);
    mean /= double(hist.samples);

    json j{{"alpha", off_alpha},
           {"samples", hist.samples},
           {"b_analytic", b},
           {"tv_distance", bmc::total_variation(hist, b)},
           {"mean_returns", mean},
           {"mean_model", b < 1.0 ? b / (1.0 - b) : 0.0},
           {"seed", off_seed}};

    OutDir out(off_args.out_path);
    out.write("histogram.csv", bmc::histogram_to_csv(hist));
    out.write("fit.json", j.dump(2) + "\n");
    out.finish({command_line, bmc::chain_to_json(chain), n_max, off_seed, "",
                "", {}});
    std::cout << j.dump(2) << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const bmc::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const bmc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
