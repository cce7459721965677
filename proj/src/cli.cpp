// Copyright 2026 The vepm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vepm/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <type_traits>

#include "CLI11.hpp"
#include "vepm/abstraction.hpp"
#include "vepm/error.hpp"
#include "vepm/estimation.hpp"
#include "vepm/experiments.hpp"

namespace vepm::cli {

namespace fs = std::filesystem;

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("invalid value '" + text + "' for " + key);
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("invalid boolean '" + text + "' for " + key);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

template <typename T>
std::string join_numbers(const std::vector<T>& items) {
  std::vector<std::string> text;
  for (const auto& v : items) text.push_back(std::to_string(v));
  return join(text);
}

void reject_unknown(const IniConfig& config, const std::string& section, const std::vector<std::string>& known) {
  const auto unknown = config.unknown_keys(section, known);
  if (!unknown.empty()) throw ConfigError("unknown key '" + unknown.front() + "' in section [" + section + "]");
}

const std::vector<std::string> kKnownSections = {"run",           "sw",           "planning",          "value_loss",
                                                 "planning_loss", "planning_time", "sample_complexity", "certify",
                                                 "bounds"};

// Manifest-only keys are accepted so a manifest can be fed back as a config.
const std::vector<std::string> kRunKeys = {"seed",   "runs",       "variant", "tool", "tool_version",
                                           "command", "config_path", "output_dir", "records"};

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  std::size_t runs = 0;
  std::string variant;
  std::string out;
  bool quiet = false;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* runs_opt = nullptr;
  CLI::Option* variant_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

struct Resolved {
  IniConfig file;
  std::string config_path;
  std::uint64_t seed = 0;
  exp::Variant variant = exp::Variant::kDet;
  sw::SwConfig env;
  PlanningConfig planning;
  fs::path out_dir;
};

void add_common(CLI::App* sub, Common& c, const std::string& default_variant, std::size_t default_runs) {
  sub->add_option("--config", c.config_path, "Config file (key=value with [section] headers)");
  c.seed_opt = sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  c.variant = default_variant;
  c.variant_opt = sub->add_option("--variant", c.variant, "Environment variant")
                      ->check(CLI::IsMember({"det", "stoch"}))
                      ->capture_default_str();
  c.out_opt = sub->add_option("--out", c.out,
                              std::string("Output directory (default: $") + kOutDirEnv + " or " + kDefaultOutDir + ")");
  if (default_runs > 0) {
    c.runs = default_runs;
    c.runs_opt = sub->add_option("--runs", c.runs, "Seeded runs per configuration")
                     ->check(CLI::PositiveNumber)
                     ->capture_default_str();
  }
  sub->add_flag("--quiet", c.quiet, "Suppress the per-run log");
}

PlanningConfig apply_planning_section(PlanningConfig cfg, const IniConfig& config) {
  reject_unknown(config, "planning", {"tol", "max_sweeps", "tie_break"});
  if (auto v = config.get("planning", "tol")) cfg.tol = parse_number<double>("planning.tol", *v);
  if (auto v = config.get("planning", "max_sweeps")) {
    cfg.max_sweeps = parse_number<std::size_t>("planning.max_sweeps", *v);
  }
  if (auto v = config.get("planning", "tie_break")) cfg.tie_break = parse_tie_break(*v);
  cfg.validate();
  return cfg;
}

Resolved resolve(const Common& c) {
  Resolved r;
  if (!c.config_path.empty()) {
    r.file = IniConfig::load(c.config_path);
    r.config_path = c.config_path;
  }
  for (const auto& [name, entries] : r.file.sections()) {
    if (std::find(kKnownSections.begin(), kKnownSections.end(), name) == kKnownSections.end()) {
      throw ConfigError("unknown config section [" + name + "]");
    }
  }
  reject_unknown(r.file, "run", kRunKeys);

  std::string variant = c.variant;
  if (auto v = r.file.get("run", "variant"); v && c.variant_opt->count() == 0) variant = *v;
  r.variant = exp::parse_variant(variant);

  r.seed = c.seed;
  if (auto v = r.file.get("run", "seed"); v && c.seed_opt->count() == 0) {
    r.seed = parse_number<std::uint64_t>("run.seed", *v);
  }
  r.env = apply_sw_section(exp::variant_config(r.variant), r.file);
  r.planning = apply_planning_section(PlanningConfig{}, r.file);

  if (c.out_opt->count() > 0) {
    r.out_dir = c.out;
  } else if (const char* env_dir = std::getenv(kOutDirEnv); env_dir != nullptr && *env_dir != '\0') {
    r.out_dir = env_dir;
  } else {
    r.out_dir = kDefaultOutDir;
  }
  return r;
}

std::size_t resolve_runs(const Common& c, const Resolved& r) {
  std::size_t runs = c.runs;
  if (auto v = r.file.get("run", "runs"); v && c.runs_opt->count() == 0) {
    runs = parse_number<std::size_t>("run.runs", *v);
  }
  if (runs < 1) throw ConfigError("runs must be at least 1");
  return runs;
}

std::vector<std::string> model_list(const IniConfig& config, const std::string& section,
                                    std::vector<std::string> fallback) {
  if (auto v = config.get(section, "models")) return split_list(*v);
  return fallback;
}

IniConfig manifest_base(const std::string& command, const Resolved& r, const std::string& records) {
  IniConfig m;
  m.set("run", "tool", "vepm");
  m.set("run", "tool_version", kToolVersion);
  m.set("run", "command", command);
  m.set("run", "config_path", r.config_path.empty() ? "none" : r.config_path);
  m.set("run", "seed", std::to_string(r.seed));
  m.set("run", "variant", exp::to_string(r.variant));
  m.set("run", "output_dir", r.out_dir.string());
  m.set("run", "records", records);
  for (const auto& [k, v] : r.env.describe()) m.set("sw", k, v);
  m.set("planning", "tol", exp::format_number(r.planning.tol));
  m.set("planning", "max_sweeps", std::to_string(r.planning.max_sweeps));
  m.set("planning", "tie_break", to_string(r.planning.tie_break));
  return m;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

void write_manifest(const fs::path& dir, const std::string& stem, const IniConfig& manifest) {
  fs::create_directories(dir);
  write_text(dir / (stem + ".manifest.ini"), manifest.to_string());
}

void write_records(const fs::path& path, const exp::Records& records) {
  exp::check_records(records);
  std::ostringstream text;
  exp::write_csv(text, records);
  write_text(path, text.str());
}

exp::Context make_context(const Resolved& r, const Common& c, std::ostream& err) {
  exp::Context ctx;
  ctx.master_seed = r.seed;
  ctx.planning = r.planning;
  if (!c.quiet) ctx.log = [&err](const std::string& line) { err << line << '\n'; };
  return ctx;
}

}  // namespace

sw::SwConfig apply_sw_section(sw::SwConfig cfg, const IniConfig& config) {
  const IniConfig::Entries* entries = config.section("sw");
  if (entries == nullptr) return cfg;
  for (const auto& [key, value] : *entries) {
    const std::string name = "sw." + key;
    if (key == "columns") {
      cfg.columns = parse_number<int>(name, value);
    } else if (key == "bush_columns") {
      cfg.bush_columns.clear();
      for (const auto& item : split_list(value)) cfg.bush_columns.push_back(parse_number<int>(name, item));
    } else if (key == "hawk_speed") {
      cfg.hawk_speed = parse_number<int>(name, value);
    } else if (key == "hawk_start_col") {
      cfg.hawk_start_col = parse_number<int>(name, value);
    } else if (key == "hawk_start_dir") {
      if (value != "left" && value != "right") throw ConfigError("sw.hawk_start_dir must be left or right");
      cfg.hawk_start_dir = value == "right" ? sw::kHawkRight : sw::kHawkLeft;
    } else if (key == "gamma") {
      cfg.gamma = parse_number<double>(name, value);
    } else if (key == "episode_limit") {
      cfg.episode_limit = parse_number<int>(name, value);
    } else if (key == "stochastic") {
      cfg.stochastic = parse_bool(name, value);
    } else if (key == "slip_prob") {
      cfg.slip_prob = parse_number<double>(name, value);
    } else if (key == "hawk_reverse_prob") {
      cfg.hawk_reverse_prob = parse_number<double>(name, value);
    } else if (key == "wind_flip_prob") {
      cfg.wind_flip_prob = parse_number<double>(name, value);
    } else if (key == "weather_flip_prob") {
      cfg.weather_flip_prob = parse_number<double>(name, value);
    } else if (key == "cloud_drift") {
      cfg.cloud_drift = sw::parse_cloud_drift(value);
    } else if (key == "reward") {
      cfg.reward = parse_number<double>(name, value);
    } else {
      throw ConfigError("unknown key '" + key + "' in section [sw]");
    }
  }
  cfg.validate();
  return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Value-equivalent partial models on Squirrel's World", "vepm"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  const exp::PlanningLossConfig pl_defaults;
  const exp::PlanningTimeConfig pt_defaults;
  const exp::SampleComplexityConfig sc_defaults;

  Common c_vl, c_pl, c_pt, c_sc, c_cert;
  auto* vl = app.add_subcommand("value-loss", "Value loss of the m1..m4 abstractions");
  add_common(vl, c_vl, "det", 0);

  auto* pl = app.add_subcommand("planning-loss", "Certainty-equivalence planning loss of m4..m7");
  add_common(pl, c_pl, "stoch", pl_defaults.runs);
  std::vector<std::uint64_t> n_values = pl_defaults.n_values;
  auto* n_opt = pl->add_option("--n", n_values, "Samples per state-action pair")->delimiter(',')->capture_default_str();

  auto* pt = app.add_subcommand("planning-time", "Cost of one value-iteration sweep for m4..m7");
  add_common(pt, c_pt, "det", pt_defaults.runs);

  auto* sc = app.add_subcommand("sample-complexity", "Learning curves of count-based agents (m4 vs m7)");
  add_common(sc, c_sc, "det", sc_defaults.runs);
  std::size_t episodes = sc_defaults.episodes;
  auto* episodes_opt = sc->add_option("--episodes", episodes, "Episodes per run")
                           ->check(CLI::PositiveNumber)
                           ->capture_default_str();
  std::string unvisited = exp::to_string(sc_defaults.unvisited);
  auto* unvisited_opt = sc->add_option("--unvisited", unvisited, "Model of never-tried state-action pairs")
                            ->check(CLI::IsMember({"optimistic", "neutral"}))
                            ->capture_default_str();

  auto* cert = app.add_subcommand("certify", "Check value equivalence and minimality of a catalog subset");
  add_common(cert, c_cert, "det", 0);
  std::string cert_model;
  auto* cert_model_opt = cert->add_option("model", cert_model, "Catalog id m1..m7 (or [certify] model)");

  auto* bounds = app.add_subcommand("bounds", "Planning-loss bound or generative-model sample budget");
  int thm = 0;
  std::size_t states = 0;
  std::size_t actions = 0;
  double eps = BoundParams{}.epsilon;
  double gamma = sw::SwConfig{}.gamma;
  double delta = BoundParams{}.delta;
  std::uint64_t bound_n = 20;
  double r_max = sw::SwConfig{}.reward;
  double log_pi = -1.0;
  std::string bounds_out;
  std::string bounds_config;
  bool bounds_quiet = false;
  std::map<std::string, CLI::Option*> bound_opts;
  bound_opts["thm"] = bounds->add_option("--thm", thm, "2: planning-loss bound, 3: sample budget (N, k)");
  bound_opts["states"] = bounds->add_option("--states", states, "Number of states |F|");
  bound_opts["actions"] = bounds->add_option("--actions", actions, "Number of actions |A|");
  bound_opts["eps"] = bounds->add_option("--eps", eps, "Target accuracy (budget)")->capture_default_str();
  bound_opts["gamma"] = bounds->add_option("--gamma", gamma, "Discount")->capture_default_str();
  bound_opts["delta"] = bounds->add_option("--delta", delta, "Failure probability")->capture_default_str();
  bound_opts["n"] = bounds->add_option("--n", bound_n, "Samples per pair (bound)")->capture_default_str();
  bound_opts["r_max"] = bounds->add_option("--r-max", r_max, "Reward bound (bound)")->capture_default_str();
  bound_opts["log_policy_class"] = bounds->add_option(
      "--log-policy-class", log_pi, "Natural log of the policy-class size (bound; default |F| log |A|)");
  auto* bounds_out_opt = bounds->add_option("--out", bounds_out, "Output directory");
  bounds->add_option("--config", bounds_config, "INI file with a [bounds] section");
  bounds->add_flag("--quiet", bounds_quiet, "Accepted for symmetry; bounds prints no log");

  std::vector<std::string> argv_store{"vepm"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (vl->parsed()) {
      const Resolved r = resolve(c_vl);
      reject_unknown(r.file, "value_loss", {"models"});
      exp::ValueLossConfig cfg;
      cfg.models = model_list(r.file, "value_loss", cfg.models);
      cfg.validate();
      const std::string stem = "value_loss_" + exp::to_string(r.variant);
      IniConfig manifest = manifest_base("value-loss", r, stem + ".csv");
      manifest.set("value_loss", "models", join(cfg.models));
      write_manifest(r.out_dir, stem, manifest);
      const exp::Records records = exp::exp_value_loss(r.env, cfg, make_context(r, c_vl, err));
      write_records(r.out_dir / (stem + ".csv"), records);
      for (const auto& rec : records) out << rec.model_id << " value_loss=" << exp::format_number(rec.value) << '\n';
    } else if (pl->parsed()) {
      const Resolved r = resolve(c_pl);
      reject_unknown(r.file, "planning_loss", {"n_values", "models"});
      exp::PlanningLossConfig cfg;
      cfg.runs = resolve_runs(c_pl, r);
      cfg.models = model_list(r.file, "planning_loss", cfg.models);
      cfg.n_values = n_values;
      if (auto v = r.file.get("planning_loss", "n_values"); v && n_opt->count() == 0) {
        cfg.n_values.clear();
        for (const auto& item : split_list(*v)) {
          cfg.n_values.push_back(parse_number<std::uint64_t>("planning_loss.n_values", item));
        }
      }
      cfg.validate();
      const std::string stem = "planning_loss_" + exp::to_string(r.variant);
      IniConfig manifest = manifest_base("planning-loss", r, stem + ".csv");
      manifest.set("run", "runs", std::to_string(cfg.runs));
      manifest.set("planning_loss", "n_values", join_numbers(cfg.n_values));
      manifest.set("planning_loss", "models", join(cfg.models));
      write_manifest(r.out_dir, stem, manifest);
      const exp::Records records = exp::exp_planning_loss(r.env, cfg, make_context(r, c_pl, err));
      write_records(r.out_dir / (stem + ".csv"), records);
      for (const auto& rec : exp::select(records, "", "planning_loss_mean")) {
        out << rec.model_id << ' ' << rec.parameter << " mean_planning_loss=" << exp::format_number(rec.value)
            << '\n';
      }
    } else if (pt->parsed()) {
      const Resolved r = resolve(c_pt);
      reject_unknown(r.file, "planning_time", {"models"});
      exp::PlanningTimeConfig cfg;
      cfg.runs = resolve_runs(c_pt, r);
      cfg.models = model_list(r.file, "planning_time", cfg.models);
      cfg.validate();
      const std::string stem = "planning_time_" + exp::to_string(r.variant);
      IniConfig manifest = manifest_base("planning-time", r, stem + ".csv," + stem + "_timings.csv");
      manifest.set("run", "runs", std::to_string(cfg.runs));
      manifest.set("planning_time", "models", join(cfg.models));
      write_manifest(r.out_dir, stem, manifest);
      const exp::PlanningTimeResult result = exp::exp_planning_time(r.env, cfg, make_context(r, c_pt, err));
      write_records(r.out_dir / (stem + ".csv"), result.records);
      write_records(r.out_dir / (stem + "_timings.csv"), result.timings);
      for (const auto& id : cfg.models) {
        const auto counts = exp::select(result.records, id, "multiply_add_count");
        const auto mean = exp::select(result.timings, id, "wall_time_mean");
        out << id << " multiply_add_count=" << exp::format_number(counts.front().value)
            << " mean_wall_time=" << exp::format_number(mean.front().value) << '\n';
      }
    } else if (sc->parsed()) {
      const Resolved r = resolve(c_sc);
      const std::string section = "sample_complexity";
      reject_unknown(r.file, section,
                     {"episodes", "epsilon_start", "epsilon_end", "decay_episodes", "eval_interval", "eval_rollouts",
                      "threshold", "unvisited", "models"});
      exp::SampleComplexityConfig cfg;
      cfg.runs = resolve_runs(c_sc, r);
      cfg.models = model_list(r.file, section, cfg.models);
      auto size_key = [&](const char* key, std::size_t& field) {
        if (auto v = r.file.get(section, key)) field = parse_number<std::size_t>(section + "." + key, *v);
      };
      auto double_key = [&](const char* key, double& field) {
        if (auto v = r.file.get(section, key)) field = parse_number<double>(section + "." + key, *v);
      };
      size_key("episodes", cfg.episodes);
      const bool decay_set = r.file.get(section, "decay_episodes").has_value();
      size_key("decay_episodes", cfg.decay_episodes);
      size_key("eval_interval", cfg.eval_interval);
      size_key("eval_rollouts", cfg.eval_rollouts);
      double_key("epsilon_start", cfg.epsilon_start);
      double_key("epsilon_end", cfg.epsilon_end);
      double_key("threshold", cfg.threshold);
      if (auto v = r.file.get(section, "unvisited")) cfg.unvisited = exp::parse_unvisited_rule(*v);
      if (episodes_opt->count() > 0) cfg.episodes = episodes;
      if (unvisited_opt->count() > 0) cfg.unvisited = exp::parse_unvisited_rule(unvisited);
      // The exploration rate decays over the first half of the episodes unless set explicitly.
      if (!decay_set) cfg.decay_episodes = cfg.episodes / 2;
      cfg.validate();
      const std::string stem = "sample_complexity_" + exp::to_string(r.variant);
      IniConfig manifest = manifest_base("sample-complexity", r, stem + ".csv");
      manifest.set("run", "runs", std::to_string(cfg.runs));
      manifest.set(section, "episodes", std::to_string(cfg.episodes));
      manifest.set(section, "epsilon_start", exp::format_number(cfg.epsilon_start));
      manifest.set(section, "epsilon_end", exp::format_number(cfg.epsilon_end));
      manifest.set(section, "decay_episodes", std::to_string(cfg.decay_episodes));
      manifest.set(section, "eval_interval", std::to_string(cfg.eval_interval));
      manifest.set(section, "eval_rollouts", std::to_string(cfg.eval_rollouts));
      manifest.set(section, "threshold", exp::format_number(cfg.threshold));
      manifest.set(section, "unvisited", exp::to_string(cfg.unvisited));
      manifest.set(section, "models", join(cfg.models));
      write_manifest(r.out_dir, stem, manifest);
      const exp::Records records = exp::exp_sample_complexity(r.env, cfg, make_context(r, c_sc, err));
      write_records(r.out_dir / (stem + ".csv"), records);
      for (const auto& rec : exp::select(records, "", "episodes_to_threshold_median")) {
        out << rec.model_id << " median_episodes_to_threshold=" << exp::format_number(rec.value) << '\n';
      }
    } else if (cert->parsed()) {
      const Resolved r = resolve(c_cert);
      reject_unknown(r.file, "certify", {"model"});
      if (cert_model_opt->count() == 0) {
        const auto v = r.file.get("certify", "model");
        if (!v) throw ConfigError("certify needs a model id, on the command line or as [certify] model");
        cert_model = *v;
      }
      const FeatureSubset subset = sw::catalog_subset(cert_model);
      const std::string stem = "certify_" + cert_model + "_" + exp::to_string(r.variant);
      IniConfig manifest = manifest_base("certify", r, stem + ".csv");
      manifest.set("certify", "model", cert_model);
      write_manifest(r.out_dir, stem, manifest);
      const TabularModel full = sw::build_sw(r.env);
      const MinimalityReport report = check_minimal_value_equivalence(full, subset, 2 * r.planning.tol);
      const std::string variant = exp::to_string(r.variant);
      const std::string param = "tol=" + exp::format_number(2 * r.planning.tol);
      exp::Records records;
      records.push_back({"certify", cert_model, variant, r.seed, param, "value_loss", report.certificate.loss});
      records.push_back({"certify", cert_model, variant, r.seed, param, "value_equivalent",
                         report.certificate.value_equivalent ? 1.0 : 0.0});
      records.push_back({"certify", cert_model, variant, r.seed, param, "minimal", report.minimal ? 1.0 : 0.0});
      for (const auto& [feature, ve] : report.removals) {
        records.push_back({"certify", cert_model, variant, r.seed, param, "ve_without_" + feature, ve ? 1.0 : 0.0});
      }
      write_records(r.out_dir / (stem + ".csv"), records);
      out << "model=" << cert_model << " variant=" << variant << " subset=" << subset.to_string() << '\n';
      out << "VE=" << (report.certificate.value_equivalent ? "true" : "false")
          << " minimal=" << (report.minimal ? "true" : "false")
          << " value_loss=" << exp::format_number(report.certificate.loss) << '\n';
      for (const auto& [feature, ve] : report.removals) {
        out << "  without " << feature << ": VE=" << (ve ? "true" : "false") << '\n';
      }
    } else if (bounds->parsed()) {
      IniConfig file;
      if (!bounds_config.empty()) {
        file = IniConfig::load(bounds_config);
        for (const auto& [name, entries] : file.sections()) {
          if (name != "run" && name != "bounds") throw ConfigError("unknown section [" + name + "] for bounds");
        }
        reject_unknown(file, "run", kRunKeys);
        std::vector<std::string> known;
        for (const auto& [key, opt] : bound_opts) known.push_back(key);
        reject_unknown(file, "bounds", known);
      }
      const auto from_file = [&](const std::string& key, auto& target) {
        const auto v = file.get("bounds", key);
        if (v && bound_opts.at(key)->count() == 0) {
          target = parse_number<std::remove_reference_t<decltype(target)>>("bounds." + key, *v);
        }
      };
      from_file("thm", thm);
      from_file("states", states);
      from_file("actions", actions);
      from_file("eps", eps);
      from_file("gamma", gamma);
      from_file("delta", delta);
      from_file("n", bound_n);
      from_file("r_max", r_max);
      from_file("log_policy_class", log_pi);
      if (thm != 2 && thm != 3) throw ConfigError("--thm must be 2 or 3");
      if (states == 0 || actions == 0) throw ConfigError("--states and --actions must be positive");
      fs::path dir = kDefaultOutDir;
      if (bounds_out_opt->count() > 0) {
        dir = bounds_out;
      } else if (const char* env_dir = std::getenv(kOutDirEnv); env_dir != nullptr && *env_dir != '\0') {
        dir = env_dir;
      }
      const std::string stem = "bounds_thm" + std::to_string(thm);
      IniConfig manifest;
      manifest.set("run", "tool", "vepm");
      manifest.set("run", "tool_version", kToolVersion);
      manifest.set("run", "command", "bounds");
      manifest.set("run", "output_dir", dir.string());
      manifest.set("run", "records", stem + ".csv");
      manifest.set("bounds", "thm", std::to_string(thm));
      manifest.set("bounds", "states", std::to_string(states));
      manifest.set("bounds", "actions", std::to_string(actions));
      manifest.set("bounds", "gamma", exp::format_number(gamma));
      manifest.set("bounds", "delta", exp::format_number(delta));
      exp::Records records;
      std::string param = "states=" + std::to_string(states) + ";actions=" + std::to_string(actions) +
                          ";gamma=" + exp::format_number(gamma) + ";delta=" + exp::format_number(delta);
      if (thm == 3) {
        manifest.set("bounds", "eps", exp::format_number(eps));
        param += ";eps=" + exp::format_number(eps);
        const SampleBudget budget = sample_complexity_budget(states, actions, eps, gamma, delta);
        records.push_back({"bounds", "-", "-", std::nullopt, param, "samples_per_pair",
                           static_cast<double>(budget.samples_per_pair)});
        records.push_back({"bounds", "-", "-", std::nullopt, param, "epochs", static_cast<double>(budget.epochs)});
        records.push_back({"bounds", "-", "-", std::nullopt, param, "total_samples", budget.total_samples});
        write_manifest(dir, stem, manifest);
        write_records(dir / (stem + ".csv"), records);
        out << "N=" << budget.samples_per_pair << " k=" << budget.epochs
            << " total_samples=" << exp::format_number(budget.total_samples) << '\n';
      } else {
        if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
        BoundParams params;
        params.delta = delta;
        params.n = bound_n;
        params.log_policy_class_size = log_pi >= 0.0 ? log_pi : loose_log_policy_class_size(states, actions);
        manifest.set("bounds", "n", std::to_string(bound_n));
        manifest.set("bounds", "r_max", exp::format_number(r_max));
        manifest.set("bounds", "log_policy_class", exp::format_number(params.log_policy_class_size));
        param += ";n=" + std::to_string(bound_n) + ";r_max=" + exp::format_number(r_max) +
                 ";log_policy_class=" + exp::format_number(params.log_policy_class_size);
        const double bound = planning_loss_bound(states, actions, params, r_max, gamma);
        records.push_back({"bounds", "-", "-", std::nullopt, param, "planning_loss_bound", bound});
        write_manifest(dir, stem, manifest);
        write_records(dir / (stem + ".csv"), records);
        out << "planning_loss_bound=" << exp::format_number(bound) << '\n';
      }
    }
  } catch (const std::exception& e) {
    err << "vepm: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace vepm::cli
