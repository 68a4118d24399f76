#pragma once

// JSON experiment configuration: simulator settings, input sources, the
// strategy list and explicit seeds. Unknown keys are rejected.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cenas/carbon.hpp"
#include "cenas/errors.hpp"
#include "cenas/search_space.hpp"
#include "cenas/simulator.hpp"

namespace cenas {

// Every issue found while validating a config.
struct config_error : parse_error {
  explicit config_error(std::vector<std::string> issues_in)
      : parse_error(join(issues_in)), issues(std::move(issues_in)) {}

  std::vector<std::string> issues;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid config:";
    for (const auto& s : v) out += "\n  " + s;
    return out;
  }
};

struct synthetic_table_spec {
  std::size_t n = 1000;
  std::size_t d = 8;
  double sigma = 5.0;
  std::uint64_t seed = 0;
};

struct synthetic_trace_spec {
  std::size_t hours = 48;
  double mean = 300.0;
  double amplitude = 150.0;
  double period_hours = 24.0;
  double phase = 0.0;
};

struct experiment_config {
  std::optional<std::filesystem::path> benchmark;
  std::optional<synthetic_table_spec> synthetic_benchmark;
  std::optional<std::filesystem::path> trace;
  std::optional<synthetic_trace_spec> synthetic_trace;
  std::filesystem::path output_dir = "out";
  std::vector<strategy> strategies{strategy::ce_nas};
  std::vector<std::uint64_t> seeds{0};
  objective_spec objectives{};
  sim_config sim{};  // strat and seed are filled per run

  [[nodiscard]] sim_config run_config(strategy s, std::uint64_t seed) const {
    sim_config c = sim;
    c.strat = s;
    c.seed = seed;
    c.partition.seed = seed;
    return c;
  }
};

namespace detail {

class config_reader {
 public:
  std::vector<std::string> issues;

  // Flags keys of `obj` outside `allowed`.
  void check_keys(const nlohmann::json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : obj.items()) {
      const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
      if (!ok) issues.push_back(where + "unknown key '" + key + "'");
    }
  }

  template <class T>
  void number(const nlohmann::json& obj, const char* key, const std::string& where, T& out, double lo,
              bool lo_inclusive = true) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    const std::string name = where + "'" + key + "'";
    if (!v.is_number()) {
      issues.push_back(name + " must be a number");
      return;
    }
    const double x = v.get<double>();
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() && !(std::isfinite(x) && std::floor(x) == x)) {
        issues.push_back(name + " must be an integer");
        return;
      }
    }
    if (!std::isfinite(x) || (lo_inclusive ? x < lo : x <= lo)) {
      issues.push_back(name + " must be " + (lo_inclusive ? ">= " : "> ") + format_double(lo));
      return;
    }
    out = static_cast<T>(x);
  }

  std::optional<std::string> text(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) return std::nullopt;
    if (!obj.at(key).is_string()) {
      issues.push_back(where + "'" + key + "' must be a string");
      return std::nullopt;
    }
    return obj.at(key).get<std::string>();
  }

  bool object(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) return false;
    if (!obj.at(key).is_object()) {
      issues.push_back(where + "'" + key + "' must be an object");
      return false;
    }
    return true;
  }
};

}  // namespace detail

inline std::vector<strategy> parse_strategy_list(const nlohmann::json& arr, std::vector<std::string>& issues) {
  std::vector<strategy> out;
  if (!arr.is_array() || arr.empty()) {
    issues.push_back("'strategies' must be a nonempty array of strategy names");
    return out;
  }
  std::set<std::string> seen;
  for (const auto& v : arr) {
    if (!v.is_string()) {
      issues.push_back("'strategies' entries must be strings");
      continue;
    }
    const auto name = v.get<std::string>();
    if (!seen.insert(name).second) {
      issues.push_back("duplicate strategy '" + name + "'");
      continue;
    }
    try {
      out.push_back(parse_strategy(name));
    } catch (const std::exception&) {
      issues.push_back("unknown strategy '" + name + "' (expected ce_nas, vanilla, oneshot or random_alloc)");
    }
  }
  return out;
}

inline std::vector<std::uint64_t> parse_seed_list(const nlohmann::json& arr, std::vector<std::string>& issues) {
  std::vector<std::uint64_t> out;
  if (!arr.is_array() || arr.empty()) {
    issues.push_back("'seeds' must be a nonempty array of non-negative integers");
    return out;
  }
  std::set<std::uint64_t> seen;
  for (const auto& v : arr) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      issues.push_back("'seeds' entries must be non-negative integers");
      continue;
    }
    const auto s = v.get<std::uint64_t>();
    if (!seen.insert(s).second) issues.push_back("duplicate seed " + std::to_string(s));
    out.push_back(s);
  }
  return out;
}

// Relative paths resolve against `base_dir`.
inline experiment_config parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {}) {
  detail::config_reader rd;
  experiment_config cfg;
  if (!doc.is_object()) throw config_error({"top level must be a JSON object"});

  rd.check_keys(doc, "",
                {"benchmark", "synthetic_benchmark", "trace", "synthetic_trace", "output_dir", "strategies", "seeds",
                 "objectives", "total_gpus", "n_init", "queue_capacity", "batch_k", "supernet_train_seconds",
                 "gpu_power_w", "stop", "snapshot_period_s", "window_horizon_s", "partition"});

  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };

  if (auto p = rd.text(doc, "benchmark", "")) cfg.benchmark = resolve(*p);
  if (rd.object(doc, "synthetic_benchmark", "")) {
    const auto& o = doc.at("synthetic_benchmark");
    const std::string w = "synthetic_benchmark.";
    rd.check_keys(o, w, {"n", "d", "sigma", "seed"});
    synthetic_table_spec s;
    rd.number(o, "n", w, s.n, 1);
    rd.number(o, "d", w, s.d, 1);
    rd.number(o, "sigma", w, s.sigma, 0);
    rd.number(o, "seed", w, s.seed, 0);
    cfg.synthetic_benchmark = s;
  }
  if (cfg.benchmark.has_value() == cfg.synthetic_benchmark.has_value())
    rd.issues.push_back("exactly one of 'benchmark' or 'synthetic_benchmark' is required");

  if (auto p = rd.text(doc, "trace", "")) cfg.trace = resolve(*p);
  if (rd.object(doc, "synthetic_trace", "")) {
    const auto& o = doc.at("synthetic_trace");
    const std::string w = "synthetic_trace.";
    rd.check_keys(o, w, {"hours", "mean", "amplitude", "period_hours", "phase"});
    synthetic_trace_spec s;
    rd.number(o, "hours", w, s.hours, 1);
    rd.number(o, "mean", w, s.mean, 0, false);
    rd.number(o, "amplitude", w, s.amplitude, 0);
    rd.number(o, "period_hours", w, s.period_hours, 0, false);
    if (o.contains("phase")) {
      if (o.at("phase").is_number()) s.phase = o.at("phase").get<double>();
      else rd.issues.push_back(w + "'phase' must be a number");
    }
    if (!(s.amplitude < s.mean)) rd.issues.push_back(w + "'amplitude' must be below 'mean' so intensities stay positive");
    cfg.synthetic_trace = s;
  }
  if (cfg.trace.has_value() == cfg.synthetic_trace.has_value())
    rd.issues.push_back("exactly one of 'trace' or 'synthetic_trace' is required");

  if (auto p = rd.text(doc, "output_dir", "")) cfg.output_dir = resolve(*p);
  if (doc.contains("strategies")) cfg.strategies = parse_strategy_list(doc.at("strategies"), rd.issues);
  if (doc.contains("seeds")) cfg.seeds = parse_seed_list(doc.at("seeds"), rd.issues);

  if (doc.contains("objectives")) {
    const auto& arr = doc.at("objectives");
    if (!arr.is_array() || arr.empty()) {
      rd.issues.push_back("'objectives' must be a nonempty array");
    } else {
      objective_spec spec;
      spec.terms.clear();
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string w = "objectives[" + std::to_string(i) + "].";
        const auto& o = arr[i];
        if (!o.is_object()) {
          rd.issues.push_back(w + " must be an object");
          continue;
        }
        rd.check_keys(o, w, {"field", "direction"});
        auto field = rd.text(o, "field", w);
        auto dir = rd.text(o, "direction", w);
        if (!field || !dir) {
          rd.issues.push_back(w + " needs string 'field' and 'direction'");
          continue;
        }
        objective_term term{};
        try {
          term.field = parse_objective_field(*field);
        } catch (const std::exception&) {
          rd.issues.push_back(w + "unknown field '" + *field + "'");
          continue;
        }
        if (*dir == "max") term.dir = direction::maximize;
        else if (*dir == "min") term.dir = direction::minimize;
        else {
          rd.issues.push_back(w + "'direction' must be 'max' or 'min'");
          continue;
        }
        spec.terms.push_back(term);
      }
      cfg.objectives = spec;
    }
  }

  auto& s = cfg.sim;
  rd.number(doc, "total_gpus", "", s.total_gpus, 1);
  rd.number(doc, "n_init", "", s.n_init, 1);
  rd.number(doc, "queue_capacity", "", s.queue_capacity, 1);
  rd.number(doc, "batch_k", "", s.batch_k, 1);
  rd.number(doc, "supernet_train_seconds", "", s.supernet_train_seconds, 0);
  rd.number(doc, "gpu_power_w", "", s.gpu_power_w, 0, false);
  rd.number(doc, "snapshot_period_s", "", s.snapshot_period_s, 0, false);
  rd.number(doc, "window_horizon_s", "", s.window_horizon_s, 0);

  if (rd.object(doc, "stop", "")) {
    const auto& o = doc.at("stop");
    rd.check_keys(o, "stop.", {"kind", "value"});
    auto kind = rd.text(o, "kind", "stop.");
    if (!kind || !o.contains("value")) {
      rd.issues.push_back("'stop' needs 'kind' and 'value'");
    } else {
      if (*kind == "wall_clock_seconds") s.stop.kind = stop_kind::wall_clock_seconds;
      else if (*kind == "carbon_budget_g") s.stop.kind = stop_kind::carbon_budget_g;
      else if (*kind == "sample_budget") s.stop.kind = stop_kind::sample_budget;
      else rd.issues.push_back("stop.'kind' must be wall_clock_seconds, carbon_budget_g or sample_budget");
      rd.number(o, "value", "stop.", s.stop.value, 0, false);
    }
  }

  if (rd.object(doc, "partition", "")) {
    const auto& o = doc.at("partition");
    const std::string w = "partition.";
    rd.check_keys(o, w, {"leaf_min_samples", "max_depth", "ucb_cp", "split_accuracy"});
    rd.number(o, "leaf_min_samples", w, s.partition.leaf_min_samples, 1);
    rd.number(o, "max_depth", w, s.partition.max_depth, 0);
    rd.number(o, "ucb_cp", w, s.partition.ucb_cp, 0);
    rd.number(o, "split_accuracy", w, s.partition.split_accuracy, 0);
    if (s.partition.split_accuracy > 1.0) rd.issues.push_back(w + "'split_accuracy' must be <= 1");
  }

  if (!rd.issues.empty()) throw config_error(std::move(rd.issues));
  try {
    s.validate();
  } catch (const contract_error& e) {
    throw config_error({e.what()});
  }
  return cfg;
}

inline experiment_config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error({"cannot open config " + path.string()});
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error({path.string() + ": " + e.what()});
  }
  return parse_config(doc, path.parent_path());
}

// Published JSON Schema (draft 2020-12) for the config document.
inline nlohmann::json config_schema() {
  using nlohmann::json;
  auto uint_min = [](int lo) { return json{{"type", "integer"}, {"minimum", lo}}; };
  auto pos = json{{"type", "number"}, {"exclusiveMinimum", 0}};
  auto nonneg = json{{"type", "number"}, {"minimum", 0}};
  json props = {
      {"benchmark", {{"type", "string"}}},
      {"synthetic_benchmark",
       {{"type", "object"},
        {"additionalProperties", false},
        {"properties", {{"n", uint_min(1)}, {"d", uint_min(1)}, {"sigma", nonneg}, {"seed", uint_min(0)}}}}},
      {"trace", {{"type", "string"}}},
      {"synthetic_trace",
       {{"type", "object"},
        {"additionalProperties", false},
        {"properties",
         {{"hours", uint_min(1)}, {"mean", pos}, {"amplitude", nonneg}, {"period_hours", pos}, {"phase", {{"type", "number"}}}}}}},
      {"output_dir", {{"type", "string"}}},
      {"strategies",
       {{"type", "array"},
        {"minItems", 1},
        {"uniqueItems", true},
        {"items", {{"enum", {"ce_nas", "vanilla", "oneshot", "random_alloc"}}}}}},
      {"seeds", {{"type", "array"}, {"minItems", 1}, {"uniqueItems", true}, {"items", uint_min(0)}}},
      {"objectives",
       {{"type", "array"},
        {"minItems", 1},
        {"items",
         {{"type", "object"},
          {"additionalProperties", false},
          {"required", {"field", "direction"}},
          {"properties",
           {{"field", {{"enum", {"accuracy", "true_accuracy", "inference_energy_mj", "train_seconds", "oneshot_eval_seconds"}}}},
            {"direction", {{"enum", {"max", "min"}}}}}}}}}},
      {"total_gpus", uint_min(1)},
      {"n_init", uint_min(1)},
      {"queue_capacity", uint_min(1)},
      {"batch_k", uint_min(1)},
      {"supernet_train_seconds", nonneg},
      {"gpu_power_w", pos},
      {"stop",
       {{"type", "object"},
        {"additionalProperties", false},
        {"required", {"kind", "value"}},
        {"properties",
         {{"kind", {{"enum", {"wall_clock_seconds", "carbon_budget_g", "sample_budget"}}}}, {"value", pos}}}}},
      {"snapshot_period_s", pos},
      {"window_horizon_s", nonneg},
      {"partition",
       {{"type", "object"},
        {"additionalProperties", false},
        {"properties",
         {{"leaf_min_samples", uint_min(1)},
          {"max_depth", uint_min(0)},
          {"ucb_cp", nonneg},
          {"split_accuracy", {{"type", "number"}, {"minimum", 0}, {"maximum", 1}}}}}}},
  };
  return {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
          {"title", "cenas experiment config"},
          {"type", "object"},
          {"additionalProperties", false},
          {"properties", props},
          {"oneOf", {{{"required", {"benchmark"}}}, {{"required", {"synthetic_benchmark"}}}}},
          {"allOf", {{{"oneOf", {{{"required", {"trace"}}}, {{"required", {"synthetic_trace"}}}}}}}}};
}

// Loads or generates the table and trace named by the config.
inline benchmark_table load_benchmark(const experiment_config& cfg) {
  if (cfg.benchmark) return load_table(*cfg.benchmark, cfg.objectives);
  const auto& s = *cfg.synthetic_benchmark;
  auto t = generate_synthetic(s.n, s.d, s.sigma, s.seed);
  return benchmark_table(t.records(), cfg.objectives);
}

inline carbon_trace load_carbon(const experiment_config& cfg) {
  if (cfg.trace) return load_trace(*cfg.trace);
  const auto& s = *cfg.synthetic_trace;
  return make_sinusoid_trace(s.hours, s.mean, s.amplitude, s.period_hours, s.phase);
}

}  // namespace cenas
