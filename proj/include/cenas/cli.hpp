#pragma once

// Subcommand implementations behind the `cenas` executable. Each returns a
// process exit code: 0 success, 1 runtime failure, 2 input or config error.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cenas/carbon.hpp"
#include "cenas/config.hpp"
#include "cenas/detail/text.hpp"
#include "cenas/errors.hpp"
#include "cenas/search_space.hpp"
#include "cenas/simulator.hpp"

namespace cenas::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_runtime = 1;
inline constexpr int exit_input = 2;

struct run_options {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::vector<std::uint64_t>> seeds;
  bool plot = false;
  std::size_t jobs = 1;
};

struct gen_options {
  std::size_t n = 1000;
  std::size_t d = 8;
  double sigma = 5.0;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

// "0,1,2" -> {0,1,2}.
inline std::vector<std::uint64_t> parse_seed_csv(std::string_view text) {
  std::vector<std::uint64_t> out;
  for (const auto& cell : cenas::detail::split_csv_line(text)) {
    std::uint64_t v = 0;
    const auto* b = cell.data();
    const auto* e = b + cell.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (cell.empty() || ec != std::errc{} || p != e) throw config_error({"--seeds: '" + cell + "' is not a seed"});
    if (std::find(out.begin(), out.end(), v) != out.end()) throw config_error({"--seeds: duplicate seed " + cell});
    out.push_back(v);
  }
  if (out.empty()) throw config_error({"--seeds: empty list"});
  return out;
}

// Runs jobs[i] for every i on up to `workers` threads; results keep job order.
template <class Job>
auto run_parallel(const std::vector<Job>& jobs, std::size_t workers) {
  using result_t = decltype(jobs.front()());
  std::vector<std::optional<result_t>> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = jobs[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(jobs.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<result_t> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

inline std::string run_file_stem(strategy s, std::uint64_t seed) {
  return std::string(to_string(s)) + "_seed" + std::to_string(seed);
}

inline nlohmann::json run_summary(const sim_result& r) {
  const auto& c = r.counters;
  return {{"strategy", to_string(r.config.strat)},
          {"seed", r.config.seed},
          {"stop_reason", r.stop_reason},
          {"end_time_s", r.end_time},
          {"carbon_g", r.ledger.cumulative_g},
          {"gpu_seconds", r.ledger.cumulative_gpu_seconds},
          {"observed", r.observed.size()},
          {"hv_max", r.hv_max},
          {"hv_final", r.hv_final},
          {"hv_final_true", r.hv_final_true},
          {"hv_log_diff_final", r.snapshots.empty() ? 0.0 : r.snapshots.back().hv_log_diff},
          {"hv_basis", r.estimated ? "estimated" : "true"},
          {"snapshots", run_file_stem(r.config.strat, r.config.seed) + ".csv"},
          {"counters",
           {{"true_evals_after_init", c.true_evals_after_init},
            {"proxy_evals_after_init", c.proxy_evals_after_init},
            {"sampling_steps", c.sampling_steps},
            {"supernets_trained", c.supernets_trained},
            {"tree_builds", c.tree_builds},
            {"blocked_enqueues", c.blocked_enqueues},
            {"max_queue_len", c.max_queue_len}}}};
}

namespace detail {

struct prepared {
  experiment_config cfg;
  std::optional<benchmark_table> table;
  std::optional<carbon_trace> trace;
  std::filesystem::path out_dir;
};

// Loads config and inputs. Throws config_error/parse_error on bad input.
inline prepared prepare(const run_options& opt) {
  prepared p{load_config(opt.config), std::nullopt, std::nullopt, {}};
  if (opt.seeds) p.cfg.seeds = *opt.seeds;
  p.out_dir = opt.out ? *opt.out : p.cfg.output_dir;
  if (p.cfg.benchmark && !std::filesystem::exists(*p.cfg.benchmark))
    throw config_error({"benchmark file not found: " + p.cfg.benchmark->string()});
  if (p.cfg.trace && !std::filesystem::exists(*p.cfg.trace))
    throw config_error({"trace file not found: " + p.cfg.trace->string()});
  try {
    p.table.emplace(load_benchmark(p.cfg));
    p.trace.emplace(load_carbon(p.cfg));
  } catch (const contract_error& e) {
    throw config_error({e.what()});
  }
  if (p.cfg.sim.n_init > p.table->size())
    throw config_error({"'n_init' (" + std::to_string(p.cfg.sim.n_init) + ") exceeds the table size (" +
                        std::to_string(p.table->size()) + ")"});
  return p;
}

inline std::vector<sim_result> execute(const prepared& p, std::size_t jobs, bool plot) {
  std::filesystem::create_directories(p.out_dir);
  std::vector<std::function<sim_result()>> work;
  for (auto s : p.cfg.strategies)
    for (auto seed : p.cfg.seeds)
      work.emplace_back([&p, s, seed, plot] {
        auto r = run(*p.table, *p.trace, p.cfg.run_config(s, seed));
        const auto stem = run_file_stem(s, seed);
        cenas::detail::write_atomic(p.out_dir / (stem + ".csv"), snapshots_to_csv(r.snapshots));
        if (plot) cenas::detail::write_atomic(p.out_dir / (stem + ".svg"), snapshots_to_svg(r.snapshots, stem));
        return r;
      });
  return run_parallel(work, jobs);
}

// Maps exceptions to exit codes and prints the reason.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const config_error& e) {
    err << "error: invalid input\n";
    for (const auto& issue : e.issues) err << "  " << issue << '\n';
    return exit_input;
  } catch (const parse_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_input;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_runtime;
  }
}

}  // namespace detail

inline int cmd_run(const run_options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto p = detail::prepare(opt);
    const auto results = detail::execute(p, opt.jobs, opt.plot);
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : results) {
      runs.push_back(run_summary(r));
      out << run_file_stem(r.config.strat, r.config.seed) << ": carbon_g=" << cenas::detail::format_double(r.ledger.cumulative_g)
          << " hv_final=" << cenas::detail::format_double(r.hv_final) << " stop=" << r.stop_reason << '\n';
    }
    cenas::detail::write_atomic(p.out_dir / "summary.json", nlohmann::json{{"runs", runs}}.dump(2) + "\n");
    out << "wrote " << results.size() << " run(s) to " << p.out_dir.string() << '\n';
    return exit_ok;
  });
}

inline int cmd_compare(const run_options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto p = detail::prepare(opt);
    const auto results = detail::execute(p, opt.jobs, opt.plot);
    const auto report = summarize(results);
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : results) runs.push_back(run_summary(r));
    auto doc = report_to_json(report);
    doc["runs"] = runs;
    cenas::detail::write_atomic(p.out_dir / "report.json", doc.dump(2) + "\n");
    cenas::detail::write_atomic(p.out_dir / "report.csv", report_to_csv(report));
    out << report_to_table(report);
    return exit_ok;
  });
}

inline int cmd_gen(const gen_options& opt, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    benchmark_table table = [&] {
      try {
        return generate_synthetic(opt.n, opt.d, opt.sigma, opt.seed);
      } catch (const contract_error& e) {
        throw config_error({e.what()});
      }
    }();
    write_table(table, opt.out);
    out << "wrote " << table.size() << " rows to " << opt.out.string() << '\n';
    return exit_ok;
  });
}

namespace detail {

struct column_stats {
  double min = 0.0, max = 0.0, mean = 0.0;
};

inline column_stats stats_of(const std::vector<double>& v) {
  column_stats s{v.front(), v.front(), 0.0};
  for (double x : v) {
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
    s.mean += x;
  }
  s.mean /= static_cast<double>(v.size());
  return s;
}

inline void print_stats(std::ostream& out, const std::string& name, const std::vector<double>& v) {
  const auto s = stats_of(v);
  char line[160];
  std::snprintf(line, sizeof line, "  %-22s min=%-12.6g max=%-12.6g mean=%.6g\n", name.c_str(), s.min, s.max, s.mean);
  out << line;
}

inline bool looks_like_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string first;
  std::getline(in, first);
  if (first.rfind("\xEF\xBB\xBF", 0) == 0) first.erase(0, 3);
  return first.rfind("timestamp_s", 0) == 0;
}

}  // namespace detail

// Validates each file, detecting traces by their header.
inline int cmd_validate(const std::vector<std::filesystem::path>& paths, std::ostream& out, std::ostream& err) {
  if (paths.empty()) {
    err << "error: no files to validate\n";
    return exit_input;
  }
  bool ok = true;
  for (const auto& path : paths) {
    try {
      if (!std::filesystem::exists(path)) throw parse_error(path.string() + ": file not found");
      if (detail::looks_like_trace(path)) {
        const auto trace = load_trace(path);
        out << path.string() << ": carbon trace, " << trace.steps() << " rows, duration "
            << cenas::detail::format_double(trace.duration()) << " s, cv "
            << cenas::detail::format_double(coefficient_of_variation(trace)) << '\n';
        detail::print_stats(out, "timestamp_s", trace.timestamps());
        detail::print_stats(out, "intensity_gco2_kwh", trace.intensities());
      } else {
        const auto table = load_table(path);
        out << path.string() << ": benchmark table, " << table.size() << " rows, encoding dimension "
            << table.encoding_dim() << '\n';
        std::vector<std::vector<double>> cols(5);
        std::vector<std::vector<double>> enc(table.encoding_dim());
        for (const auto& r : table.records()) {
          cols[0].push_back(r.true_accuracy);
          cols[1].push_back(r.proxy_accuracy);
          cols[2].push_back(r.train_seconds);
          cols[3].push_back(r.oneshot_eval_seconds);
          cols[4].push_back(r.inference_energy_mj);
          for (std::size_t j = 0; j < enc.size(); ++j) enc[j].push_back(r.encoding[j]);
        }
        const char* names[] = {"true_accuracy", "proxy_accuracy", "train_seconds", "oneshot_eval_seconds",
                               "inference_energy_mj"};
        for (std::size_t j = 0; j < enc.size(); ++j) detail::print_stats(out, "enc_" + std::to_string(j), enc[j]);
        for (std::size_t c = 0; c < cols.size(); ++c) detail::print_stats(out, names[c], cols[c]);
      }
    } catch (const std::exception& e) {
      err << "invalid: " << e.what() << '\n';
      ok = false;
    }
  }
  return ok ? exit_ok : exit_input;
}

}  // namespace cenas::cli
