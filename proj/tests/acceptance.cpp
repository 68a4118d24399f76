// Acceptance checks: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <thread>

#include "cenas/cli.hpp"
#include "oracle.hpp"

using namespace cenas;

namespace {

constexpr std::size_t n_seeds = 10;
constexpr double horizon_s = 84 * 3600.0;

struct verdict {
  bool pass;
  std::string detail;
};

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

verdict dominance_vs_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(101);
  std::size_t mismatches = 0;
  for (int pool = 0; pool < 100; ++pool) {
    const std::size_t n = 1 + gen() % 200;
    const std::size_t m = 2 + pool % 2;
    const auto pts = oracle::random_pool(gen, n, m, pool % 2 == 0);
    mismatches += dominance_numbers(pts) != oracle::dominance_numbers(pts);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {mismatches == 0 && secs < 5.0,
          "100 pools, " + std::to_string(mismatches) + " mismatches, " + std::to_string(secs) + " s"};
}

verdict hypervolume_vs_oracle() {
  std::mt19937_64 gen(202);
  double worst_exact = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 2 + trial % 2;
    const auto pts = oracle::random_pool(gen, 1 + gen() % 10, m, trial % 3 != 0);
    const objective_vector ref(m, 0.0);
    worst_exact = std::max(worst_exact, std::abs(hypervolume(pts, ref) - oracle::hypervolume(pts, ref)));
  }
  double worst_mc = 0.0;
  for (int trial = 0; trial < 4; ++trial) {
    const std::size_t m = 2 + trial % 3;
    const auto pts = oracle::random_pool(gen, 8, m, false);
    const objective_vector ref(m, 0.0);
    const double want = oracle::hypervolume(pts, ref);
    worst_mc = std::max(worst_mc, std::abs(hypervolume_mc(pts, ref, 1'000'000, trial) - want) / want);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "exact max abs err %.3g, Monte-Carlo max rel err %.4f", worst_exact, worst_mc);
  return {worst_exact <= 1e-9 && worst_mc <= 0.01, buf};
}

verdict lambda_shape() {
  bool ok = compute_lambda_s(100, 100, 500) == 0.0 && compute_lambda_s(500, 100, 500) == 1.0 &&
            compute_lambda_s(300, 300, 300) == 0.5;
  double prev = -1.0;
  for (int i = 0; i < 1000; ++i) {
    const double lam = compute_lambda_s(100.0 + 400.0 * i / 999.0, 100, 500);
    ok = ok && lam >= prev && lam >= 0.0 && lam <= 1.0;
    prev = lam;
  }
  return {ok, "endpoints and 1000-point sweep"};
}

verdict region_quality() {
  std::size_t wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto table = generate_synthetic(1000, 8, 5, seed);
    const auto pool = init_search(table, 100, seed);
    partition_config cfg;
    cfg.seed = seed;
    auto tree = build_tree(pool, table, cfg);
    const auto inside = region_members(tree, select_region(tree), table);
    double acc_in = 0, acc_all = 0, e_in = 0, e_all = 0;
    for (const auto& r : table.records()) {
      acc_all += r.true_accuracy;
      e_all += r.inference_energy_mj;
    }
    for (auto i : inside) {
      acc_in += table[i].true_accuracy;
      e_in += table[i].inference_energy_mj;
    }
    const double n_in = static_cast<double>(inside.size());
    const double n = static_cast<double>(table.size());
    wins += !inside.empty() && acc_in / n_in > acc_all / n && e_in / n_in < e_all / n;
  }
  return {wins >= 8, std::to_string(wins) + "/10 seeds"};
}

sim_config desk_config(strategy s, std::uint64_t seed, stop_criterion stop) {
  sim_config c;
  c.strat = s;
  c.seed = seed;
  c.partition.seed = seed;
  c.total_gpus = 4;
  c.n_init = 10;
  c.queue_capacity = 30;
  c.batch_k = 10;
  c.supernet_train_seconds = 7200;
  c.stop = stop;
  return c;
}

const benchmark_table& desk_table(std::uint64_t seed) {
  static const auto tables = [] {
    std::vector<benchmark_table> v;
    for (std::uint64_t s = 0; s < n_seeds; ++s) v.push_back(generate_synthetic(1000, 8, 5, 100 + s));
    return v;
  }();
  return tables[seed];
}

const carbon_trace& desk_trace() {
  static const auto t = make_sinusoid_trace(48, 300, 150, 24);
  return t;
}

struct horizon_runs {
  std::vector<sim_result> ce, van, one;
};

horizon_runs fixed_horizon_runs() {
  std::vector<std::function<sim_result()>> jobs;
  for (auto s : {strategy::ce_nas, strategy::vanilla, strategy::oneshot})
    for (std::uint64_t seed = 0; seed < n_seeds; ++seed)
      jobs.emplace_back([s, seed] {
        return run(desk_table(seed), desk_trace(),
                   desk_config(s, seed, {stop_kind::wall_clock_seconds, horizon_s}));
      });
  auto all = cli::run_parallel(jobs, workers());
  horizon_runs r;
  r.ce.assign(all.begin(), all.begin() + n_seeds);
  r.van.assign(all.begin() + n_seeds, all.begin() + 2 * n_seeds);
  r.one.assign(all.begin() + 2 * n_seeds, all.end());
  return r;
}

double mean_of(const std::vector<sim_result>& v, double (*f)(const sim_result&)) {
  double s = 0;
  for (const auto& r : v) s += f(r);
  return s / static_cast<double>(v.size());
}

double carbon_of(const sim_result& r) { return r.ledger.cumulative_g; }
double hv_true_of(const sim_result& r) { return r.hv_final_true; }

verdict carbon_ratios(const horizon_runs& h) {
  const double ce = mean_of(h.ce, carbon_of);
  const double van = mean_of(h.van, carbon_of) / ce;
  const double one = mean_of(h.one, carbon_of) / ce;
  char buf[160];
  std::snprintf(buf, sizeof buf, "vanilla/ce_nas %.3f (need >= 1.5), oneshot/ce_nas %.3f (need >= 1.0)", van, one);
  return {van >= 1.5 && one >= 1.0, buf};
}

verdict hv_parity(const horizon_runs& h) {
  const double ce = mean_of(h.ce, hv_true_of);
  const double van = mean_of(h.van, hv_true_of);
  const double rel = std::abs(ce - van) / van;
  char buf[160];
  std::snprintf(buf, sizeof buf, "mean HV ce_nas %.4f vanilla %.4f, gap %.3f%% (need <= 1%%)", ce, van, 100 * rel);
  return {rel <= 0.01, buf};
}

verdict equal_budget() {
  std::vector<std::function<double()>> budget_jobs;
  for (std::uint64_t seed = 0; seed < n_seeds; ++seed)
    budget_jobs.emplace_back([seed] {
      return run(desk_table(seed), desk_trace(),
                 desk_config(strategy::vanilla, seed, {stop_kind::wall_clock_seconds, 0.4 * horizon_s}))
          .ledger.cumulative_g;
    });
  const auto budgets = cli::run_parallel(budget_jobs, workers());
  std::vector<std::function<double()>> jobs;
  for (auto s : {strategy::ce_nas, strategy::vanilla})
    for (std::uint64_t seed = 0; seed < n_seeds; ++seed)
      jobs.emplace_back([s, seed, b = budgets[seed]] {
        return run(desk_table(seed), desk_trace(), desk_config(s, seed, {stop_kind::carbon_budget_g, b}))
            .hv_final_true;
      });
  const auto hv = cli::run_parallel(jobs, workers());
  double ce = 0, van = 0;
  for (std::size_t i = 0; i < n_seeds; ++i) {
    ce += hv[i] / n_seeds;
    van += hv[n_seeds + i] / n_seeds;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "mean HV at equal carbon: ce_nas %.3f vanilla %.3f", ce, van);
  return {ce >= van, buf};
}

verdict replay() {
  bool same = true;
  for (auto s : {strategy::ce_nas, strategy::vanilla, strategy::oneshot, strategy::random_alloc}) {
    const auto c = desk_config(s, 3, {stop_kind::wall_clock_seconds, 24 * 3600.0});
    const auto a = run(desk_table(3), desk_trace(), c);
    const auto b = run(desk_table(3), desk_trace(), c);
    same = same && snapshots_to_csv(a.snapshots) == snapshots_to_csv(b.snapshots) &&
           ledger_to_csv(a.ledger) == ledger_to_csv(b.ledger);
  }
  return {same, "four strategies replayed byte-identically"};
}

verdict conservation() {
  // Two jobs of 1800 s and 5400 s on two GPUs over a 100/300/200 trace.
  const benchmark_table table({{"a", {0.2}, 70, 69, 1800, 10, 20}, {"b", {0.8}, 75, 74, 5400, 10, 25}});
  const carbon_trace trace({0, 3600, 7200}, {100, 300, 200});
  sim_config c;
  c.strat = strategy::vanilla;
  c.total_gpus = 2;
  c.n_init = 2;
  c.stop = {stop_kind::wall_clock_seconds, 1e6};
  const auto r = run(table, trace, c);
  const double want = 0.35 * (2 * 0.5 * 100 + 0.5 * 100 + 0.5 * 300);
  bool ok = std::abs(r.ledger.cumulative_g - want) <= 1e-6;

  for (std::uint64_t seed = 0; seed < 3; ++seed)
    for (auto s : {strategy::ce_nas, strategy::vanilla, strategy::oneshot, strategy::random_alloc}) {
      const auto big = run(desk_table(seed), desk_trace(), desk_config(s, seed, {stop_kind::wall_clock_seconds, 36 * 3600.0}));
      ok = ok && big.ledger.cumulative_gpu_seconds <= 4 * big.end_time * (1 + 1e-12);
      for (const auto& e : big.ledger.entries) ok = ok && e.busy_gpus <= 4;
    }
  char buf[160];
  std::snprintf(buf, sizeof buf, "scripted carbon %.9f g vs %.9f g; busy GPU time within G x elapsed",
                r.ledger.cumulative_g, want);
  return {ok, buf};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const verdict& v) {
    std::printf("criterion %d: %s %s\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    failures += !v.pass;
  };
  try {
    report(1, dominance_vs_oracle());
    report(2, hypervolume_vs_oracle());
    report(3, lambda_shape());
    report(4, region_quality());
    const auto h = fixed_horizon_runs();
    report(5, carbon_ratios(h));
    report(6, hv_parity(h));
    report(7, equal_budget());
    report(8, replay());
    report(9, conservation());
  } catch (const std::exception& e) {
    std::printf("error: %s\n", e.what());
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
