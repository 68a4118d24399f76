#pragma once

// Deterministic discrete-event replay of a NAS search on a simulated GPU
// pool, driven by a benchmark table and a carbon-intensity trace.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "cenas/carbon.hpp"
#include "cenas/detail/random.hpp"
#include "cenas/detail/text.hpp"
#include "cenas/errors.hpp"
#include "cenas/moo.hpp"
#include "cenas/partition.hpp"
#include "cenas/scheduler.hpp"
#include "cenas/search_space.hpp"

namespace cenas {

enum class strategy { ce_nas, vanilla, oneshot, random_alloc };

inline std::string_view to_string(strategy s) {
  switch (s) {
    case strategy::ce_nas: return "ce_nas";
    case strategy::vanilla: return "vanilla";
    case strategy::oneshot: return "oneshot";
    case strategy::random_alloc: return "random_alloc";
  }
  return "?";
}

inline strategy parse_strategy(std::string_view name) {
  for (auto s : {strategy::ce_nas, strategy::vanilla, strategy::oneshot, strategy::random_alloc})
    if (to_string(s) == name) return s;
  throw contract_error("unknown strategy '" + std::string(name) + "'");
}

enum class stop_kind { wall_clock_seconds, carbon_budget_g, sample_budget };

inline std::string_view to_string(stop_kind k) {
  switch (k) {
    case stop_kind::wall_clock_seconds: return "wall_clock_seconds";
    case stop_kind::carbon_budget_g: return "carbon_budget_g";
    case stop_kind::sample_budget: return "sample_budget";
  }
  return "?";
}

struct stop_criterion {
  stop_kind kind = stop_kind::wall_clock_seconds;
  double value = 0.0;

  friend bool operator==(const stop_criterion&, const stop_criterion&) = default;
};

struct sim_config {
  strategy strat = strategy::ce_nas;
  std::size_t total_gpus = 4;
  std::size_t n_init = 10;
  std::size_t queue_capacity = 300;
  std::size_t batch_k = 10;
  double supernet_train_seconds = 0.0;
  double gpu_power_w = 350.0;
  stop_criterion stop{stop_kind::wall_clock_seconds, 144000.0};
  std::uint64_t seed = 0;
  double snapshot_period_s = 3600.0;
  double window_horizon_s = 0.0;  // <= 0: whole trace
  partition_config partition{};

  void validate() const {
    if (total_gpus < 1) throw contract_error("sim_config: total_gpus must be >= 1");
    if (n_init < 1) throw contract_error("sim_config: n_init must be >= 1");
    if (queue_capacity < 1) throw contract_error("sim_config: queue_capacity must be >= 1");
    if (batch_k < 1) throw contract_error("sim_config: batch_k must be >= 1");
    if (!(supernet_train_seconds >= 0.0)) throw contract_error("sim_config: supernet_train_seconds must be >= 0");
    if (!(gpu_power_w > 0.0)) throw contract_error("sim_config: gpu_power_w must be > 0");
    if (!(snapshot_period_s > 0.0)) throw contract_error("sim_config: snapshot_period_s must be > 0");
    if (!(stop.value > 0.0) || !std::isfinite(stop.value)) throw contract_error("sim_config: stop value must be > 0");
    if (stop.kind == stop_kind::sample_budget && stop.value < 1.0)
      throw contract_error("sim_config: sample_budget must be >= 1");
  }
};

struct metric_snapshot {
  double t = 0.0;
  double hv_cur = 0.0;
  double hv_log_diff = 0.0;
  double carbon_g = 0.0;
  std::size_t observed = 0;
  std::size_t queue_len = 0;
  std::size_t sampling_gpus = 0;
  std::size_t eval_gpus = 0;
  double lambda_s = 0.0;
};

struct sim_counters {
  std::size_t true_evals_after_init = 0;
  std::size_t proxy_evals_after_init = 0;
  std::size_t sampling_steps = 0;
  std::size_t supernets_trained = 0;
  std::size_t tree_builds = 0;
  std::size_t sampling_starts_while_full = 0;
  std::size_t max_queue_len = 0;
  std::size_t blocked_enqueues = 0;
  std::size_t max_busy_gpus = 0;
  double completed_train_seconds = 0.0;  // sum of train_seconds of finished trainings
  double busy_train_gpu_seconds = 0.0;
  double busy_sampling_gpu_seconds = 0.0;
};

struct sim_result {
  sim_config config;
  sample_set observed;          // vectors as seen by the strategy (proxy for one-shot picks)
  std::vector<metric_snapshot> snapshots;
  emission_ledger ledger;
  std::string stop_reason;
  double end_time = 0.0;
  double hv_max = 0.0;
  double hv_final = 0.0;        // hypervolume of `observed`
  double hv_final_true = 0.0;   // same ids, true vectors
  bool estimated = false;       // hv_final rests on proxy vectors
  sim_counters counters;
};

// Brute-force best achievable hypervolume over every row of the table.
inline double table_hv_max(const benchmark_table& table, const objective_vector& ref, bool include_proxy) {
  std::vector<objective_vector> pts;
  pts.reserve(table.size() * 2);
  for (const auto& r : table.records()) {
    pts.push_back(table.objectives(r, false));
    if (include_proxy) pts.push_back(table.objectives(r, true));
  }
  return hypervolume(pts, ref);
}

namespace detail {

enum class event_kind { trace_tick, train_done, sampling_step_done, supernet_done, snapshot, stop };

struct sim_event {
  double time = 0.0;
  std::uint64_t seq = 0;
  event_kind kind = event_kind::snapshot;
  std::size_t gpu = 0;
  std::string arch{};
  std::vector<scored_candidate> batch{};
  double batch_seconds = 0.0;
};

struct event_later {
  bool operator()(const sim_event& a, const sim_event& b) const {
    return a.time != b.time ? a.time > b.time : a.seq > b.seq;
  }
};

enum class gpu_role { idle, train, sample, supernet };

class engine {
 public:
  engine(const benchmark_table& table, const carbon_trace& trace, const sim_config& cfg)
      : table_(table),
        trace_(trace),
        cfg_(cfg),
        reference_(derive_reference_point(table)),
        observed_(reference_),
        queue_(cfg.queue_capacity),
        gpus_(cfg.total_gpus, gpu_role::idle),
        sample_rng_(rng::stream(cfg.seed, 0x5a3)),
        alloc_rng_(rng::stream(cfg.seed, 0xa11c)) {
    cfg_.validate();
    if (cfg_.n_init > table_.size()) throw contract_error("sim_config: n_init exceeds table size");
    estimated_ = cfg_.strat == strategy::oneshot;
    hv_max_ = table_hv_max(table_, reference_, estimated_);
  }

  sim_result run() {
    alloc_ = allocate(cfg_.total_gpus, 0.0);
    push({trace_.next_boundary(0.0), 0, event_kind::trace_tick});
    push({cfg_.snapshot_period_s, 0, event_kind::snapshot});
    if (cfg_.stop.kind == stop_kind::wall_clock_seconds) push({cfg_.stop.value, 0, event_kind::stop});

    init_pending_ = init_selection(table_, cfg_.n_init, cfg_.seed);
    std::reverse(init_pending_.begin(), init_pending_.end());
    for (const auto& id : init_pending_) unavailable_.insert(id);
    init_remaining_ = init_pending_.size();
    snapshot();
    dispatch();

    while (!stopped_ && !events_.empty()) {
      sim_event ev = events_.top();
      events_.pop();
      if (!advance(ev.time)) break;
      handle(std::move(ev));
      if (stopped_) break;
      check_idle_exhaustion();
    }
    if (!stopped_) finish("no pending events");

    sim_result r{cfg_, observed_, std::move(snapshots_), std::move(ledger_), stop_reason_, now_,
                 hv_max_, 0.0, 0.0, estimated_, counters_};
    r.hv_final = hypervolume(r.observed);
    std::vector<objective_vector> truth;
    for (const auto& e : r.observed.entries()) truth.push_back(true_eval(table_, e.id).objectives);
    r.hv_final_true = hypervolume(truth, reference_);
    return r;
  }

 private:
  void push(sim_event ev) {
    ev.seq = next_seq_++;
    events_.push(std::move(ev));
  }

  std::size_t busy_count() const {
    return static_cast<std::size_t>(std::count_if(gpus_.begin(), gpus_.end(), [](gpu_role r) { return r != gpu_role::idle; }));
  }
  std::size_t role_count(gpu_role role) const {
    return static_cast<std::size_t>(std::count(gpus_.begin(), gpus_.end(), role));
  }

  // Charges carbon up to t. Returns false if the carbon budget ran out first.
  bool advance(double t) {
    if (t <= now_) return true;
    const std::size_t busy = busy_count();
    const std::size_t training = role_count(gpu_role::train);
    double until = t;
    bool budget_hit = false;
    if (cfg_.stop.kind == stop_kind::carbon_budget_g && busy > 0) {
      const double left = cfg_.stop.value - ledger_.cumulative_g;
      const double hit = time_to_emit(now_, left, busy, trace_, cfg_.gpu_power_w);
      if (hit <= t) {
        until = hit;
        budget_hit = true;
      }
    }
    if (until > now_) {
      account(ledger_, now_, until, busy, trace_, cfg_.gpu_power_w);
      counters_.busy_train_gpu_seconds += static_cast<double>(training) * (until - now_);
      counters_.busy_sampling_gpu_seconds += static_cast<double>(busy - training) * (until - now_);
    }
    now_ = until;
    if (budget_hit) {
      finish("carbon budget reached");
      return false;
    }
    return true;
  }

  void finish(std::string reason) {
    stopped_ = true;
    stop_reason_ = std::move(reason);
    snapshot();
  }

  void handle(sim_event ev) {
    switch (ev.kind) {
      case event_kind::trace_tick:
        push({trace_.next_boundary(now_), 0, event_kind::trace_tick});
        if (main_phase_) {
          update_allocation(true);
          dispatch();
        }
        break;
      case event_kind::snapshot:
        push({now_ + cfg_.snapshot_period_s, 0, event_kind::snapshot});
        snapshot();
        break;
      case event_kind::stop:
        finish("wall clock reached");
        break;
      case event_kind::train_done:
        on_train_done(ev);
        break;
      case event_kind::supernet_done:
        gpus_[ev.gpu] = gpu_role::sample;
        push({now_ + ev.batch_seconds, 0, event_kind::sampling_step_done, ev.gpu, {}, std::move(ev.batch), 0.0});
        break;
      case event_kind::sampling_step_done:
        on_sampling_done(ev);
        break;
    }
  }

  void on_train_done(const sim_event& ev) {
    gpus_[ev.gpu] = gpu_role::idle;
    const auto result = true_eval(table_, ev.arch);
    observed_.add(ev.arch, result.objectives);
    counters_.completed_train_seconds += result.cost_seconds;
    snapshot();
    if (sample_budget_reached()) return;
    if (!main_phase_) {
      if (--init_remaining_ == 0) start_main_phase();
      else dispatch();
      return;
    }
    rebuild_tree();
    update_allocation(false);
    dispatch();
  }

  void on_sampling_done(sim_event& ev) {
    gpus_[ev.gpu] = gpu_role::idle;
    if (cfg_.strat == strategy::oneshot) {
      for (auto& c : ev.batch) {
        unavailable_.insert(c.id);
        observed_.add(c.id, std::move(c.values));
      }
      snapshot();
      if (sample_budget_reached()) return;
      rebuild_tree();
    } else {
      const auto r = enqueue_candidates(queue_, ev.batch, observed_);
      counters_.max_queue_len = std::max(counters_.max_queue_len, queue_.size());
      if (r.blocked) {
        ++counters_.blocked_enqueues;
        for (std::size_t i = r.accepted; i < ev.batch.size(); ++i) unavailable_.erase(ev.batch[i].id);
        exhausted_ = false;
      }
    }
    update_allocation(false);
    dispatch();
  }

  bool sample_budget_reached() {
    if (cfg_.stop.kind == stop_kind::sample_budget && static_cast<double>(observed_.size()) >= cfg_.stop.value) {
      finish("sample budget reached");
      return true;
    }
    return false;
  }

  void start_main_phase() {
    main_phase_ = true;
    rebuild_tree();
    update_allocation(true);
    dispatch();
  }

  void rebuild_tree() {
    auto pc = cfg_.partition;
    pc.seed = rng::mix(cfg_.seed) ^ rng::mix(tree_version_ + 1);
    tree_ = build_tree(observed_, table_, pc);
    ++tree_version_;
    ++counters_.tree_builds;
  }

  // on_tick: a trace-step boundary (random_alloc redraws only there).
  void update_allocation(bool on_tick) {
    double lambda = 0.0;
    switch (cfg_.strat) {
      case strategy::vanilla: lambda = 0.0; break;
      case strategy::oneshot: lambda = 1.0; break;
      case strategy::ce_nas: {
        const double horizon = cfg_.window_horizon_s > 0.0 ? cfg_.window_horizon_s : trace_.duration();
        const auto w = window_min_max(trace_, now_, horizon);
        lambda = compute_lambda_s(intensity_at(trace_, now_), w.c_min, w.c_max);
        break;
      }
      case strategy::random_alloc:
        if (!on_tick && lambda_drawn_) return;
        lambda = alloc_rng_.uniform();
        lambda_drawn_ = true;
        break;
    }
    alloc_ = allocate(cfg_.total_gpus, lambda);
  }

  void dispatch() {
    if (stopped_) return;
    for (std::size_t g = 0; g < gpus_.size(); ++g) {
      if (gpus_[g] != gpu_role::idle) continue;
      if (!main_phase_) {
        if (init_pending_.empty()) break;
        std::string id = std::move(init_pending_.back());
        init_pending_.pop_back();
        start_training(g, id);
        continue;
      }
      if (!assign(g)) break;
    }
    const std::size_t busy = busy_count();
    counters_.max_busy_gpus = std::max(counters_.max_busy_gpus, busy);
    if (busy > 0) last_activity_ = now_;
  }

  // Gives idle GPU g work under the current allocation. False if none.
  bool assign(std::size_t g) {
    switch (cfg_.strat) {
      case strategy::vanilla: {
        if (exhausted_) return false;
        auto ids = draw_candidates(1);
        if (ids.empty()) return false;
        start_training(g, ids.front());
        return true;
      }
      case strategy::oneshot:
        return !exhausted_ && start_sampling(g);
      case strategy::ce_nas:
      case strategy::random_alloc: {
        if (role_count(gpu_role::train) < alloc_.eval_gpus && !queue_.empty()) {
          auto id = next_to_train(queue_, observed_);
          start_training(g, *id);
          return true;
        }
        const std::size_t sampling = role_count(gpu_role::sample) + role_count(gpu_role::supernet);
        if (sampling < alloc_.sampling_gpus && !queue_.full() && !exhausted_) return start_sampling(g);
        return false;
      }
    }
    return false;
  }

  // Region draw from the current tree; empty and flags exhaustion when the
  // table has nothing left.
  std::vector<std::string> draw_candidates(std::size_t k) {
    last_leaf_ = select_region(*tree_);
    try {
      return sample_from_region(*tree_, last_leaf_, table_, k, sample_rng_.next(), unavailable_);
    } catch (const search_exhausted&) {
      exhausted_ = true;
      return {};
    }
  }

  void start_training(std::size_t g, const std::string& id) {
    unavailable_.insert(id);
    if (main_phase_) ++counters_.true_evals_after_init;
    gpus_[g] = gpu_role::train;
    push({now_ + table_.at(id).train_seconds, 0, event_kind::train_done, g, id});
  }

  bool start_sampling(std::size_t g) {
    if (queue_.full()) ++counters_.sampling_starts_while_full;
    const auto ids = draw_candidates(5 * cfg_.batch_k);
    if (ids.empty()) return false;
    std::vector<scored_candidate> scored;
    scored.reserve(ids.size());
    for (const auto& id : ids) {
      auto e = proxy_eval(table_, id);
      ++counters_.proxy_evals_after_init;
      scored.push_back({id, std::move(e.objectives)});
    }
    const auto obs = observed_.points();
    auto kept = select_promising(scored, obs, cfg_.batch_k);
    double seconds = 0.0;
    for (const auto& c : kept) {
      seconds += table_.at(c.id).oneshot_eval_seconds;
      unavailable_.insert(c.id);
    }
    ++counters_.sampling_steps;

    const std::string key = std::to_string(tree_version_) + "/" + tree_->nodes[last_leaf_].node_id;
    if (cfg_.supernet_train_seconds > 0.0 && supernets_.insert(key).second) {
      ++counters_.supernets_trained;
      gpus_[g] = gpu_role::supernet;
      push({now_ + cfg_.supernet_train_seconds, 0, event_kind::supernet_done, g, {}, std::move(kept), seconds});
    } else {
      gpus_[g] = gpu_role::sample;
      push({now_ + seconds, 0, event_kind::sampling_step_done, g, {}, std::move(kept), 0.0});
    }
    return true;
  }

  void check_idle_exhaustion() {
    if (stopped_ || !main_phase_ || busy_count() > 0) return;
    if (exhausted_ && queue_.empty()) finish("search space exhausted");
    else if (now_ - last_activity_ > 2.0 * trace_.duration()) finish("stalled: no work could be scheduled");
  }

  void snapshot() {
    metric_snapshot s;
    s.t = now_;
    s.hv_cur = hypervolume(observed_);
    s.hv_log_diff = hv_log_diff(hv_max_, std::min(s.hv_cur, hv_max_));
    s.carbon_g = ledger_.cumulative_g;
    s.observed = observed_.size();
    s.queue_len = queue_.size();
    s.sampling_gpus = alloc_.sampling_gpus;
    s.eval_gpus = alloc_.eval_gpus;
    s.lambda_s = alloc_.lambda_s;
    snapshots_.push_back(s);
  }

  const benchmark_table& table_;
  const carbon_trace& trace_;
  sim_config cfg_;
  objective_vector reference_;
  sample_set observed_;
  ready_queue queue_;
  std::vector<gpu_role> gpus_;
  rng sample_rng_;
  rng alloc_rng_;
  std::priority_queue<sim_event, std::vector<sim_event>, event_later> events_;
  std::uint64_t next_seq_ = 0;
  double now_ = 0.0;
  double last_activity_ = 0.0;
  emission_ledger ledger_;
  allocation_state alloc_;
  std::optional<partition_tree> tree_;
  std::uint64_t tree_version_ = 0;
  std::size_t last_leaf_ = 0;
  std::unordered_set<std::string> unavailable_;  // observed, queued, training or in a sampling batch
  std::set<std::string> supernets_;
  std::vector<std::string> init_pending_;
  std::size_t init_remaining_ = 0;
  bool main_phase_ = false;
  bool exhausted_ = false;
  bool lambda_drawn_ = false;
  bool estimated_ = false;
  double hv_max_ = 0.0;
  bool stopped_ = false;
  std::string stop_reason_;
  std::vector<metric_snapshot> snapshots_;
  sim_counters counters_;
};

}  // namespace detail

inline sim_result run(const benchmark_table& table, const carbon_trace& trace, const sim_config& config) {
  return detail::engine(table, trace, config).run();
}

// ---------------------------------------------------------------------------
// Strategy comparison

struct comparison_row {
  std::string strategy_name;
  std::size_t runs = 0;
  double mean_hv_log_diff = 0.0;
  double std_hv_log_diff = 0.0;
  double mean_hv = 0.0;
  double std_hv = 0.0;
  double mean_hv_true = 0.0;
  double mean_carbon_g = 0.0;
  double std_carbon_g = 0.0;
  double carbon_ratio = 1.0;  // mean carbon / mean carbon of the baseline row
  bool estimated = false;
};

struct comparison_report {
  std::string baseline;  // ce_nas when present, else the first strategy
  std::vector<comparison_row> rows;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0};
}

}  // namespace detail

// Aggregates finished runs per strategy, in first-appearance order.
inline comparison_report summarize(const std::vector<sim_result>& results) {
  if (results.empty()) throw contract_error("compare: no runs");
  const auto stop = results.front().config.stop;
  for (const auto& r : results)
    if (!(r.config.stop == stop)) throw contract_error("compare: runs use different stop criteria");

  std::vector<strategy> order;
  for (const auto& r : results)
    if (std::find(order.begin(), order.end(), r.config.strat) == order.end()) order.push_back(r.config.strat);

  comparison_report report;
  for (auto s : order) {
    std::vector<double> lhd, hv, hvt, carbon;
    bool est = false;
    for (const auto& r : results) {
      if (r.config.strat != s) continue;
      lhd.push_back(r.snapshots.back().hv_log_diff);
      hv.push_back(r.hv_final);
      hvt.push_back(r.hv_final_true);
      carbon.push_back(r.ledger.cumulative_g);
      est = est || r.estimated;
    }
    comparison_row row;
    row.strategy_name = std::string(to_string(s));
    row.runs = lhd.size();
    std::tie(row.mean_hv_log_diff, row.std_hv_log_diff) = detail::mean_std(lhd);
    std::tie(row.mean_hv, row.std_hv) = detail::mean_std(hv);
    row.mean_hv_true = detail::mean_std(hvt).first;
    std::tie(row.mean_carbon_g, row.std_carbon_g) = detail::mean_std(carbon);
    row.estimated = est;
    report.rows.push_back(row);
  }
  auto base = std::find_if(report.rows.begin(), report.rows.end(), [](const auto& r) { return r.strategy_name == "ce_nas"; });
  if (base == report.rows.end()) base = report.rows.begin();
  report.baseline = base->strategy_name;
  const double denom = base->mean_carbon_g;
  for (auto& row : report.rows) row.carbon_ratio = denom > 0.0 ? row.mean_carbon_g / denom : 1.0;
  return report;
}

inline comparison_report compare(const benchmark_table& table, const carbon_trace& trace,
                                 const std::vector<sim_config>& configs) {
  if (configs.empty()) throw contract_error("compare: no configs");
  for (const auto& c : configs)
    if (!(c.stop == configs.front().stop)) throw contract_error("compare: configs use different stop criteria");
  std::vector<sim_result> results;
  results.reserve(configs.size());
  for (const auto& c : configs) results.push_back(run(table, trace, c));
  return summarize(results);
}

// ---------------------------------------------------------------------------
// Output formats

inline std::string snapshots_to_csv(const std::vector<metric_snapshot>& snaps) {
  using detail::format_double;
  std::ostringstream out;
  out << "t_s,hv_cur,hv_log_diff,carbon_g,observed,queue_len,sampling_gpus,eval_gpus,lambda_s\n";
  for (const auto& s : snaps)
    out << format_double(s.t) << ',' << format_double(s.hv_cur) << ',' << format_double(s.hv_log_diff) << ','
        << format_double(s.carbon_g) << ',' << s.observed << ',' << s.queue_len << ',' << s.sampling_gpus << ','
        << s.eval_gpus << ',' << format_double(s.lambda_s) << '\n';
  return out.str();
}

inline std::string report_to_csv(const comparison_report& report) {
  using detail::format_double;
  std::ostringstream out;
  out << "strategy,runs,mean_hv_log_diff,std_hv_log_diff,mean_hv,std_hv,mean_hv_true,mean_carbon_g,std_carbon_g,"
         "carbon_ratio,hv_basis\n";
  for (const auto& r : report.rows)
    out << r.strategy_name << ',' << r.runs << ',' << format_double(r.mean_hv_log_diff) << ','
        << format_double(r.std_hv_log_diff) << ',' << format_double(r.mean_hv) << ',' << format_double(r.std_hv) << ','
        << format_double(r.mean_hv_true) << ',' << format_double(r.mean_carbon_g) << ','
        << format_double(r.std_carbon_g) << ',' << format_double(r.carbon_ratio) << ','
        << (r.estimated ? "estimated" : "true") << '\n';
  return out.str();
}

inline nlohmann::json report_to_json(const comparison_report& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"strategy", r.strategy_name},
                    {"runs", r.runs},
                    {"mean_hv_log_diff", r.mean_hv_log_diff},
                    {"std_hv_log_diff", r.std_hv_log_diff},
                    {"mean_hv", r.mean_hv},
                    {"std_hv", r.std_hv},
                    {"mean_hv_true", r.mean_hv_true},
                    {"mean_carbon_g", r.mean_carbon_g},
                    {"std_carbon_g", r.std_carbon_g},
                    {"carbon_ratio", r.carbon_ratio},
                    {"hv_basis", r.estimated ? "estimated" : "true"}});
  return {{"baseline", report.baseline}, {"strategies", rows}};
}

inline std::string report_to_table(const comparison_report& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s %5s %16s %16s %14s %10s\n", "strategy", "runs", "mean_hv_log_diff",
                "mean_carbon_g", "carbon_ratio", "hv_basis");
  out << line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-14s %5zu %16.4f %16.1f %14.3f %10s\n", r.strategy_name.c_str(), r.runs,
                  r.mean_hv_log_diff, r.mean_carbon_g, r.carbon_ratio, r.estimated ? "estimated" : "true");
    out << line;
  }
  return out.str();
}

// Two stacked polylines: hv_log_diff and carbon_g against time.
inline std::string snapshots_to_svg(const std::vector<metric_snapshot>& snaps, std::string_view title) {
  constexpr double width = 640, panel = 200, margin = 40;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << 2 * panel + 3 * margin
      << "\">\n<text x=\"" << margin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title
      << "</text>\n";
  if (snaps.empty()) {
    out << "</svg>\n";
    return out.str();
  }
  const double t_max = std::max(snaps.back().t, 1.0);
  auto panel_svg = [&](auto value, std::string_view label, double top, std::string_view colour) {
    double lo = value(snaps.front()), hi = lo;
    for (const auto& s : snaps) {
      lo = std::min(lo, value(s));
      hi = std::max(hi, value(s));
    }
    if (hi == lo) hi = lo + 1.0;
    out << "<rect x=\"" << margin << "\" y=\"" << top << "\" width=\"" << width - 2 * margin << "\" height=\"" << panel
        << "\" fill=\"none\" stroke=\"#999\"/>\n";
    out << "<text x=\"" << margin + 4 << "\" y=\"" << top + 14 << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << label << " [" << detail::format_double(lo) << ", " << detail::format_double(hi) << "]</text>\n";
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" points=\"";
    for (const auto& s : snaps) {
      const double x = margin + (width - 2 * margin) * s.t / t_max;
      const double y = top + panel - panel * (value(s) - lo) / (hi - lo);
      out << x << ',' << y << ' ';
    }
    out << "\"/>\n";
  };
  panel_svg([](const metric_snapshot& s) { return s.hv_log_diff; }, "hv_log_diff", margin, "#1f77b4");
  panel_svg([](const metric_snapshot& s) { return s.carbon_g; }, "carbon_g", 2 * margin + panel, "#d62728");
  out << "<text x=\"" << margin << "\" y=\"" << 2 * panel + 3 * margin - 8
      << "\" font-family=\"sans-serif\" font-size=\"11\">t [s], 0 .. " << detail::format_double(t_max) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace cenas
