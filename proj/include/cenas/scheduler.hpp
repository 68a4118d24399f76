#pragma once

// Carbon-aware control policy: how many GPUs sample (cheap proxy
// evaluation) versus train (true evaluation), and which queued candidate
// trains next.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cenas/detail/random.hpp"
#include "cenas/errors.hpp"
#include "cenas/moo.hpp"
#include "cenas/partition.hpp"
#include "cenas/search_space.hpp"

namespace cenas {

// Share of GPUs for sampling: 0 at the window's cleanest hour, 1 at its
// dirtiest. A flat window gives 0.5.
inline double compute_lambda_s(double c_cur, double c_min, double c_max) {
  if (c_min > c_max) throw contract_error("compute_lambda_s: c_min > c_max");
  if (c_max == c_min) return 0.5;
  return std::clamp((c_cur - c_min) / (c_max - c_min), 0.0, 1.0);
}

struct allocation_state {
  std::size_t total_gpus = 0;
  double lambda_s = 0.0;
  double lambda_e = 1.0;
  std::size_t sampling_gpus = 0;
  std::size_t eval_gpus = 0;
};

inline double round_half_even(double x) {
  const double fl = std::floor(x);
  const double frac = x - fl;
  if (frac > 0.5) return fl + 1.0;
  if (frac < 0.5) return fl;
  return std::fmod(fl, 2.0) == 0.0 ? fl : fl + 1.0;
}

inline allocation_state allocate(std::size_t g_total, double lambda_s) {
  if (g_total < 1) throw contract_error("allocate: need at least one GPU");
  if (!(lambda_s >= 0.0 && lambda_s <= 1.0)) throw contract_error("allocate: lambda_s outside [0,1]");
  allocation_state s;
  s.total_gpus = g_total;
  s.lambda_s = lambda_s;
  s.lambda_e = 1.0 - lambda_s;
  s.sampling_gpus = static_cast<std::size_t>(round_half_even(static_cast<double>(g_total) * lambda_s));
  s.sampling_gpus = std::min(s.sampling_gpus, g_total);
  s.eval_gpus = g_total - s.sampling_gpus;
  return s;
}

// n_init distinct ids, seeded uniform without replacement.
inline std::vector<std::string> init_selection(const benchmark_table& table, std::size_t n_init, std::uint64_t seed) {
  if (n_init > table.size()) throw contract_error("init_search: n_init exceeds table size");
  std::vector<std::size_t> idx(table.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  auto gen = detail::rng::stream(seed, 0x1417);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < n_init; ++i) std::swap(idx[i], idx[i + gen.index(idx.size() - i)]);
  std::vector<std::string> out;
  out.reserve(n_init);
  for (std::size_t i = 0; i < n_init; ++i) out.push_back(table[idx[i]].id);
  return out;
}

// Observed set seeded with n_init true-evaluated architectures.
inline sample_set init_search(const benchmark_table& table, std::size_t n_init, std::uint64_t seed,
                              std::optional<objective_vector> reference = std::nullopt) {
  sample_set observed(reference ? *reference : derive_reference_point(table));
  for (const auto& id : init_selection(table, n_init, seed)) observed.add(id, true_eval(table, id).objectives);
  return observed;
}

struct queued_candidate {
  std::string id;
  objective_vector proxy;
  std::uint64_t seq = 0;  // enqueue order
};

// Bounded ready-to-train set.
class ready_queue {
 public:
  explicit ready_queue(std::size_t capacity) : capacity_(capacity) {
    if (capacity < 1) throw contract_error("ready_queue: capacity must be >= 1");
  }

  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] std::size_t size() const { return items_.size(); }
  [[nodiscard]] bool empty() const { return items_.empty(); }
  [[nodiscard]] bool full() const { return items_.size() >= capacity_; }
  [[nodiscard]] std::size_t free_slots() const { return capacity_ - items_.size(); }
  [[nodiscard]] bool contains(const std::string& id) const { return ids_.contains(id); }
  [[nodiscard]] const std::deque<queued_candidate>& items() const { return items_; }

  void push(std::string id, objective_vector proxy) {
    if (full()) throw contract_error("ready_queue: capacity exceeded");
    if (!ids_.insert(id).second) throw contract_error("ready_queue: duplicate id '" + id + "'");
    items_.push_back({std::move(id), std::move(proxy), next_seq_++});
  }

  queued_candidate take(std::size_t position) {
    queued_candidate out = std::move(items_.at(position));
    items_.erase(items_.begin() + static_cast<std::ptrdiff_t>(position));
    ids_.erase(out.id);
    return out;
  }

 private:
  std::size_t capacity_;
  std::deque<queued_candidate> items_;
  std::unordered_set<std::string> ids_;
  std::uint64_t next_seq_ = 0;
};

struct enqueue_result {
  std::size_t accepted = 0;
  bool blocked = false;  // some candidate was refused for lack of space
};

// Accept candidates in order up to the remaining capacity.
inline enqueue_result enqueue_candidates(ready_queue& queue, std::span<const scored_candidate> candidates,
                                         const sample_set& observed) {
  std::unordered_set<std::string> batch;
  for (const auto& c : candidates) {
    if (!batch.insert(c.id).second) throw contract_error("enqueue_candidates: duplicate candidate '" + c.id + "'");
    if (observed.contains(c.id)) throw contract_error("enqueue_candidates: '" + c.id + "' already observed");
    if (queue.contains(c.id)) throw contract_error("enqueue_candidates: '" + c.id + "' already queued");
  }
  enqueue_result r;
  for (const auto& c : candidates) {
    if (queue.full()) {
      r.blocked = true;
      break;
    }
    queue.push(c.id, c.values);
    ++r.accepted;
  }
  return r;
}

// Removes and returns the queued candidate with the fewest dominators in
// observed (true vectors) ∪ queue (proxy vectors). FIFO on ties.
inline std::optional<std::string> next_to_train(ready_queue& queue, const sample_set& observed) {
  if (queue.empty()) return std::nullopt;
  std::vector<objective_vector> pool = observed.points();
  const std::size_t offset = pool.size();
  for (const auto& item : queue.items()) pool.push_back(item.proxy);
  const auto numbers = dominance_numbers(pool);
  std::size_t best = 0;
  for (std::size_t i = 1; i < queue.size(); ++i)
    if (numbers[offset + i] < numbers[offset + best]) best = i;  // items are already in enqueue order
  return queue.take(best).id;
}

}  // namespace cenas
