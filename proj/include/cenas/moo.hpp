#pragma once

// Multi-objective primitives over maximization-form objective vectors:
// dominance, dominance numbers, Pareto fronts, hypervolume.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cenas/detail/random.hpp"
#include "cenas/errors.hpp"

namespace cenas {

// Every coordinate is maximized. Minimized quantities are negated on load.
using objective_vector = std::vector<double>;

inline void require_finite(std::span<const double> v, std::string_view what) {
  if (v.empty()) throw contract_error(std::string(what) + ": empty objective vector");
  for (double x : v)
    if (!std::isfinite(x)) throw contract_error(std::string(what) + ": non-finite objective value");
}

// x dominates y: no worse anywhere, strictly better somewhere.
inline bool dominates(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw contract_error("dominates: dimension mismatch");
  bool strictly = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < y[i]) return false;
    if (x[i] > y[i]) strictly = true;
  }
  return strictly;
}

struct sample {
  std::string id;
  objective_vector values;
};

// Observed samples plus the hypervolume reference point. Every entry must
// strictly exceed the reference point in each coordinate.
class sample_set {
 public:
  explicit sample_set(objective_vector reference) : reference_(std::move(reference)) {
    require_finite(reference_, "sample_set reference point");
  }

  void add(std::string id, objective_vector values) {
    require_finite(values, "sample_set::add");
    if (values.size() != reference_.size()) throw contract_error("sample_set::add: dimension mismatch for '" + id + "'");
    for (std::size_t i = 0; i < values.size(); ++i)
      if (!(values[i] > reference_[i]))
        throw contract_error("sample_set::add: '" + id + "' does not strictly dominate the reference point");
    if (index_.contains(id)) throw contract_error("sample_set::add: duplicate id '" + id + "'");
    index_.emplace(id, entries_.size());
    entries_.push_back({std::move(id), std::move(values)});
  }

  [[nodiscard]] bool contains(std::string_view id) const { return index_.contains(std::string(id)); }

  [[nodiscard]] const objective_vector& at(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) throw not_found_error("sample '" + std::string(id) + "' not in pool");
    return entries_[it->second].values;
  }

  [[nodiscard]] std::size_t position(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) throw not_found_error("sample '" + std::string(id) + "' not in pool");
    return it->second;
  }

  [[nodiscard]] const std::vector<sample>& entries() const { return entries_; }
  [[nodiscard]] const objective_vector& reference() const { return reference_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] std::size_t dimension() const { return reference_.size(); }

  [[nodiscard]] std::vector<objective_vector> points() const {
    std::vector<objective_vector> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.values);
    return out;
  }

 private:
  objective_vector reference_;
  std::vector<sample> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

// Two objectives: sweep by first coordinate, count second-coordinate
// dominators with a Fenwick tree. Equal vectors are removed afterwards.
inline std::vector<std::size_t> dominance_numbers_2d(std::span<const objective_vector> pts) {
  const std::size_t n = pts.size();
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = pts[i][1];
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  const std::size_t m = ys.size();
  // Fenwick over descending y rank: prefix(r) counts points with y >= ys[m-1-r].
  std::vector<std::size_t> tree(m + 1, 0);
  auto rank_desc = [&](double y) {
    return m - static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), y) - ys.begin());
  };
  auto add = [&](std::size_t r) {
    for (; r <= m; r += r & (~r + 1)) ++tree[r];
  };
  auto prefix = [&](std::size_t r) {
    std::size_t s = 0;
    for (; r > 0; r -= r & (~r + 1)) s += tree[r];
    return s;
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pts[a][0] != pts[b][0]) return pts[a][0] > pts[b][0];
    return pts[a][1] > pts[b][1];
  });

  std::vector<std::size_t> out(n, 0);
  std::size_t i = 0;
  while (i < n) {
    // Group of equal first coordinate: all members count each other too.
    std::size_t j = i;
    while (j < n && pts[order[j]][0] == pts[order[i]][0]) ++j;
    for (std::size_t k = i; k < j; ++k) add(rank_desc(pts[order[k]][1]));
    std::size_t k = i;
    while (k < j) {
      std::size_t e = k;
      while (e < j && pts[order[e]][1] == pts[order[k]][1]) ++e;
      const std::size_t weakly = prefix(rank_desc(pts[order[k]][1]));
      const std::size_t identical = e - k;
      for (std::size_t q = k; q < e; ++q) out[order[q]] = weakly - identical;
      k = e;
    }
    i = j;
  }
  return out;
}

}  // namespace detail

// Dominance number of every point against all others in the same list.
inline std::vector<std::size_t> dominance_numbers(std::span<const objective_vector> pts) {
  if (pts.empty()) return {};
  const std::size_t dim = pts.front().size();
  for (const auto& p : pts)
    if (p.size() != dim) throw contract_error("dominance_numbers: dimension mismatch");
  if (dim == 2) return detail::dominance_numbers_2d(pts);
  std::vector<std::size_t> out(pts.size(), 0);
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = 0; b < pts.size(); ++b)
      if (a != b && dominates(pts[b], pts[a])) ++out[a];
  return out;
}

inline std::size_t dominance_number(std::string_view id, const sample_set& pool) {
  const auto& target = pool.at(id);
  std::size_t count = 0;
  for (const auto& e : pool.entries())
    if (e.id != id && dominates(e.values, target)) ++count;
  return count;
}

// Ids of non-dominated entries, insertion order.
inline std::vector<std::string> pareto_front(const sample_set& pool) {
  const auto pts = pool.points();
  const auto numbers = dominance_numbers(pts);
  std::vector<std::string> front;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (numbers[i] == 0) front.push_back(pool.entries()[i].id);
  return front;
}

namespace detail {

inline void check_reference(std::span<const objective_vector> pts, std::span<const double> ref) {
  require_finite(ref, "hypervolume reference point");
  for (const auto& p : pts) {
    if (p.size() != ref.size()) throw contract_error("hypervolume: dimension mismatch");
    for (std::size_t i = 0; i < ref.size(); ++i)
      if (!(p[i] > ref[i])) throw contract_error("hypervolume: point does not strictly dominate the reference point");
  }
}

// Points as (x, y) pairs, any order.
inline double hv2d(std::vector<std::pair<double, double>> pts, double rx, double ry) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second > b.second;
  });
  double area = 0.0;
  double cur_y = ry;
  for (const auto& [x, y] : pts) {
    if (y > cur_y) {
      area += (x - rx) * (y - cur_y);
      cur_y = y;
    }
  }
  return area;
}

// Slice along the third objective; each slab is a 2-D problem.
inline double hv3d(std::span<const objective_vector> pts, std::span<const double> ref) {
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pts[a][2] > pts[b][2]; });
  double volume = 0.0;
  std::vector<std::pair<double, double>> active;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& p = pts[order[i]];
    active.emplace_back(p[0], p[1]);
    const double next_z = (i + 1 < order.size()) ? pts[order[i + 1]][2] : ref[2];
    const double depth = p[2] - next_z;
    if (depth > 0.0) volume += hv2d(active, ref[0], ref[1]) * depth;
  }
  return volume;
}

}  // namespace detail

inline constexpr std::size_t default_mc_samples = 1'000'000;

// Monte-Carlo estimate: uniform draws in the box [ref, per-coordinate max].
inline double hypervolume_mc(std::span<const objective_vector> pts, std::span<const double> ref,
                             std::size_t samples = default_mc_samples, std::uint64_t seed = 0) {
  detail::check_reference(pts, ref);
  if (pts.empty() || samples == 0) return 0.0;
  const std::size_t dim = ref.size();
  std::vector<double> upper(ref.begin(), ref.end());
  for (const auto& p : pts)
    for (std::size_t i = 0; i < dim; ++i) upper[i] = std::max(upper[i], p[i]);
  double box = 1.0;
  for (std::size_t i = 0; i < dim; ++i) box *= upper[i] - ref[i];

  // Only non-dominated points can cover a draw.
  const std::vector<objective_vector> all(pts.begin(), pts.end());
  const auto numbers = dominance_numbers(all);
  std::vector<const objective_vector*> front;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (numbers[i] == 0) front.push_back(&all[i]);

  detail::rng gen(seed);
  std::vector<double> u(dim);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < dim; ++i) u[i] = gen.uniform(ref[i], upper[i]);
    for (const auto* p : front) {
      bool covered = true;
      for (std::size_t i = 0; i < dim && covered; ++i) covered = u[i] <= (*p)[i];
      if (covered) {
        ++hits;
        break;
      }
    }
  }
  return box * static_cast<double>(hits) / static_cast<double>(samples);
}

// Exact for up to three objectives; Monte-Carlo (default sample count,
// seed 0) beyond that.
inline double hypervolume(std::span<const objective_vector> pts, std::span<const double> ref) {
  detail::check_reference(pts, ref);
  if (pts.empty()) return 0.0;
  switch (ref.size()) {
    case 1: {
      double best = ref[0];
      for (const auto& p : pts) best = std::max(best, p[0]);
      return best - ref[0];
    }
    case 2: {
      std::vector<std::pair<double, double>> xy;
      xy.reserve(pts.size());
      for (const auto& p : pts) xy.emplace_back(p[0], p[1]);
      return detail::hv2d(std::move(xy), ref[0], ref[1]);
    }
    case 3:
      return detail::hv3d(pts, ref);
    default:
      return hypervolume_mc(pts, ref);
  }
}

inline double hypervolume(const sample_set& pool) {
  const auto pts = pool.points();
  return hypervolume(pts, pool.reference());
}

inline constexpr double hv_log_epsilon = 1e-9;

// log(hv_max - hv_cur), clamped below at log(1e-9).
inline double hv_log_diff(double hv_max, double hv_cur) {
  if (!(hv_cur >= 0.0) || !std::isfinite(hv_max)) throw contract_error("hv_log_diff: hv_cur must be >= 0");
  if (hv_cur > hv_max) throw contract_error("hv_log_diff: hv_cur exceeds hv_max");
  return std::log(std::max(hv_max - hv_cur, hv_log_epsilon));
}

}  // namespace cenas
