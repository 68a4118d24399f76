#pragma once

// Learned search-space partitioning. Observed samples are labeled good or
// bad by dominance number, a linear classifier splits each node, and a UCB
// walk picks the leaf region to sample next.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cenas/detail/random.hpp"
#include "cenas/errors.hpp"
#include "cenas/moo.hpp"
#include "cenas/search_space.hpp"

namespace cenas {

// Affine rule; score >= 0 is the good side.
struct linear_classifier {
  std::vector<double> weights;
  double bias = 0.0;

  [[nodiscard]] double score(std::span<const double> x) const {
    double s = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * x[i];
    return s;
  }
  [[nodiscard]] bool good_side(std::span<const double> x) const { return score(x) >= 0.0; }
};

struct classifier_config {
  std::size_t iterations = 300;
  double learning_rate = 0.5;
  double l2 = 1e-4;
};

// Full-batch subgradient descent on the L2-regularized hinge loss over
// standardized features, mapped back to raw coordinates. Deterministic for
// a fixed seed. labels: true = good.
inline linear_classifier fit_linear_classifier(std::span<const std::vector<double>> x, const std::vector<bool>& labels,
                                               const classifier_config& cfg, std::uint64_t seed) {
  if (x.empty() || x.size() != labels.size()) throw contract_error("fit_linear_classifier: bad training set");
  const std::size_t n = x.size(), d = x.front().size();
  std::vector<double> mean(d, 0.0), scale(d, 0.0);
  for (const auto& row : x)
    for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
  for (auto& m : mean) m /= static_cast<double>(n);
  for (const auto& row : x)
    for (std::size_t j = 0; j < d; ++j) scale[j] += (row[j] - mean[j]) * (row[j] - mean[j]);
  for (auto& s : scale) {
    s = std::sqrt(s / static_cast<double>(n));
    if (s < 1e-12) s = 1.0;
  }
  std::vector<std::vector<double>> z(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) z[i][j] = (x[i][j] - mean[j]) / scale[j];

  // Class weights balance the hinge terms when the median split is uneven.
  std::size_t n_good = 0;
  for (bool l : labels) n_good += l ? 1 : 0;
  const std::size_t n_bad = n - n_good;
  const double w_good = n_good ? 0.5 * static_cast<double>(n) / static_cast<double>(n_good) : 0.0;
  const double w_bad = n_bad ? 0.5 * static_cast<double>(n) / static_cast<double>(n_bad) : 0.0;

  auto init = detail::rng::stream(seed, 0xc1a55);
  std::vector<double> w(d);
  for (auto& v : w) v = init.normal(0.0, 0.01);
  double b = 0.0;
  std::vector<double> gw(d);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    for (std::size_t j = 0; j < d; ++j) gw[j] = cfg.l2 * w[j];
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = labels[i] ? 1.0 : -1.0;
      double s = b;
      for (std::size_t j = 0; j < d; ++j) s += w[j] * z[i][j];
      if (y * s < 1.0) {
        const double c = (labels[i] ? w_good : w_bad) / static_cast<double>(n);
        for (std::size_t j = 0; j < d; ++j) gw[j] -= c * y * z[i][j];
        gb -= c * y;
      }
    }
    for (std::size_t j = 0; j < d; ++j) w[j] -= cfg.learning_rate * gw[j];
    b -= cfg.learning_rate * gb;
  }

  linear_classifier out;
  out.weights.resize(d);
  out.bias = b;
  for (std::size_t j = 0; j < d; ++j) {
    out.weights[j] = w[j] / scale[j];
    out.bias -= w[j] * mean[j] / scale[j];
  }
  return out;
}

struct partition_config {
  std::size_t leaf_min_samples = 10;
  std::size_t max_depth = 4;
  double ucb_cp = 0.1;
  double split_accuracy = 0.8;  // minimum training accuracy to keep a split
  classifier_config classifier{};
  std::uint64_t seed = 0;
};

struct partition_node {
  std::string node_id;
  std::optional<linear_classifier> classifier;  // present iff the node has children
  std::optional<std::size_t> good_child;
  std::optional<std::size_t> bad_child;
  std::optional<std::size_t> parent;
  bool is_good_side = true;  // which side of the parent's classifier
  std::size_t depth = 0;
  std::vector<std::string> member_ids;
  std::size_t visit_count = 0;
  double node_value = 0.0;       // hv(members) / hv(root members)
  double split_accuracy = 0.0;   // training accuracy of the fitted classifier, 0 if none tried

  [[nodiscard]] bool is_leaf() const { return !good_child.has_value(); }
};

struct partition_tree {
  std::vector<partition_node> nodes;  // nodes[0] is the root
  partition_config config;

  [[nodiscard]] const partition_node& root() const { return nodes.front(); }

  [[nodiscard]] std::vector<std::size_t> leaves() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].is_leaf()) out.push_back(i);
    return out;
  }

  // Node indices root..node inclusive.
  [[nodiscard]] std::vector<std::size_t> path_to(std::size_t node) const {
    std::vector<std::size_t> path;
    std::optional<std::size_t> cur = node;
    while (cur) {
      path.push_back(*cur);
      cur = nodes.at(*cur).parent;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  // Whether x satisfies the first `levels` classifier constraints on the
  // root-to-node path (all of them by default).
  [[nodiscard]] bool region_contains(std::size_t node, std::span<const double> x,
                                     std::size_t levels = std::numeric_limits<std::size_t>::max()) const {
    const auto path = path_to(node);
    for (std::size_t k = 1; k < path.size() && k <= levels; ++k) {
      const auto& child = nodes[path[k]];
      const auto& parent = nodes[path[k - 1]];
      if (parent.classifier->good_side(x) != child.is_good_side) return false;
    }
    return true;
  }
};

using encoding_lookup = std::function<std::span<const double>(std::string_view)>;

inline encoding_lookup encodings_of(const benchmark_table& table) {
  return [&table](std::string_view id) -> std::span<const double> { return table.at(id).encoding; };
}

inline encoding_lookup encodings_of(const std::unordered_map<std::string, std::vector<double>>& map) {
  return [&map](std::string_view id) -> std::span<const double> {
    auto it = map.find(std::string(id));
    if (it == map.end()) throw not_found_error("no encoding for sample '" + std::string(id) + "'");
    return it->second;
  };
}

inline partition_tree build_tree(const sample_set& pool, const encoding_lookup& encoding, const partition_config& cfg) {
  if (cfg.leaf_min_samples < 1) throw contract_error("build_tree: leaf_min_samples must be >= 1");
  if (!(cfg.ucb_cp >= 0.0)) throw contract_error("build_tree: ucb_cp must be >= 0");

  std::unordered_map<std::string, std::vector<double>> enc;
  for (const auto& e : pool.entries()) {
    const auto span = encoding(e.id);
    enc.emplace(e.id, std::vector<double>(span.begin(), span.end()));
  }

  partition_tree tree;
  tree.config = cfg;
  partition_node root;
  root.node_id = "n0";
  for (const auto& e : pool.entries()) root.member_ids.push_back(e.id);
  tree.nodes.push_back(std::move(root));

  auto hv_of = [&](const std::vector<std::string>& ids) {
    std::vector<objective_vector> pts;
    pts.reserve(ids.size());
    for (const auto& id : ids) pts.push_back(pool.at(id));
    return hypervolume(pts, pool.reference());
  };
  const double root_hv = hv_of(tree.nodes[0].member_ids);
  tree.nodes[0].node_value = root_hv > 0.0 ? 1.0 : 0.0;

  // Breadth-first; node ids follow creation order.
  for (std::size_t cur = 0; cur < tree.nodes.size(); ++cur) {
    const std::size_t depth = tree.nodes[cur].depth;
    const auto members = tree.nodes[cur].member_ids;
    if (depth >= cfg.max_depth || members.size() < 2 * cfg.leaf_min_samples) continue;

    std::vector<objective_vector> pts;
    std::vector<std::vector<double>> xs;
    for (const auto& id : members) {
      pts.push_back(pool.at(id));
      xs.push_back(enc.at(id));
    }
    const auto numbers = dominance_numbers(pts);
    auto sorted = numbers;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median = m % 2 ? static_cast<double>(sorted[m / 2])
                                : 0.5 * static_cast<double>(sorted[m / 2 - 1] + sorted[m / 2]);
    std::vector<char> labels(m);
    std::size_t n_good = 0;
    for (std::size_t i = 0; i < m; ++i) {
      labels[i] = static_cast<double>(numbers[i]) <= median;
      n_good += labels[i];
    }
    if (n_good == m) continue;  // nothing to separate

    const std::vector<bool> label_bits(labels.begin(), labels.end());
    const auto clf = fit_linear_classifier(xs, label_bits, cfg.classifier, detail::rng::mix(cfg.seed) ^ cur);

    std::vector<std::string> good, bad;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const bool pred = clf.good_side(xs[i]);
      if (pred == (labels[i] != 0)) ++correct;
      (pred ? good : bad).push_back(members[i]);
    }
    const double accuracy = static_cast<double>(correct) / static_cast<double>(m);
    tree.nodes[cur].split_accuracy = accuracy;
    if (accuracy < cfg.split_accuracy || good.empty() || bad.empty()) continue;

    tree.nodes[cur].classifier = clf;
    for (bool side : {true, false}) {
      partition_node child;
      child.node_id = "n" + std::to_string(tree.nodes.size());
      child.parent = cur;
      child.is_good_side = side;
      child.depth = depth + 1;
      child.member_ids = side ? good : bad;
      const double hv = hv_of(child.member_ids);
      child.node_value = root_hv > 0.0 ? hv / root_hv : 0.0;
      const std::size_t idx = tree.nodes.size();
      tree.nodes.push_back(std::move(child));
      if (side)
        tree.nodes[cur].good_child = idx;
      else
        tree.nodes[cur].bad_child = idx;
    }
  }
  return tree;
}

inline partition_tree build_tree(const sample_set& pool, const benchmark_table& table, const partition_config& cfg) {
  return build_tree(pool, encodings_of(table), cfg);
}

inline double ucb_score(const partition_node& child, std::size_t parent_visits, double cp) {
  if (cp == 0.0) return child.node_value;
  if (child.visit_count == 0) return std::numeric_limits<double>::infinity();
  const double n_parent = static_cast<double>(std::max<std::size_t>(parent_visits, 1));
  return child.node_value +
         2.0 * cp * std::sqrt(2.0 * std::log(n_parent) / static_cast<double>(child.visit_count));
}

// Root-to-leaf UCB walk. Bumps visit counts along the path; ties go to the
// good child. Returns the leaf index.
inline std::size_t select_region(partition_tree& tree) {
  std::size_t cur = 0;
  ++tree.nodes[cur].visit_count;
  while (!tree.nodes[cur].is_leaf()) {
    const auto& node = tree.nodes[cur];
    const std::size_t g = *node.good_child, b = *node.bad_child;
    const double ug = ucb_score(tree.nodes[g], node.visit_count, tree.config.ucb_cp);
    const double ub = ucb_score(tree.nodes[b], node.visit_count, tree.config.ucb_cp);
    cur = ub > ug ? b : g;
    ++tree.nodes[cur].visit_count;
  }
  return cur;
}

// k distinct table ids inside the leaf's region and outside `excluded`.
// Seeded rejection sampling, 10*|table| draws per constraint level; the
// deepest constraint is dropped whenever a level comes up short. Returns
// fewer than k only when the table has fewer available ids; throws
// search_exhausted when none are left.
inline std::vector<std::string> sample_from_region(const partition_tree& tree, std::size_t leaf,
                                                   const benchmark_table& table, std::size_t k, std::uint64_t seed,
                                                   const std::unordered_set<std::string>& excluded = {}) {
  if (k < 1) throw contract_error("sample_from_region: k must be >= 1");
  if (leaf >= tree.nodes.size() || !tree.nodes[leaf].is_leaf())
    throw contract_error("sample_from_region: node is not a leaf of this tree");

  const std::size_t n = table.size();
  detail::rng gen(seed);
  std::vector<char> taken(n, 0);
  std::size_t available = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (excluded.contains(table[i].id))
      taken[i] = 1;
    else
      ++available;
  }
  if (available == 0) throw search_exhausted("no unobserved architectures left in the table");
  const std::size_t want = std::min(k, available);

  std::vector<std::string> chosen;
  const std::size_t depth = tree.nodes[leaf].depth;
  for (std::size_t level = depth + 1; level-- > 0 && chosen.size() < want;) {
    const std::size_t draws = 10 * n;
    for (std::size_t a = 0; a < draws && chosen.size() < want; ++a) {
      const std::size_t i = gen.index(n);
      if (taken[i]) continue;
      if (!tree.region_contains(leaf, table[i].encoding, level)) continue;
      taken[i] = 1;
      chosen.push_back(table[i].id);
    }
  }
  if (chosen.size() < want) {
    // Unconstrained sweep over whatever is left, in shuffled order.
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n; ++i)
      if (!taken[i]) rest.push_back(i);
    for (std::size_t i = rest.size(); i > 1; --i) std::swap(rest[i - 1], rest[gen.index(i)]);
    for (std::size_t i = 0; i < rest.size() && chosen.size() < want; ++i) chosen.push_back(table[rest[i]].id);
  }
  return chosen;
}

struct scored_candidate {
  std::string id;
  objective_vector values;
};

// Keep the k candidates with the lowest dominance number against
// observed ∪ candidates; ties keep candidate order.
inline std::vector<scored_candidate> select_promising(std::span<const scored_candidate> candidates,
                                                      std::span<const objective_vector> observed, std::size_t k) {
  std::vector<objective_vector> pool(observed.begin(), observed.end());
  for (const auto& c : candidates) pool.push_back(c.values);
  const auto numbers = dominance_numbers(pool);
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return numbers[observed.size() + a] < numbers[observed.size() + b];
  });
  std::vector<scored_candidate> out;
  for (std::size_t i = 0; i < order.size() && out.size() < k; ++i) out.push_back(candidates[order[i]]);
  return out;
}

// Table rows inside the leaf's full region.
inline std::vector<std::size_t> region_members(const partition_tree& tree, std::size_t leaf,
                                               const benchmark_table& table) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < table.size(); ++i)
    if (tree.region_contains(leaf, table[i].encoding)) out.push_back(i);
  return out;
}

inline nlohmann::json tree_to_json(const partition_tree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : tree.nodes) {
    nlohmann::json j;
    j["node_id"] = n.node_id;
    j["depth"] = n.depth;
    j["members"] = n.member_ids.size();
    j["visit_count"] = n.visit_count;
    j["node_value"] = n.node_value;
    j["split_accuracy"] = n.split_accuracy;
    j["parent"] = n.parent ? nlohmann::json(tree.nodes[*n.parent].node_id) : nlohmann::json(nullptr);
    j["side"] = n.parent ? (n.is_good_side ? "good" : "bad") : "root";
    if (n.classifier) {
      j["classifier"] = {{"weights", n.classifier->weights}, {"bias", n.classifier->bias}};
      j["good_child"] = tree.nodes[*n.good_child].node_id;
      j["bad_child"] = tree.nodes[*n.bad_child].node_id;
    }
    nodes.push_back(std::move(j));
  }
  return {{"leaf_min_samples", tree.config.leaf_min_samples},
          {"max_depth", tree.config.max_depth},
          {"ucb_cp", tree.config.ucb_cp},
          {"nodes", std::move(nodes)}};
}

}  // namespace cenas
