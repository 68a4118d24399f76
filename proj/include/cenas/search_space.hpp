#pragma once

// Tabular model of an architecture search space. Every architecture's
// performance comes from a benchmark table row; nothing is trained.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cenas/detail/random.hpp"
#include "cenas/detail/text.hpp"
#include "cenas/errors.hpp"
#include "cenas/moo.hpp"

namespace cenas {

struct arch_record {
  std::string id;
  std::vector<double> encoding;  // each entry in [0, 1]
  double true_accuracy = 0.0;    // percent
  double proxy_accuracy = 0.0;   // percent, one-shot estimate
  double train_seconds = 0.0;
  double oneshot_eval_seconds = 0.0;
  double inference_energy_mj = 0.0;
};

enum class objective_field { accuracy, inference_energy_mj, train_seconds, oneshot_eval_seconds };
enum class direction { maximize, minimize };

struct objective_term {
  objective_field field;
  direction dir;
};

// Which record fields form the objective vector. The accuracy field reads
// true_accuracy for true evaluation and proxy_accuracy for proxy evaluation.
struct objective_spec {
  std::vector<objective_term> terms{{objective_field::accuracy, direction::maximize},
                                    {objective_field::inference_energy_mj, direction::minimize}};
};

inline objective_field parse_objective_field(std::string_view name) {
  if (name == "true_accuracy" || name == "accuracy") return objective_field::accuracy;
  if (name == "inference_energy_mj") return objective_field::inference_energy_mj;
  if (name == "train_seconds") return objective_field::train_seconds;
  if (name == "oneshot_eval_seconds") return objective_field::oneshot_eval_seconds;
  throw contract_error("unknown objective field '" + std::string(name) + "'");
}

struct evaluation {
  objective_vector objectives;
  double cost_seconds = 0.0;
};

class benchmark_table {
 public:
  benchmark_table(std::vector<arch_record> records, objective_spec spec = {})
      : records_(std::move(records)), spec_(std::move(spec)) {
    if (records_.empty()) throw contract_error("benchmark table is empty");
    if (spec_.terms.empty()) throw contract_error("objective spec is empty");
    encoding_dim_ = records_.front().encoding.size();
    if (encoding_dim_ == 0) throw contract_error("encoding dimension must be >= 1");
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      if (r.encoding.size() != encoding_dim_)
        throw contract_error("record '" + r.id + "': inconsistent encoding dimension");
      if (!index_.emplace(r.id, i).second) throw contract_error("duplicate id '" + r.id + "'");
    }
  }

  [[nodiscard]] std::size_t size() const { return records_.size(); }
  [[nodiscard]] std::size_t encoding_dim() const { return encoding_dim_; }
  [[nodiscard]] const objective_spec& spec() const { return spec_; }
  [[nodiscard]] const std::vector<arch_record>& records() const { return records_; }
  [[nodiscard]] const arch_record& operator[](std::size_t i) const { return records_[i]; }
  [[nodiscard]] bool contains(std::string_view id) const { return index_.contains(std::string(id)); }

  [[nodiscard]] std::size_t index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) throw not_found_error("architecture '" + std::string(id) + "' not in table");
    return it->second;
  }

  [[nodiscard]] const arch_record& at(std::string_view id) const { return records_[index_of(id)]; }

  [[nodiscard]] objective_vector objectives(const arch_record& r, bool proxy) const {
    objective_vector v;
    v.reserve(spec_.terms.size());
    for (const auto& t : spec_.terms) {
      double x = 0.0;
      switch (t.field) {
        case objective_field::accuracy: x = proxy ? r.proxy_accuracy : r.true_accuracy; break;
        case objective_field::inference_energy_mj: x = r.inference_energy_mj; break;
        case objective_field::train_seconds: x = r.train_seconds; break;
        case objective_field::oneshot_eval_seconds: x = r.oneshot_eval_seconds; break;
      }
      v.push_back(t.dir == direction::maximize ? x : -x);
    }
    return v;
  }

 private:
  std::vector<arch_record> records_;
  objective_spec spec_;
  std::size_t encoding_dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

// Fully trained accuracy; costs train_seconds.
inline evaluation true_eval(const benchmark_table& table, std::string_view id) {
  const auto& r = table.at(id);
  return {table.objectives(r, false), r.train_seconds};
}

// Supernet estimate; costs oneshot_eval_seconds.
inline evaluation proxy_eval(const benchmark_table& table, std::string_view id) {
  const auto& r = table.at(id);
  return {table.objectives(r, true), r.oneshot_eval_seconds};
}

// One unit below the worst value of every objective over both the true and
// the proxy vectors, so any table row strictly dominates it.
inline objective_vector derive_reference_point(const benchmark_table& table) {
  objective_vector ref = table.objectives(table[0], false);
  for (const auto& r : table.records()) {
    for (bool proxy : {false, true}) {
      const auto v = table.objectives(r, proxy);
      for (std::size_t i = 0; i < v.size(); ++i) ref[i] = std::min(ref[i], v[i]);
    }
  }
  for (double& x : ref) x -= 1.0;
  return ref;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline const std::vector<std::string>& fixed_columns() {
  static const std::vector<std::string> cols{"true_accuracy", "proxy_accuracy", "train_seconds",
                                             "oneshot_eval_seconds", "inference_energy_mj"};
  return cols;
}

}  // namespace detail

inline benchmark_table load_table(const std::filesystem::path& path, objective_spec spec = {}) {
  std::vector<std::string> lines;
  try {
    lines = detail::read_lines(path);
  } catch (const std::runtime_error& e) {
    throw parse_error(e.what());
  }
  const std::string where = path.string() + ": ";
  if (lines.empty()) throw parse_error(where + "empty file (no header)");

  const auto header = detail::split_csv_line(lines[0]);
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (!col.emplace(header[i], i).second) throw parse_error(where + "duplicate column '" + header[i] + "'");
  if (!col.contains("id")) throw parse_error(where + "missing column 'id'");
  for (const auto& c : detail::fixed_columns())
    if (!col.contains(c)) throw parse_error(where + "missing column '" + c + "'");

  std::size_t dim = 0;
  while (col.contains("enc_" + std::to_string(dim))) ++dim;
  if (dim == 0) throw parse_error(where + "missing column 'enc_0'");
  for (const auto& h : header) {
    if (h.rfind("enc_", 0) == 0) {
      double k = -1;
      if (!detail::parse_double(h.substr(4), k) || k < 0 || k >= static_cast<double>(dim) || k != std::floor(k))
        throw parse_error(where + "inconsistent encoding columns: '" + h + "' (expected enc_0..enc_" +
                          std::to_string(dim - 1) + ")");
    } else if (h != "id" && std::find(detail::fixed_columns().begin(), detail::fixed_columns().end(), h) ==
                                detail::fixed_columns().end()) {
      throw parse_error(where + "unknown column '" + h + "'");
    }
  }
  if (lines.size() == 1) throw parse_error(where + "no data rows");

  std::vector<arch_record> records;
  records.reserve(lines.size() - 1);
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t row = li;  // 1-based data row
    const std::string at_row = where + "row " + std::to_string(row) + ": ";
    const auto cells = detail::split_csv_line(lines[li]);
    if (cells.size() != header.size())
      throw parse_error(at_row + "expected " + std::to_string(header.size()) + " cells, got " +
                        std::to_string(cells.size()) + " (inconsistent encoding dimension?)");
    auto num = [&](const std::string& name) {
      const auto& text = cells[col.at(name)];
      double v = 0.0;
      if (text.empty()) throw parse_error(at_row + "column '" + name + "' is empty");
      if (!detail::parse_double(text, v) || !std::isfinite(v))
        throw parse_error(at_row + "column '" + name + "' is not a finite number: '" + text + "'");
      return v;
    };

    arch_record r;
    r.id = cells[col.at("id")];
    if (r.id.empty()) throw parse_error(at_row + "column 'id' is empty");
    if (auto [it, fresh] = seen.emplace(r.id, row); !fresh)
      throw parse_error(at_row + "duplicate id '" + r.id + "' (first seen on row " + std::to_string(it->second) + ")");
    r.encoding.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const std::string name = "enc_" + std::to_string(k);
      r.encoding[k] = num(name);
      if (r.encoding[k] < 0.0 || r.encoding[k] > 1.0) throw parse_error(at_row + "column '" + name + "' outside [0,1]");
    }
    r.true_accuracy = num("true_accuracy");
    r.proxy_accuracy = num("proxy_accuracy");
    r.train_seconds = num("train_seconds");
    r.oneshot_eval_seconds = num("oneshot_eval_seconds");
    r.inference_energy_mj = num("inference_energy_mj");
    for (auto [name, v] : {std::pair{"true_accuracy", r.true_accuracy}, std::pair{"proxy_accuracy", r.proxy_accuracy}})
      if (v < 0.0 || v > 100.0) throw parse_error(at_row + "column '" + name + "' outside [0,100]");
    for (auto [name, v] : {std::pair{"train_seconds", r.train_seconds},
                           std::pair{"oneshot_eval_seconds", r.oneshot_eval_seconds},
                           std::pair{"inference_energy_mj", r.inference_energy_mj}})
      if (!(v > 0.0)) throw parse_error(at_row + "column '" + name + "' must be positive");
    if (r.train_seconds < r.oneshot_eval_seconds)
      throw parse_error(at_row + "train_seconds < oneshot_eval_seconds for id '" + r.id + "'");
    records.push_back(std::move(r));
  }
  return benchmark_table(std::move(records), std::move(spec));
}

inline std::string table_to_csv(const benchmark_table& table) {
  std::ostringstream out;
  out << "id";
  for (std::size_t k = 0; k < table.encoding_dim(); ++k) out << ",enc_" << k;
  for (const auto& c : detail::fixed_columns()) out << ',' << c;
  out << '\n';
  for (const auto& r : table.records()) {
    out << r.id;
    for (double e : r.encoding) out << ',' << detail::format_double(e);
    for (double v : {r.true_accuracy, r.proxy_accuracy, r.train_seconds, r.oneshot_eval_seconds, r.inference_energy_mj})
      out << ',' << detail::format_double(v);
    out << '\n';
  }
  return out.str();
}

inline void write_table(const benchmark_table& table, const std::filesystem::path& path) {
  detail::write_atomic(path, table_to_csv(table));
}

// ---------------------------------------------------------------------------
// Synthetic tables

// Encoding dimensions cycle through three roles:
//   j % 3 == 0  capacity: raises accuracy, inference energy and training time
//   j % 3 == 1  structure: concave accuracy gain, free in energy
//   j % 3 == 2  overhead: costs energy, no accuracy
// so the Pareto-optimal region is a learnable slab of the encoding cube.
inline benchmark_table generate_synthetic(std::size_t n, std::size_t d, double proxy_noise_sigma, std::uint64_t seed) {
  if (n < 1) throw contract_error("generate_synthetic: n must be >= 1");
  if (d < 1) throw contract_error("generate_synthetic: d must be >= 1");
  if (!(proxy_noise_sigma >= 0.0) || !std::isfinite(proxy_noise_sigma))
    throw contract_error("generate_synthetic: proxy_noise_sigma must be >= 0");

  auto gen = detail::rng::stream(seed, 1);
  auto noise = detail::rng::stream(seed, 2);
  auto proxy = detail::rng::stream(seed, 3);
  const auto clamp_pct = [](double v) { return std::clamp(v, 0.0, 100.0); };
  // Fixed width keeps ids sortable.
  const std::size_t width = std::to_string(n - 1).size();

  std::vector<arch_record> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    arch_record r;
    std::string num = std::to_string(i);
    r.id = "arch_" + std::string(width - num.size(), '0') + num;
    r.encoding.resize(d);
    for (auto& x : r.encoding) x = gen.uniform();

    double capacity = 0.0, structure = 0.0, overhead = 0.0;
    std::size_t nc = 0, ns = 0, no = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const double x = r.encoding[j];
      switch (j % 3) {
        case 0: capacity += x; ++nc; break;
        case 1: structure += 1.0 - (1.0 - x) * (1.0 - x); ++ns; break;
        default: overhead += x; ++no; break;
      }
    }
    capacity /= static_cast<double>(nc);
    structure = ns ? structure / static_cast<double>(ns) : 0.5;
    overhead = no ? overhead / static_cast<double>(no) : 0.5;

    r.true_accuracy = clamp_pct(40.0 + 20.0 * std::sqrt(capacity) + 25.0 * structure + noise.normal(0.0, 1.0));
    r.inference_energy_mj = std::max(0.5, 4.0 + 18.0 * capacity + 20.0 * overhead + noise.normal(0.0, 0.5));
    r.train_seconds = 3600.0 * (1.0 + 2.0 * capacity) * std::clamp(1.0 + noise.normal(0.0, 0.1), 0.7, 1.3);
    r.oneshot_eval_seconds = (30.0 + 60.0 * capacity) * std::clamp(1.0 + noise.normal(0.0, 0.1), 0.7, 1.3);
    const double eps = proxy_noise_sigma > 0.0 ? proxy.normal(0.0, proxy_noise_sigma) : 0.0;
    r.proxy_accuracy = clamp_pct(r.true_accuracy + eps);
    records.push_back(std::move(r));
  }
  return benchmark_table(std::move(records));
}

// Spearman rank correlation with average ranks for ties.
inline double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw contract_error("spearman: need two equal-length series, n >= 2");
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j - 1) + 1.0;
      for (std::size_t k = i; k < j; ++k) r[order[k]] = avg;
      i = j;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace cenas
