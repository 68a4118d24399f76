#pragma once

// Grid carbon-intensity traces and emission accounting for GPU work.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cenas/detail/text.hpp"
#include "cenas/errors.hpp"

namespace cenas {

// Step function: intensity[i] holds on [timestamp[i], timestamp[i+1]).
// Times beyond duration() wrap around.
class carbon_trace {
 public:
  // Single-row traces are constant; they get a one-hour period.
  static constexpr double default_step_seconds = 3600.0;

  carbon_trace(std::vector<double> timestamps, std::vector<double> intensities)
      : ts_(std::move(timestamps)), ci_(std::move(intensities)) {
    if (ts_.empty() || ts_.size() != ci_.size()) throw contract_error("carbon_trace: need matching, nonempty series");
    if (ts_.front() != 0.0) throw contract_error("carbon_trace: first timestamp must be 0");
    for (std::size_t i = 0; i < ts_.size(); ++i) {
      if (!std::isfinite(ts_[i])) throw contract_error("carbon_trace: non-finite timestamp");
      if (i > 0 && !(ts_[i] > ts_[i - 1])) throw contract_error("carbon_trace: timestamps must increase strictly");
      if (!std::isfinite(ci_[i]) || !(ci_[i] > 0.0)) throw contract_error("carbon_trace: intensities must be positive");
    }
    // The last step lasts as long as the one before it.
    const double last_step = ts_.size() > 1 ? ts_.back() - ts_[ts_.size() - 2] : default_step_seconds;
    duration_ = ts_.back() + last_step;
  }

  [[nodiscard]] double duration() const { return duration_; }
  [[nodiscard]] std::size_t steps() const { return ts_.size(); }
  [[nodiscard]] const std::vector<double>& timestamps() const { return ts_; }
  [[nodiscard]] const std::vector<double>& intensities() const { return ci_; }

  [[nodiscard]] double step_start(std::size_t i) const { return ts_[i]; }
  [[nodiscard]] double step_end(std::size_t i) const { return i + 1 < ts_.size() ? ts_[i + 1] : duration_; }

  // Index of the step containing t (t >= 0, wrapped).
  [[nodiscard]] std::size_t step_at(double t) const {
    const double local = wrap(t);
    auto it = std::upper_bound(ts_.begin(), ts_.end(), local);
    return static_cast<std::size_t>(it - ts_.begin()) - 1;
  }

  [[nodiscard]] double wrap(double t) const {
    if (t < duration_) return t;
    double local = std::fmod(t, duration_);
    return local < 0.0 ? 0.0 : local;
  }

  // First step boundary strictly after t, in absolute time.
  [[nodiscard]] double next_boundary(double t) const {
    const double base = t - wrap(t);
    const std::size_t i = step_at(t);
    return std::max(base + step_end(i), std::nextafter(t, std::numeric_limits<double>::infinity()));
  }

 private:
  std::vector<double> ts_;
  std::vector<double> ci_;
  double duration_ = 0.0;
};

inline double intensity_at(const carbon_trace& trace, double t) {
  if (!(t >= 0.0)) throw contract_error("intensity_at: t must be >= 0");
  return trace.intensities()[trace.step_at(t)];
}

struct intensity_range {
  double c_min;
  double c_max;
};

// Min/max step intensity over [t, t + horizon), wrapping past the end.
inline intensity_range window_min_max(const carbon_trace& trace, double t, double horizon) {
  if (!(horizon > 0.0)) throw contract_error("window_min_max: horizon must be > 0");
  if (!(t >= 0.0)) throw contract_error("window_min_max: t must be >= 0");
  const auto& ci = trace.intensities();
  if (horizon >= trace.duration()) {
    auto [lo, hi] = std::minmax_element(ci.begin(), ci.end());
    return {*lo, *hi};
  }
  intensity_range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  double cursor = t;
  const double end = t + horizon;
  while (cursor < end) {
    const std::size_t i = trace.step_at(cursor);
    r.c_min = std::min(r.c_min, ci[i]);
    r.c_max = std::max(r.c_max, ci[i]);
    cursor = trace.next_boundary(cursor);
  }
  return r;
}

struct ledger_entry {
  double start_s;
  double end_s;
  std::size_t busy_gpus;
  double intensity;
  double grams;
};

struct emission_ledger {
  double cumulative_g = 0.0;
  double cumulative_gpu_seconds = 0.0;
  std::vector<ledger_entry> entries;
};

// grams = intensity [g/kWh] * busy * power [kW] * hours, split at steps.
inline void account(emission_ledger& ledger, double t0, double t1, std::size_t busy_gpus, const carbon_trace& trace,
                    double gpu_power_w) {
  if (!(t1 > t0)) throw contract_error("account: t1 must be > t0");
  if (!(t0 >= 0.0)) throw contract_error("account: t0 must be >= 0");
  if (!(gpu_power_w >= 0.0)) throw contract_error("account: gpu power must be >= 0");
  if (busy_gpus == 0) return;
  const double kw = static_cast<double>(busy_gpus) * gpu_power_w / 1000.0;
  double cursor = t0;
  while (cursor < t1) {
    const std::size_t i = trace.step_at(cursor);
    const double seg_end = std::min(t1, trace.next_boundary(cursor));
    const double intensity = trace.intensities()[i];
    const double grams = intensity * kw * (seg_end - cursor) / 3600.0;
    ledger.entries.push_back({cursor, seg_end, busy_gpus, intensity, grams});
    ledger.cumulative_g += grams;
    ledger.cumulative_gpu_seconds += static_cast<double>(busy_gpus) * (seg_end - cursor);
    cursor = seg_end;
  }
}

// Time at which busy GPUs starting at t0 will have emitted `grams`.
inline double time_to_emit(double t0, double grams, std::size_t busy_gpus, const carbon_trace& trace,
                           double gpu_power_w) {
  if (grams <= 0.0) return t0;
  const double kw = static_cast<double>(busy_gpus) * gpu_power_w / 1000.0;
  if (kw <= 0.0) return std::numeric_limits<double>::infinity();
  double cursor = t0;
  double left = grams;
  while (true) {
    const double intensity = intensity_at(trace, cursor);
    const double seg_end = trace.next_boundary(cursor);
    const double rate = intensity * kw / 3600.0;  // g per second
    const double seg_grams = rate * (seg_end - cursor);
    if (seg_grams >= left) return cursor + left / rate;
    left -= seg_grams;
    cursor = seg_end;
  }
}

inline carbon_trace load_trace(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  try {
    lines = detail::read_lines(path);
  } catch (const std::runtime_error& e) {
    throw parse_error(e.what());
  }
  const std::string where = path.string() + ": ";
  if (lines.empty()) throw parse_error(where + "empty file (no header)");
  const auto header = detail::split_csv_line(lines[0]);
  if (header.size() != 2 || header[0] != "timestamp_s" || header[1] != "intensity_gco2_kwh")
    throw parse_error(where + "header must be 'timestamp_s,intensity_gco2_kwh'");
  if (lines.size() == 1) throw parse_error(where + "no data rows");

  std::vector<double> ts, ci;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string at_row = where + "row " + std::to_string(li) + ": ";
    const auto cells = detail::split_csv_line(lines[li]);
    if (cells.size() != 2) throw parse_error(at_row + "expected 2 cells");
    double t = 0.0, c = 0.0;
    if (!detail::parse_double(cells[0], t) || !std::isfinite(t))
      throw parse_error(at_row + "column 'timestamp_s' is not a finite number");
    if (!detail::parse_double(cells[1], c) || !std::isfinite(c))
      throw parse_error(at_row + "column 'intensity_gco2_kwh' is not a finite number");
    if (li == 1 && t != 0.0) throw parse_error(at_row + "first timestamp must be 0");
    if (!ts.empty() && !(t > ts.back())) throw parse_error(at_row + "timestamps not strictly increasing");
    if (!(c > 0.0)) throw parse_error(at_row + "intensity must be positive");
    ts.push_back(t);
    ci.push_back(c);
  }
  return carbon_trace(std::move(ts), std::move(ci));
}

inline std::string trace_to_csv(const carbon_trace& trace) {
  std::ostringstream out;
  out << "timestamp_s,intensity_gco2_kwh\n";
  for (std::size_t i = 0; i < trace.steps(); ++i)
    out << detail::format_double(trace.timestamps()[i]) << ',' << detail::format_double(trace.intensities()[i]) << '\n';
  return out.str();
}

inline void write_trace(const carbon_trace& trace, const std::filesystem::path& path) {
  detail::write_atomic(path, trace_to_csv(trace));
}

inline std::string ledger_to_csv(const emission_ledger& ledger) {
  std::ostringstream out;
  out << "start_s,end_s,busy_gpus,intensity_gco2_kwh,grams\n";
  for (const auto& e : ledger.entries)
    out << detail::format_double(e.start_s) << ',' << detail::format_double(e.end_s) << ',' << e.busy_gpus << ','
        << detail::format_double(e.intensity) << ',' << detail::format_double(e.grams) << '\n';
  return out.str();
}

// Hourly samples of mean + amplitude * sin(2*pi*t/period + phase).
inline carbon_trace make_sinusoid_trace(std::size_t hours, double mean, double amplitude, double period_hours,
                                        double phase = 0.0) {
  if (hours < 1) throw contract_error("make_sinusoid_trace: hours must be >= 1");
  std::vector<double> ts, ci;
  for (std::size_t h = 0; h < hours; ++h) {
    ts.push_back(3600.0 * static_cast<double>(h));
    ci.push_back(mean + amplitude * std::sin(2.0 * std::numbers::pi * (static_cast<double>(h) + 0.5) / period_hours + phase));
  }
  return carbon_trace(std::move(ts), std::move(ci));
}

// Coefficient of variation (population std / mean) of the step values,
// weighted by step length.
inline double coefficient_of_variation(const carbon_trace& trace) {
  double w = 0.0, m = 0.0;
  for (std::size_t i = 0; i < trace.steps(); ++i) {
    const double len = trace.step_end(i) - trace.step_start(i);
    w += len;
    m += len * trace.intensities()[i];
  }
  m /= w;
  double var = 0.0;
  for (std::size_t i = 0; i < trace.steps(); ++i) {
    const double len = trace.step_end(i) - trace.step_start(i);
    const double dev = trace.intensities()[i] - m;
    var += len * dev * dev;
  }
  return std::sqrt(var / w) / m;
}

}  // namespace cenas
