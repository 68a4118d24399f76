#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "cenas/search_space.hpp"

using namespace cenas;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / "cenas_tests";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_file(const std::string& name, const std::string& text) {
  auto p = temp_file(name);
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

const char* header = "id,enc_0,enc_1,true_accuracy,proxy_accuracy,train_seconds,oneshot_eval_seconds,inference_energy_mj\n";

std::string rows(int n) {
  std::string s;
  for (int i = 0; i < n; ++i)
    s += "a" + std::to_string(i) + ",0.1,0.2,70,68,100,2,20\n";
  return s;
}

// Pearson correlation of average ranks, computed by counting.
double oracle_spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto rank = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double x : v) {
        less += x < v[i];
        equal += x == v[i];
      }
      r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
  };
  auto ra = rank(a), rb = rank(b);
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) ma += ra[i], mb += rb[i];
  ma /= ra.size();
  mb /= rb.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double table_spearman(const benchmark_table& t) {
  std::vector<double> a, b;
  for (const auto& r : t.records()) a.push_back(r.true_accuracy), b.push_back(r.proxy_accuracy);
  return spearman(a, b);
}

}  // namespace

TEST(LoadTable, WellFormedFile) {
  auto p = write_file("ok.csv", std::string(header) + rows(3));
  auto t = load_table(p);
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.encoding_dim(), 2u);
  EXPECT_EQ(t.at("a1").inference_energy_mj, 20.0);
}

TEST(LoadTable, ColumnOrderIsFree) {
  auto p = write_file("order.csv",
                      "inference_energy_mj,id,true_accuracy,enc_1,proxy_accuracy,enc_0,oneshot_eval_seconds,train_seconds\n"
                      "20,x,70,0.5,68,0.25,2,100\n");
  auto t = load_table(p);
  EXPECT_EQ(t.at("x").encoding, (std::vector<double>{0.25, 0.5}));
  EXPECT_EQ(t.at("x").train_seconds, 100.0);
}

TEST(LoadTable, DuplicateIdNamed) {
  auto p = write_file("dup.csv", std::string(header) + "a1,0,0,70,68,100,2,20\na1,0,0,70,68,100,2,20\n");
  try {
    load_table(p);
    FAIL();
  } catch (const parse_error& e) {
    EXPECT_NE(std::string(e.what()).find("a1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(LoadTable, TrainCheaperThanOneshotNamesRow) {
  std::string body = rows(6) + "bad,0.1,0.2,70,68,1,2,20\n";
  auto p = write_file("row7.csv", std::string(header) + body);
  try {
    load_table(p);
    FAIL();
  } catch (const parse_error& e) {
    EXPECT_NE(std::string(e.what()).find("row 7"), std::string::npos) << e.what();
  }
}

TEST(LoadTable, RejectsMalformedInput) {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"missing_col.csv", "id,enc_0,true_accuracy,proxy_accuracy,train_seconds,oneshot_eval_seconds\nx,0,70,68,100,2\n"},
      {"nan.csv", std::string(header) + "x,0,0,nan,68,100,2,20\n"},
      {"inf.csv", std::string(header) + "x,0,0,70,68,inf,2,20\n"},
      {"text.csv", std::string(header) + "x,0,0,seventy,68,100,2,20\n"},
      {"short.csv", std::string(header) + "x,0,70,68,100,2,20\n"},
      {"empty_cell.csv", std::string(header) + "x,0,,70,68,100,2,20\n"},
      {"enc_range.csv", std::string(header) + "x,1.5,0,70,68,100,2,20\n"},
      {"acc_range.csv", std::string(header) + "x,0,0,170,68,100,2,20\n"},
      {"neg_energy.csv", std::string(header) + "x,0,0,70,68,100,2,-1\n"},
      {"gap_enc.csv", "id,enc_0,enc_2,true_accuracy,proxy_accuracy,train_seconds,oneshot_eval_seconds,inference_energy_mj\n"
                      "x,0,0,70,68,100,2,20\n"},
      {"unknown_col.csv", std::string("id,enc_0,true_accuracy,proxy_accuracy,train_seconds,oneshot_eval_seconds,"
                                      "inference_energy_mj,extra\nx,0,70,68,100,2,20,1\n")},
      {"header_only.csv", header},
      {"empty.csv", ""},
  };
  for (const auto& [name, text] : cases) EXPECT_THROW(load_table(write_file(name, text)), parse_error) << name;
  EXPECT_THROW(load_table(temp_file("does_not_exist.csv")), parse_error);
}

TEST(LoadTable, MissingColumnNamed) {
  auto p = write_file("missing_energy.csv",
                      "id,enc_0,true_accuracy,proxy_accuracy,train_seconds,oneshot_eval_seconds\nx,0,70,68,100,2\n");
  try {
    load_table(p);
    FAIL();
  } catch (const parse_error& e) {
    EXPECT_NE(std::string(e.what()).find("inference_energy_mj"), std::string::npos);
  }
}

TEST(TableRoundTrip, BitExact) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto t = generate_synthetic(200, 5, 3.0, seed);
    auto p = temp_file("rt" + std::to_string(seed) + ".csv");
    write_table(t, p);
    auto back = load_table(p);
    ASSERT_EQ(back.size(), t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto &a = t[i], &b = back[i];
      EXPECT_EQ(a.id, b.id);
      EXPECT_EQ(a.encoding, b.encoding);
      EXPECT_EQ(a.true_accuracy, b.true_accuracy);
      EXPECT_EQ(a.proxy_accuracy, b.proxy_accuracy);
      EXPECT_EQ(a.train_seconds, b.train_seconds);
      EXPECT_EQ(a.oneshot_eval_seconds, b.oneshot_eval_seconds);
      EXPECT_EQ(a.inference_energy_mj, b.inference_energy_mj);
    }
    EXPECT_EQ(table_to_csv(back), table_to_csv(t));
  }
}

TEST(GenerateSynthetic, ZeroNoiseProxyEqualsTrue) {
  auto t = generate_synthetic(300, 4, 0.0, 8);
  for (const auto& r : t.records()) EXPECT_EQ(r.proxy_accuracy, r.true_accuracy);
  for (const auto& r : t.records()) {
    const auto te = true_eval(t, r.id), pe = proxy_eval(t, r.id);
    EXPECT_EQ(te.objectives, pe.objectives);
    EXPECT_NE(te.cost_seconds, pe.cost_seconds);
  }
}

TEST(GenerateSynthetic, DeterministicAndSeedSensitive) {
  EXPECT_EQ(table_to_csv(generate_synthetic(100, 8, 5, 42)), table_to_csv(generate_synthetic(100, 8, 5, 42)));
  EXPECT_NE(table_to_csv(generate_synthetic(100, 8, 5, 42)), table_to_csv(generate_synthetic(100, 8, 5, 43)));
}

TEST(GenerateSynthetic, RecordsSatisfyInvariants) {
  auto t = generate_synthetic(1000, 8, 5, 1);
  for (const auto& r : t.records()) {
    EXPECT_EQ(r.encoding.size(), 8u);
    for (double x : r.encoding) EXPECT_TRUE(x >= 0.0 && x <= 1.0);
    EXPECT_TRUE(r.true_accuracy >= 0 && r.true_accuracy <= 100);
    EXPECT_TRUE(r.proxy_accuracy >= 0 && r.proxy_accuracy <= 100);
    EXPECT_GT(r.inference_energy_mj, 0);
    EXPECT_GE(r.train_seconds, r.oneshot_eval_seconds);
  }
}

TEST(GenerateSynthetic, RejectsBadParameters) {
  EXPECT_THROW(generate_synthetic(0, 8, 5, 0), contract_error);
  EXPECT_THROW(generate_synthetic(10, 0, 5, 0), contract_error);
  EXPECT_THROW(generate_synthetic(10, 8, -1, 0), contract_error);
}

TEST(GenerateSynthetic, RankCorrelationAtSigmaFive) {
  auto t = generate_synthetic(1000, 8, 5, 0);
  const double rho = table_spearman(t);
  EXPECT_GT(rho, 0.5);
  EXPECT_LT(rho, 0.99);
}

TEST(GenerateSynthetic, RankCorrelationFallsWithNoise) {
  const std::vector<double> sigmas{0.5, 2, 5, 10, 20};
  std::vector<double> mean(sigmas.size(), 0.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    for (std::size_t i = 0; i < sigmas.size(); ++i) mean[i] += table_spearman(generate_synthetic(500, 8, sigmas[i], seed));
  for (std::size_t i = 1; i < sigmas.size(); ++i) EXPECT_GT(mean[i - 1], mean[i]);
}

TEST(Spearman, MatchesCountingOracle) {
  std::mt19937_64 gen(4);
  std::uniform_int_distribution<int> d(0, 20);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(60), b(60);
    for (auto& x : a) x = d(gen);
    for (auto& x : b) x = d(gen);
    EXPECT_NEAR(spearman(a, b), oracle_spearman(a, b), 1e-12);
  }
}

TEST(Evaluation, SignNormalizationAndCosts) {
  benchmark_table t({{"r", {0.5}, 70, 68, 100, 2, 20}});
  const auto te = true_eval(t, "r");
  EXPECT_EQ(te.objectives, (objective_vector{70, -20}));
  EXPECT_EQ(te.cost_seconds, 100);
  const auto pe = proxy_eval(t, "r");
  EXPECT_EQ(pe.objectives, (objective_vector{68, -20}));
  EXPECT_EQ(pe.cost_seconds, 2);
  EXPECT_THROW(true_eval(t, "nope"), not_found_error);
  EXPECT_THROW(proxy_eval(t, "nope"), not_found_error);
  EXPECT_EQ(true_eval(t, "r").objectives, te.objectives);
}

TEST(Evaluation, ProxyAlwaysCheaper) {
  auto t = generate_synthetic(500, 6, 5, 3);
  for (const auto& r : t.records()) EXPECT_LT(proxy_eval(t, r.id).cost_seconds, true_eval(t, r.id).cost_seconds);
}

TEST(Evaluation, CustomObjectiveSpec) {
  objective_spec spec{{{objective_field::accuracy, direction::maximize},
                       {objective_field::train_seconds, direction::minimize},
                       {objective_field::inference_energy_mj, direction::minimize}}};
  benchmark_table t({{"r", {0.5}, 70, 68, 100, 2, 20}}, spec);
  EXPECT_EQ(true_eval(t, "r").objectives, (objective_vector{70, -100, -20}));
}

TEST(ReferencePoint, StrictlyDominatedByEveryTrueAndProxyVector) {
  auto t = generate_synthetic(400, 6, 10, 5);
  const auto ref = derive_reference_point(t);
  for (const auto& r : t.records()) {
    for (const auto& v : {true_eval(t, r.id).objectives, proxy_eval(t, r.id).objectives})
      for (std::size_t i = 0; i < v.size(); ++i) EXPECT_LT(ref[i], v[i]);
  }
}

TEST(BenchmarkTable, RejectsInvalidConstruction) {
  EXPECT_THROW(benchmark_table({}), contract_error);
  EXPECT_THROW(benchmark_table({{"a", {0.1}, 1, 1, 2, 1, 1}, {"a", {0.1}, 1, 1, 2, 1, 1}}), contract_error);
  EXPECT_THROW(benchmark_table({{"a", {0.1}, 1, 1, 2, 1, 1}, {"b", {0.1, 0.2}, 1, 1, 2, 1, 1}}), contract_error);
}
