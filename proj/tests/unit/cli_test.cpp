#include "vf/cli.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "vf/fitting.hpp"
#include "vf/io.hpp"

namespace vf {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run vfcast(std::vector<std::string> args) {
  args.insert(args.begin(), "vfcast");
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream b;
  b << in.rdbuf();
  return b.str();
}

// Non-comment CSV lines split into fields.
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string x;
    while (std::getline(ss, x, ',')) f.push_back(x);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    rows.push_back(f);
  }
  return rows;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("vfcast_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string simulate_toy(const std::string& name, const std::string& sizes = "30:30", const std::string& seed = "4") {
    auto r = vfcast({"simulate", "--model", "proposed", "--phi", "60,0.4,0.6,0.5,0.5,1,1", "--sizes", sizes, "--seed",
                     seed, "--floor", "1e-6", "--output", path(name)});
    EXPECT_EQ(r.code, 0) << r.err;
    return path(name);
  }

  fs::path dir_;
};

TEST(ParseSweep, SegmentsAndPoints) {
  auto s = parse_sweep("4:0:2,4:3:2");
  std::vector<CountPair> want{{2, 0}, {4, 0}, {4, 2}, {4, 3}};
  EXPECT_EQ(s, want);
  EXPECT_EQ(parse_sweep("0:0"), (std::vector<CountPair>{{0, 0}}));
  EXPECT_EQ(parse_sweep("1:0,3:1"), (std::vector<CountPair>{{1, 0}, {3, 1}}));
  EXPECT_EQ(parse_sweep("2:2:1").size(), 4u);
  EXPECT_THROW(parse_sweep("3:0,1:0"), InvalidArgument);
  EXPECT_THROW(parse_sweep("3:x"), InvalidArgument);
  EXPECT_THROW(parse_sweep("3:1:0"), InvalidArgument);
  EXPECT_THROW(parse_sweep(""), InvalidArgument);
}

TEST(ParsePair, Forms) {
  EXPECT_EQ(parse_pair("10:8"), (CountPair{10, 8}));
  EXPECT_THROW(parse_pair("10"), InvalidArgument);
  EXPECT_THROW(parse_pair("-1:2"), InvalidArgument);
}

TEST(ParseScheme, Forms) {
  EXPECT_EQ(parse_scheme("projection1").kind, GrowthScheme::projection1);
  EXPECT_EQ(parse_scheme("projection-2").kind, GrowthScheme::projection2);
  auto p = parse_scheme("proportional:2.5");
  EXPECT_EQ(p.kind, GrowthScheme::proportional);
  EXPECT_EQ(p.rho, 2.5);
  EXPECT_THROW(parse_scheme("proportional:-1"), InvalidArgument);
  EXPECT_THROW(parse_scheme("sideways"), InvalidArgument);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(vfcast({}).code, 1);
  EXPECT_EQ(vfcast({"dance"}).code, 1);
  EXPECT_EQ(vfcast({"fit", "--input", path("missing.tsv")}).code, 1);
  EXPECT_EQ(vfcast({"fit", "--input", path("missing.tsv"), "--model", "nope"}).code, 1);
  EXPECT_EQ(vfcast({"--help"}).code, 0);
}

TEST_F(CliTest, SimulateIsDeterministicAndRoundTrips) {
  auto a = simulate_toy("a.tsv");
  auto b = simulate_toy("b.tsv");
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_NE(slurp(a).find("# seed=4"), std::string::npos);
  auto prov = nlohmann::json::parse(slurp(a + ".json"));
  EXPECT_EQ(prov.at("seed").get<int>(), 4);
  EXPECT_EQ(prov.at("truncation_floor").get<double>(), 1e-6);

  VariantDataset d = load_tsv(a);
  EXPECT_EQ(d.sizes(), (CountPair{30, 30}));
  std::ostringstream again;
  write_tsv(again, d);
  std::istringstream in(again.str());
  VariantDataset e = read_tsv(in);
  for (int pop = 0; pop < 2; ++pop) {
    for (std::size_t i = 0; i < 30; ++i) {
      EXPECT_EQ(d.samples(pop)[i].variants.size(), e.samples(pop)[i].variants.size());
    }
  }
}

TEST_F(CliTest, SimulateVanishingMassIsEmpty) {
  auto r = vfcast({"simulate", "--phi", "1e-12,0.5,0.5,1,1,1,1", "--sizes", "5:5", "--output", path("e.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_tsv(path("e.tsv")).distinct_variants(), 0u);
  EXPECT_EQ(load_tsv(path("e.tsv")).sizes(), (CountPair{5, 5}));
}

TEST_F(CliTest, SimulateBaselines) {
  auto r = vfcast({"simulate", "--model", "d3bp", "--phi", "20,1,0.5", "--sizes", "10:12", "--output", path("d.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_tsv(path("d.tsv")).sizes(), (CountPair{10, 12}));
  r = vfcast({"simulate", "--model", "i3bp", "--phi", "5,1,0.5,5,1,0.5", "--sizes", "4:4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(vfcast({"simulate", "--model", "d3bp", "--phi", "20,1", "--sizes", "3:3"}).code, 1);
}

TEST_F(CliTest, PredictMatchesLibraryExactly) {
  const Hyperparams phi{60, 0.4, 0.6, 0.5, 0.5, 1, 1};
  auto r = vfcast({"predict", "--phi", "60,0.4,0.6,0.5,0.5,1,1", "--pilot-size", "5:3", "--sweep", "0:0,1:0,3:2:1",
                   "--v", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv_rows(r.out);
  bool saw_zero = false;
  double total_10 = -1;
  for (const auto& row : rows) {
    CountPair m{std::stol(row[0]), std::stol(row[1])};
    const double lambda = std::strtod(row[5].c_str(), nullptr);
    if (row[2] == "total") {
      if (m == CountPair{0, 0}) {
        saw_zero = true;
        EXPECT_EQ(lambda, 0.0);
      }
      if (m == CountPair{1, 0}) total_10 = lambda;
      EXPECT_EQ(lambda, total_predictive_mean({5, 3}, m, phi).lambda);
    } else {
      CountPair k{std::stol(row[3]), std::stol(row[4])};
      EXPECT_EQ(lambda, kton_predictive_mean({5, 3}, m, k, phi).lambda);
      if (m == CountPair{1, 0}) EXPECT_EQ(lambda, total_10);
    }
  }
  EXPECT_TRUE(saw_zero);
  EXPECT_GT(total_10, 0.0);
}

TEST_F(CliTest, PredictBaselineFromParamsFile) {
  FitResult f{ModelKind::d3bp, Bp3Params{20, 1, 0.5}, 0, 0, 0, true, 0};
  std::ofstream(path("p.json")) << f.to_json();
  auto r = vfcast({"predict", "--model", "d3bp", "--params", path("p.json"), "--pilot-size", "4:4", "--sweep", "2:2",
                   "--v", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(std::strtod(rows[0][5].c_str(), nullptr), d3bp_total_mean({4, 4}, {2, 2}, {20, 1, 0.5}));
  EXPECT_EQ(vfcast({"predict", "--model", "proposed", "--params", path("p.json"), "--pilot-size", "4:4", "--sweep",
                    "2:2"})
                .code,
            1);
  EXPECT_EQ(vfcast({"predict", "--phi", "1,0.5,0.5,1,1,1,1", "--pilot-size", "4:4", "--sweep", "2:1,1:1"}).code, 1);
}

TEST_F(CliTest, FitWritesSchema) {
  auto data = simulate_toy("t.tsv");
  auto r = vfcast({"fit", "--input", data, "--model", "d3bp", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("model"), "d3bp");
  EXPECT_EQ(j.at("params").size(), 3u);
  EXPECT_EQ(j.at("seed"), 3);
  EXPECT_EQ(j.at("config").at("v"), 10);
  for (const char* key : {"objective_init", "objective_final", "iterations", "converged", "config"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(vfcast({"fit", "--input", data, "--model", "d3bp", "--seed", "3"}).out, r.out);

  auto p = vfcast({"fit", "--input", data, "--max-iter", "2", "--rel-tol", "1e-8", "--output", path("fit.json")});
  ASSERT_TRUE(p.code == 0 || p.code == 2) << p.err;
  auto jp = nlohmann::json::parse(slurp(path("fit.json")));
  EXPECT_EQ(jp.at("params").size(), 7u);
  EXPECT_LE(jp.at("iterations").get<int>(), 2);
}

TEST_F(CliTest, KtonsMatchLibrary) {
  auto data = simulate_toy("k.tsv");
  auto r = vfcast({"ktons", "--input", data, "--pilot-size", "10:10", "--v", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  VariantDataset d = load_tsv(data);
  std::array<std::vector<std::size_t>, 2> a, b;
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t p = 0; p < 2; ++p) (i < 10 ? a : b)[p].push_back(i);
  }
  KtonTable t = count_new_ktons(d.subset(a), d.subset(b), 3);
  std::ostringstream want;
  write_kton_csv(want, t);
  auto got = r.out.substr(r.out.find("k1,k2"));
  EXPECT_EQ(got, want.str().substr(want.str().find("k1,k2")));
  EXPECT_EQ(vfcast({"ktons", "--input", data, "--pilot-size", "40:1"}).code, 1);
}

TEST_F(CliTest, CrossvalSummaryIsFoldMean) {
  auto data = simulate_toy("c.tsv", "12:12", "8");
  auto r = vfcast({"crossval", "--input", data, "--model", "d3bp", "--folds", "2", "--v", "2", "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rows = csv_rows(r.out);
  std::map<std::string, std::vector<double>> fold_res;
  std::map<std::string, double> mean_row;
  for (const auto& row : rows) {
    const std::string key = row[1] + "/" + row[2] + "/" + row[5] + "/" + row[6];
    const double res = std::strtod(row[9].c_str(), nullptr);
    if (row[0] == "mean") {
      mean_row[key] = res;
    } else if (row[0] != "sd") {
      fold_res[key].push_back(res);
      const double pred = std::strtod(row[7].c_str(), nullptr), obs = std::strtod(row[8].c_str(), nullptr);
      if (obs > 0) EXPECT_DOUBLE_EQ(res, (pred - obs) / obs);
    }
  }
  ASSERT_FALSE(mean_row.empty());
  for (const auto& [key, m] : mean_row) {
    const auto& v = fold_res.at(key);
    ASSERT_EQ(v.size(), 2u) << key;
    if (std::isnan(m)) continue;
    EXPECT_DOUBLE_EQ(m, (v[0] + v[1]) / 2.0) << key;
  }
  EXPECT_NE(r.out.find("# fold1_params="), std::string::npos);
  EXPECT_EQ(vfcast({"crossval", "--input", data, "--model", "d3bp", "--folds", "2", "--v", "2", "--seed", "5"}).out,
            r.out);
  EXPECT_EQ(vfcast({"crossval", "--input", data, "--folds", "50"}).code, 1);
}

TEST_F(CliTest, PowerlawReportsSlope) {
  auto r = vfcast({"powerlaw", "--phi", "10,0.3,0.6,0.1,0.1,1,1", "--replicates", "4", "--max-samples", "60",
                   "--floor", "1e-6", "--output", path("g.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("slope=", 0), 0u);
  auto text = slurp(path("g.csv"));
  EXPECT_NE(text.find("# slope="), std::string::npos);
  EXPECT_EQ(csv_rows(text).size(), 60u);
  EXPECT_EQ(vfcast({"powerlaw", "--phi", "10,0.3,0.6,0.1,0.1,1,1", "--scheme", "diagonal"}).code, 1);
}

// With equal rates both populations grow like N^sigma under a fixed ratio.
TEST_F(CliTest, ProportionalSlopeNearCommonRate) {
  auto r = vfcast({"powerlaw", "--phi", "2,0.5,0.5,1,1,1,1", "--scheme", "proportional:1", "--replicates", "50",
                   "--max-samples", "500", "--seed", "3", "--output", path("p.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const double slope = std::stod(r.out.substr(6));
  EXPECT_NEAR(slope, 0.5, 0.07);
}

#ifdef VF_CLI_PATH
TEST(CliBinary, HelpAndBadInputExitCodes) {
  EXPECT_EQ(std::system((std::string(VF_CLI_PATH) + " --help > /dev/null").c_str()), 0);
  int status = std::system((std::string(VF_CLI_PATH) + " fit --input /nonexistent.tsv 2> /dev/null").c_str());
  EXPECT_EQ(WEXITSTATUS(status), 1);
}
#endif

}  // namespace
}  // namespace vf
