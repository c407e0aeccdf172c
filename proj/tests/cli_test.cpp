#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cccpde/cli.hpp"
#include "cccpde/data.hpp"
#include "cccpde/model.hpp"

namespace cccpde::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, double> read_summary(const fs::path& p) {
  std::map<std::string, double> m;
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    m[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
  }
  return m;
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;
  std::ostringstream out, err;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("cccpde_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  int call(std::vector<std::string> args) {
    args.insert(args.begin(), "cccpde");
    out.str("");
    err.str("");
    return run(args, out, err);
  }
  std::string p(const std::string& rel) const { return (dir / rel).string(); }
  void write(const std::string& rel, const std::string& text) const { std::ofstream(dir / rel) << text; }

  void small_data() {
    ASSERT_EQ(call({"gen-data", "--preset", "separable", "--out", p("d"), "--n-train", "300",
                    "--n-test", "200", "--seed", "3"}),
              kExitOk);
  }
  void small_model() {
    small_data();
    ASSERT_EQ(call({"train", "--model", "cccpde", "--data", p("d/train.csv"), "--out", p("m"),
                    "--epochs", "3", "--hidden", "8", "--disc-width", "8", "--base-depth", "2"}),
              kExitOk)
        << err.str();
  }
};

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(call({}), kExitUsage);
  EXPECT_EQ(call({"no-such-command"}), kExitUsage);
  EXPECT_EQ(call({"gen-data", "--out", p("x")}), kExitUsage);
  EXPECT_EQ(call({"gen-data", "--preset", "nope", "--out", p("x")}), kExitUsage);
  EXPECT_NE(err.str().find("separable"), std::string::npos);
  EXPECT_EQ(call({"gen-data", "--preset", "separable", "--out", p("x"), "--n-train", "abc"}),
            kExitUsage);
  EXPECT_EQ(call({"--help"}), kExitOk);
  EXPECT_EQ(call({"train", "--model", "cccpde", "--data", p("missing.csv"), "--out", p("m")}),
            kExitRuntime);
  write("bad.csv", "label,f0\n0,1\n1,x\n");
  EXPECT_EQ(call({"train", "--model", "cccpde", "--data", p("bad.csv"), "--out", p("m")}),
            kExitRuntime);
  EXPECT_NE(err.str().find("bad.csv:3:"), std::string::npos) << err.str();
}

TEST_F(Cli, ConfigFileUnknownKeyIsUsageError) {
  write("c.txt", "preset = separable\nn-trian = 10\n");
  EXPECT_EQ(call({"gen-data", "--config", p("c.txt"), "--out", p("x")}), kExitUsage);
  EXPECT_NE(err.str().find("n-trian"), std::string::npos);
  EXPECT_NE(err.str().find(":2:"), std::string::npos);
}

TEST_F(Cli, ConfigFileMalformedLineIsUsageError) {
  write("c.txt", "preset separable\n");
  EXPECT_EQ(call({"gen-data", "--config", p("c.txt"), "--out", p("x")}), kExitUsage);
}

TEST_F(Cli, FlagsOverrideConfigFile) {
  write("c.txt", "# comment\npreset = separable\nn-train = 40   # trailing\nn-test = 30\n");
  ASSERT_EQ(call({"gen-data", "--config", p("c.txt"), "--out", p("x"), "--n-train", "25"}), kExitOk)
      << err.str();
  EXPECT_EQ(data::load_csv(p("x/train.csv")).size(), 25u);
  EXPECT_EQ(data::load_csv(p("x/test.csv")).size(), 30u);
  const std::string cfg = slurp(p("x/config.txt"));
  EXPECT_NE(cfg.find("n-train = 25\n"), std::string::npos) << cfg;
  EXPECT_NE(cfg.find("n-test = 30\n"), std::string::npos) << cfg;
}

TEST_F(Cli, ResolvedConfigReplays) {
  ASSERT_EQ(call({"gen-data", "--preset", "overlap", "--out", p("a"), "--n-train", "50",
                  "--n-test", "20", "--seed", "9"}),
            kExitOk);
  fs::copy_file(p("a/config.txt"), p("replay.txt"));
  ASSERT_EQ(call({"gen-data", "--config", p("replay.txt"), "--out", p("b")}), kExitOk) << err.str();
  EXPECT_EQ(slurp(p("a/train.csv")), slurp(p("b/train.csv")));
}

TEST_F(Cli, GenDataIsByteDeterministic) {
  for (const char* sub : {"a", "b"}) {
    ASSERT_EQ(call({"gen-data", "--preset", "composite", "--out", p(sub), "--n-train", "200",
                    "--n-test", "100", "--seed", "5"}),
              kExitOk);
  }
  EXPECT_EQ(slurp(p("a/train.csv")), slurp(p("b/train.csv")));
  EXPECT_EQ(slurp(p("a/test.csv")), slurp(p("b/test.csv")));
  ASSERT_EQ(call({"gen-data", "--preset", "composite", "--out", p("c"), "--n-train", "200",
                  "--n-test", "100", "--seed", "6"}),
            kExitOk);
  EXPECT_NE(slurp(p("a/train.csv")), slurp(p("c/train.csv")));
}

TEST_F(Cli, TrainWritesArtifactsAndReloadReproducesLoss) {
  small_model();
  for (const char* f : {"model.bin", "loss_trace.csv", "summary.csv", "config.txt"}) {
    EXPECT_TRUE(fs::exists(dir / "m" / f)) << f;
  }
  const auto trace = slurp(p("m/loss_trace.csv"));
  EXPECT_EQ(trace.substr(0, trace.find('\n')), "epoch,loss,nll,bce");
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 4);
  const double recorded = read_summary(p("m/summary.csv")).at("final_loss");
  const model::CccpDeModel m = model::load_cccpde(p("m/model.bin"));
  const data::Dataset ds = data::load_csv(p("d/train.csv"));
  EXPECT_DOUBLE_EQ(m.loss_value(ds.features, ds.labels, {}).total, recorded);
}

TEST_F(Cli, TrainIsDeterministic) {
  small_model();
  ASSERT_EQ(call({"train", "--model", "cccpde", "--data", p("d/train.csv"), "--out", p("m2"),
                  "--epochs", "3", "--hidden", "8", "--disc-width", "8", "--base-depth", "2"}),
            kExitOk);
  EXPECT_EQ(slurp(p("m/model.bin")), slurp(p("m2/model.bin")));
}

TEST_F(Cli, TrainRejectsInvalidSettings) {
  small_data();
  EXPECT_EQ(call({"train", "--model", "cccpde", "--data", p("d/train.csv"), "--out", p("m"),
                  "--epochs", "0"}),
            kExitUsage);
  EXPECT_EQ(call({"train", "--model", "svm", "--data", p("d/train.csv"), "--out", p("m")}),
            kExitUsage);
}

TEST_F(Cli, EvalOutputs) {
  small_model();
  ASSERT_EQ(call({"eval", "--model", p("m/model.bin"), "--data", p("d/test.csv"), "--out", p("e"),
                  "--volume", "1"}),
            kExitOk)
      << err.str();
  for (const char* f : {"reports.csv", "roc.csv", "roc_filtered.csv", "auc.csv", "summary.csv",
                        "config.txt"}) {
    EXPECT_TRUE(fs::exists(dir / "e" / f)) << f;
  }
  const std::string reports = slurp(p("e/reports.csv"));
  EXPECT_EQ(reports.substr(0, reports.find('\n')),
            "index,label,score_ffnn,score_sigmoid,logp_class0,logp_class1,post_mean,ci_lo,ci_hi,"
            "abstain");
  EXPECT_EQ(std::count(reports.begin(), reports.end(), '\n'), 201);
  const auto s = read_summary(p("e/summary.csv"));
  EXPECT_EQ(s.at("n_retained") + s.at("n_rejected"), 200.0);
}

TEST_F(Cli, EvalRejectsBadSettings) {
  small_model();
  EXPECT_EQ(call({"eval", "--model", p("m/model.bin"), "--data", p("d/test.csv"), "--out", p("e"),
                  "--mass", "1.5"}),
            kExitUsage);
  EXPECT_EQ(call({"eval", "--model", p("m/model.bin"), "--data", p("d/test.csv"), "--out", p("e"),
                  "--count-mode", "guess"}),
            kExitUsage);
  EXPECT_EQ(call({"eval", "--model", p("d/test.csv"), "--data", p("d/test.csv"), "--out", p("e")}),
            kExitRuntime);
}

TEST_F(Cli, SampleWritesRequestedRows) {
  small_model();
  ASSERT_EQ(call({"sample", "--model", p("m/model.bin"), "--class", "1", "--n", "10", "--out", p("s")}),
            kExitOk);
  const data::Dataset s = data::load_csv(p("s/samples.csv"));
  EXPECT_EQ(s.size(), 10u);
  EXPECT_EQ(s.dim(), 2u);
  for (auto l : s.labels) EXPECT_EQ(l, 1u);
  EXPECT_EQ(call({"sample", "--model", p("m/model.bin"), "--class", "2", "--out", p("s")}), kExitUsage);
}

TEST_F(Cli, DensityGridRows) {
  small_model();
  ASSERT_EQ(call({"density-grid", "--model", p("m/model.bin"), "--resolution", "7",
                  "--bounds=-3,3,-2,2", "--out", p("g")}),
            kExitOk)
      << err.str();
  const std::string g = slurp(p("g/density_grid.csv"));
  EXPECT_EQ(g.substr(0, g.find('\n')), "x,y,logp_0,logp_1,logp_total");
  EXPECT_EQ(std::count(g.begin(), g.end(), '\n'), 50);
  EXPECT_NE(slurp(p("g/config.txt")).find("bounds = -3,3,-2,2\n"), std::string::npos);
  EXPECT_EQ(call({"density-grid", "--model", p("m/model.bin"), "--bounds=1,0,0,1", "--out", p("g")}),
            kExitUsage);
}

TEST_F(Cli, GlmDemoHeader) {
  ASSERT_EQ(call({"glm-demo", "--out", p("r"), "--n", "200", "--grid", "11", "--epochs", "2",
                  "--hidden", "8"}),
            kExitOk);
  const std::string g = slurp(p("r/glm.csv"));
  EXPECT_EQ(g.substr(0, g.find('\n')), "x,mu,sigma,y_true,sigma_true,y_obs");
  EXPECT_EQ(std::count(g.begin(), g.end(), '\n'), 12);
  EXPECT_TRUE(read_summary(p("r/summary.csv")).contains("coverage_2sigma"));
}

TEST(ConfigFile, ParsesCommentsQuotesAndWhitespace) {
  const fs::path f = fs::temp_directory_path() / "cccpde_cfg_parse.txt";
  std::ofstream(f) << "\n# c\n  a = 1\nb=\"x # y\"  # z\nc = two words\n";
  const auto entries = read_config_file(f);
  fs::remove(f);
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[0].key, "a");
  EXPECT_EQ(entries[0].value, "1");
  EXPECT_EQ(entries[0].line, 3u);
  EXPECT_EQ(entries[1].value, "x # y");
  EXPECT_EQ(entries[2].value, "two words");
}

}  // namespace
}  // namespace cccpde::cli
