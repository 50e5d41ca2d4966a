#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "optreg/cli/app.hpp"

using namespace optreg;
using namespace optreg::cli;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("optreg_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kConfig1d = R"({"schema":1,
  "problem":{"kind":"deconv1d","shape":[48],"psf":{"kind":"gaussian","variance":1},
             "regularizer":"first_derivative","noise_range":[0.2,0.25],"seed":11},
  "training_size":12,"validation_size":6,"method":"opt-tik-gsvd","rho":"sq2norm","sizes":[1,2,4]})";

const char* kConfig2d = R"({"schema":1,
  "problem":{"kind":"deblur2d","shape":[8,8],"psf":{"kind":"gaussian","variance":1},"bc":"reflexive",
             "stencils":["l1","l2","l3","l4"],"noise_range":[0.1,0.15],"seed":5},
  "training_size":10,"validation_size":4,"method":"opt-tik-multi","rho":"sq2norm"})";

std::vector<std::vector<std::string>> read_rows(const fs::path& p) {
  std::istringstream in(read_file(p));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    rows.push_back(f);
  }
  return rows;
}

}  // namespace

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = scratch(::testing::UnitTest::GetInstance()->current_test_info()->name());
    write_file(dir / "ex1.json", kConfig1d);
    write_file(dir / "ex2.json", kConfig2d);
  }
  std::string p(const std::string& rel) const { return (dir / rel).string(); }
  fs::path dir;
};

TEST_F(CliTest, GenerateWritesManifests) {
  const CliRun r = run({"generate", "--config", p("ex1.json"), "--out", p("d")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Dataset tr = read_dataset(dir / "d" / "training");
  const Dataset va = read_dataset(dir / "d" / "validation");
  EXPECT_EQ(tr.size(), 12u);
  EXPECT_EQ(va.size(), 6u);
  EXPECT_EQ(tr.spec.seed, 11u);
}

TEST_F(CliTest, SeedRepetitionGivesIdenticalFiles) {
  ASSERT_EQ(run({"generate", "--config", p("ex1.json"), "--out", p("a")}).code, 0);
  ASSERT_EQ(run({"generate", "--config", p("ex1.json"), "--out", p("b")}).code, 0);
  for (const char* f : {"training/manifest.json", "validation/manifest.json", "training/items/b_00003.csv"})
    EXPECT_EQ(read_file(dir / "a" / f), read_file(dir / "b" / f)) << f;
  ASSERT_EQ(run({"generate", "--config", p("ex1.json"), "--out", p("c"), "--seed", "12"}).code, 0);
  EXPECT_NE(read_file(dir / "a" / "training/items/b_00000.csv"), read_file(dir / "c" / "training/items/b_00000.csv"));
}

TEST_F(CliTest, MalformedConfigIsExitTwoWithFieldName) {
  write_file(dir / "bad1.json", R"({"schema":1,"problem":{"kind":"deconv1d","shape":[48],"noise_range":[0.5,0.1]}})");
  write_file(dir / "bad2.json", R"({"schema":1,"trainig_size":3})");
  write_file(dir / "bad3.json", R"({"schema":7})");
  write_file(dir / "bad4.json", R"({"schema":1, "problem": )");
  for (auto [file, needle] : std::vector<std::pair<std::string, std::string>>{
           {"bad1.json", "noise_range"}, {"bad2.json", "trainig_size"}, {"bad3.json", "schema"}, {"bad4.json", "JSON"}}) {
    const CliRun r = run({"generate", "--config", p(file), "--out", p("x")});
    EXPECT_EQ(r.code, 2) << file;
    EXPECT_NE(r.err.find(needle), std::string::npos) << r.err;
  }
  EXPECT_EQ(run({"generate", "--config", p("ex1.json")}).code, 2);  // no --out
  EXPECT_EQ(run({"nonsense"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, TrainRecordsLambdaAndRisk) {
  ASSERT_EQ(run({"generate", "--config", p("ex1.json"), "--out", p("d")}).code, 0);
  const CliRun r = run({"train", "--config", p("ex1.json"), "--data", p("d"), "--out", p("params.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Params prm = load_params(dir / "params.json");
  EXPECT_EQ(prm.method, Method::opt_tik_gsvd);
  ASSERT_EQ(prm.lambda.size(), 1u);
  EXPECT_GT(prm.lambda[0], 0.0);
  EXPECT_GT(prm.risk, 0.0);
  EXPECT_EQ(prm.training_size, 12u);

  // The recorded risk is the empirical risk of the recorded λ.
  const Dataset tr = read_dataset(dir / "d" / "training");
  ProblemContext ctx(tr.spec);
  EXPECT_NEAR(empirical_risk(ctx.basis(BasisTag::gsvd), tr.training_set(), prm.lambda[0], ErrorMeasure::sq2norm()),
              prm.risk, 1e-12 * prm.risk);
}

TEST_F(CliTest, MultiTrainingGivesOneLambdaPerStencil) {
  ASSERT_EQ(run({"generate", "--config", p("ex2.json"), "--out", p("d")}).code, 0);
  const CliRun r = run({"train", "--config", p("ex2.json"), "--data", p("d"), "--out", p("m.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_params(dir / "m.json").lambda.size(), 4u);
  ASSERT_EQ(run({"train", "--config", p("ex2.json"), "--data", p("d"), "--method", "surrogate-multi", "--out",
                 p("s.json")})
                .code,
            0);
  EXPECT_EQ(load_params(dir / "s.json").lambda.size(), 4u);
}

TEST_F(CliTest, IncompatibleMethodIsConfigError) {
  ASSERT_EQ(run({"generate", "--config", p("ex1.json"), "--out", p("d")}).code, 0);
  for (const char* m : {"opt-tik-multi", "gcv-multi", "surrogate-multi"})
    EXPECT_EQ(run({"train", "--data", p("d"), "--method", m, "--out", p("x.json")}).code, 2) << m;
  EXPECT_EQ(run({"train", "--data", p("d"), "--method", "gcv", "--out", p("x.json")}).code, 2);
  EXPECT_EQ(run({"select", "--data", p("d"), "--method", "opt-tik-gsvd", "--out", p("x.json")}).code, 2);
  EXPECT_EQ(run({"train", "--data", p("d"), "--method", "opt-error-gsvd", "--rho", "pnorm:5", "--out", p("x.json")})
                .code,
            2);
}

TEST_F(CliTest, EvaluateOnTruthIsZero) {
  ASSERT_EQ(run({"generate", "--config", p("ex1.json"), "--out", p("d")}).code, 0);
  const CliRun r = run({"evaluate", "--recon", p("d/validation"), "--data", p("d"), "--out", p("e")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_rows(dir / "e" / "errors.csv");
  ASSERT_EQ(rows.size(), 7u);
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_EQ(rows[k][1], "0");
}

TEST_F(CliTest, EvaluateStatsMatchSummaryStats) {
  ASSERT_EQ(run({"generate", "--config", p("ex1.json"), "--out", p("d")}).code, 0);
  ASSERT_EQ(run({"select", "--data", p("d"), "--method", "gcv", "--out", p("g.json")}).code, 0);
  ASSERT_EQ(run({"reconstruct", "--params", p("g.json"), "--data", p("d"), "--out", p("r")}).code, 0);
  ASSERT_EQ(run({"evaluate", "--recon", p("r"), "--data", p("d"), "--rho", "huber", "--out", p("e")}).code, 0);
  const auto errs = read_rows(dir / "e" / "errors.csv");
  std::vector<double> col;
  for (std::size_t k = 1; k < errs.size(); ++k) col.push_back(std::stod(errs[k][1]));
  const BoxStats s = summary_stats(col);
  const auto stats = read_rows(dir / "e" / "stats.csv");
  ASSERT_EQ(stats.size(), 2u);
  EXPECT_EQ(stats[1][0], "gcv");
  EXPECT_EQ(stats[1][1], "huber:0.0001");
  EXPECT_EQ(stats[1][2], "6");
  EXPECT_EQ(std::stod(stats[1][3]), s.mean);
  EXPECT_EQ(std::stod(stats[1][4]), s.std);
  EXPECT_EQ(std::stod(stats[1][5]), s.median);
  EXPECT_EQ(std::stod(stats[1][6]), s.q25);
  EXPECT_EQ(std::stod(stats[1][7]), s.q75);

  // Per-item λ agrees with a direct selection call.
  const Params prm = load_params(dir / "g.json");
  const Dataset va = read_dataset(dir / "d" / "validation");
  ProblemContext ctx(va.spec);
  const auto f = ctx.basis(BasisTag::gsvd);
  for (std::size_t k = 0; k < va.size(); ++k) {
    EXPECT_EQ(prm.per_item[k].lambda, select_gcv(*f, va.items[k].b).lambda);
  }
}

TEST_F(CliTest, ShapeMismatchIsExitThree) {
  ASSERT_EQ(run({"generate", "--config", p("ex1.json"), "--out", p("d1")}).code, 0);
  ASSERT_EQ(run({"generate", "--config", p("ex2.json"), "--out", p("d2")}).code, 0);
  ASSERT_EQ(run({"train", "--config", p("ex1.json"), "--data", p("d1"), "--out", p("p1.json")}).code, 0);
  EXPECT_EQ(run({"reconstruct", "--params", p("p1.json"), "--data", p("d2"), "--out", p("r")}).code, 3);
  ASSERT_EQ(run({"reconstruct", "--params", p("p1.json"), "--data", p("d1"), "--out", p("r1")}).code, 0);
  EXPECT_EQ(run({"evaluate", "--recon", p("r1"), "--data", p("d2"), "--out", p("e")}).code, 3);
  // Damaged item file.
  write_file(dir / "d1" / "validation" / "items" / "x_00002.csv", "value\n1\n2\n");
  EXPECT_EQ(run({"evaluate", "--recon", p("r1"), "--data", p("d1"), "--out", p("e")}).code, 3);
  // Unknown key in a parameter file.
  Json j = read_json(dir / "p1.json");
  j["extra"] = 1;
  write_file(dir / "p2.json", j.dump());
  EXPECT_EQ(run({"reconstruct", "--params", p("p2.json"), "--data", p("d1"), "--out", p("r2")}).code, 3);
}

TEST_F(CliTest, ParetoHasOneRowPerSize) {
  ASSERT_EQ(run({"generate", "--config", p("ex1.json"), "--out", p("d")}).code, 0);
  const CliRun r = run({"pareto", "--config", p("ex1.json"), "--data", p("d"), "--method", "opt-tik-gsvd,opt-error-gsvd",
                     "--sizes", "8,1,2,4", "--out", p("pareto.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_rows(dir / "pareto.csv");
  ASSERT_EQ(rows.size(), 9u);
  const std::vector<std::string> expect{"1", "2", "4", "8"};
  for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(rows[k + 1][0], expect[k % 4]);
  EXPECT_EQ(run({"pareto", "--config", p("ex1.json"), "--data", p("d"), "--sizes", "1,99", "--out", p("x.csv")}).code,
            3);
  EXPECT_EQ(run({"pareto", "--config", p("ex1.json"), "--data", p("d"), "--sizes", "0,a", "--out", p("x.csv")}).code,
            2);
}

TEST_F(CliTest, PicardAndDecompositionDumps) {
  ASSERT_EQ(run({"generate", "--config", p("ex1.json"), "--out", p("d")}).code, 0);
  ASSERT_EQ(run({"train", "--config", p("ex1.json"), "--data", p("d"), "--out", p("p.json")}).code, 0);
  ASSERT_EQ(run({"picard", "--params", p("p.json"), "--data", p("d"), "--item", "2", "--out", p("pic.csv")}).code, 0);
  const auto rows = read_rows(dir / "pic.csv");
  ASSERT_EQ(rows.size(), 49u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"index", "c", "abs_projection", "phi"}));
  for (std::size_t k = 2; k < rows.size(); ++k) EXPECT_GE(std::stod(rows[k - 1][1]), std::stod(rows[k][1]));
  EXPECT_EQ(run({"picard", "--params", p("p.json"), "--data", p("d"), "--item", "99", "--out", p("x.csv")}).code, 3);

  ASSERT_EQ(run({"gsvd-info", "--config", p("ex1.json"), "--out", p("g.csv")}).code, 0);
  const auto g = read_rows(dir / "g.csv");
  ASSERT_EQ(g.size(), 49u);
  for (std::size_t k = 1; k < g.size(); ++k) {
    const double c = std::stod(g[k][1]), s = std::stod(g[k][2]);
    EXPECT_NEAR(c * c + s * s, 1.0, 1e-12);
  }
}

TEST_F(CliTest, FullPipelineIsDeterministic) {
  auto pipeline = [&](const std::string& root) {
    EXPECT_EQ(run({"generate", "--config", p("ex2.json"), "--out", p(root + "/d")}).code, 0);
    EXPECT_EQ(run({"train", "--config", p("ex2.json"), "--data", p(root + "/d"), "--out", p(root + "/p.json")}).code, 0);
    EXPECT_EQ(run({"reconstruct", "--params", p(root + "/p.json"), "--data", p(root + "/d"), "--out", p(root + "/r")})
                  .code,
              0);
    EXPECT_EQ(run({"evaluate", "--recon", p(root + "/r"), "--data", p(root + "/d"), "--out", p(root + "/e")}).code, 0);
  };
  pipeline("one");
  pipeline("two");
  for (const char* f : {"p.json", "r/manifest.json", "r/items/xhat_00001.csv", "e/errors.csv", "e/stats.csv"})
    EXPECT_EQ(read_file(dir / "one" / f), read_file(dir / "two" / f)) << f;
}
