#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "optreg/learn/error_measure.hpp"
#include "optreg/problems/io.hpp"
#include "optreg/problems/stats.hpp"
#include "test_util.hpp"

using namespace optreg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("optreg_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ProblemSpec small_1d(double lo, double hi, std::uint64_t seed = 7) {
  ProblemSpec s;
  s.kind = ProblemKind::deconv1d;
  s.rows = 64;
  s.cols = 1;
  s.noise_lo = lo;
  s.noise_hi = hi;
  s.seed = seed;
  return s;
}

ProblemSpec small_2d(double lo, double hi) {
  ProblemSpec s;
  s.kind = ProblemKind::deblur2d;
  s.rows = 12;
  s.cols = 10;
  s.bc = Boundary::reflexive;
  s.stencils = {"l1", "l4"};
  s.phantom = "blobs";
  s.noise_lo = lo;
  s.noise_hi = hi;
  s.seed = 3;
  return s;
}

}  // namespace

TEST(SummaryStats, OneToHundred) {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  const BoxStats s = summary_stats(v);
  EXPECT_DOUBLE_EQ(s.median, 50.5);
  EXPECT_DOUBLE_EQ(s.q25, 25.75);
  EXPECT_DOUBLE_EQ(s.q75, 75.25);
  EXPECT_DOUBLE_EQ(s.mean, 50.5);
  // Sample std of 1..n is sqrt(n(n+1)/12).
  EXPECT_NEAR(s.std, std::sqrt(100.0 * 101.0 / 12.0), 1e-12);
  EXPECT_TRUE(s.outliers.empty());
  EXPECT_DOUBLE_EQ(s.whisker_lo, 1.0);
  EXPECT_DOUBLE_EQ(s.whisker_hi, 100.0);
}

TEST(SummaryStats, SingleValue) {
  const std::vector<double> v{0.37};
  const BoxStats s = summary_stats(v);
  for (double f : {s.median, s.q25, s.q75, s.whisker_lo, s.whisker_hi, s.mean}) EXPECT_EQ(f, 0.37);
  EXPECT_EQ(s.std, 0.0);
  EXPECT_TRUE(s.outliers.empty());
}

TEST(SummaryStats, FarPointIsTheOnlyOutlier) {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  const BoxStats base = summary_stats(v);
  v.push_back(base.q75 + 10.0 * (base.q75 - base.q25));
  const BoxStats s = summary_stats(v);
  ASSERT_EQ(s.outliers.size(), 1u);
  EXPECT_EQ(s.outliers[0], v.back());
  EXPECT_EQ(s.whisker_hi, 100.0);
}

TEST(SummaryStats, EmptyThrows) {
  const std::vector<double> v;
  EXPECT_THROW(summary_stats(v), Error);
}

TEST(Rng, SplitMixReferenceValues) {
  // Computed with an independent big-integer implementation of the mixer.
  SplitMix64 r(1234567);
  EXPECT_EQ(r.next(), 6457827717110365317ULL);
  EXPECT_EQ(r.next(), 3203168211198807973ULL);
  EXPECT_EQ(r.next(), 9817491932198370423ULL);
}

TEST(Rng, NormalMoments) {
  SplitMix64 r(99);
  const int N = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / N, 0.0, 4.0 / std::sqrt(N));
  EXPECT_NEAR(s2 / N, 1.0, 4.0 * std::sqrt(2.0 / N));
}

TEST(Generate, ToeplitzMatchesDirectConvolution) {
  const ProblemSpec spec = small_1d(0.0, 0.0);
  const ForwardModel fm = forward_model(spec);
  const std::size_t n = spec.rows;
  std::mt19937_64 gen(5);
  const Vector x = testutil::random_vector(n, gen);
  // y_i = Σ_j g(i−j) x_j with g the unit-sum Gaussian on offsets −(n−1)..(n−1).
  double total = 0.0;
  for (std::ptrdiff_t d = -static_cast<std::ptrdiff_t>(n) + 1; d < static_cast<std::ptrdiff_t>(n); ++d)
    total += std::exp(-0.5 * static_cast<double>(d * d));
  const Vector y = fm.apply(x);
  for (std::size_t i = 0; i < n; ++i) {
    double yi = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = static_cast<double>(i) - static_cast<double>(j);
      yi += std::exp(-0.5 * d * d) / total * x[j];
    }
    EXPECT_NEAR(y[i], yi, 1e-14);
  }
  EXPECT_EQ(fm.L.rows(), n + 1);
}

TEST(Generate, ZeroNoiseGivesExactData) {
  for (const ProblemSpec& spec : {small_1d(0.0, 0.0), small_2d(0.0, 0.0)}) {
    const Dataset ds = generate_dataset(spec, 5, DatasetRole::training);
    const ForwardModel fm = forward_model(spec);
    for (const auto& it : ds.items) {
      EXPECT_EQ(it.b, fm.apply(it.x));
      EXPECT_EQ(it.noise_level, 0.0);
    }
  }
}

TEST(Generate, SameSeedIsBitwiseIdentical) {
  const Dataset a = generate_dataset(small_1d(0.2, 0.25), 20, DatasetRole::training);
  const Dataset b = generate_dataset(small_1d(0.2, 0.25), 20, DatasetRole::training);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.items[k].x, b.items[k].x);
    EXPECT_EQ(a.items[k].b, b.items[k].b);
    EXPECT_EQ(a.items[k].noise_level, b.items[k].noise_level);
  }
  const Dataset c = generate_dataset(small_1d(0.2, 0.25, 8), 20, DatasetRole::training);
  EXPECT_NE(a.items[0].x, c.items[0].x);
  const Dataset v = generate_dataset(small_1d(0.2, 0.25), 20, DatasetRole::validation);
  EXPECT_NE(a.items[0].x, v.items[0].x);
}

TEST(Generate, NoiseLevelIdentity) {
  for (const ProblemSpec& spec : {small_1d(0.2, 0.25), small_2d(0.1, 0.15)}) {
    const Dataset ds = generate_dataset(spec, 50, DatasetRole::validation);
    const ForwardModel fm = forward_model(spec);
    for (const auto& it : ds.items) {
      const Vector ax = fm.apply(it.x);
      double eta2 = 0.0, ax2 = 0.0;
      for (std::size_t i = 0; i < ax.size(); ++i) {
        eta2 += (it.b[i] - ax[i]) * (it.b[i] - ax[i]);
        ax2 += ax[i] * ax[i];
      }
      const double realized = eta2 / ax2;
      EXPECT_NEAR(realized, it.noise_level, 1e-12);
      EXPECT_GE(it.noise_level, spec.noise_lo);
      EXPECT_LE(it.noise_level, spec.noise_hi);
    }
  }
}

TEST(Generate, NoiseWhitenessProbe) {
  const ProblemSpec spec = small_1d(0.1, 0.1, 2024);
  const Dataset ds = generate_dataset(spec, 1000, DatasetRole::training);
  const ForwardModel fm = forward_model(spec);
  const double n = static_cast<double>(spec.n());
  double sum = 0.0;
  for (const auto& it : ds.items) {
    const Vector ax = fm.apply(it.x);
    Vector eta(ax.size());
    for (std::size_t i = 0; i < ax.size(); ++i) eta[i] = it.b[i] - ax[i];
    // Rescale to unit component variance before pooling.
    const double sigma = norm2(eta) / std::sqrt(n);
    for (double e : eta) sum += e / sigma;
  }
  const double mean = sum / (1000.0 * n);
  EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(1000.0 * n));
}

TEST(Generate, PhantomsHaveStructure) {
  SplitMix64 rng(1);
  const Vector x = piecewise_phantom(256, rng);
  EXPECT_EQ(x.front(), 0.0);
  EXPECT_EQ(x.back(), 0.0);
  double mean = 0.0;
  for (double v : x) mean += v / 256.0;
  EXPECT_GT(mean, 0.3);
  const Vector img = blob_phantom(16, 16, rng);
  for (double v : img) EXPECT_GT(v, 0.0);
}

TEST(Generate, ImageSourcesGiveColumns) {
  const fs::path dir = scratch("sources");
  Matrix img(64, 3);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 64; ++i) img(i, j) = static_cast<double>(i + 100 * j);
  write_csv(dir / "img.csv", img);
  ProblemSpec spec = small_1d(0.0, 0.0);
  spec.sources = {"img.csv"};
  const Dataset ds = generate_dataset(spec, 4, DatasetRole::training, image_loader(dir));
  EXPECT_EQ(ds.items[0].x, img.column(0));
  EXPECT_EQ(ds.items[2].x, img.column(2));
  EXPECT_EQ(ds.items[3].x, img.column(0));

  spec.rows = 32;
  try {
    generate_dataset(spec, 1, DatasetRole::training, image_loader(dir));
    FAIL() << "wrong-sized source accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SourceError);
    EXPECT_NE(std::string(e.what()).find("img.csv"), std::string::npos);
  }
  spec.sources = {"missing.pgm"};
  try {
    generate_dataset(spec, 1, DatasetRole::training, image_loader(dir));
    FAIL() << "missing source accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SourceError);
    EXPECT_NE(std::string(e.what()).find("missing.pgm"), std::string::npos);
  }
}

TEST(Generate, AugmentAddsDihedralVariants) {
  const fs::path dir = scratch("augment");
  Matrix img(12, 10);
  for (std::size_t j = 0; j < 10; ++j)
    for (std::size_t i = 0; i < 12; ++i) img(i, j) = static_cast<double>(i * 10 + j) / 200.0;
  write_csv(dir / "a.csv", img);
  ProblemSpec spec = small_2d(0.0, 0.0);
  spec.sources = {"a.csv"};
  spec.augment = true;
  const Dataset ds = generate_dataset(spec, 4, DatasetRole::training, image_loader(dir));
  // Item 1 is the up-down flip.
  EXPECT_EQ(ds.items[1].x[0], img(11, 0));
  EXPECT_EQ(ds.items[3].x[0], img(11, 9));
}

TEST(Io, CsvRoundTripIsBitwise) {
  const fs::path dir = scratch("csv");
  Matrix g(5, 4);
  const double specials[] = {M_PI, -1e-300, 1.0 / 3.0, 6.02214076e23, -0.0, 0.1, 5e-324};
  for (std::size_t k = 0; k < g.size(); ++k) g.data()[k] = specials[k % 7] * static_cast<double>(k + 1);
  write_csv(dir / "g.csv", g);
  EXPECT_EQ(read_csv(dir / "g.csv"), g);
  std::mt19937_64 gen(3);
  const Matrix v = as_grid(testutil::random_vector(17, gen), 17, 1);
  write_csv(dir / "v.csv", v);
  EXPECT_EQ(read_csv(dir / "v.csv"), v);
  EXPECT_EQ(read_file(dir / "v.csv").substr(0, 6), "value\n");
}

TEST(Io, PgmRoundTripWithinQuantization) {
  const fs::path dir = scratch("pgm");
  SplitMix64 rng(4);
  Matrix img(9, 13);
  for (double& v : img.data()) v = rng.uniform();
  write_pgm(dir / "i.pgm", img);
  const Matrix back = read_image(dir / "i.pgm");
  ASSERT_EQ(back.rows(), 9u);
  ASSERT_EQ(back.cols(), 13u);
  for (std::size_t k = 0; k < img.size(); ++k) EXPECT_LE(std::abs(back.data()[k] - img.data()[k]), 0.5 / 255.0 + 1e-15);
}

TEST(Io, BadFilesRaiseSourceError) {
  const fs::path dir = scratch("bad");
  write_file(dir / "bad.pgm", "P2\n2 2\n255\n0 0 0 0\n");
  write_file(dir / "bad.csv", "a,b\n1,2\n3\n");
  write_file(dir / "nan.csv", "value\n1\nabc\n");
  for (const char* f : {"bad.pgm", "bad.csv", "nan.csv", "nothere.csv", "x.png"}) {
    try {
      read_image(dir / f);
      FAIL() << f;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::SourceError) << f;
      EXPECT_NE(std::string(e.what()).find(f), std::string::npos) << e.what();
    }
  }
}

TEST(Io, DatasetRoundTrip) {
  const fs::path dir = scratch("dataset");
  for (const ProblemSpec& spec : {small_1d(0.2, 0.25), small_2d(0.1, 0.15)}) {
    const Dataset ds = generate_dataset(spec, 6, DatasetRole::validation);
    fs::remove_all(dir);
    write_dataset(dir, ds);
    const Dataset back = read_dataset(dir);
    EXPECT_EQ(back.role, DatasetRole::validation);
    EXPECT_EQ(to_json(back.spec), to_json(spec));
    ASSERT_EQ(back.size(), ds.size());
    for (std::size_t k = 0; k < ds.size(); ++k) {
      EXPECT_EQ(back.items[k].x, ds.items[k].x);
      EXPECT_EQ(back.items[k].b, ds.items[k].b);
      EXPECT_EQ(back.items[k].noise_level, ds.items[k].noise_level);
    }
  }
}

TEST(Io, SpecJsonValidation) {
  const Json good = Json::parse(R"({"kind":"deblur2d","shape":[16,16],"psf":{"kind":"gaussian","variance":1},
      "bc":"reflexive","stencils":["l1","l2","l3","l4"],"noise_range":[0.1,0.15],"seed":5})");
  const ProblemSpec s = problem_spec_from_json(good);
  EXPECT_EQ(s.rows, 16u);
  EXPECT_EQ(s.stencils.size(), 4u);
  EXPECT_EQ(problem_spec_from_json(to_json(s)).seed, 5u);

  auto expect_config_error = [](const std::string& text, const std::string& needle) {
    try {
      problem_spec_from_json(Json::parse(text));
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_config_error(R"({"kind":"deconv1d","shape":[64],"colour":1})", "colour");
  expect_config_error(R"({"kind":"deconv1d","shape":[64],"noise_range":[0.3,0.2]})", "noise_range");
  expect_config_error(R"({"kind":"deconv1d","shape":"big"})", "shape");
  expect_config_error(R"({"kind":"deblur2d","shape":[8,8],"stencils":["l9"]})", "l9");
  expect_config_error(R"({"kind":"deblur2d","shape":[8,8],"stencils":["l1"],"psf":{"sigma":2}})", "sigma");
  expect_config_error(R"({"kind":"deconv1d","shape":[64],"bc":"periodic"})", "bc");
}

TEST(Io, RelativeErrorHandComputation) {
  const Vector xt{1.0, -2.0, 0.5};
  const Vector x{1.1, -2.0, 0.45};
  // Huber β = 1e-4: |v| > β gives |v| − β/2, else v²/(2β).
  auto h = [](double v) { return std::abs(v) > 1e-4 ? std::abs(v) - 0.5e-4 : v * v / 2e-4; };
  const double expect = (h(0.1) + h(0.0) + h(-0.05)) / (h(1.0) + h(-2.0) + h(0.5));
  EXPECT_NEAR(relative_error(x, xt, ErrorMeasure::huber(1e-4)), expect, 1e-15);
  const Vector zero(3, 0.0);
  for (const auto& rho : {ErrorMeasure::sq2norm(), ErrorMeasure::pnorm(5), ErrorMeasure::huber(1e-4)})
    EXPECT_NEAR(relative_error(zero, xt, rho), 1.0, 1e-15);
}
