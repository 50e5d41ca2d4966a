#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "optreg/learn/error_measure.hpp"
#include "optreg/learn/multi.hpp"
#include "optreg/learn/scalar.hpp"
#include "optreg/problems/io.hpp"
#include "optreg/problems/stats.hpp"
#include "optreg/select/classic.hpp"
#include "optreg/serialize.hpp"
#include "optreg/spectral/optimal_error.hpp"
#include "optreg/structured/surrogate.hpp"

namespace optreg::cli {

// ---------------------------------------------------------------------------
// Methods

enum class Method {
  opt_tik_svd,
  opt_tik_gsvd,
  opt_error_svd,
  opt_error_gsvd,
  opt_tik_multi,
  gcv,
  gcv_multi,
  dp,
  mse_oracle,
  surrogate_multi,
};

inline constexpr std::array<std::pair<Method, const char*>, 10> kMethodNames{{
    {Method::opt_tik_svd, "opt-tik-svd"},
    {Method::opt_tik_gsvd, "opt-tik-gsvd"},
    {Method::opt_error_svd, "opt-error-svd"},
    {Method::opt_error_gsvd, "opt-error-gsvd"},
    {Method::opt_tik_multi, "opt-tik-multi"},
    {Method::gcv, "gcv"},
    {Method::gcv_multi, "gcv-multi"},
    {Method::dp, "dp"},
    {Method::mse_oracle, "mse-oracle"},
    {Method::surrogate_multi, "surrogate-multi"},
}};

inline const char* to_string(Method m) {
  for (const auto& [k, name] : kMethodNames)
    if (k == m) return name;
  return "?";
}

inline Method method_from_string(const std::string& s) {
  std::string all;
  for (const auto& [k, name] : kMethodNames) {
    if (s == name) return k;
    all += (all.empty() ? "" : ", ") + std::string(name);
  }
  fail(ErrorKind::ConfigError, "method: unknown method '" + s + "' (expected one of " + all + ")");
}

/// Methods that learn one parameter set from training data; the others pick
/// λ separately for every item.
inline bool is_trained(Method m) {
  return m != Method::gcv && m != Method::gcv_multi && m != Method::dp && m != Method::mse_oracle;
}

inline void check_compatible(Method m, const ProblemSpec& s, const ErrorMeasure& rho) {
  const bool is1d = s.kind == ProblemKind::deconv1d;
  const bool transform = !is1d && (s.bc == Boundary::periodic || s.bc == Boundary::reflexive);
  const std::string name = to_string(m);
  switch (m) {
    case Method::opt_tik_svd:
    case Method::opt_tik_gsvd:
    case Method::opt_error_gsvd:
    case Method::gcv:
    case Method::dp:
    case Method::mse_oracle:
      require(is1d, ErrorKind::ConfigError, "method: " + name + " needs a deconv1d problem (explicit GSVD path)");
      break;
    case Method::opt_error_svd:
      require(is1d || transform, ErrorKind::ConfigError,
              "method: opt-error-svd needs deconv1d or a periodic/reflexive deblur2d problem");
      break;
    case Method::opt_tik_multi:
    case Method::gcv_multi:
      require(transform, ErrorKind::ConfigError,
              "method: " + name + " needs a transform-diagonalizable problem (deblur2d with periodic or reflexive bc)");
      break;
    case Method::surrogate_multi:
      require(!is1d, ErrorKind::ConfigError, "method: surrogate-multi needs a deblur2d problem");
      break;
  }
  if (m == Method::opt_error_svd || m == Method::opt_error_gsvd)
    require(rho.kind() == ErrorMeasure::Kind::sq2norm, ErrorKind::ConfigError,
            "rho: " + name + " is defined for sq2norm only");
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  std::optional<ProblemSpec> problem;
  std::size_t training_size = 100;
  std::size_t validation_size = 100;
  std::optional<Method> method;
  ErrorMeasure rho = ErrorMeasure::sq2norm();
  Vector init;
  double dp_tau = 1.0;
  std::vector<std::size_t> sizes;
  std::string data_dir, out_dir;
};

inline ErrorMeasure parse_rho(const std::string& s, const std::string& where) {
  try {
    return ErrorMeasure::parse(s);
  } catch (const Error& e) {
    fail(ErrorKind::ConfigError, where + ": " + e.what());
  }
}

/// Parses a run config. Relative file paths (psf.file, sources) are resolved
/// against base_dir.
inline RunConfig parse_run_config(const Json& j, const fs::path& base_dir) {
  const std::string w = "config";
  check_keys(j, {"schema", "problem", "training_size", "validation_size", "method", "rho", "seed", "init", "dp_tau",
                 "sizes", "paths"},
             w);
  const int schema = json_get<int>(j, "schema", w);
  require(schema == kSchemaVersion, ErrorKind::ConfigError,
          w + ".schema: unsupported version " + std::to_string(schema) + " (expected " +
              std::to_string(kSchemaVersion) + ")");
  RunConfig c;
  if (j.contains("problem")) {
    ProblemSpec s = problem_spec_from_json(j.at("problem"), w + ".problem");
    auto resolve = [&](std::string& p) {
      if (!p.empty() && fs::path(p).is_relative()) p = fs::absolute(base_dir / p).lexically_normal().string();
    };
    resolve(s.psf.file);
    for (auto& src : s.sources) resolve(src);
    if (j.contains("seed")) s.seed = json_get<std::uint64_t>(j, "seed", w);
    c.problem = s;
  } else {
    require(!j.contains("seed"), ErrorKind::ConfigError, w + ".seed: needs a problem section");
  }
  c.training_size = json_get_or<std::size_t>(j, "training_size", c.training_size, w);
  c.validation_size = json_get_or<std::size_t>(j, "validation_size", c.validation_size, w);
  require(c.training_size >= 1 && c.validation_size >= 1, ErrorKind::ConfigError,
          w + ".training_size/validation_size: must be at least 1");
  if (j.contains("method")) c.method = method_from_string(json_get<std::string>(j, "method", w));
  if (j.contains("rho")) c.rho = parse_rho(json_get<std::string>(j, "rho", w), w + ".rho");
  c.init = json_get_or<std::vector<double>>(j, "init", {}, w);
  for (double v : c.init) require(v > 0.0, ErrorKind::ConfigError, w + ".init: entries must be positive");
  c.dp_tau = json_get_or<double>(j, "dp_tau", 1.0, w);
  require(c.dp_tau > 0.0, ErrorKind::ConfigError, w + ".dp_tau: must be positive");
  c.sizes = json_get_or<std::vector<std::size_t>>(j, "sizes", {}, w);
  if (j.contains("paths")) {
    const Json& p = j.at("paths");
    check_keys(p, {"data", "out"}, w + ".paths");
    c.data_dir = json_get_or<std::string>(p, "data", "", w + ".paths");
    c.out_dir = json_get_or<std::string>(p, "out", "", w + ".paths");
  }
  if (c.method && c.problem) check_compatible(*c.method, *c.problem, c.rho);
  return c;
}

inline RunConfig load_run_config(const fs::path& path) {
  const Json j = read_json(path, ErrorKind::ConfigError);
  return parse_run_config(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

// ---------------------------------------------------------------------------
// Decompositions for one problem, built on first use.

class ProblemContext {
 public:
  explicit ProblemContext(const ProblemSpec& s) : fm_(forward_model(s, image_loader("."))) {}

  const ForwardModel& model() const noexcept { return fm_; }
  const ProblemSpec& spec() const noexcept { return fm_.spec; }

  std::shared_ptr<const GsvdFactors> basis(BasisTag tag) {
    require(spec().kind == ProblemKind::deconv1d, ErrorKind::ConfigError, "SVD/GSVD bases need a deconv1d problem");
    auto& slot = tag == BasisTag::svd ? svd_ : gsvd_;
    if (!slot) slot = std::make_shared<const GsvdFactors>(tag == BasisTag::svd ? svd_basis(fm_.A) : gsvd(fm_.A, fm_.L));
    return slot;
  }

  /// The problem's own transform diagonalization.
  std::shared_ptr<const SpectralOperator> spectral() {
    if (!spectral_) spectral_ = fm_.blur.spectral(fm_.blur.bc);
    return spectral_;
  }

  /// Periodic stand-in.
  std::shared_ptr<const SpectralOperator> surrogate() {
    if (!surrogate_) surrogate_ = fm_.blur.spectral(Boundary::periodic);
    return surrogate_;
  }

 private:
  ForwardModel fm_;
  std::shared_ptr<const GsvdFactors> svd_, gsvd_;
  std::shared_ptr<const SpectralOperator> spectral_, surrogate_;
};

// ---------------------------------------------------------------------------
// Parameters

struct Params {
  Method method = Method::opt_tik_gsvd;
  ErrorMeasure rho = ErrorMeasure::sq2norm();
  ProblemSpec problem;
  Vector lambda;
  std::optional<FilterVector> filters;
  double risk = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
  std::vector<double> history;
  std::size_t training_size = 0;
  std::vector<Selection> per_item;
};

inline Json to_json(const Params& p) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["method"] = to_string(p.method);
  j["rho"] = p.rho.name();
  j["problem"] = to_json(p.problem);
  if (is_trained(p.method)) {
    j["lambda"] = vector_json(p.lambda);
    if (p.filters) j["filters"] = to_json(*p.filters);
    j["risk"] = number_json(p.risk);
    j["iterations"] = p.iterations;
    j["converged"] = p.converged;
    j["history"] = vector_json(p.history);
    j["training_size"] = p.training_size;
  } else {
    Json items = Json::array();
    for (const auto& s : p.per_item) items.push_back(to_json(s));
    j["per_item"] = std::move(items);
  }
  j["warnings"] = p.warnings;
  return j;
}

inline Params params_from_json(const Json& j, const std::string& w) {
  try {
    check_keys(j, {"schema", "method", "rho", "problem", "lambda", "filters", "risk", "iterations", "converged",
                   "history", "training_size", "per_item", "warnings"},
               w);
    require(json_get<int>(j, "schema", w) == kSchemaVersion, ErrorKind::DataError, w + ".schema: unsupported version");
    Params p;
    p.method = method_from_string(json_get<std::string>(j, "method", w));
    p.rho = parse_rho(json_get<std::string>(j, "rho", w), w + ".rho");
    require(j.contains("problem"), ErrorKind::DataError, w + ".problem: missing");
    p.problem = problem_spec_from_json(j.at("problem"), w + ".problem");
    if (j.contains("lambda")) p.lambda = vector_from_json(j.at("lambda"), w + ".lambda");
    if (j.contains("filters")) p.filters = filter_vector_from_json(j.at("filters"), w + ".filters");
    if (j.contains("risk")) p.risk = number_from_json(j.at("risk"), w + ".risk");
    p.iterations = json_get_or<std::size_t>(j, "iterations", 0, w);
    p.converged = json_get_or<bool>(j, "converged", false, w);
    if (j.contains("history")) p.history = vector_from_json(j.at("history"), w + ".history");
    p.training_size = json_get_or<std::size_t>(j, "training_size", 0, w);
    if (j.contains("per_item")) {
      const Json& items = j.at("per_item");
      require(items.is_array(), ErrorKind::DataError, w + ".per_item: expected an array");
      for (std::size_t k = 0; k < items.size(); ++k)
        p.per_item.push_back(selection_from_json(items[k], w + ".per_item[" + std::to_string(k) + "]"));
    }
    p.warnings = json_get_or<std::vector<std::string>>(j, "warnings", {}, w);
    if (is_trained(p.method))
      require(!p.lambda.empty() || p.filters, ErrorKind::DataError, w + ": trained parameters need lambda or filters");
    else
      require(!p.per_item.empty(), ErrorKind::DataError, w + ".per_item: missing for a per-item method");
    return p;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) fail(ErrorKind::DataError, e.what());
    throw;
  }
}

inline Params load_params(const fs::path& path) { return params_from_json(read_json(path), path.string()); }

// ---------------------------------------------------------------------------
// Training and per-item selection

inline TrainResult train_spectral(const SpectralRiskModel& model, const Vector& init) {
  if (model.J() == 1) return train_scalar(ScalarSlice(model));
  return train_multi(model, init);
}

/// Mean training error (1/K) Σ ρ(x_k − x_true,k) of fixed filters.
template <typename Solve>
double training_risk(const TrainingSet& ts, const ErrorMeasure& rho, Solve solve) {
  double total = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) total += rho.evaluate(solve(ts.b[k]) - ts.x[k]);
  return total / static_cast<double>(ts.size());
}

inline Params train(Method method, const ErrorMeasure& rho, ProblemContext& ctx, const TrainingSet& ts,
                    const Vector& init = {}) {
  require(is_trained(method), ErrorKind::ConfigError,
          std::string("method: ") + to_string(method) + " selects lambda per item; use the select command");
  check_compatible(method, ctx.spec(), rho);
  Params p;
  p.method = method;
  p.rho = rho;
  p.problem = ctx.spec();
  p.training_size = ts.size();
  auto take = [&p](const TrainResult& r) {
    p.lambda = r.lambda;
    p.risk = r.risk;
    p.iterations = r.iterations;
    p.converged = r.converged;
    p.warnings = r.warnings;
    p.history = r.history;
  };
  switch (method) {
    case Method::opt_tik_svd:
    case Method::opt_tik_gsvd: {
      const auto f = ctx.basis(method == Method::opt_tik_svd ? BasisTag::svd : BasisTag::gsvd);
      take(train_scalar(GsvdRiskModel(f, ts, rho)));
      break;
    }
    case Method::opt_error_svd:
    case Method::opt_error_gsvd: {
      OptimalErrorFilters oe;
      if (ctx.spec().kind == ProblemKind::deconv1d) {
        const auto f = ctx.basis(method == Method::opt_error_svd ? BasisTag::svd : BasisTag::gsvd);
        oe = learn_optimal_error_filters(*f, ts);
        p.risk = training_risk(ts, rho, [&](const Vector& b) {
          return apply_filtered_solution(spectral_coefficients(*f, b), oe.filters, *f);
        });
      } else {
        const auto op = ctx.spectral();
        oe = learn_optimal_error_filters(*op, ts);
        p.risk = training_risk(ts, rho, [&](const Vector& b) {
          return apply_filtered_solution(spectral_coefficients(*op, b), oe.filters, *op->transform);
        });
      }
      p.filters = oe.filters;
      p.converged = true;
      if (!oe.zero_indices.empty())
        p.warnings.push_back("ZeroEnergy: " + std::to_string(oe.zero_indices.size()) +
                             " indices carry no data energy; their filters are 0");
      break;
    }
    case Method::opt_tik_multi:
      take(train_spectral(SpectralRiskModel(ctx.spectral(), ts, rho), init));
      break;
    case Method::surrogate_multi:
      take(train_spectral(SpectralRiskModel(ctx.surrogate(), ts, rho), init));
      break;
    default:
      break;
  }
  return p;
}

inline Params select(Method method, ProblemContext& ctx, const Dataset& data, double dp_tau = 1.0) {
  require(!is_trained(method), ErrorKind::ConfigError,
          std::string("method: ") + to_string(method) + " is trained from data; use the train command");
  check_compatible(method, ctx.spec(), ErrorMeasure::sq2norm());
  Params p;
  p.method = method;
  p.problem = ctx.spec();
  for (const auto& it : data.items) {
    switch (method) {
      case Method::gcv:
        p.per_item.push_back(select_gcv(*ctx.basis(BasisTag::gsvd), it.b));
        break;
      case Method::dp: {
        const Vector r = it.b - ctx.model().apply(it.x);  // noise norm known for synthetic data
        p.per_item.push_back(select_dp(*ctx.basis(BasisTag::gsvd), it.b, DpConfig{dp_tau, norm2_sq(r)}));
        break;
      }
      case Method::mse_oracle:
        p.per_item.push_back(select_mse_oracle(*ctx.basis(BasisTag::gsvd), it.b, it.x));
        break;
      case Method::gcv_multi:
        p.per_item.push_back(select_gcv_multi(*ctx.spectral(), it.b));
        break;
      default:
        break;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Reconstruction and evaluation

inline const Vector& lambda_for(const Params& p, std::size_t k) {
  if (p.per_item.empty()) return p.lambda;
  require(k < p.per_item.size(), ErrorKind::DataError,
          "parameters hold " + std::to_string(p.per_item.size()) + " per-item selections, item " +
              std::to_string(k) + " requested");
  return p.per_item[k].lambda;
}

/// Filters of p on the given basis; the regularized solution is Z(φ⊙γ) or Q(φ⊙γ).
inline FilterVector filters_for(const Params& p, std::size_t k, ProblemContext& ctx) {
  if (p.filters) return *p.filters;
  const Vector& lam = lambda_for(p, k);
  switch (p.method) {
    case Method::opt_tik_svd: return tikhonov_filters_gsvd(*ctx.basis(BasisTag::svd), lam.at(0));
    case Method::opt_tik_gsvd:
    case Method::gcv:
    case Method::dp:
    case Method::mse_oracle: return tikhonov_filters_gsvd(*ctx.basis(BasisTag::gsvd), lam.at(0));
    case Method::opt_tik_multi:
    case Method::gcv_multi: return multi_tikhonov_filters(*ctx.spectral(), lam);
    default: fail(ErrorKind::InvalidArgument, std::string(to_string(p.method)) + " has no filter representation");
  }
}

inline Vector reconstruct_item(const Params& p, ProblemContext& ctx, std::span<const double> b, std::size_t k,
                               const CgOptions& cg = {}) {
  require(b.size() == ctx.spec().n(), ErrorKind::DataError, "data length does not match the problem");
  if (p.method == Method::surrogate_multi) return solve_original(ctx.model().blur, b, lambda_for(p, k), cg);
  const FilterVector phi = filters_for(p, k, ctx);
  if (phi.basis_tag == BasisTag::transform) {
    const auto op = ctx.spectral();
    return apply_filtered_solution(spectral_coefficients(*op, b), phi, *op->transform);
  }
  const auto f = ctx.basis(phi.basis_tag);
  return apply_filtered_solution(spectral_coefficients(*f, b), phi, *f);
}

inline std::vector<Vector> reconstruct(const Params& p, ProblemContext& ctx, const Dataset& data) {
  std::vector<Vector> out;
  out.reserve(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) out.push_back(reconstruct_item(p, ctx, data.items[k].b, k));
  return out;
}

inline std::vector<double> evaluate(const std::vector<Vector>& recon, const Dataset& truth, const ErrorMeasure& rho) {
  require(recon.size() == truth.size(), ErrorKind::DataError,
          "reconstruction count " + std::to_string(recon.size()) + " does not match the dataset size " +
              std::to_string(truth.size()));
  std::vector<double> errs;
  for (std::size_t k = 0; k < recon.size(); ++k) {
    require(recon[k].size() == truth.items[k].x.size(), ErrorKind::DataError,
            "reconstruction " + std::to_string(k) + " has the wrong length");
    errs.push_back(relative_error(recon[k], truth.items[k].x, rho));
  }
  return errs;
}

/// Reconstructions on disk: manifest.json plus items/xhat_NNNNN.csv.
struct Reconstructions {
  std::string method;
  ProblemSpec problem;
  std::vector<Vector> x;
};

inline void write_reconstructions(const fs::path& dir, const Params& p, const std::vector<Vector>& x) {
  Json m;
  m["schema"] = kSchemaVersion;
  m["kind"] = "reconstructions";
  m["method"] = to_string(p.method);
  m["problem"] = to_json(p.problem);
  Json items = Json::array();
  for (std::size_t k = 0; k < x.size(); ++k) {
    const std::string path = item_name("xhat", k);
    write_csv(dir / path, as_grid(x[k], p.problem.rows, p.problem.cols));
    items.push_back({{"x", path}, {"lambda", vector_json(p.per_item.empty() ? p.lambda : p.per_item[k].lambda)}});
  }
  m["items"] = std::move(items);
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

/// Reads reconstructions, or the x_true of a dataset directory.
inline Reconstructions read_reconstructions(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  const Json m = read_json(mpath);
  Reconstructions r;
  if (m.contains("role")) {
    const Dataset ds = read_dataset(dir);
    r.method = "truth";
    r.problem = ds.spec;
    for (const auto& it : ds.items) r.x.push_back(it.x);
    return r;
  }
  const std::string w = mpath.string();
  try {
    check_keys(m, {"schema", "kind", "method", "problem", "items"}, w);
    require(json_get<int>(m, "schema", w) == kSchemaVersion, ErrorKind::DataError, w + ".schema: unsupported version");
    r.method = json_get<std::string>(m, "method", w);
    r.problem = problem_spec_from_json(m.at("problem"), w + ".problem");
    for (const Json& it : m.at("items")) {
      const Matrix g = read_csv(dir / json_get<std::string>(it, "x", w));
      require(g.rows() == r.problem.rows && g.cols() == r.problem.cols, ErrorKind::DataError,
              w + ": reconstruction " + std::to_string(r.x.size()) + " does not match the problem shape");
      r.x.emplace_back(g.data().begin(), g.data().end());
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) fail(ErrorKind::DataError, e.what());
    throw;
  }
  return r;
}

// ---------------------------------------------------------------------------
// CSV tables

inline std::string stats_header() {
  return "label,rho,count,mean,std,median,q25,q75,whisker_lo,whisker_hi,outliers\n";
}

inline std::string stats_row(const std::string& label, const ErrorMeasure& rho, const BoxStats& s) {
  std::string outl;
  for (double v : s.outliers) outl += (outl.empty() ? "" : ";") + format_double(v);
  return label + "," + rho.name() + "," + std::to_string(s.count) + "," + format_double(s.mean) + "," +
         format_double(s.std) + "," + format_double(s.median) + "," + format_double(s.q25) + "," +
         format_double(s.q75) + "," + format_double(s.whisker_lo) + "," + format_double(s.whisker_hi) + "," + outl +
         "\n";
}

inline std::string errors_csv(const std::vector<double>& errs) {
  std::string out = "item,error\n";
  for (std::size_t k = 0; k < errs.size(); ++k) out += std::to_string(k) + "," + format_double(errs[k]) + "\n";
  return out;
}

struct ParetoRow {
  std::size_t size;
  std::string method;
  double mean_rre, std_rre, median_rre, risk;
  Vector lambda;
};

/// Trains on nested prefixes of the training set and evaluates on a fixed
/// validation set.
inline std::vector<ParetoRow> pareto(const std::vector<Method>& methods, const ErrorMeasure& rho, ProblemContext& ctx,
                                     const Dataset& training, const Dataset& validation,
                                     const std::vector<std::size_t>& sizes, const Vector& init = {}) {
  require(!sizes.empty(), ErrorKind::ConfigError, "sizes: need at least one training size");
  std::vector<std::size_t> sorted = sizes;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  require(sorted.front() >= 1, ErrorKind::ConfigError, "sizes: must be at least 1");
  require(sorted.back() <= training.size(), ErrorKind::DataError,
          "sizes: largest size " + std::to_string(sorted.back()) + " exceeds the " +
              std::to_string(training.size()) + " training items");
  const TrainingSet all = training.training_set();
  std::vector<ParetoRow> rows;
  for (Method m : methods) {
    for (std::size_t K : sorted) {
      const Params p = train(m, rho, ctx, all.prefix(K), init);
      const BoxStats s = summary_stats(evaluate(reconstruct(p, ctx, validation), validation, rho));
      rows.push_back({K, to_string(m), s.mean, s.std, s.median, p.risk, p.lambda});
    }
  }
  return rows;
}

inline std::string pareto_csv(const std::vector<ParetoRow>& rows) {
  std::string out = "size,method,mean_rre,std_rre,median_rre,training_risk,lambda\n";
  for (const auto& r : rows) {
    std::string lam;
    for (double v : r.lambda) lam += (lam.empty() ? "" : ";") + format_double(v);
    out += std::to_string(r.size) + "," + r.method + "," + format_double(r.mean_rre) + "," + format_double(r.std_rre) +
           "," + format_double(r.median_rre) + "," + format_double(r.risk) + "," + lam + "\n";
  }
  return out;
}

/// Picard data for one item: basis index, |c_i|, |p_iᵀb| (or |(Q*b)_i|) and
/// φ_i, ordered by decreasing |c_i|.
inline std::string picard_csv(const Params& p, ProblemContext& ctx, std::span<const double> b, std::size_t k) {
  Vector c, proj;
  FilterVector phi;
  if (p.method == Method::surrogate_multi) {
    const auto op = ctx.surrogate();
    const auto co = spectral_coefficients(*op, b);
    phi = multi_tikhonov_filters(*op, lambda_for(p, k));
    for (std::size_t i = 0; i < op->n(); ++i) {
      c.push_back(std::abs(op->c_spectrum[i]));
      proj.push_back(std::abs(co.projections[i]));
    }
  } else {
    phi = filters_for(p, k, ctx);
    if (phi.basis_tag == BasisTag::transform) {
      const auto op = ctx.spectral();
      const auto co = spectral_coefficients(*op, b);
      for (std::size_t i = 0; i < op->n(); ++i) {
        c.push_back(std::abs(op->c_spectrum[i]));
        proj.push_back(std::abs(co.projections[i]));
      }
    } else {
      const auto f = ctx.basis(phi.basis_tag);
      const auto co = spectral_coefficients(*f, b);
      c = f->c;
      for (double v : co.projections) proj.push_back(std::abs(v));
    }
  }
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t bb) { return c[a] > c[bb]; });
  std::string out = "index,c,abs_projection,phi\n";
  for (std::size_t i : order)
    out += std::to_string(i) + "," + format_double(c[i]) + "," + format_double(proj[i]) + "," +
           format_double(phi.phi[i]) + "\n";
  return out;
}

/// Generalized singular values (1D) or operator spectra (2D) of a problem.
/// t = c/s is written as "inf" where s = 0, including the null space of L.
inline std::string decomposition_csv(ProblemContext& ctx) {
  std::string out;
  if (ctx.spec().kind == ProblemKind::deconv1d) {
    const auto f = ctx.basis(BasisTag::gsvd);
    const auto gv = generalized_singular_values(*f);
    out = "index,c,s,t\n";
    for (std::size_t i = 0; i < f->n; ++i) {
      const double s = i < f->paired() ? f->s[i] : 0.0;
      const double t = i < gv.t.size() ? gv.t[i] : 0.0;
      out += std::to_string(i) + "," + format_double(f->c[i]) + "," + format_double(s) + "," +
             (s == 0.0 ? std::string("inf") : format_double(t)) + "\n";
    }
    return out;
  }
  const bool native = ctx.spec().bc != Boundary::zero;
  const auto op = native ? ctx.spectral() : ctx.surrogate();
  out = "index,abs_c";
  for (const auto& name : ctx.spec().stencils) out += ",abs_s_" + name;
  out += "\n";
  for (std::size_t i = 0; i < op->n(); ++i) {
    out += std::to_string(i) + "," + format_double(std::abs(op->c_spectrum[i]));
    for (const auto& s : op->s_spectra) out += "," + format_double(std::abs(s[i]));
    out += "\n";
  }
  return out;
}

}  // namespace optreg::cli
