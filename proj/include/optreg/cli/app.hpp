#pragma once

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "optreg/cli/pipeline.hpp"

namespace optreg::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kNumericalFailure = 4 };

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigError:
    case ErrorKind::SymmetryViolation:
      return kConfigError;
    case ErrorKind::DataError:
    case ErrorKind::SourceError:
    case ErrorKind::ZeroReference:
    case ErrorKind::InvalidArgument:
      return kDataError;
    default:
      return kNumericalFailure;
  }
}

struct Options {
  std::string config, data, params, recon, out, method, rho, sizes;
  std::optional<std::uint64_t> seed;
  std::size_t item = 0;
  bool verbose = false;
};

namespace detail {

inline RunConfig config_or_default(const Options& o) {
  return o.config.empty() ? RunConfig{} : load_run_config(o.config);
}

inline std::string need(const std::string& value, const std::string& a, const std::string& b = {}) {
  require(!value.empty() || !b.empty(), ErrorKind::ConfigError, a + ": required (flag or config)");
  return value.empty() ? b : value;
}

/// A dataset given either directly or as the parent directory of
/// training/ and validation/.
inline Dataset load_role(const std::string& dir, DatasetRole role) {
  const fs::path d(dir);
  if (fs::exists(d / "manifest.json")) return read_dataset(d);
  const fs::path sub = d / to_string(role);
  require(fs::exists(sub / "manifest.json"), ErrorKind::DataError,
          dir + ": no manifest.json (nor " + to_string(role) + "/manifest.json)");
  return read_dataset(sub);
}

inline Method pick_method(const Options& o, const RunConfig& c) {
  if (!o.method.empty()) return method_from_string(o.method);
  require(c.method.has_value(), ErrorKind::ConfigError, "method: required (--method or config)");
  return *c.method;
}

inline ErrorMeasure pick_rho(const Options& o, const RunConfig& c) {
  return o.rho.empty() ? c.rho : parse_rho(o.rho, "--rho");
}

inline std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(tok, &pos);
      require(pos == tok.size() && v >= 1, ErrorKind::ConfigError, "--sizes: '" + tok + "' is not a positive integer");
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      fail(ErrorKind::ConfigError, "--sizes: '" + tok + "' is not a positive integer");
    }
  }
  return out;
}

inline std::vector<Method> parse_methods(const std::string& s) {
  std::vector<Method> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(method_from_string(tok));
  require(!out.empty(), ErrorKind::ConfigError, "method: none given");
  return out;
}

inline std::string join_warnings(const std::vector<std::string>& w) {
  std::string out;
  for (const auto& s : w) out += "warning: " + s + "\n";
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_generate(const Options& o, std::ostream& out) {
  RunConfig c = load_run_config(detail::need(o.config, "--config"));
  require(c.problem.has_value(), ErrorKind::ConfigError, "config.problem: required for generate");
  if (o.seed) c.problem->seed = *o.seed;
  const fs::path dir = detail::need(o.out, "--out", c.out_dir);
  const ImageLoader load = image_loader(".");
  const Dataset tr = generate_dataset(*c.problem, c.training_size, DatasetRole::training, load);
  const Dataset va = generate_dataset(*c.problem, c.validation_size, DatasetRole::validation, load);
  write_dataset(dir / "training", tr);
  write_dataset(dir / "validation", va);
  out << "wrote " << tr.size() << " training and " << va.size() << " validation items to " << dir.string() << "\n";
  return kOk;
}

inline int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const RunConfig c = detail::config_or_default(o);
  const Dataset tr = detail::load_role(detail::need(o.data, "--data", c.data_dir), DatasetRole::training);
  const Method m = detail::pick_method(o, c);
  const ErrorMeasure rho = detail::pick_rho(o, c);
  ProblemContext ctx(tr.spec);
  if (o.verbose) err << "training " << to_string(m) << " on " << tr.size() << " items, rho = " << rho.name() << "\n";
  const Params p = train(m, rho, ctx, tr.training_set(), c.init);
  write_file(detail::need(o.out, "--out"), to_json(p).dump(2) + "\n");
  err << detail::join_warnings(p.warnings);
  out << to_string(m) << ":";
  if (p.filters) out << " " << p.filters->phi.size() << " filter factors";
  else out << " lambda =";
  for (double v : p.lambda) out << " " << format_double(v);
  out << ", risk = " << format_double(p.risk) << (p.converged ? "" : " (not converged)") << "\n";
  return kOk;
}

inline int cmd_select(const Options& o, std::ostream& out, std::ostream& err) {
  const RunConfig c = detail::config_or_default(o);
  const Dataset va = detail::load_role(detail::need(o.data, "--data", c.data_dir), DatasetRole::validation);
  const Method m = detail::pick_method(o, c);
  ProblemContext ctx(va.spec);
  if (o.verbose) err << "selecting " << to_string(m) << " for " << va.size() << " items\n";
  const Params p = select(m, ctx, va, c.dp_tau);
  write_file(detail::need(o.out, "--out"), to_json(p).dump(2) + "\n");
  std::size_t warned = 0;
  for (const auto& s : p.per_item) warned += s.warnings.empty() ? 0 : 1;
  if (warned) err << "warning: " << warned << " items produced selection warnings (see the output file)\n";
  out << to_string(m) << ": selected parameters for " << p.per_item.size() << " items\n";
  return kOk;
}

inline int cmd_reconstruct(const Options& o, std::ostream& out, std::ostream& err) {
  const Params p = load_params(detail::need(o.params, "--params"));
  const Dataset ds = detail::load_role(detail::need(o.data, "--data"), DatasetRole::validation);
  require(ds.spec.rows == p.problem.rows && ds.spec.cols == p.problem.cols && ds.spec.kind == p.problem.kind,
          ErrorKind::DataError, "dataset shape does not match the parameters' problem");
  ProblemContext ctx(p.problem);
  if (o.verbose) err << "reconstructing " << ds.size() << " items with " << to_string(p.method) << "\n";
  const auto x = reconstruct(p, ctx, ds);
  const fs::path dir = detail::need(o.out, "--out");
  write_reconstructions(dir, p, x);
  out << "wrote " << x.size() << " reconstructions to " << dir.string() << "\n";
  return kOk;
}

inline int cmd_evaluate(const Options& o, std::ostream& out) {
  const RunConfig c = detail::config_or_default(o);
  const Dataset truth = detail::load_role(detail::need(o.data, "--data", c.data_dir), DatasetRole::validation);
  const Reconstructions r = read_reconstructions(detail::need(o.recon, "--recon"));
  require(r.problem.rows == truth.spec.rows && r.problem.cols == truth.spec.cols, ErrorKind::DataError,
          "reconstructions and dataset have different shapes");
  const ErrorMeasure rho = detail::pick_rho(o, c);
  const std::vector<double> errs = evaluate(r.x, truth, rho);
  const BoxStats s = summary_stats(errs);
  const fs::path dir = detail::need(o.out, "--out");
  write_file(dir / "errors.csv", errors_csv(errs));
  write_file(dir / "stats.csv", stats_header() + stats_row(r.method, rho, s));
  out << r.method << " (" << rho.name() << "): mean " << format_double(s.mean) << ", median "
      << format_double(s.median) << " over " << s.count << " items\n";
  return kOk;
}

inline int cmd_pareto(const Options& o, std::ostream& out, std::ostream& err) {
  const RunConfig c = detail::config_or_default(o);
  const std::string data = detail::need(o.data, "--data", c.data_dir);
  require(fs::exists(fs::path(data) / "training") && fs::exists(fs::path(data) / "validation"), ErrorKind::DataError,
          data + ": pareto needs a directory with training/ and validation/");
  const Dataset tr = detail::load_role(data, DatasetRole::training);
  const Dataset va = detail::load_role(data, DatasetRole::validation);
  std::vector<Method> methods;
  if (!o.method.empty())
    methods = detail::parse_methods(o.method);
  else
    methods = {detail::pick_method(o, c)};
  std::vector<std::size_t> sizes = o.sizes.empty() ? c.sizes : detail::parse_sizes(o.sizes);
  require(!sizes.empty(), ErrorKind::ConfigError, "sizes: required (--sizes or config)");
  const ErrorMeasure rho = detail::pick_rho(o, c);
  ProblemContext ctx(tr.spec);
  if (o.verbose) err << "pareto over " << sizes.size() << " sizes\n";
  const auto rows = pareto(methods, rho, ctx, tr, va, sizes, c.init);
  write_file(detail::need(o.out, "--out"), pareto_csv(rows));
  out << "wrote " << rows.size() << " pareto rows\n";
  return kOk;
}

inline int cmd_picard(const Options& o, std::ostream& out) {
  const Params p = load_params(detail::need(o.params, "--params"));
  const Dataset ds = detail::load_role(detail::need(o.data, "--data"), DatasetRole::validation);
  require(o.item < ds.size(), ErrorKind::DataError,
          "--item " + std::to_string(o.item) + " out of range (dataset has " + std::to_string(ds.size()) + ")");
  ProblemContext ctx(p.problem);
  write_file(detail::need(o.out, "--out"), picard_csv(p, ctx, ds.items[o.item].b, o.item));
  out << "wrote picard data for item " << o.item << "\n";
  return kOk;
}

inline int cmd_gsvd_info(const Options& o, std::ostream& out) {
  ProblemSpec spec;
  if (!o.data.empty()) {
    spec = detail::load_role(o.data, DatasetRole::training).spec;
  } else {
    const RunConfig c = load_run_config(detail::need(o.config, "--config or --data"));
    require(c.problem.has_value(), ErrorKind::ConfigError, "config.problem: required for gsvd-info");
    spec = *c.problem;
  }
  ProblemContext ctx(spec);
  write_file(detail::need(o.out, "--out"), decomposition_csv(ctx));
  out << "wrote decomposition data for " << to_string(spec.kind) << " " << spec.rows << "x" << spec.cols << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

/// Runs the command line in-process; args excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Learned regularization parameters for linear inverse problems", "optreg"};
  app.require_subcommand(1);
  Options o;

  std::string methods_help = "Method: ";
  for (std::size_t i = 0; i < kMethodNames.size(); ++i)
    methods_help += (i ? ", " : "") + std::string(kMethodNames[i].second);

  auto add_config = [&](CLI::App* s) { s->add_option("--config", o.config, "Run config (JSON)"); };
  auto add_data = [&](CLI::App* s, const char* help) { s->add_option("--data", o.data, help); };
  auto add_out = [&](CLI::App* s, const char* help) { s->add_option("--out", o.out, help); };
  auto add_rho = [&](CLI::App* s) {
    s->add_option("--rho", o.rho, "Error measure: sq2norm, pnorm:P, huber[:beta]");
  };
  auto add_method = [&](CLI::App* s) { s->add_option("--method", o.method, methods_help); };

  auto* gen = app.add_subcommand("generate", "Generate training and validation datasets");
  add_config(gen);
  add_out(gen, "Output directory (gets training/ and validation/)");
  gen->add_option("--seed", o.seed, "Override the problem seed");

  auto* tr = app.add_subcommand("train", "Learn parameters from a training set");
  add_config(tr);
  add_data(tr, "Dataset directory (or its parent)");
  add_method(tr);
  add_rho(tr);
  add_out(tr, "Parameter file (JSON)");

  auto* sel = app.add_subcommand("select", "Per-item parameter choice (gcv, dp, mse-oracle, gcv-multi)");
  add_config(sel);
  add_data(sel, "Dataset directory (or its parent; validation/ is used)");
  add_method(sel);
  add_out(sel, "Parameter file (JSON)");

  auto* rec = app.add_subcommand("reconstruct", "Reconstruct a dataset with learned or selected parameters");
  rec->add_option("--params", o.params, "Parameter file from train or select");
  add_data(rec, "Dataset directory (or its parent; validation/ is used)");
  add_out(rec, "Output directory");

  auto* ev = app.add_subcommand("evaluate", "Relative errors of reconstructions against the truth");
  add_config(ev);
  ev->add_option("--recon", o.recon, "Reconstruction directory (or a dataset directory)");
  add_data(ev, "Dataset with the true solutions (or its parent; validation/ is used)");
  add_rho(ev);
  add_out(ev, "Output directory (errors.csv, stats.csv)");

  auto* par = app.add_subcommand("pareto", "Validation error against training-set size");
  add_config(par);
  add_data(par, "Directory with training/ and validation/");
  par->add_option("--method", o.method, "Comma-separated methods");
  add_rho(par);
  par->add_option("--sizes", o.sizes, "Comma-separated training sizes, e.g. 1,2,4,8");
  add_out(par, "Output CSV");

  auto* pic = app.add_subcommand("picard", "Picard-plot data for one item");
  pic->add_option("--params", o.params, "Parameter file from train or select");
  add_data(pic, "Dataset directory (or its parent; validation/ is used)");
  pic->add_option("--item", o.item, "Item index (default 0)");
  add_out(pic, "Output CSV");

  auto* info = app.add_subcommand("gsvd-info", "Generalized singular values or operator spectra");
  add_config(info);
  add_data(info, "Dataset directory (alternative to --config)");
  add_out(info, "Output CSV");

  app.add_flag("--verbose,-v", o.verbose, "Progress messages on stderr");

  std::vector<const char*> argv{"optreg"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (gen->parsed()) return cmd_generate(o, out);
    if (tr->parsed()) return cmd_train(o, out, err);
    if (sel->parsed()) return cmd_select(o, out, err);
    if (rec->parsed()) return cmd_reconstruct(o, out, err);
    if (ev->parsed()) return cmd_evaluate(o, out);
    if (par->parsed()) return cmd_pareto(o, out, err);
    if (pic->parsed()) return cmd_picard(o, out);
    if (info->parsed()) return cmd_gsvd_info(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kConfigError;
}

}  // namespace optreg::cli
