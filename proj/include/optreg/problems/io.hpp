#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "optreg/problems/generate.hpp"

namespace optreg {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Text helpers

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(ErrorKind::SourceError, where + ": cannot parse '" + std::string(s) + "' as a number");
  return v;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::SourceError, path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes the whole file at once; parent directories are created.
inline void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::DataError, path.string() + ": cannot open for writing");
  out << content;
  require(static_cast<bool>(out), ErrorKind::DataError, path.string() + ": write failed");
}

// ---------------------------------------------------------------------------
// CSV grids: header row, then one grid row per line. A vector is written as a
// single column named "value".

inline std::string csv_grid(const Matrix& grid) {
  std::string out;
  for (std::size_t j = 0; j < grid.cols(); ++j) {
    if (j) out += ',';
    out += grid.cols() == 1 ? std::string("value") : "c" + std::to_string(j);
  }
  out += '\n';
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    for (std::size_t j = 0; j < grid.cols(); ++j) {
      if (j) out += ',';
      out += format_double(grid(i, j));
    }
    out += '\n';
  }
  return out;
}

inline Matrix as_grid(std::span<const double> v, std::size_t rows, std::size_t cols) {
  require(v.size() == rows * cols, ErrorKind::DataError, "grid size mismatch");
  Matrix m(rows, cols);
  std::copy(v.begin(), v.end(), m.data().begin());
  return m;
}

inline void write_csv(const fs::path& path, const Matrix& grid) { write_file(path, csv_grid(grid)); }

inline Matrix read_csv(const fs::path& path) {
  const std::string text = read_file(path);
  const std::string where = path.string();
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::SourceError, where + ": empty file");
  const std::size_t cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::size_t start = 0, fields = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view field(line.data() + start, (comma == std::string::npos ? line.size() : comma) - start);
      values.push_back(parse_double(field, where + ":" + std::to_string(rows + 2)));
      ++fields;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    require(fields == cols, ErrorKind::SourceError,
            where + ":" + std::to_string(rows + 2) + ": expected " + std::to_string(cols) + " fields");
    ++rows;
  }
  require(rows > 0, ErrorKind::SourceError, where + ": no data rows");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = values[i * cols + j];
  return m;
}

// ---------------------------------------------------------------------------
// PGM (binary P5, 8-bit). Values are clamped to [0,1] on write and scaled to
// [0,1] on read.

inline void write_pgm(const fs::path& path, const Matrix& img) {
  std::string out = "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) + "\n255\n";
  for (std::size_t i = 0; i < img.rows(); ++i)
    for (std::size_t j = 0; j < img.cols(); ++j) {
      const double v = std::clamp(img(i, j), 0.0, 1.0);
      out += static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
    }
  write_file(path, out);
}

inline Matrix read_pgm(const fs::path& path) {
  const std::string data = read_file(path);
  const std::string where = path.string();
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return data.substr(start, pos - start);
  };
  require(token() == "P5", ErrorKind::SourceError, where + ": not a binary PGM (P5)");
  std::size_t w = 0, h = 0, maxval = 0;
  try {
    w = std::stoul(token());
    h = std::stoul(token());
    maxval = std::stoul(token());
  } catch (const std::exception&) {
    fail(ErrorKind::SourceError, where + ": malformed PGM header");
  }
  require(w > 0 && h > 0, ErrorKind::SourceError, where + ": empty image");
  require(maxval > 0 && maxval < 256, ErrorKind::SourceError, where + ": only 8-bit PGM is supported");
  ++pos;  // single whitespace before the raster
  require(data.size() >= pos + w * h, ErrorKind::SourceError, where + ": truncated raster");
  Matrix img(h, w);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      img(i, j) = static_cast<double>(static_cast<unsigned char>(data[pos + i * w + j])) / static_cast<double>(maxval);
  return img;
}

/// PGM or CSV by extension.
inline Matrix read_image(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".csv") return read_csv(path);
  fail(ErrorKind::SourceError, path.string() + ": unsupported image format (use .pgm or .csv)");
}

// ---------------------------------------------------------------------------
// ProblemSpec JSON

/// Rejects keys outside `allowed`, naming the offender.
inline void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require(j.is_object(), ErrorKind::ConfigError, where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    require(ok, ErrorKind::ConfigError, where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T json_get(const Json& j, const char* key, const std::string& where) {
  require(j.contains(key), ErrorKind::ConfigError, where + "." + key + ": missing");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::ConfigError, where + "." + key + ": wrong type");
  }
}

template <typename T>
T json_get_or(const Json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? json_get<T>(j, key, where) : fallback;
}

inline Json to_json(const ProblemSpec& s) {
  Json j;
  j["kind"] = to_string(s.kind);
  j["shape"] = s.kind == ProblemKind::deconv1d ? Json::array({s.rows}) : Json::array({s.rows, s.cols});
  Json psf;
  psf["kind"] = s.psf.kind;
  if (s.psf.kind == "gaussian")
    psf["variance"] = s.psf.variance;
  else
    psf["file"] = s.psf.file;
  j["psf"] = psf;
  j["bc"] = to_string(s.bc);
  if (s.kind == ProblemKind::deconv1d)
    j["regularizer"] = s.regularizer;
  else
    j["stencils"] = s.stencils;
  j["noise_range"] = Json::array({s.noise_lo, s.noise_hi});
  j["seed"] = s.seed;
  j["phantom"] = s.phantom;
  j["sources"] = s.sources;
  j["augment"] = s.augment;
  return j;
}

inline ProblemSpec problem_spec_from_json(const Json& j, const std::string& where = "problem") {
  check_keys(j, {"kind", "shape", "psf", "bc", "regularizer", "stencils", "noise_range", "seed", "phantom", "sources",
                 "augment"},
             where);
  ProblemSpec s;
  const auto kind = json_get<std::string>(j, "kind", where);
  require(kind == "deconv1d" || kind == "deblur2d", ErrorKind::ConfigError,
          where + ".kind: expected 'deconv1d' or 'deblur2d'");
  s.kind = kind == "deconv1d" ? ProblemKind::deconv1d : ProblemKind::deblur2d;
  const auto shape = json_get<std::vector<std::int64_t>>(j, "shape", where);
  for (auto d : shape) require(d > 0, ErrorKind::ConfigError, where + ".shape: dimensions must be positive");
  if (s.kind == ProblemKind::deconv1d) {
    require(shape.size() == 1, ErrorKind::ConfigError, where + ".shape: deconv1d takes [n]");
    s.rows = static_cast<std::size_t>(shape[0]);
    s.cols = 1;
    s.bc = Boundary::zero;
    s.phantom = "piecewise";
  } else {
    require(shape.size() == 2, ErrorKind::ConfigError, where + ".shape: deblur2d takes [rows, cols]");
    s.rows = static_cast<std::size_t>(shape[0]);
    s.cols = static_cast<std::size_t>(shape[1]);
    s.bc = Boundary::reflexive;
    s.phantom = "blobs";
    s.regularizer.clear();
  }
  if (j.contains("psf")) {
    const Json& p = j.at("psf");
    check_keys(p, {"kind", "variance", "file"}, where + ".psf");
    s.psf.kind = json_get_or<std::string>(p, "kind", "gaussian", where + ".psf");
    s.psf.variance = json_get_or<double>(p, "variance", 1.0, where + ".psf");
    s.psf.file = json_get_or<std::string>(p, "file", "", where + ".psf");
  }
  if (j.contains("bc")) {
    try {
      s.bc = boundary_from_string(json_get<std::string>(j, "bc", where));
    } catch (const Error& e) {
      fail(ErrorKind::ConfigError, where + ".bc: " + e.what());
    }
  }
  if (s.kind == ProblemKind::deconv1d) s.regularizer = json_get_or<std::string>(j, "regularizer", s.regularizer, where);
  else require(!j.contains("regularizer"), ErrorKind::ConfigError, where + ".regularizer: only valid for deconv1d");
  s.stencils = json_get_or<std::vector<std::string>>(j, "stencils", {}, where);
  const auto noise = json_get_or<std::vector<double>>(j, "noise_range", {0.0, 0.0}, where);
  require(noise.size() == 2, ErrorKind::ConfigError, where + ".noise_range: expected [lo, hi]");
  s.noise_lo = noise[0];
  s.noise_hi = noise[1];
  s.seed = json_get_or<std::uint64_t>(j, "seed", 0, where);
  s.phantom = json_get_or<std::string>(j, "phantom", s.phantom, where);
  s.sources = json_get_or<std::vector<std::string>>(j, "sources", {}, where);
  s.augment = json_get_or<bool>(j, "augment", false, where);
  try {
    s.validate();
  } catch (const Error& e) {
    fail(ErrorKind::ConfigError, where + "." + e.what());
  }
  return s;
}

/// Image loader resolving relative paths against a base directory.
inline ImageLoader image_loader(fs::path base) {
  return [base = std::move(base)](const std::string& p) {
    const fs::path path(p);
    return read_image(path.is_absolute() ? path : base / path);
  };
}

// ---------------------------------------------------------------------------
// Dataset directories: manifest.json plus items/x_NNNNN.csv, items/b_NNNNN.csv.

inline constexpr int kSchemaVersion = 1;

inline std::string item_name(const char* prefix, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "items/%s_%05zu.csv", prefix, k);
  return buf;
}

inline void write_dataset(const fs::path& dir, const Dataset& ds) {
  Json manifest;
  manifest["schema"] = kSchemaVersion;
  manifest["role"] = to_string(ds.role);
  manifest["spec"] = to_json(ds.spec);
  Json items = Json::array();
  for (std::size_t k = 0; k < ds.size(); ++k) {
    const auto& it = ds.items[k];
    const std::string xp = item_name("x", k), bp = item_name("b", k);
    write_csv(dir / xp, as_grid(it.x, ds.spec.rows, ds.spec.cols));
    write_csv(dir / bp, as_grid(it.b, ds.spec.rows, ds.spec.cols));
    items.push_back({{"x", xp}, {"b", bp}, {"noise_level", it.noise_level}});
  }
  manifest["items"] = std::move(items);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline Json read_json(const fs::path& path, ErrorKind kind = ErrorKind::DataError) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(kind, path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

namespace detail {

inline Dataset read_dataset_unchecked(const fs::path& where) {
  const fs::path dir = fs::is_directory(where) ? where : where.parent_path();
  const fs::path mpath = fs::is_directory(where) ? where / "manifest.json" : where;
  const Json m = read_json(mpath);
  const std::string ctx = mpath.string();
  check_keys(m, {"schema", "role", "spec", "items"}, ctx);
  require(json_get<int>(m, "schema", ctx) == kSchemaVersion, ErrorKind::DataError,
          ctx + ": unsupported schema version");
  Dataset ds;
  ds.spec = problem_spec_from_json(m.at("spec"), ctx + ".spec");
  const auto role = json_get<std::string>(m, "role", ctx);
  require(role == "training" || role == "validation", ErrorKind::DataError, ctx + ".role: unknown role");
  ds.role = role == "training" ? DatasetRole::training : DatasetRole::validation;
  const Json& items = m.at("items");
  require(items.is_array(), ErrorKind::DataError, ctx + ".items: expected an array");
  for (const Json& it : items) {
    DatasetItem item;
    const Matrix x = read_csv(dir / json_get<std::string>(it, "x", ctx));
    const Matrix b = read_csv(dir / json_get<std::string>(it, "b", ctx));
    require(x.rows() == ds.spec.rows && x.cols() == ds.spec.cols && b.rows() == ds.spec.rows &&
                b.cols() == ds.spec.cols,
            ErrorKind::DataError, ctx + ": item " + std::to_string(ds.items.size()) + " does not match the spec shape");
    item.x.assign(x.data().begin(), x.data().end());
    item.b.assign(b.data().begin(), b.data().end());
    item.noise_level = json_get<double>(it, "noise_level", ctx);
    ds.items.push_back(std::move(item));
  }
  require(!ds.items.empty(), ErrorKind::DataError, ctx + ": dataset has no items");
  return ds;
}

}  // namespace detail

/// Reads a dataset directory (or its manifest path). Every grid must match
/// the spec's shape. Problems in the files are data errors, not config errors.
inline Dataset read_dataset(const fs::path& where) {
  try {
    return detail::read_dataset_unchecked(where);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) fail(ErrorKind::DataError, e.what());
    throw;
  }
}

}  // namespace optreg
