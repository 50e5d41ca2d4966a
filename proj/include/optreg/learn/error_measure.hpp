#pragma once

#include <cmath>
#include <span>
#include <string>

#include "optreg/core/matrix.hpp"

namespace optreg {

/// The risk integrand ρ with its gradient and diagonal Hessian.
class ErrorMeasure {
 public:
  enum class Kind { sq2norm, pnorm, huber };

  static ErrorMeasure sq2norm() { return ErrorMeasure(Kind::sq2norm, 2.0, 0.0); }
  static ErrorMeasure pnorm(double p) {
    require(p >= 1.0, ErrorKind::InvalidArgument, "pnorm requires p >= 1");
    return ErrorMeasure(Kind::pnorm, p, 0.0);
  }
  static ErrorMeasure huber(double beta = 1e-4) {
    require(beta > 0.0, ErrorKind::InvalidArgument, "huber requires beta > 0");
    return ErrorMeasure(Kind::huber, 0.0, beta);
  }

  /// Parses "sq2norm", "pnorm:5" (or "5norm"), "huber" and "huber:1e-3".
  static ErrorMeasure parse(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    auto number = [&](const std::string& s) {
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
      } catch (const std::exception&) {
      }
      fail(ErrorKind::InvalidArgument, "bad error measure parameter in '" + spec + "'");
    };
    if (head == "sq2norm" || head == "2norm") return sq2norm();
    if (head == "huber") return arg.empty() ? huber() : huber(number(arg));
    if (head == "pnorm") return pnorm(number(arg));
    if (head.size() > 4 && head.ends_with("norm")) return pnorm(number(head.substr(0, head.size() - 4)));
    fail(ErrorKind::InvalidArgument, "unknown error measure '" + spec + "'");
  }

  Kind kind() const noexcept { return kind_; }
  double p() const noexcept { return p_; }
  double beta() const noexcept { return beta_; }

  /// Differentiable everywhere (pnorm with p = 1 is not).
  bool smooth() const noexcept { return kind_ != Kind::pnorm || p_ > 1.0; }

  std::string name() const {
    switch (kind_) {
      case Kind::sq2norm: return "sq2norm";
      case Kind::pnorm: return "pnorm:" + format_number(p_);
      case Kind::huber: return "huber:" + format_number(beta_);
    }
    return "?";
  }

  double evaluate(std::span<const double> xi) const {
    double s = 0.0;
    for (double v : xi) s += value(v);
    return s;
  }

  Vector gradient(std::span<const double> xi) const {
    Vector g(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) g[i] = derivative(xi[i]);
    return g;
  }

  Vector hessian_diag(std::span<const double> xi) const {
    Vector h(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) h[i] = second_derivative(xi[i]);
    return h;
  }

  double value(double v) const {
    const double a = std::abs(v);
    switch (kind_) {
      case Kind::sq2norm: return 0.5 * v * v;
      case Kind::pnorm: return std::pow(a, p_);
      case Kind::huber: return a >= beta_ ? a - 0.5 * beta_ : v * v / (2.0 * beta_);
    }
    return 0.0;
  }

  double derivative(double v) const {
    const double a = std::abs(v);
    const double sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    switch (kind_) {
      case Kind::sq2norm: return v;
      case Kind::pnorm: return p_ * std::pow(a, p_ - 1.0) * sign;
      case Kind::huber: return a > beta_ ? sign : v / beta_;
    }
    return 0.0;
  }

  double second_derivative(double v) const {
    switch (kind_) {
      case Kind::sq2norm: return 1.0;
      case Kind::pnorm: {
        if (p_ == 1.0) return 0.0;
        double a = std::abs(v);
        if (p_ < 2.0) a = std::max(a, 1e-8);
        return p_ * (p_ - 1.0) * std::pow(a, p_ - 2.0);
      }
      case Kind::huber: return std::abs(v) <= beta_ ? 1.0 / beta_ : 0.0;
    }
    return 0.0;
  }

  bool operator==(const ErrorMeasure&) const = default;

 private:
  ErrorMeasure(Kind k, double p, double beta) : kind_(k), p_(p), beta_(beta) {}

  static std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  Kind kind_;
  double p_;
  double beta_;
};

/// ρ(x − x_true)/ρ(x_true).
inline double relative_error(std::span<const double> x, std::span<const double> x_true, const ErrorMeasure& rho) {
  require(x.size() == x_true.size(), ErrorKind::InvalidArgument, "relative_error size mismatch");
  const double ref = rho.evaluate(x_true);
  if (!(ref > 0.0)) fail(ErrorKind::ZeroReference, "reference has zero error measure");
  Vector d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - x_true[i];
  return rho.evaluate(d) / ref;
}

}  // namespace optreg
