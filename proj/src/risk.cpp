#include "arcvc/risk.hpp"

#include <algorithm>
#include <cmath>

#include "arcvc/errors.hpp"

namespace arcvc {

RiskFunction RiskFunction::one_sided_variance() {
  return RiskFunction(RiskKind::one_sided_variance, "var-");
}
RiskFunction RiskFunction::one_sided_abs() {
  return RiskFunction(RiskKind::one_sided_abs, "abs-");
}
RiskFunction RiskFunction::one_sided_sqrt() {
  return RiskFunction(RiskKind::one_sided_sqrt, "sqrt-");
}

RiskFunction RiskFunction::shaped(double b, double c) {
  if (!(b > 0.0)) throw ConfigError("shaped risk requires b > 0");
  RiskFunction f(RiskKind::shaped, "shaped");
  f.b_ = b;
  f.c_ = c;
  return f;
}

RiskFunction RiskFunction::custom(std::function<double(double)> f,
                                  std::function<double(double)> fprime,
                                  std::string name) {
  RiskFunction r(RiskKind::custom, std::move(name));
  r.custom_f_ = std::move(f);
  r.custom_fprime_ = std::move(fprime);
  return r;
}

double RiskFunction::operator()(double z) const {
  switch (kind_) {
    case RiskKind::one_sided_variance:
      return z <= 0.0 ? z * z : 0.0;
    case RiskKind::one_sided_abs:
      return z <= 0.0 ? -z : 0.0;
    case RiskKind::one_sided_sqrt:
      return z <= 0.0 ? std::sqrt(-z) : 0.0;
    case RiskKind::shaped: {
      const double s = z - c_;
      return 1.0 / (1.0 + b_ * s * s);
    }
    case RiskKind::custom:
      return custom_f_(z);
  }
  return 0.0;
}

double RiskFunction::derivative(double z) const {
  switch (kind_) {
    case RiskKind::one_sided_variance:
      return z < 0.0 ? 2.0 * z : 0.0;
    case RiskKind::one_sided_abs:
      return z < 0.0 ? -1.0 : 0.0;
    case RiskKind::one_sided_sqrt: {
      if (z >= 0.0) return 0.0;
      const double d = -0.5 / std::sqrt(-z);
      return std::max(d, -clamp_);  // d < 0; clamp the blow-up toward 0-
    }
    case RiskKind::shaped: {
      const double s = z - c_;
      const double denom = 1.0 + b_ * s * s;
      return -2.0 * b_ * s / (denom * denom);
    }
    case RiskKind::custom:
      return custom_fprime_(z);
  }
  return 0.0;
}

double eval_f(const RiskFunction& f, double z) { return f(z); }
double eval_f_prime(const RiskFunction& f, double z) { return f.derivative(z); }

PenaltyFunction PenaltyFunction::squared_hinge() {
  PenaltyFunction g("squared_hinge");
  g.g_ = [](double x) {
    const double h = std::max(0.0, x);
    return h * h;
  };
  g.gprime_ = [](double x) { return 2.0 * std::max(0.0, x); };
  return g;
}

PenaltyFunction PenaltyFunction::custom(std::function<double(double)> g,
                                        std::function<double(double)> gprime,
                                        std::string name) {
  PenaltyFunction p(std::move(name));
  p.g_ = std::move(g);
  p.gprime_ = std::move(gprime);
  return p;
}

double PenaltyFunction::operator()(double x) const { return g_(x); }
double PenaltyFunction::derivative(double x) const { return gprime_(x); }

double eval_g(const PenaltyFunction& g, double x) { return g(x); }
double eval_g_prime(const PenaltyFunction& g, double x) { return g.derivative(x); }

void validate(const RiskSpec& spec) {
  if (!(spec.lambda > 0.0)) throw ConfigError("risk: lambda must be > 0");
  if (!std::isfinite(spec.constraint)) throw ConfigError("risk: D must be finite");
}

double scale_constraint(double d_abs, RiskKind target) {
  if (d_abs < 0.0) throw ConfigError("scale_constraint: D must be >= 0");
  switch (target) {
    case RiskKind::one_sided_abs:
      return d_abs;
    case RiskKind::one_sided_sqrt:
      return std::sqrt(d_abs);
    case RiskKind::one_sided_variance:
      return d_abs * d_abs;
    default:
      throw ConfigError("scale_constraint: no canonical scaling for this risk kind");
  }
}

}  // namespace arcvc
