#pragma once

#include <functional>
#include <string>

namespace arcvc {

enum class RiskKind { one_sided_variance, one_sided_abs, one_sided_sqrt, shaped, custom };

// Deviation-to-risk map f applied to z = B - reference. Immutable value type;
// safe to share across threads. The three one-sided kinds vanish for z >= 0.
class RiskFunction {
 public:
  static RiskFunction one_sided_variance();
  static RiskFunction one_sided_abs();
  static RiskFunction one_sided_sqrt();
  // 1 / (1 + b (z - c)^2), b > 0. The learned ("shaped") model.
  static RiskFunction shaped(double b, double c);
  static RiskFunction custom(std::function<double(double)> f,
                             std::function<double(double)> fprime,
                             std::string name);

  double operator()(double z) const;   // f(z), finite and >= 0
  double derivative(double z) const;   // f'(z); 0 at one-sided kinks
  RiskKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double shaped_b() const { return b_; }
  double shaped_c() const { return c_; }

  // |f'| clamp for the square-root singularity near 0-.
  double derivative_clamp() const { return clamp_; }
  void set_derivative_clamp(double clamp) { clamp_ = clamp; }

 private:
  RiskFunction(RiskKind kind, std::string name) : kind_(kind), name_(std::move(name)) {}
  RiskKind kind_;
  std::string name_;
  double b_ = 0.0, c_ = 0.0;
  double clamp_ = 1e3;
  std::function<double(double)> custom_f_, custom_fprime_;
};

double eval_f(const RiskFunction& f, double z);
double eval_f_prime(const RiskFunction& f, double z);

// Penalty g with g(x)=0 for x<=0, nondecreasing, nonnegative.
class PenaltyFunction {
 public:
  static PenaltyFunction squared_hinge();  // (max(0,x))^2
  static PenaltyFunction custom(std::function<double(double)> g,
                                std::function<double(double)> gprime,
                                std::string name);

  double operator()(double x) const;
  double derivative(double x) const;
  const std::string& name() const { return name_; }

 private:
  explicit PenaltyFunction(std::string name) : name_(std::move(name)) {}
  std::function<double(double)> g_, gprime_;
  std::string name_;
};

double eval_g(const PenaltyFunction& g, double x);
double eval_g_prime(const PenaltyFunction& g, double x);

// Full risk configuration for one run.
struct RiskSpec {
  RiskFunction f = RiskFunction::one_sided_abs();
  PenaltyFunction g = PenaltyFunction::squared_hinge();
  double constraint = 0.1;  // D, in units of f's output
  double lambda = 10.0;     // penalty coefficient, > 0
};

void validate(const RiskSpec& spec);

// Comparable constraint levels across the three one-sided kinds: D given on
// the absolute-value scale maps to sqrt(D) for Sqrt- and D^2 for Var-.
// No canonical scaling exists for shaped/custom kinds; those throw.
double scale_constraint(double d_abs, RiskKind target);

}  // namespace arcvc
