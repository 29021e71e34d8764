#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace arcvc {

struct LayerShape {
  int in = 0;
  int out = 0;
};

// Flat parameter storage for one network. Layout per layer: weights
// row-major [out][in], then bias [out]. All arithmetic is double precision.
struct ParamVector {
  std::vector<double> values;
  std::vector<LayerShape> shapes;

  std::size_t size() const { return values.size(); }
  bool finite() const;
  double norm() const;

  ParamVector& operator+=(const ParamVector& other);
  ParamVector& operator*=(double s);
};

// Expected flat length for a stack of (in+1)*out layers.
std::size_t param_count(const std::vector<LayerShape>& shapes);

enum class Head { linear, softmax };

// Small dense network: ReLU on every hidden layer, then a linear or softmax
// head. Forward/backward are deterministic given parameters and input;
// nothing here mutates shared state, so const instances are thread-safe.
class Mlp {
 public:
  // sizes = {input, hidden..., output}; at least one weight layer.
  Mlp(std::vector<int> sizes, Head head);

  // Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  void init_uniform(std::mt19937_64& rng);
  void zero_params();

  std::vector<double> forward(std::span<const double> input) const;

  // Convenience for scalar-output critics.
  double scalar(std::span<const double> input) const;

  // d(output . out_grad)/d(params). For the softmax head, out_grad is the
  // cotangent on the probabilities (the softmax Jacobian is applied here).
  ParamVector backward(std::span<const double> input,
                       std::span<const double> out_grad) const;

  // d log softmax(logits)[action] / d(params), computed via the stable
  // (onehot - probs) logit cotangent. Softmax head only.
  ParamVector log_prob_gradient(std::span<const double> input, int action) const;

  ParamVector zero_gradient() const;

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  Head head() const { return head_; }
  const std::vector<int>& sizes() const { return sizes_; }
  const ParamVector& params() const { return params_; }
  ParamVector& params() { return params_; }

 private:
  std::vector<int> sizes_;
  Head head_;
  ParamVector params_;

  // Runs the stack up to the pre-head activations; returns all layer
  // activations (post-ReLU for hidden, raw for the last).
  std::vector<std::vector<double>> activations(std::span<const double> input) const;
  ParamVector backprop_from_logits(const std::vector<std::vector<double>>& acts,
                                   std::vector<double> logit_grad) const;
};

// Bias-corrected Adam. step() throws TrainingError on non-finite gradients.
struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamState {
 public:
  AdamState() = default;
  AdamState(std::size_t n, AdamConfig cfg);

  void step(ParamVector& params, const ParamVector& grad);
  long steps_taken() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  std::vector<double> m_, v_;
  long t_ = 0;
  AdamConfig cfg_;
};

// Spec-surface free function form of the update.
void adam_step(AdamState& state, ParamVector& params, const ParamVector& grad);

// Versioned text snapshot: header line "arcvc-mlp v1", then sizes/head, then
// one scalar per line at full precision.
void save_params(const Mlp& net, std::ostream& out);
Mlp load_params(std::istream& in);
void save_params_file(const Mlp& net, const std::string& path);
Mlp load_params_file(const std::string& path);

}  // namespace arcvc
