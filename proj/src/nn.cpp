#include "arcvc/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "arcvc/errors.hpp"

namespace arcvc {

bool ParamVector::finite() const {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

double ParamVector::norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

ParamVector& ParamVector::operator+=(const ParamVector& other) {
  if (other.values.size() != values.size())
    throw ConfigError("ParamVector size mismatch in +=");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
  return *this;
}

ParamVector& ParamVector::operator*=(double s) {
  for (double& v : values) v *= s;
  return *this;
}

std::size_t param_count(const std::vector<LayerShape>& shapes) {
  std::size_t n = 0;
  for (const auto& s : shapes) n += static_cast<std::size_t>(s.in + 1) * s.out;
  return n;
}

Mlp::Mlp(std::vector<int> sizes, Head head) : sizes_(std::move(sizes)), head_(head) {
  if (sizes_.size() < 2) throw ConfigError("Mlp needs at least input and output sizes");
  for (int s : sizes_)
    if (s <= 0) throw ConfigError("Mlp layer sizes must be positive");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l)
    params_.shapes.push_back({sizes_[l], sizes_[l + 1]});
  params_.values.assign(param_count(params_.shapes), 0.0);
}

void Mlp::init_uniform(std::mt19937_64& rng) {
  std::size_t off = 0;
  for (const auto& sh : params_.shapes) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sh.in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    const std::size_t n = static_cast<std::size_t>(sh.in + 1) * sh.out;
    for (std::size_t i = 0; i < n; ++i) params_.values[off + i] = dist(rng);
    off += n;
  }
}

void Mlp::zero_params() {
  std::fill(params_.values.begin(), params_.values.end(), 0.0);
}

std::vector<std::vector<double>> Mlp::activations(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != sizes_.front())
    throw ConfigError("Mlp forward: input length " + std::to_string(input.size()) +
                      " != " + std::to_string(sizes_.front()));
  std::vector<std::vector<double>> acts;
  acts.reserve(sizes_.size());
  acts.emplace_back(input.begin(), input.end());
  std::size_t off = 0;
  for (std::size_t l = 0; l < params_.shapes.size(); ++l) {
    const auto& sh = params_.shapes[l];
    const double* w = params_.values.data() + off;
    const double* b = w + static_cast<std::size_t>(sh.in) * sh.out;
    const auto& x = acts.back();
    std::vector<double> y(sh.out);
    for (int o = 0; o < sh.out; ++o) {
      double acc = b[o];
      const double* row = w + static_cast<std::size_t>(o) * sh.in;
      for (int i = 0; i < sh.in; ++i) acc += row[i] * x[i];
      y[o] = acc;
    }
    const bool hidden = l + 1 < params_.shapes.size();
    if (hidden)
      for (double& v : y) v = v > 0.0 ? v : 0.0;
    acts.push_back(std::move(y));
    off += static_cast<std::size_t>(sh.in + 1) * sh.out;
  }
  return acts;
}

namespace {

std::vector<double> softmax(const std::vector<double>& logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

}  // namespace

std::vector<double> Mlp::forward(std::span<const double> input) const {
  auto acts = activations(input);
  if (head_ == Head::softmax) return softmax(acts.back());
  return acts.back();
}

double Mlp::scalar(std::span<const double> input) const {
  if (sizes_.back() != 1 || head_ != Head::linear)
    throw ConfigError("Mlp::scalar requires a 1-output linear head");
  return activations(input).back()[0];
}

ParamVector Mlp::backprop_from_logits(const std::vector<std::vector<double>>& acts,
                                      std::vector<double> logit_grad) const {
  ParamVector grad;
  grad.shapes = params_.shapes;
  grad.values.assign(params_.values.size(), 0.0);

  // Layer offsets into the flat parameter vector.
  std::vector<std::size_t> offs(params_.shapes.size());
  std::size_t off = 0;
  for (std::size_t l = 0; l < params_.shapes.size(); ++l) {
    offs[l] = off;
    off += static_cast<std::size_t>(params_.shapes[l].in + 1) * params_.shapes[l].out;
  }

  std::vector<double> delta = std::move(logit_grad);
  for (std::size_t li = params_.shapes.size(); li-- > 0;) {
    const auto& sh = params_.shapes[li];
    const double* w = params_.values.data() + offs[li];
    double* gw = grad.values.data() + offs[li];
    double* gb = gw + static_cast<std::size_t>(sh.in) * sh.out;
    const auto& x = acts[li];
    for (int o = 0; o < sh.out; ++o) {
      const double d = delta[o];
      gb[o] += d;
      double* grow = gw + static_cast<std::size_t>(o) * sh.in;
      for (int i = 0; i < sh.in; ++i) grow[i] += d * x[i];
    }
    if (li == 0) break;
    std::vector<double> prev(sh.in, 0.0);
    for (int o = 0; o < sh.out; ++o) {
      const double d = delta[o];
      const double* row = w + static_cast<std::size_t>(o) * sh.in;
      for (int i = 0; i < sh.in; ++i) prev[i] += d * row[i];
    }
    // ReLU mask: acts[li] stores the post-ReLU values of hidden layer li.
    for (int i = 0; i < sh.in; ++i)
      if (acts[li][i] <= 0.0) prev[i] = 0.0;
    delta = std::move(prev);
  }
  return grad;
}

ParamVector Mlp::backward(std::span<const double> input,
                          std::span<const double> out_grad) const {
  if (static_cast<int>(out_grad.size()) != sizes_.back())
    throw ConfigError("Mlp backward: cotangent length mismatch");
  auto acts = activations(input);
  std::vector<double> logit_grad(out_grad.begin(), out_grad.end());
  if (head_ == Head::softmax) {
    const auto p = softmax(acts.back());
    double dot = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) dot += p[i] * out_grad[i];
    for (std::size_t i = 0; i < p.size(); ++i)
      logit_grad[i] = p[i] * (out_grad[i] - dot);
  }
  return backprop_from_logits(acts, std::move(logit_grad));
}

ParamVector Mlp::log_prob_gradient(std::span<const double> input, int action) const {
  if (head_ != Head::softmax)
    throw ConfigError("log_prob_gradient requires a softmax head");
  if (action < 0 || action >= sizes_.back())
    throw ConfigError("log_prob_gradient: action out of range");
  auto acts = activations(input);
  auto p = softmax(acts.back());
  std::vector<double> logit_grad(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) logit_grad[i] = -p[i];
  logit_grad[action] += 1.0;
  return backprop_from_logits(acts, std::move(logit_grad));
}

ParamVector Mlp::zero_gradient() const {
  ParamVector g;
  g.shapes = params_.shapes;
  g.values.assign(params_.values.size(), 0.0);
  return g;
}

AdamState::AdamState(std::size_t n, AdamConfig cfg)
    : m_(n, 0.0), v_(n, 0.0), cfg_(cfg) {}

void AdamState::step(ParamVector& params, const ParamVector& grad) {
  if (params.values.size() != m_.size() || grad.values.size() != m_.size())
    throw ConfigError("AdamState: vector length mismatch");
  if (!grad.finite()) throw TrainingError("Adam: non-finite gradient");
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    const double g = grad.values[i];
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params.values[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
  }
}

void adam_step(AdamState& state, ParamVector& params, const ParamVector& grad) {
  state.step(params, grad);
}

namespace {
constexpr const char* kSnapshotTag = "arcvc-mlp v1";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

void save_params(const Mlp& net, std::ostream& out) {
  out << kSnapshotTag << "\n";
  out << (net.head() == Head::softmax ? "softmax" : "linear");
  for (int s : net.sizes()) out << " " << s;
  out << "\n";
  for (double v : net.params().values) out << fmt(v) << "\n";
}

Mlp load_params(std::istream& in) {
  std::string tag;
  std::getline(in, tag);
  if (tag != kSnapshotTag) throw ConfigError("bad parameter snapshot header: " + tag);
  std::string line;
  std::getline(in, line);
  std::istringstream hs(line);
  std::string head_name;
  hs >> head_name;
  Head head;
  if (head_name == "softmax")
    head = Head::softmax;
  else if (head_name == "linear")
    head = Head::linear;
  else
    throw ConfigError("bad head kind in snapshot: " + head_name);
  std::vector<int> sizes;
  int s;
  while (hs >> s) sizes.push_back(s);
  Mlp net(sizes, head);
  for (double& v : net.params().values) {
    if (!(in >> v)) throw ConfigError("truncated parameter snapshot");
    if (!std::isfinite(v)) throw ConfigError("non-finite value in parameter snapshot");
  }
  return net;
}

void save_params_file(const Mlp& net, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  save_params(net, f);
}

Mlp load_params_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path);
  return load_params(f);
}

}  // namespace arcvc
