#include "rpl/net/mlp.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rpl/common/error.hpp"
#include "rpl/common/random.hpp"

namespace rpl::net {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  require(sizes_.size() >= 2, "Mlp needs at least an input and an output size");
  for (int s : sizes_) require(s > 0, "Mlp layer sizes must be positive");
  for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
    weights_.push_back(Mat::Zero(sizes_[i + 1], sizes_[i]));
    biases_.push_back(Vec::Zero(sizes_[i + 1]));
  }
}

Mlp Mlp::with_hidden(int input_dim, int output_dim, const std::vector<int>& hidden) {
  std::vector<int> sizes{input_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output_dim);
  return Mlp(std::move(sizes));
}

std::size_t Mlp::num_parameters() const {
  std::size_t n = 0;
  for (int l = 0; l < num_layers(); ++l) n += weights_[l].size() + biases_[l].size();
  return n;
}

bool Mlp::operator==(const Mlp& other) const {
  if (!same_architecture(other)) return false;
  for (int l = 0; l < num_layers(); ++l) {
    if (weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l]) return false;
  }
  return true;
}

Vec Mlp::forward(const Vec& input) const {
  require(input.size() == input_dim(), "Mlp::forward: input has length " + std::to_string(input.size()) +
                                           ", expected " + std::to_string(input_dim()));
  Vec x = input;
  for (int l = 0; l < num_layers(); ++l) {
    Vec z = weights_[l] * x + biases_[l];
    if (l + 1 < num_layers()) z = z.cwiseMax(0.0);
    x = std::move(z);
  }
  return x;
}

Mat Mlp::forward_batch(const Mat& inputs) const { return forward_trace(*this, inputs).output(); }

std::uint64_t Mlp::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for_each_parameter([&h](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h = (h ^ bits) * 0x100000001b3ULL;
  });
  return h;
}

GradientTape::GradientTape(const Mlp& net) {
  for (int l = 0; l < net.num_layers(); ++l) {
    weights.push_back(Mat::Zero(net.weight(l).rows(), net.weight(l).cols()));
    biases.push_back(Vec::Zero(net.bias(l).size()));
  }
}

void GradientTape::zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
  input.resize(0, 0);
}

GradientTape& GradientTape::operator+=(const GradientTape& other) {
  require(weights.size() == other.weights.size(), "GradientTape: layer count mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    require(weights[l].rows() == other.weights[l].rows() && weights[l].cols() == other.weights[l].cols(),
            "GradientTape: shape mismatch at layer " + std::to_string(l));
    weights[l] += other.weights[l];
    biases[l] += other.biases[l];
  }
  return *this;
}

GradientTape& GradientTape::operator*=(double scale) {
  for (auto& w : weights) w *= scale;
  for (auto& b : biases) b *= scale;
  if (input.size() > 0) input *= scale;
  return *this;
}

bool GradientTape::matches(const Mlp& net) const {
  if (static_cast<int>(weights.size()) != net.num_layers() || biases.size() != weights.size()) return false;
  for (int l = 0; l < net.num_layers(); ++l) {
    if (weights[l].rows() != net.weight(l).rows() || weights[l].cols() != net.weight(l).cols()) return false;
    if (biases[l].size() != net.bias(l).size()) return false;
  }
  return true;
}

ForwardTrace forward_trace(const Mlp& net, const Mat& inputs) {
  require(inputs.rows() == net.input_dim(), "forward: input has " + std::to_string(inputs.rows()) +
                                                 " rows, expected " + std::to_string(net.input_dim()));
  ForwardTrace trace;
  trace.layers.reserve(net.num_layers() + 1);
  trace.layers.push_back(inputs);
  for (int l = 0; l < net.num_layers(); ++l) {
    Mat z = net.weight(l) * trace.layers.back();
    z.colwise() += net.bias(l);
    if (l + 1 < net.num_layers()) z = z.cwiseMax(0.0);
    trace.layers.push_back(std::move(z));
  }
  return trace;
}

GradientTape backward(const Mlp& net, const ForwardTrace& trace, const Mat& output_grads,
                      bool want_input_grad) {
  require(static_cast<int>(trace.layers.size()) == net.num_layers() + 1, "backward: trace does not match net");
  require(output_grads.rows() == net.output_dim() && output_grads.cols() == trace.output().cols(),
          "backward: output gradient shape mismatch");
  GradientTape tape;
  tape.weights.resize(net.num_layers());
  tape.biases.resize(net.num_layers());
  Mat delta = output_grads;
  for (int l = net.num_layers() - 1; l >= 0; --l) {
    const Mat& below = trace.layers[l];
    tape.weights[l].noalias() = delta * below.transpose();
    tape.biases[l] = delta.rowwise().sum();
    if (l == 0 && !want_input_grad) break;
    Mat upstream = net.weight(l).transpose() * delta;
    if (l > 0) upstream.array() *= (below.array() > 0.0).cast<double>();
    delta = std::move(upstream);
  }
  if (want_input_grad) tape.input = std::move(delta);
  return tape;
}

GradientTape backward(const Mlp& net, const Vec& input, const Vec& output_grad, bool want_input_grad) {
  require(output_grad.size() == net.output_dim(), "backward: output gradient has wrong length");
  return backward(net, forward_trace(net, input), output_grad, want_input_grad);
}

AdamState::AdamState(const Mlp& net, double lr, double b1, double b2, double eps)
    : learning_rate(lr), beta1(b1), beta2(b2), epsilon(eps) {
  for (int l = 0; l < net.num_layers(); ++l) {
    first_weights.push_back(Mat::Zero(net.weight(l).rows(), net.weight(l).cols()));
    second_weights.push_back(Mat::Zero(net.weight(l).rows(), net.weight(l).cols()));
    first_biases.push_back(Vec::Zero(net.bias(l).size()));
    second_biases.push_back(Vec::Zero(net.bias(l).size()));
  }
}

namespace {

template <typename P, typename G>
void adam_apply(P& param, P& m, P& v, const G& grad, const AdamState& s, double c1, double c2) {
  m = s.beta1 * m + (1.0 - s.beta1) * grad;
  v = s.beta2 * v + (1.0 - s.beta2) * grad.cwiseProduct(grad);
  param.array() -= s.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + s.epsilon);
}

}  // namespace

void adam_step(Mlp& net, AdamState& state, const GradientTape& tape) {
  require(tape.matches(net), "adam_step: gradient tape does not match network shape");
  require(static_cast<int>(state.first_weights.size()) == net.num_layers(), "adam_step: optimizer state does not match network");
  for (int l = 0; l < net.num_layers(); ++l) {
    if (!tape.weights[l].allFinite() || !tape.biases[l].allFinite())
      throw NumericError("adam_step: non-finite gradient in layer " + std::to_string(l));
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (int l = 0; l < net.num_layers(); ++l) {
    adam_apply(net.weight(l), state.first_weights[l], state.second_weights[l], tape.weights[l], state, c1, c2);
    adam_apply(net.bias(l), state.first_biases[l], state.second_biases[l], tape.biases[l], state, c1, c2);
  }
}

void polyak_update(Mlp& target, const Mlp& online, double tau) {
  require(target.same_architecture(online), "polyak_update: architecture mismatch");
  require(tau >= 0.0 && tau <= 1.0, "polyak_update: tau must lie in [0, 1]");
  if (tau == 1.0) return;
  if (tau == 0.0) {
    target = online;
    return;
  }
  // Written as an increment so that equal parameters stay bit-identical.
  const double step = 1.0 - tau;
  for (int l = 0; l < target.num_layers(); ++l) {
    target.weight(l) += step * (online.weight(l) - target.weight(l));
    target.bias(l) += step * (online.bias(l) - target.bias(l));
  }
}

namespace {

void fill_uniform(Mat& m, double bound, Rng& rng) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-bound, bound);
}

}  // namespace

void init_he_uniform(Mlp& net, std::uint64_t seed) {
  Rng rng(seed);
  for (int l = 0; l < net.num_layers(); ++l) {
    fill_uniform(net.weight(l), std::sqrt(6.0 / static_cast<double>(net.weight(l).cols())), rng);
    net.bias(l).setZero();
  }
}

void init_residual(Mlp& net, std::uint64_t seed) {
  init_he_uniform(net, seed);
  net.weight(net.num_layers() - 1).setZero();
  net.bias(net.num_layers() - 1).setZero();
}

void save(const Mlp& net, std::ostream& os) {
  os << "RPLNET v1 ";
  for (std::size_t i = 0; i < net.layer_sizes().size(); ++i) os << (i ? "," : "") << net.layer_sizes()[i];
  os << '\n' << std::setprecision(17);
  net.for_each_parameter([&os](double v) { os << v << '\n'; });
}

Mlp load(std::istream& is) {
  std::string magic, version, sizes_text;
  if (!(is >> magic >> version >> sizes_text) || magic != "RPLNET" || version != "v1")
    throw ContractError("load: not an RPLNET v1 checkpoint");
  std::vector<int> sizes;
  std::stringstream ss(sizes_text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      sizes.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ContractError("load: bad layer size '" + item + "'");
    }
  }
  Mlp net(sizes);
  bool ok = true;
  net.for_each_parameter([&](double& v) {
    std::string token;
    if (!(is >> token)) {
      ok = false;
      return;
    }
    v = std::strtod(token.c_str(), nullptr);
  });
  if (!ok) throw ContractError("load: checkpoint truncated");
  return net;
}

void save_file(const Mlp& net, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  save(net, os);
}

Mlp load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return load(is);
}

}  // namespace rpl::net
