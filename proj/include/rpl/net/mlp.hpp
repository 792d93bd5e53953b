#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rpl::net {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Dense feed-forward network: ReLU on hidden layers, identity on the output.
// Layer i maps layer_sizes[i] -> layer_sizes[i+1] with weights of shape
// (layer_sizes[i+1], layer_sizes[i]).
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> layer_sizes);

  // input, hidden..., output. Default hidden stack is 3 x 256.
  static Mlp with_hidden(int input_dim, int output_dim, const std::vector<int>& hidden = {256, 256, 256});

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(weights_.size()); }
  std::size_t num_parameters() const;

  Mat& weight(int layer) { return weights_[layer]; }
  const Mat& weight(int layer) const { return weights_[layer]; }
  Vec& bias(int layer) { return biases_[layer]; }
  const Vec& bias(int layer) const { return biases_[layer]; }

  bool same_architecture(const Mlp& other) const { return sizes_ == other.sizes_; }
  bool operator==(const Mlp& other) const;

  Vec forward(const Vec& input) const;
  // Column-per-sample batch evaluation.
  Mat forward_batch(const Mat& inputs) const;

  // Visits every scalar parameter in checkpoint order: per layer, weights
  // row-major then bias.
  template <typename F>
  void for_each_parameter(F&& f) const {
    for (int l = 0; l < num_layers(); ++l) {
      for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
        for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) f(weights_[l](r, c));
      for (Eigen::Index r = 0; r < biases_[l].size(); ++r) f(biases_[l](r));
    }
  }
  template <typename F>
  void for_each_parameter(F&& f) {
    for (int l = 0; l < num_layers(); ++l) {
      for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
        for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) f(weights_[l](r, c));
      for (Eigen::Index r = 0; r < biases_[l].size(); ++r) f(biases_[l](r));
    }
  }

  // Bit-level fingerprint of all parameters.
  std::uint64_t fingerprint() const;

 private:
  std::vector<int> sizes_;
  std::vector<Mat> weights_;
  std::vector<Vec> biases_;
};

// Per-parameter gradient accumulators with an Mlp's shapes, plus the
// gradient with respect to the network input (one column per sample).
struct GradientTape {
  std::vector<Mat> weights;
  std::vector<Vec> biases;
  Mat input;

  GradientTape() = default;
  explicit GradientTape(const Mlp& net);

  void zero();
  GradientTape& operator+=(const GradientTape& other);
  GradientTape& operator*=(double scale);
  bool matches(const Mlp& net) const;
};

// Activations retained by a batched forward pass; layers[0] is the input,
// layers[i] the post-activation output of layer i.
struct ForwardTrace {
  std::vector<Mat> layers;
  const Mat& output() const { return layers.back(); }
};

ForwardTrace forward_trace(const Mlp& net, const Mat& inputs);

// Accumulates d(sum_j output_grads.col(j) . output_j)/dtheta over the batch.
// The input gradient is filled when want_input_grad is set.
GradientTape backward(const Mlp& net, const ForwardTrace& trace, const Mat& output_grads,
                      bool want_input_grad = false);

// Single-sample convenience: recomputes activations for `input`.
GradientTape backward(const Mlp& net, const Vec& input, const Vec& output_grad,
                      bool want_input_grad = true);

struct AdamState {
  std::uint64_t step_count = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<Mat> first_weights, second_weights;
  std::vector<Vec> first_biases, second_biases;

  AdamState() = default;
  explicit AdamState(const Mlp& net, double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                     double epsilon = 1e-8);
};

// Bias-corrected Adam. Throws NumericError naming the first layer holding a
// non-finite gradient; nothing is modified in that case.
void adam_step(Mlp& net, AdamState& state, const GradientTape& tape);

// target <- tau * target + (1 - tau) * online, for every parameter.
void polyak_update(Mlp& target, const Mlp& online, double tau);

// He-style uniform init (bound sqrt(6 / fan_in)) on every layer, zero biases.
void init_he_uniform(Mlp& net, std::uint64_t seed);

// He-style init on hidden layers, final weights and bias exactly zero, so
// the network outputs the zero vector for every input.
void init_residual(Mlp& net, std::uint64_t seed);

// Checkpoint format: "RPLNET v1 <sizes comma-separated>" then one parameter
// per line in for_each_parameter order with 17 significant digits.
void save(const Mlp& net, std::ostream& os);
Mlp load(std::istream& is);
void save_file(const Mlp& net, const std::string& path);
Mlp load_file(const std::string& path);

}  // namespace rpl::net
