#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairmine/core.hpp"
#include "fairmine/random.hpp"

namespace fairmine {

enum class Activation : std::uint8_t { Tanh, Relu };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct NetworkShape {
  std::size_t input_dim = 32;
  /// Output widths of each affine layer; the last one is the embedding dimension.
  std::vector<std::size_t> widths{64, 32};
  Activation activation = Activation::Tanh;

  std::size_t output_dim() const { return widths.back(); }
  std::size_t parameter_count() const;
  std::string canonical() const;
  std::uint64_t hash() const;
  void validate() const;

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

// Cached intermediate values of one forward pass, reused by backprop.
struct ForwardTrace {
  std::vector<Vector> activations;  // [0] = input, then post-activation of each hidden layer
  Vector pre_norm;                  // output of the last affine layer
  Vector embedding;
  double norm = 0.0;
};

/// MLP: affine -> activation for every layer but the last, which is affine
/// only; the result is L2-normalized. Parameters live in one flat buffer,
/// per layer weights (out x in, row-major) followed by biases.
class EmbeddingNetwork {
 public:
  /// Weights and biases drawn uniformly from +-1/sqrt(fan_in).
  EmbeddingNetwork(NetworkShape shape, Rng& init);
  static EmbeddingNetwork zeros(NetworkShape shape);

  const NetworkShape& shape() const { return shape_; }
  std::size_t input_dim() const { return shape_.input_dim; }
  std::size_t output_dim() const { return shape_.output_dim(); }
  std::size_t layer_count() const { return layers_.size(); }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::span<double> weights(std::size_t layer);
  std::span<double> bias(std::size_t layer);

  Embedding forward(std::span<const double> features) const;
  /// Writes the unit-norm embedding into out (size output_dim) without allocating
  /// beyond the two scratch buffers.
  void embed_into(std::span<const double> features, std::span<double> out, Vector& scratch_a,
                  Vector& scratch_b) const;
  void forward_trace(std::span<const double> features, ForwardTrace& trace) const;
  /// Accumulates dL/dparams into grad, given dL/d(embedding) for a traced pass.
  void backward(const ForwardTrace& trace, std::span<const double> grad_embedding,
                std::span<double> grad) const;

  friend bool operator==(const EmbeddingNetwork&, const EmbeddingNetwork&) = default;

 private:
  struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t weight_offset = 0;
    std::size_t bias_offset = 0;
    friend bool operator==(const Layer&, const Layer&) = default;
  };

  explicit EmbeddingNetwork(NetworkShape shape);
  void check_input(std::span<const double> features) const;

  NetworkShape shape_;
  std::vector<Layer> layers_;
  Vector params_;
};

/// max(D2_ap - D2_an + margin, 0).
double triplet_loss(const Embedding& anchor, const Embedding& positive, const Embedding& negative,
                    double margin);
double triplet_loss(std::span<const double> anchor, std::span<const double> positive,
                    std::span<const double> negative, double margin);

struct TripletInputs {
  std::span<const double> anchor;
  std::span<const double> positive;
  std::span<const double> negative;
};

struct LossGradient {
  double loss = 0.0;  // mean over the minibatch
  std::size_t active = 0;
  Vector grad;
};

/// Gradient of the mean triplet loss over the minibatch. A hinge argument of
/// exactly zero counts as inactive.
LossGradient loss_gradients(const EmbeddingNetwork& net, std::span<const TripletInputs> minibatch,
                            double margin);

/// Mean loss only, used by finite-difference checks.
double mean_triplet_loss(const EmbeddingNetwork& net, std::span<const TripletInputs> minibatch,
                         double margin);

struct LrSchedule {
  double initial = 1e-3;
  double final = 1e-5;
  std::size_t total_steps = 6000;

  /// Exponential interpolation from initial (step 0) to final (step total_steps-1).
  double at(std::size_t step) const;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  Vector first_moment;
  Vector second_moment;
  std::uint64_t step = 0;

  static OptimizerState for_parameters(std::size_t n);
  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

/// One bias-corrected Adam update at learning rate schedule.at(state.step).
void adam_step(OptimizerState& state, std::span<double> params, std::span<const double> grads,
               const LrSchedule& schedule, const AdamConfig& adam = {});

struct TrainingConfig {
  double margin = 0.6;
  std::size_t selection_batch = 2048;
  std::size_t minibatch = 32;
  std::size_t total_steps = 6000;
  double lr_initial = 1e-3;
  double lr_final = 1e-5;
  NetworkShape network;

  LrSchedule schedule() const { return {lr_initial, lr_final, total_steps}; }
  void validate() const;
};

}  // namespace fairmine
