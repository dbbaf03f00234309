#include "fairmine/model.hpp"

#include <algorithm>
#include <cmath>

namespace fairmine {

std::string_view to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::size_t NetworkShape::parameter_count() const {
  std::size_t n = 0;
  std::size_t in = input_dim;
  for (std::size_t w : widths) {
    n += w * in + w;
    in = w;
  }
  return n;
}

std::string NetworkShape::canonical() const {
  std::string s = "input_dim=" + std::to_string(input_dim) + ";widths=";
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(widths[i]);
  }
  s += ";activation=";
  s += to_string(activation);
  return s;
}

std::uint64_t NetworkShape::hash() const { return fnv1a(canonical()); }

void NetworkShape::validate() const {
  if (input_dim == 0) throw ConfigError("network input_dim must be positive");
  if (widths.empty()) throw ConfigError("network needs at least one layer");
  for (std::size_t w : widths)
    if (w == 0) throw ConfigError("network layer widths must be positive");
}

EmbeddingNetwork::EmbeddingNetwork(NetworkShape shape) : shape_(std::move(shape)) {
  shape_.validate();
  std::size_t in = shape_.input_dim;
  std::size_t offset = 0;
  for (std::size_t w : shape_.widths) {
    Layer l{in, w, offset, offset + w * in};
    offset = l.bias_offset + w;
    layers_.push_back(l);
    in = w;
  }
  params_.assign(offset, 0.0);
}

EmbeddingNetwork::EmbeddingNetwork(NetworkShape shape, Rng& init) : EmbeddingNetwork(std::move(shape)) {
  for (const Layer& l : layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
    for (std::size_t k = 0; k < l.out * l.in; ++k)
      params_[l.weight_offset + k] = bound * (2.0 * init.uniform() - 1.0);
    for (std::size_t k = 0; k < l.out; ++k)
      params_[l.bias_offset + k] = bound * (2.0 * init.uniform() - 1.0);
  }
}

EmbeddingNetwork EmbeddingNetwork::zeros(NetworkShape shape) { return EmbeddingNetwork(std::move(shape)); }

std::span<double> EmbeddingNetwork::weights(std::size_t layer) {
  const Layer& l = layers_.at(layer);
  return {params_.data() + l.weight_offset, l.out * l.in};
}

std::span<double> EmbeddingNetwork::bias(std::size_t layer) {
  const Layer& l = layers_.at(layer);
  return {params_.data() + l.bias_offset, l.out};
}

void EmbeddingNetwork::check_input(std::span<const double> features) const {
  if (features.size() != shape_.input_dim)
    throw DimensionError("network expects input dimension " + std::to_string(shape_.input_dim) +
                         ", got " + std::to_string(features.size()));
}

namespace {

inline double activate(Activation a, double x) { return a == Activation::Tanh ? std::tanh(x) : (x > 0.0 ? x : 0.0); }

// y = W x + b for one layer.
inline void affine(const double* w, const double* b, std::span<const double> x, double* y, std::size_t out) {
  const std::size_t in = x.size();
  for (std::size_t o = 0; o < out; ++o) {
    const double* row = w + o * in;
    double s = b[o];
    for (std::size_t i = 0; i < in; ++i) s += row[i] * x[i];
    y[o] = s;
  }
}

}  // namespace

void EmbeddingNetwork::embed_into(std::span<const double> features, std::span<double> out,
                                  Vector& scratch_a, Vector& scratch_b) const {
  check_input(features);
  if (out.size() != output_dim()) throw DimensionError("embedding output buffer has wrong size");
  std::span<const double> x = features;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const Layer& l = layers_[li];
    const bool last = li + 1 == layers_.size();
    Vector& y = (li % 2 == 0) ? scratch_a : scratch_b;
    y.resize(l.out);
    affine(params_.data() + l.weight_offset, params_.data() + l.bias_offset, x, y.data(), l.out);
    if (!last)
      for (double& v : y) v = activate(shape_.activation, v);
    x = y;
  }
  double sq = 0.0;
  for (double v : x) sq += v * v;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0)) throw NormalizationError("network produced a zero pre-normalization output");
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = x[k] / norm;
}

Embedding EmbeddingNetwork::forward(std::span<const double> features) const {
  Vector a, b, out(output_dim());
  embed_into(features, out, a, b);
  return Embedding::from_unit(std::move(out));
}

void EmbeddingNetwork::forward_trace(std::span<const double> features, ForwardTrace& trace) const {
  check_input(features);
  trace.activations.resize(layers_.size());
  trace.activations[0].assign(features.begin(), features.end());
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const Layer& l = layers_[li];
    const bool last = li + 1 == layers_.size();
    Vector& y = last ? trace.pre_norm : trace.activations[li + 1];
    y.resize(l.out);
    affine(params_.data() + l.weight_offset, params_.data() + l.bias_offset, trace.activations[li],
           y.data(), l.out);
    if (!last)
      for (double& v : y) v = activate(shape_.activation, v);
  }
  double sq = 0.0;
  for (double v : trace.pre_norm) sq += v * v;
  trace.norm = std::sqrt(sq);
  if (!(trace.norm > 0.0)) throw NormalizationError("network produced a zero pre-normalization output");
  trace.embedding.resize(trace.pre_norm.size());
  for (std::size_t k = 0; k < trace.pre_norm.size(); ++k) trace.embedding[k] = trace.pre_norm[k] / trace.norm;
}

void EmbeddingNetwork::backward(const ForwardTrace& trace, std::span<const double> grad_embedding,
                                std::span<double> grad) const {
  if (grad.size() != params_.size()) throw DimensionError("gradient buffer has wrong size");
  const Vector& z = trace.embedding;
  // Jacobian of u / |u|: (I - z z^T) / |u|.
  double zg = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) zg += z[k] * grad_embedding[k];
  Vector delta(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) delta[k] = (grad_embedding[k] - z[k] * zg) / trace.norm;

  Vector upstream;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Layer& l = layers_[li];
    const Vector& input = trace.activations[li];
    double* gw = grad.data() + l.weight_offset;
    double* gb = grad.data() + l.bias_offset;
    for (std::size_t o = 0; o < l.out; ++o) {
      const double d = delta[o];
      gb[o] += d;
      if (d == 0.0) continue;
      double* row = gw + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) row[i] += d * input[i];
    }
    if (li == 0) break;
    upstream.assign(l.in, 0.0);
    const double* w = params_.data() + l.weight_offset;
    for (std::size_t o = 0; o < l.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = w + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) upstream[i] += row[i] * d;
    }
    // input is the activated output of layer li-1
    for (std::size_t i = 0; i < l.in; ++i) {
      const double a = input[i];
      const double da = shape_.activation == Activation::Tanh ? 1.0 - a * a : (a > 0.0 ? 1.0 : 0.0);
      upstream[i] *= da;
    }
    delta.swap(upstream);
  }
}

double triplet_loss(std::span<const double> anchor, std::span<const double> positive,
                    std::span<const double> negative, double margin) {
  const double h = squared_distance(anchor, positive) - squared_distance(anchor, negative) + margin;
  return h > 0.0 ? h : 0.0;
}

double triplet_loss(const Embedding& anchor, const Embedding& positive, const Embedding& negative,
                    double margin) {
  return triplet_loss(anchor.values(), positive.values(), negative.values(), margin);
}

LossGradient loss_gradients(const EmbeddingNetwork& net, std::span<const TripletInputs> minibatch,
                            double margin) {
  if (minibatch.empty()) throw Error("loss_gradients needs a nonempty minibatch");
  LossGradient out;
  out.grad.assign(net.parameters().size(), 0.0);
  const double scale = 1.0 / static_cast<double>(minibatch.size());
  ForwardTrace ta, tp, tn;
  const std::size_t d = net.output_dim();
  Vector ga(d), gp(d), gn(d);
  double total = 0.0;
  for (const TripletInputs& t : minibatch) {
    net.forward_trace(t.anchor, ta);
    net.forward_trace(t.positive, tp);
    net.forward_trace(t.negative, tn);
    const double h = squared_distance(ta.embedding, tp.embedding) -
                     squared_distance(ta.embedding, tn.embedding) + margin;
    if (!(h > 0.0)) continue;
    total += h;
    ++out.active;
    for (std::size_t k = 0; k < d; ++k) {
      const double za = ta.embedding[k], zp = tp.embedding[k], zn = tn.embedding[k];
      ga[k] = 2.0 * (zn - zp) * scale;
      gp[k] = 2.0 * (zp - za) * scale;
      gn[k] = 2.0 * (za - zn) * scale;
    }
    net.backward(ta, ga, out.grad);
    net.backward(tp, gp, out.grad);
    net.backward(tn, gn, out.grad);
  }
  out.loss = total * scale;
  return out;
}

double mean_triplet_loss(const EmbeddingNetwork& net, std::span<const TripletInputs> minibatch,
                         double margin) {
  if (minibatch.empty()) throw Error("mean_triplet_loss needs a nonempty minibatch");
  double total = 0.0;
  for (const TripletInputs& t : minibatch)
    total += triplet_loss(net.forward(t.anchor), net.forward(t.positive), net.forward(t.negative), margin);
  return total / static_cast<double>(minibatch.size());
}

double LrSchedule::at(std::size_t step) const {
  if (total_steps <= 1) return initial;
  const double frac =
      static_cast<double>(std::min(step, total_steps - 1)) / static_cast<double>(total_steps - 1);
  return initial * std::pow(final / initial, frac);
}

OptimizerState OptimizerState::for_parameters(std::size_t n) {
  OptimizerState s;
  s.first_moment.assign(n, 0.0);
  s.second_moment.assign(n, 0.0);
  return s;
}

void adam_step(OptimizerState& state, std::span<double> params, std::span<const double> grads,
               const LrSchedule& schedule, const AdamConfig& adam) {
  if (params.size() != grads.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size())
    throw DimensionError("adam_step: parameter, gradient and moment shapes differ");
  const double lr = schedule.at(state.step);
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(adam.beta1, t);
  const double c2 = 1.0 - std::pow(adam.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grads[k];
    double& m = state.first_moment[k];
    double& v = state.second_moment[k];
    m = adam.beta1 * m + (1.0 - adam.beta1) * g;
    v = adam.beta2 * v + (1.0 - adam.beta2) * g * g;
    params[k] -= lr * (m / c1) / (std::sqrt(v / c2) + adam.epsilon);
  }
}

void TrainingConfig::validate() const {
  network.validate();
  if (!(margin > 0.0)) throw ConfigError("training margin must be positive");
  if (selection_batch < 2) throw ConfigError("selection batch must hold at least 2 pairs");
  if (minibatch == 0 || total_steps == 0) throw ConfigError("training counts must be positive");
  if (minibatch > 2 * selection_batch)
    throw ConfigError("minibatch size exceeds the 2N triplets a selection batch can yield");
  if (!(lr_initial > 0.0) || !(lr_final > 0.0)) throw ConfigError("learning rates must be positive");
}

}  // namespace fairmine
