// Copyright 2026 The diarkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "diarkit/dae.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include "diarkit/io_util.h"

namespace diarkit::dae {
namespace {

constexpr std::uint32_t kModelVersion = 1;

void activate(Eigen::Ref<RowMatrix> z, Activation a) {
  switch (a) {
    case Activation::kTanh:
      z = z.array().tanh();
      break;
    case Activation::kSigmoid:
      z = (1.0 + (-z.array()).exp()).inverse();
      break;
    case Activation::kLinear:
      break;
  }
}

// Multiplies `delta` in place by the activation derivative written in terms
// of the activation output `a`.
void scale_by_derivative(RowMatrix& delta, const RowMatrix& a, Activation act) {
  switch (act) {
    case Activation::kTanh:
      delta.array() *= 1.0 - a.array().square();
      break;
    case Activation::kSigmoid:
      delta.array() *= a.array() * (1.0 - a.array());
      break;
    case Activation::kLinear:
      break;
  }
}

RowMatrix forward_layer(const Layer& l, const RowMatrix& x) {
  RowMatrix z = x * l.weights.transpose();
  z.rowwise() += l.bias.transpose();
  activate(z, l.activation);
  return z;
}

Activation encoder_activation(std::size_t index) {
  return index == 0 ? Activation::kTanh : Activation::kSigmoid;
}

Activation decoder_activation(std::size_t encoder_index) {
  // Reconstructs the input of encoder layer `encoder_index`.
  return encoder_index == 0 ? Activation::kLinear : encoder_activation(encoder_index - 1);
}

RowMatrix glorot(Eigen::Index out, Eigen::Index in, bool sigmoid, std::mt19937_64& rng) {
  double r = std::sqrt(6.0 / static_cast<double>(in + out));
  if (sigmoid) r *= 4.0;
  std::uniform_real_distribution<double> u(-r, r);
  RowMatrix w(out, in);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
  return w;
}

// One tied-weight denoising autoencoder: encoder (W, b), decoder (W^T, c).
struct TiedDae {
  Layer enc;
  Layer dec;

  Network as_network() const { return Network{{enc, dec}}; }
};

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& buf, double v) {
  const auto u = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  Reader(std::string buf, std::string name) : buf_(std::move(buf)), name_(std::move(name)) {}
  std::uint64_t bytes(int n) {
    if (pos_ + n > buf_.size()) throw Error("'" + name_ + "': truncated model file");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
  double f64() { return std::bit_cast<double>(bytes(8)); }
  bool done() const { return pos_ == buf_.size(); }

 private:
  std::string buf_;
  std::string name_;
  std::size_t pos_ = 4;
};

}  // namespace

std::vector<int> Network::layer_dims() const {
  std::vector<int> dims;
  if (layers.empty()) return dims;
  dims.push_back(static_cast<int>(layers.front().in_dim()));
  for (const auto& l : layers) dims.push_back(static_cast<int>(l.out_dim()));
  return dims;
}

void Network::validate() const {
  if (layers.empty() || layers.size() % 2 != 0) {
    throw Error("autoencoder needs an even, non-zero number of layers");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.bias.size() != l.out_dim()) throw Error("bias size mismatch in layer " + std::to_string(i));
    if (i > 0 && l.in_dim() != layers[i - 1].out_dim()) {
      throw Error("layer " + std::to_string(i) + " input does not match previous output");
    }
    if (!l.weights.allFinite() || !l.bias.allFinite()) {
      throw Error("non-finite parameters in layer " + std::to_string(i));
    }
  }
  const auto dims = layer_dims();
  for (std::size_t i = 1; i <= encoder_depth(); ++i) {
    if (dims[i] >= dims[i - 1]) throw Error("encoder dims must strictly decrease");
  }
}

void TrainConfig::validate() const {
  if (corruption_level < 0.0 || corruption_level > 1.0) {
    throw ValidationError("corruption level must lie in [0, 1]");
  }
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw ValidationError("momentum must lie in [0, 1)");
  if (epochs < 1 || batch_size < 1) throw ValidationError("epochs and batch size must be >= 1");
  if (hidden_dims.empty()) throw ValidationError("need at least one hidden layer");
}

void corrupt(Eigen::Ref<RowMatrix> x, CorruptionKind kind, double level, std::mt19937_64& rng) {
  if (level == 0.0) return;
  if (kind == CorruptionKind::kAdditiveGaussian) {
    std::normal_distribution<double> n(0.0, level);
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) += n(rng);
  } else {
    std::bernoulli_distribution drop(level);
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (Eigen::Index c = 0; c < x.cols(); ++c)
        if (drop(rng)) x(r, c) = 0.0;
  }
}

Eigen::VectorXd corrupted(const Eigen::VectorXd& x, CorruptionKind kind, double level,
                          std::mt19937_64& rng) {
  RowMatrix m = x.transpose();
  corrupt(m, kind, level, rng);
  return m.row(0).transpose();
}

Network make_network(int input_dim, const std::vector<int>& hidden_dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> dims = {input_dim};
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  for (std::size_t i = 1; i < dims.size(); ++i) {
    if (dims[i] < 1 || dims[i] >= dims[i - 1]) {
      throw ValidationError("encoder dims must strictly decrease to the bottleneck");
    }
  }
  const std::size_t depth = hidden_dims.size();
  Network net;
  net.layers.resize(2 * depth);
  for (std::size_t i = 0; i < depth; ++i) {
    auto& enc = net.layers[i];
    enc.activation = encoder_activation(i);
    enc.weights = glorot(dims[i + 1], dims[i], enc.activation == Activation::kSigmoid, rng);
    enc.bias = Eigen::VectorXd::Zero(dims[i + 1]);
    auto& dec = net.layers[2 * depth - 1 - i];
    dec.activation = decoder_activation(i);
    dec.weights = enc.weights.transpose();
    dec.bias = Eigen::VectorXd::Zero(dims[i]);
  }
  net.validate();
  return net;
}

double reconstruction_loss(const Network& net, const RowMatrix& input, const RowMatrix& target,
                           Gradients* grad) {
  const std::size_t n_layers = net.layers.size();
  std::vector<RowMatrix> acts;
  acts.reserve(n_layers + 1);
  acts.push_back(input);
  for (const auto& l : net.layers) acts.push_back(forward_layer(l, acts.back()));
  const double rows = static_cast<double>(input.rows());
  RowMatrix delta = acts.back() - target;
  const double loss = 0.5 * delta.squaredNorm() / rows;
  if (grad == nullptr) return loss;

  grad->weights.assign(n_layers, {});
  grad->biases.assign(n_layers, {});
  delta /= rows;
  for (std::size_t k = n_layers; k-- > 0;) {
    const auto& l = net.layers[k];
    scale_by_derivative(delta, acts[k + 1], l.activation);
    grad->weights[k].noalias() = delta.transpose() * acts[k];
    grad->biases[k] = delta.colwise().sum().transpose();
    if (k > 0) {
      RowMatrix prev = delta * l.weights;
      delta.swap(prev);
    }
  }
  return loss;
}

double reconstruction_mse(const Network& net, const RowMatrix& x) {
  constexpr Eigen::Index kBlock = 4096;
  double sse = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); r += kBlock) {
    const Eigen::Index n = std::min(kBlock, x.rows() - r);
    RowMatrix a = x.middleRows(r, n);
    for (const auto& l : net.layers) a = forward_layer(l, a);
    sse += (a - x.middleRows(r, n)).squaredNorm();
  }
  return sse / static_cast<double>(x.size());
}

Network pretrain_stack(const FeatureMatrix& features, const TrainConfig& cfg, std::uint64_t seed,
                       TrainReport* report) {
  cfg.validate();
  const Eigen::Index frames = features.frames();
  if (frames < cfg.batch_size) {
    throw ValidationError("DAE training needs at least batch_size (" + std::to_string(cfg.batch_size) +
                ") frames, got " + std::to_string(frames));
  }
  Network net = make_network(static_cast<int>(features.dim()), cfg.hidden_dims, seed);
  if (report) {
    report->epoch_loss.clear();
    report->initial_mse = reconstruction_mse(net, features.data);
  }
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
  const std::size_t depth = net.encoder_depth();

  RowMatrix layer_input = features.data;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(frames));
  for (std::size_t i = 0; i < depth; ++i) {
    TiedDae dae{net.layers[i], net.layers[2 * depth - 1 - i]};
    RowMatrix vel_w = RowMatrix::Zero(dae.enc.out_dim(), dae.enc.in_dim());
    Eigen::VectorXd vel_b = Eigen::VectorXd::Zero(dae.enc.out_dim());
    Eigen::VectorXd vel_c = Eigen::VectorXd::Zero(dae.dec.out_dim());
    std::vector<double> losses;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::shuffle(order.begin(), order.end(), rng);
      double loss_sum = 0.0;
      int batches = 0;
      for (Eigen::Index start = 0; start + cfg.batch_size <= frames; start += cfg.batch_size) {
        RowMatrix clean(cfg.batch_size, layer_input.cols());
        for (int r = 0; r < cfg.batch_size; ++r) clean.row(r) = layer_input.row(order[start + r]);
        RowMatrix noisy = clean;
        corrupt(noisy, cfg.corruption_kind, cfg.corruption_level, rng);

        Gradients g;
        const double loss = reconstruction_loss(dae.as_network(), noisy, clean, &g);
        if (!std::isfinite(loss)) {
          throw Error("DAE layer " + std::to_string(i + 1) + " diverged at epoch " +
                      std::to_string(epoch + 1) + " (non-finite loss; previous epoch loss " +
                      (losses.empty() ? std::string("n/a") : format_general(losses.back(), 6)) +
                      ")");
        }
        loss_sum += loss;
        ++batches;
        // tied weights: gradient is the encoder part plus the transposed decoder part
        vel_w = cfg.momentum * vel_w - cfg.learning_rate * (g.weights[0] + g.weights[1].transpose());
        vel_b = cfg.momentum * vel_b - cfg.learning_rate * g.biases[0];
        vel_c = cfg.momentum * vel_c - cfg.learning_rate * g.biases[1];
        dae.enc.weights += vel_w;
        dae.enc.bias += vel_b;
        dae.dec.bias += vel_c;
        dae.dec.weights = dae.enc.weights.transpose();
      }
      const double mean_loss = loss_sum / batches;
      if (!std::isfinite(mean_loss)) {
        throw Error("DAE layer " + std::to_string(i + 1) + " diverged at epoch " +
                    std::to_string(epoch + 1));
      }
      losses.push_back(mean_loss);
    }
    net.layers[i] = dae.enc;
    net.layers[2 * depth - 1 - i] = dae.dec;
    if (report) report->epoch_loss.push_back(std::move(losses));
    if (i + 1 < depth) layer_input = forward_layer(dae.enc, layer_input);
  }
  net.validate();
  if (report) report->final_mse = reconstruction_mse(net, features.data);
  return net;
}

FeatureMatrix bottleneck(const Network& net, const FeatureMatrix& f) {
  if (net.layers.empty() || f.dim() != net.layers.front().in_dim()) {
    throw Error("bottleneck input has " + std::to_string(f.dim()) + " dims, network expects " +
                std::to_string(net.layers.empty() ? 0 : net.layers.front().in_dim()));
  }
  constexpr Eigen::Index kBlock = 4096;
  const std::size_t depth = net.encoder_depth();
  FeatureMatrix out;
  out.hop_sec = f.hop_sec;
  out.window_sec = f.window_sec;
  out.speech_mask = f.speech_mask;
  out.data.resize(f.frames(), net.layers[depth - 1].out_dim());
  for (Eigen::Index r = 0; r < f.frames(); r += kBlock) {
    const Eigen::Index n = std::min(kBlock, f.frames() - r);
    RowMatrix a = f.data.middleRows(r, n);
    for (std::size_t i = 0; i < depth; ++i) a = forward_layer(net.layers[i], a);
    out.data.middleRows(r, n) = a;
  }
  return out;
}

void save_network(const std::filesystem::path& path, const Network& net) {
  net.validate();
  std::string buf = "SDAE";
  put_u32(buf, kModelVersion);
  const auto dims = net.layer_dims();
  put_u32(buf, static_cast<std::uint32_t>(dims.size()));
  for (int d : dims) put_u32(buf, static_cast<std::uint32_t>(d));
  for (const auto& l : net.layers) {
    for (Eigen::Index i = 0; i < l.weights.size(); ++i) put_f64(buf, l.weights.data()[i]);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) put_f64(buf, l.bias(i));
  }
  write_file_atomic(path, buf);
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path.string() + "'");
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 12 || buf.compare(0, 4, "SDAE") != 0) {
    throw Error("'" + path.string() + "' is not an SDAE model");
  }
  Reader rd(std::move(buf), path.string());
  if (const auto v = rd.u32(); v != kModelVersion) {
    throw Error("'" + path.string() + "': unsupported model version " + std::to_string(v));
  }
  const std::uint32_t n_dims = rd.u32();
  if (n_dims < 3 || n_dims % 2 == 0 || n_dims > 64) {
    throw Error("'" + path.string() + "': invalid layer count");
  }
  std::vector<int> dims(n_dims);
  for (auto& d : dims) d = static_cast<int>(rd.u32());
  Network net;
  const std::size_t depth = (n_dims - 1) / 2;
  for (std::size_t k = 0; k + 1 < n_dims; ++k) {
    Layer l;
    l.activation = k < depth ? encoder_activation(k) : decoder_activation(2 * depth - 1 - k);
    l.weights.resize(dims[k + 1], dims[k]);
    for (Eigen::Index i = 0; i < l.weights.size(); ++i) l.weights.data()[i] = rd.f64();
    l.bias.resize(dims[k + 1]);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = rd.f64();
    net.layers.push_back(std::move(l));
  }
  if (!rd.done()) throw Error("'" + path.string() + "': trailing bytes in model file");
  net.validate();
  return net;
}

}  // namespace diarkit::dae
