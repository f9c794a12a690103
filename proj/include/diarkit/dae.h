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

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "diarkit/common.h"
#include "diarkit/features.h"

namespace diarkit::dae {

enum class Activation { kTanh, kSigmoid, kLinear };

struct Layer {
  RowMatrix weights;  // out x in
  Eigen::VectorXd bias;
  Activation activation = Activation::kLinear;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
};

// Symmetric autoencoder: layers[0..encoder_depth) encode, the rest decode.
// Encoder activations are tanh for the first layer and sigmoid afterwards;
// each decoder layer reproduces the activation range of the layer it
// reconstructs, and the output layer is linear.
struct Network {
  std::vector<Layer> layers;

  std::size_t encoder_depth() const { return layers.size() / 2; }
  std::vector<int> layer_dims() const;  // e.g. {1001, 91, 21, 91, 1001}
  void validate() const;
};

enum class CorruptionKind { kAdditiveGaussian, kMasking };

struct TrainConfig {
  std::vector<int> hidden_dims = {91, 21};
  double corruption_level = 0.2;
  CorruptionKind corruption_kind = CorruptionKind::kAdditiveGaussian;
  double learning_rate = 0.01;
  double momentum = 0.05;
  int epochs = 10;  // per layer
  int batch_size = 256;

  void validate() const;
};

struct TrainReport {
  std::vector<std::vector<double>> epoch_loss;  // [layer][epoch], corrupted-input loss
  double initial_mse = 0.0;  // full-stack clean reconstruction MSE before training
  double final_mse = 0.0;
};

// Per-element corruption: x + N(0, level^2) noise, or zeroing with
// probability `level`.
void corrupt(Eigen::Ref<RowMatrix> x, CorruptionKind kind, double level, std::mt19937_64& rng);
Eigen::VectorXd corrupted(const Eigen::VectorXd& x, CorruptionKind kind, double level,
                          std::mt19937_64& rng);

// Untrained network with Glorot-uniform weights (x4 for sigmoid layers) and
// zero biases; decoder weights start as encoder transposes.
Network make_network(int input_dim, const std::vector<int>& hidden_dims, std::uint64_t seed);

struct Gradients {
  std::vector<RowMatrix> weights;
  std::vector<Eigen::VectorXd> biases;
};

// Loss = mean over rows of 0.5 * ||net(input) - target||^2. When `grad` is
// non-null it receives the gradient with respect to every layer.
double reconstruction_loss(const Network& net, const RowMatrix& input, const RowMatrix& target,
                           Gradients* grad = nullptr);

// Mean squared error per element of the full network on clean input.
double reconstruction_mse(const Network& net, const RowMatrix& x);

// Greedy layer-wise denoising pretraining with tied weights.
Network pretrain_stack(const FeatureMatrix& features, const TrainConfig& cfg, std::uint64_t seed,
                       TrainReport* report = nullptr);

// Encoder-only forward pass; no corruption.
FeatureMatrix bottleneck(const Network& net, const FeatureMatrix& f);

void save_network(const std::filesystem::path& path, const Network& net);
Network load_network(const std::filesystem::path& path);

}  // namespace diarkit::dae
