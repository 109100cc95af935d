// Copyright 2026 The MS-UNIQUE Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MSUNIQUE_DECODER_HPP_
#define MSUNIQUE_DECODER_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "msunique/patchpipe.hpp"

namespace msunique {

// Single hidden layer: s = sigmoid(W1^T x + b1), reconstruction W2^T s + b2.
struct DecoderModel {
  Eigen::MatrixXd w1;  // input_dim x hidden
  Eigen::VectorXd b1;  // hidden
  Eigen::MatrixXd w2;  // hidden x input_dim
  Eigen::VectorXd b2;  // input_dim

  Eigen::Index input_dim() const { return w1.rows(); }
  Eigen::Index hidden() const { return w1.cols(); }
};

// How the reconstruction term is normalized over the N patches.
enum class LossScale { kMean, kSum };

struct TrainingConfig {
  double rho = 0.035;
  double beta = 5.0;
  double lambda = 3e-3;
  int epochs = 400;
  std::int64_t seed = 0;
  LossScale loss_scale = LossScale::kMean;
};

// Logistic function evaluated without overflow for any finite input.
template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  const auto e = (-z.abs()).exp();
  return (z >= Scalar(0))
      .select(Scalar(1) / (Scalar(1) + e), e / (Scalar(1) + e));
}

// W1, W2 uniform on [-r, r] with r = sqrt(6 / (d + h + 1)); zero biases.
DecoderModel init_model(Eigen::Index input_dim, Eigen::Index hidden,
                        std::int64_t seed);

// Throws DataError unless shapes agree and every entry is finite.
void validate(const DecoderModel& m);

Eigen::MatrixXd forward_responses(const DecoderModel& m,
                                  const PatchMatrix& patches);

Eigen::MatrixXd reconstruct(const DecoderModel& m,
                            const Eigen::MatrixXd& responses);

struct DecoderGradient {
  double objective = 0.0;
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

// J = scale * sum ||W2^T s + b2 - x||^2 + beta * sum_j KL(rho || rho_hat_j)
//     + lambda * (||W1||^2 + ||W2||^2), with scale = 1/N for kMean.
// rho_hat is clamped to [1e-10, 1 - 1e-10].
DecoderGradient objective_and_gradient(const DecoderModel& m,
                                       const PatchMatrix& patches,
                                       const TrainingConfig& cfg);

// Flat parameter vector [vec(W1), b1, vec(W2), b2], column-major.
Eigen::VectorXd pack(const DecoderModel& m);
DecoderModel unpack(const Eigen::VectorXd& theta, Eigen::Index input_dim,
                    Eigen::Index hidden);

// Full-batch L-BFGS for cfg.epochs iterations from init_model(d, h, cfg.seed).
// When `objective_trace` is non-null it receives J at the start and after
// every iteration.
DecoderModel train_decoder(const PatchMatrix& patches, Eigen::Index hidden,
                           const TrainingConfig& cfg,
                           std::vector<double>* objective_trace = nullptr);

}  // namespace msunique

#endif  // MSUNIQUE_DECODER_HPP_
