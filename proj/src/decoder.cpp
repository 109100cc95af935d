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

#include "msunique/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "msunique/error.hpp"
#include "msunique/lbfgs.hpp"

namespace msunique {

namespace {

constexpr Eigen::Index kChunkColumns = 2048;
constexpr double kRhoHatFloor = 1e-10;

void require_rows(const DecoderModel& m, Eigen::Index rows) {
  if (rows != m.input_dim()) {
    throw DataError("dimension mismatch: model expects " +
                    std::to_string(m.input_dim()) + " rows, got " +
                    std::to_string(rows));
  }
}

}  // namespace

DecoderModel init_model(Eigen::Index input_dim, Eigen::Index hidden,
                        std::int64_t seed) {
  if (input_dim < 1 || hidden < 1) {
    throw DataError("decoder dimensions must be positive");
  }
  Rng rng(static_cast<std::uint64_t>(seed));
  const double r = std::sqrt(6.0 / double(input_dim + hidden + 1));
  DecoderModel m;
  m.w1.resize(input_dim, hidden);
  m.w2.resize(hidden, input_dim);
  for (Eigen::Index i = 0; i < m.w1.size(); ++i) m.w1.data()[i] = rng.uniform(-r, r);
  for (Eigen::Index i = 0; i < m.w2.size(); ++i) m.w2.data()[i] = rng.uniform(-r, r);
  m.b1 = Eigen::VectorXd::Zero(hidden);
  m.b2 = Eigen::VectorXd::Zero(input_dim);
  return m;
}

void validate(const DecoderModel& m) {
  const auto d = m.input_dim(), h = m.hidden();
  if (d < 1 || h < 1 || m.b1.size() != h || m.w2.rows() != h ||
      m.w2.cols() != d || m.b2.size() != d) {
    throw DataError("inconsistent decoder dimensions");
  }
  if (!m.w1.allFinite() || !m.b1.allFinite() || !m.w2.allFinite() ||
      !m.b2.allFinite()) {
    throw DataError("non-finite decoder parameters");
  }
}

Eigen::MatrixXd forward_responses(const DecoderModel& m,
                                  const PatchMatrix& patches) {
  require_rows(m, patches.rows());
  Eigen::MatrixXd z = m.w1.transpose() * patches;
  z.colwise() += m.b1;
  return sigmoid(z.array()).matrix();
}

Eigen::MatrixXd reconstruct(const DecoderModel& m,
                            const Eigen::MatrixXd& responses) {
  if (responses.rows() != m.hidden()) {
    throw DataError("dimension mismatch: responses have " +
                    std::to_string(responses.rows()) + " rows, model has " +
                    std::to_string(m.hidden()) + " hidden units");
  }
  Eigen::MatrixXd out = m.w2.transpose() * responses;
  out.colwise() += m.b2;
  return out;
}

DecoderGradient objective_and_gradient(const DecoderModel& m,
                                       const PatchMatrix& patches,
                                       const TrainingConfig& cfg) {
  require_rows(m, patches.rows());
  const Eigen::Index n = patches.cols();
  if (n < 1) throw DataError("objective needs at least one patch");
  const Eigen::Index d = m.input_dim(), h = m.hidden();
  const double scale = cfg.loss_scale == LossScale::kMean ? 1.0 / double(n) : 1.0;

  // The sparsity term's hidden delta is a per-unit constant k_j times
  // sigma'(z), so its W1/b1 contribution is P sigma'^T diag(k), accumulated
  // alongside the reconstruction delta and applied once rho_hat is known.
  double recon = 0.0;
  Eigen::VectorXd activation_sum = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd slope_sum = Eigen::VectorXd::Zero(h);
  Eigen::MatrixXd g1_recon = Eigen::MatrixXd::Zero(d, h);
  Eigen::MatrixXd g1_slope = Eigen::MatrixXd::Zero(d, h);
  DecoderGradient out;
  out.b1 = Eigen::VectorXd::Zero(h);
  out.w2 = Eigen::MatrixXd::Zero(h, d);
  out.b2 = Eigen::VectorXd::Zero(d);

  for (Eigen::Index start = 0; start < n; start += kChunkColumns) {
    const Eigen::Index len = std::min(kChunkColumns, n - start);
    const auto x = patches.middleCols(start, len);
    Eigen::MatrixXd s = m.w1.transpose() * x;
    s.colwise() += m.b1;
    s = sigmoid(s.array()).matrix();

    Eigen::MatrixXd err = m.w2.transpose() * s;
    err.colwise() += m.b2;
    err -= x;
    recon += err.squaredNorm();
    err *= 2.0 * scale;

    activation_sum += s.rowwise().sum();
    out.w2.noalias() += s * err.transpose();
    out.b2 += err.rowwise().sum();

    const Eigen::MatrixXd slope = (s.array() * (1.0 - s.array())).matrix();
    const Eigen::MatrixXd delta = ((m.w2 * err).array() * slope.array()).matrix();
    g1_recon.noalias() += x * delta.transpose();
    out.b1 += delta.rowwise().sum();
    g1_slope.noalias() += x * slope.transpose();
    slope_sum += slope.rowwise().sum();
  }

  const Eigen::ArrayXd rho_hat =
      (activation_sum.array() / double(n)).cwiseMax(kRhoHatFloor).cwiseMin(1.0 - kRhoHatFloor);
  const double rho = cfg.rho;
  const double kl = (rho * (rho / rho_hat).log() +
                     (1.0 - rho) * ((1.0 - rho) / (1.0 - rho_hat)).log())
                        .sum();
  const Eigen::VectorXd k =
      (cfg.beta / double(n) * (-rho / rho_hat + (1.0 - rho) / (1.0 - rho_hat)))
          .matrix();

  out.objective = scale * recon + cfg.beta * kl +
                  cfg.lambda * (m.w1.squaredNorm() + m.w2.squaredNorm());
  out.w1 = g1_recon + g1_slope * k.asDiagonal();
  out.w1 += 2.0 * cfg.lambda * m.w1;
  out.b1 += k.cwiseProduct(slope_sum);
  out.w2 += 2.0 * cfg.lambda * m.w2;
  return out;
}

Eigen::VectorXd pack(const DecoderModel& m) {
  const Eigen::Index d = m.input_dim(), h = m.hidden();
  Eigen::VectorXd theta(2 * d * h + h + d);
  theta << m.w1.reshaped(), m.b1, m.w2.reshaped(), m.b2;
  return theta;
}

DecoderModel unpack(const Eigen::VectorXd& theta, Eigen::Index d,
                    Eigen::Index h) {
  if (theta.size() != 2 * d * h + h + d) {
    throw DataError("parameter vector has wrong length");
  }
  DecoderModel m;
  Eigen::Index at = 0;
  m.w1 = theta.segment(at, d * h).reshaped(d, h);
  at += d * h;
  m.b1 = theta.segment(at, h);
  at += h;
  m.w2 = theta.segment(at, d * h).reshaped(h, d);
  at += d * h;
  m.b2 = theta.segment(at, d);
  return m;
}

DecoderModel train_decoder(const PatchMatrix& patches, Eigen::Index hidden,
                           const TrainingConfig& cfg,
                           std::vector<double>* objective_trace) {
  if (patches.cols() < 1 || patches.rows() < 1) {
    throw DataError("training needs a nonempty patch matrix");
  }
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0) || !(cfg.beta >= 0.0) ||
      !(cfg.lambda >= 0.0) || cfg.epochs < 0) {
    throw DataError("invalid training configuration");
  }
  const Eigen::Index d = patches.rows();
  DecoderModel initial = init_model(d, hidden, cfg.seed);

  auto fg = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    const DecoderModel m = unpack(theta, d, hidden);
    const DecoderGradient g = objective_and_gradient(m, patches, cfg);
    grad.resize(theta.size());
    grad << g.w1.reshaped(), g.b1, g.w2.reshaped(), g.b2;
    return g.objective;
  };

  LbfgsOptions opt;
  opt.max_iterations = cfg.epochs;
  LbfgsResult r = minimize_lbfgs(fg, pack(initial), opt);
  if (r.status == LbfgsStatus::kNonFiniteStart || !std::isfinite(r.f)) {
    throw DataError("training diverged");
  }
  if (objective_trace) *objective_trace = r.trace;
  if (cfg.epochs == 0) return initial;
  return unpack(r.x, d, hidden);
}

}  // namespace msunique
