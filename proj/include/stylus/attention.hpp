#pragma once

#include <Eigen/Core>
#include <set>

#include "stylus/codec.hpp"

namespace stylus {

// Knobs for attention-space style control. alpha scales stylization strength,
// gamma mixes content queries into the output branch, beta interpolates two
// style references.
struct StyleParams {
  double alpha = 0.9;
  double gamma = 0.75;
  double beta = -1.0;  // < 0 -> single style
  std::set<int> injection_layers;
  bool adain_enabled = true;
  bool cfg_enabled = true;   // false -> plain key/value replacement
  bool inject_key = true;    // ablation switches: keep the output branch's own
  bool inject_value = true;  // key or value when disabled
  int inject_t_lo = 1;       // injection active for timesteps in [lo, hi]; 0 hi -> T
  int inject_t_hi = 0;

  bool multi_style() const { return beta >= 0.0; }
};

void validate(const StyleParams& p);

// Scaled dot-product attention for one head: softmax(Q K^T / sqrt(dim)) V,
// rows stabilized by max subtraction.
Eigen::MatrixXd attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k, const Eigen::MatrixXd& v);

// Convex query mix: gamma * Q_content + (1 - gamma) * Q_output. Endpoints are
// returned verbatim so gamma 0/1 are exact.
Eigen::MatrixXd preserve_query(const Eigen::MatrixXd& q_content, const Eigen::MatrixXd& q_output,
                               double gamma);

// Guidance-style blend of two attention branches sharing one query:
// out = phi_content + alpha * (phi_style - phi_content). Endpoints bitwise.
Eigen::MatrixXd guided_blend(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k_c,
                             const Eigen::MatrixXd& v_c, const Eigen::MatrixXd& k_s,
                             const Eigen::MatrixXd& v_s, double alpha);

// Two-style interpolation in attention-output space; each style is first
// blended against the shared content branch with the same alpha.
Eigen::MatrixXd multi_style_blend(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k_a,
                                  const Eigen::MatrixXd& v_a, const Eigen::MatrixXd& k_b,
                                  const Eigen::MatrixXd& v_b, double beta, double alpha,
                                  const Eigen::MatrixXd& k_c, const Eigen::MatrixXd& v_c);

// Multi-head wrappers: tokens x dim matrices with heads packed along columns.
Eigen::MatrixXd multihead_attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                    const Eigen::MatrixXd& v, int heads);

// Re-centers z_content's per-channel statistics (mean/std over spatial
// positions) to match z_style's. Stds are floored at 1e-5.
LatentState adain_init(const LatentState& z_content, const LatentState& z_style);

}  // namespace stylus
