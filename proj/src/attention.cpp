#include "stylus/attention.hpp"

#include <cmath>
#include <stdexcept>

namespace stylus {

void validate(const StyleParams& p) {
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) throw std::invalid_argument("style params: alpha must be in [0,1]");
  if (!(p.gamma >= 0.0 && p.gamma <= 1.0)) throw std::invalid_argument("style params: gamma must be in [0,1]");
  if (p.multi_style() && !(p.beta >= 0.0 && p.beta <= 1.0))
    throw std::invalid_argument("style params: beta must be in [0,1]");
  if (p.inject_t_lo < 1) throw std::invalid_argument("style params: inject_t_lo must be >= 1");
  if (p.inject_t_hi != 0 && p.inject_t_hi < p.inject_t_lo)
    throw std::invalid_argument("style params: inject_t_hi must be 0 or >= inject_t_lo");
}

Eigen::MatrixXd attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k, const Eigen::MatrixXd& v) {
  if (q.cols() != k.cols()) throw std::invalid_argument("attention: Q/K dim mismatch");
  if (k.rows() != v.rows()) throw std::invalid_argument("attention: K/V token count mismatch");
  const double scale = 1.0 / std::sqrt(double(q.cols()));
  Eigen::MatrixXd logits = (q * k.transpose()) * scale;  // [q_tokens x k_tokens]
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    Eigen::ArrayXd e = (logits.row(r).array() - m).exp();
    logits.row(r) = (e / e.sum()).matrix();
  }
  return logits * v;
}

Eigen::MatrixXd preserve_query(const Eigen::MatrixXd& q_content, const Eigen::MatrixXd& q_output,
                               double gamma) {
  if (q_content.rows() != q_output.rows() || q_content.cols() != q_output.cols())
    throw std::invalid_argument("preserve_query: shape mismatch");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("preserve_query: gamma must be in [0,1]");
  if (gamma == 1.0) return q_content;
  if (gamma == 0.0) return q_output;
  return gamma * q_content + (1.0 - gamma) * q_output;
}

Eigen::MatrixXd guided_blend(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k_c,
                             const Eigen::MatrixXd& v_c, const Eigen::MatrixXd& k_s,
                             const Eigen::MatrixXd& v_s, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("guided_blend: alpha must be in [0,1]");
  if (alpha == 0.0) return attention(q, k_c, v_c);
  if (alpha == 1.0) return attention(q, k_s, v_s);
  const Eigen::MatrixXd phi_content = attention(q, k_c, v_c);
  const Eigen::MatrixXd phi_style = attention(q, k_s, v_s);
  return phi_content + alpha * (phi_style - phi_content);
}

Eigen::MatrixXd multi_style_blend(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k_a,
                                  const Eigen::MatrixXd& v_a, const Eigen::MatrixXd& k_b,
                                  const Eigen::MatrixXd& v_b, double beta, double alpha,
                                  const Eigen::MatrixXd& k_c, const Eigen::MatrixXd& v_c) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("multi_style_blend: beta must be in [0,1]");
  if (beta == 0.0) return guided_blend(q, k_c, v_c, k_a, v_a, alpha);
  if (beta == 1.0) return guided_blend(q, k_c, v_c, k_b, v_b, alpha);
  const Eigen::MatrixXd phi_a = guided_blend(q, k_c, v_c, k_a, v_a, alpha);
  const Eigen::MatrixXd phi_b = guided_blend(q, k_c, v_c, k_b, v_b, alpha);
  return (1.0 - beta) * phi_a + beta * phi_b;
}

Eigen::MatrixXd multihead_attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                    const Eigen::MatrixXd& v, int heads) {
  if (heads < 1 || q.cols() % heads != 0) throw std::invalid_argument("attention: dim not divisible by heads");
  const Eigen::Index hd = q.cols() / heads;
  Eigen::MatrixXd out(q.rows(), q.cols());
  for (int h = 0; h < heads; ++h)
    out.middleCols(h * hd, hd) = attention(q.middleCols(h * hd, hd), k.middleCols(h * hd, hd),
                                           v.middleCols(h * hd, hd));
  return out;
}

LatentState adain_init(const LatentState& z_content, const LatentState& z_style) {
  if (!z_content.tensor.same_shape(z_style.tensor))
    throw std::invalid_argument("adain_init: latent shape mismatch");
  const double sigma_floor = 1e-5;
  const size_t plane = size_t(z_content.tensor.height) * z_content.tensor.width;

  LatentState out = z_content;
  out.branch = LatentBranch::output;
  for (int c = 0; c < z_content.tensor.channels; ++c) {
    const double* pc = z_content.tensor.data.data() + size_t(c) * plane;
    const double* ps = z_style.tensor.data.data() + size_t(c) * plane;
    double mu_c = 0.0, mu_s = 0.0;
    for (size_t i = 0; i < plane; ++i) {
      mu_c += pc[i];
      mu_s += ps[i];
    }
    mu_c /= double(plane);
    mu_s /= double(plane);
    double var_c = 0.0, var_s = 0.0;
    for (size_t i = 0; i < plane; ++i) {
      var_c += (pc[i] - mu_c) * (pc[i] - mu_c);
      var_s += (ps[i] - mu_s) * (ps[i] - mu_s);
    }
    const double sd_c = std::max(std::sqrt(var_c / double(plane)), sigma_floor);
    const double sd_s = std::max(std::sqrt(var_s / double(plane)), sigma_floor);
    double* po = out.tensor.data.data() + size_t(c) * plane;
    for (size_t i = 0; i < plane; ++i) po[i] = sd_s * (pc[i] - mu_c) / sd_c + mu_s;
  }
  return out;
}

}  // namespace stylus
