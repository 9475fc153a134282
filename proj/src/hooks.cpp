#include "stylus/hooks.hpp"

#include <stdexcept>

namespace stylus {

HookMode AttentionHookSet::mode(int layer_id) const {
  auto it = layers.find(layer_id);
  return it == layers.end() ? HookMode::off : it->second.mode;
}

AttentionHookSet AttentionHookSet::capture(FeatureCache& cache, LatentBranch branch,
                                           const std::set<int>& layer_ids) {
  AttentionHookSet h;
  h.capture_cache = &cache;
  for (int id : layer_ids) h.layers[id] = {HookMode::capture, branch};
  return h;
}

AttentionHookSet AttentionHookSet::inject(const FeatureCache& cache, const StyleParams& params,
                                          int schedule_T) {
  validate(params);
  AttentionHookSet h;
  h.inject_cache = &cache;
  h.params = params;
  h.schedule_T = schedule_T;
  for (int id : params.injection_layers) h.layers[id] = {HookMode::inject, LatentBranch::output};
  return h;
}

static Eigen::MatrixXd per_head_inject(const AttentionFeatures& cell, const StyleParams& p,
                                       const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                       const Eigen::MatrixXd& v, int heads) {
  const Eigen::MatrixXd q_bar = preserve_query(cell.q_content, q, p.gamma);
  const Eigen::MatrixXd& k_s = p.inject_key ? cell.k_style : k;
  const Eigen::MatrixXd& v_s = p.inject_value ? cell.v_style : v;

  if (q.cols() % heads != 0) throw std::invalid_argument("inject: dim not divisible by heads");
  const Eigen::Index hd = q.cols() / heads;
  Eigen::MatrixXd out(q.rows(), q.cols());
  for (int h = 0; h < heads; ++h) {
    const auto qh = q_bar.middleCols(h * hd, hd);
    const auto kh = k.middleCols(h * hd, hd);
    const auto vh = v.middleCols(h * hd, hd);
    const auto ksh = k_s.middleCols(h * hd, hd);
    const auto vsh = v_s.middleCols(h * hd, hd);
    if (p.multi_style()) {
      const Eigen::MatrixXd& k_b = p.inject_key ? cell.k_style_b : k;
      const Eigen::MatrixXd& v_b = p.inject_value ? cell.v_style_b : v;
      out.middleCols(h * hd, hd) = multi_style_blend(qh, ksh, vsh, k_b.middleCols(h * hd, hd),
                                                     v_b.middleCols(h * hd, hd), p.beta, p.alpha, kh, vh);
    } else if (p.cfg_enabled) {
      out.middleCols(h * hd, hd) = guided_blend(qh, kh, vh, ksh, vsh, p.alpha);
    } else {
      // plain key/value replacement
      out.middleCols(h * hd, hd) = attention(qh, ksh, vsh);
    }
  }
  return out;
}

Eigen::MatrixXd apply_attention_hooks(const AttentionHookSet* hooks, int layer_id, int timestep,
                                      const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                      const Eigen::MatrixXd& v, int heads) {
  if (hooks == nullptr) return multihead_attention(q, k, v, heads);

  switch (hooks->mode(layer_id)) {
    case HookMode::off:
      return multihead_attention(q, k, v, heads);

    case HookMode::capture: {
      if (!hooks->capture_cache) throw std::runtime_error("hooks: capture mode without a cache");
      const LatentBranch b = hooks->layers.at(layer_id).branch;
      if (b == LatentBranch::content)
        hooks->capture_cache->store_query(timestep, layer_id, q);
      else
        hooks->capture_cache->store_kv(timestep, layer_id, b, k, v);
      return multihead_attention(q, k, v, heads);  // observation only, never mutates
    }

    case HookMode::inject: {
      if (!hooks->inject_cache) throw std::runtime_error("hooks: inject mode without a cache");
      const int t_hi = hooks->params.inject_t_hi > 0 ? hooks->params.inject_t_hi : hooks->schedule_T;
      if (timestep < hooks->params.inject_t_lo || timestep > t_hi)
        return multihead_attention(q, k, v, heads);
      return per_head_inject(hooks->inject_cache->at(timestep, layer_id), hooks->params, q, k, v, heads);
    }
  }
  return multihead_attention(q, k, v, heads);
}

}  // namespace stylus
