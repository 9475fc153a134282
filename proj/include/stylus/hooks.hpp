#pragma once

#include <Eigen/Core>
#include <map>
#include <set>

#include "stylus/attention.hpp"
#include "stylus/feature_cache.hpp"

namespace stylus {

enum class HookMode { off, capture, inject };

// Per-layer observation/replacement plan for the denoiser's self-attention
// blocks. One mode per layer, so capture and inject can never both be active
// on the same layer in one pass.
struct AttentionHookSet {
  struct Entry {
    HookMode mode = HookMode::off;
    LatentBranch branch = LatentBranch::content;  // capture target
  };
  std::map<int, Entry> layers;
  FeatureCache* capture_cache = nullptr;
  const FeatureCache* inject_cache = nullptr;
  StyleParams params;  // used by inject entries
  int schedule_T = 0;  // resolves inject_t_hi == 0

  HookMode mode(int layer_id) const;

  static AttentionHookSet capture(FeatureCache& cache, LatentBranch branch, const std::set<int>& layer_ids);
  static AttentionHookSet inject(const FeatureCache& cache, const StyleParams& params, int schedule_T);
};

// The single choke point the denoiser calls at every attention block: runs
// plain multi-head attention, records features, or substitutes the injected
// computation, depending on the layer's hook mode.
Eigen::MatrixXd apply_attention_hooks(const AttentionHookSet* hooks, int layer_id, int timestep,
                                      const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                      const Eigen::MatrixXd& v, int heads);

}  // namespace stylus
