#pragma once

#include <vector>

#include "stylus/codec.hpp"
#include "stylus/hooks.hpp"
#include "stylus/schedule.hpp"
#include "stylus/tensor.hpp"

namespace stylus {

class DenoiserInterface {
 public:
  virtual ~DenoiserInterface() = default;
  // Deterministic noise prediction for latent z at schedule level t (1..T).
  // Hooks fire at every self-attention block; nullptr means no hooks.
  virtual Tensor3 predict_noise(const Tensor3& z, int t, const AttentionHookSet* hooks) const = 0;
};

class ZeroDenoiser final : public DenoiserInterface {
 public:
  Tensor3 predict_noise(const Tensor3& z, int, const AttentionHookSet*) const override {
    return Tensor3(z.channels, z.height, z.width);
  }
};

// Deterministic DDIM (eta = 0).
//
// Levels run 0 (clean) .. T (noise). The denoiser is evaluated with the label
// of the noisier level on both passes: step t->t+1 of inversion and step
// t+1->t of sampling both use label t+1, so features captured during
// inversion line up t-for-t with the reverse pass.

// Forward ODE from a clean latent; returns the trajectory z_0..z_T.
std::vector<LatentState> ddim_invert(const LatentState& z0, const NoiseSchedule& sched,
                                     const DenoiserInterface& d, const AttentionHookSet* hooks = nullptr);

// Reverse pass from a noise-level latent down to t = 0.
LatentState ddim_sample(const LatentState& zT, const NoiseSchedule& sched, const DenoiserInterface& d,
                        const AttentionHookSet* hooks = nullptr);

}  // namespace stylus
