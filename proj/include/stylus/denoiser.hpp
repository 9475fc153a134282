#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stylus/ddim.hpp"

namespace stylus {

// Compact UNet-style denoiser: conv stem, residual blocks with group norm and
// sinusoidal timestep conditioning, self-attention at configurable block ids,
// stride-2 downsampling with additive skips. Fully convolutional, so any
// spatial size >= 2^depth works. Inference only; there are no training paths.
//
// Residual blocks are numbered in forward order: encoder 0..depth-1, two mid
// blocks, then decoder depth+2..2*depth+1. attn_layer_ids picks which of them
// carry a self-attention block; the decoder half of that list is where style
// injection normally lands.
struct DenoiserConfig {
  int in_channels = 1;
  int base_channels = 32;
  int depth = 2;
  std::vector<int> attn_layer_ids = {2, 3, 4, 5};
  int heads = 2;
  int time_embed_dim = 32;
  uint64_t seed = 42;
};

void validate(const DenoiserConfig& cfg);
int denoiser_block_count(const DenoiserConfig& cfg);  // 2*depth + 2

class ToyDenoiser final : public DenoiserInterface {
 public:
  explicit ToyDenoiser(const DenoiserConfig& cfg);  // seeded weight init

  Tensor3 predict_noise(const Tensor3& z, int t, const AttentionHookSet* hooks) const override;

  const DenoiserConfig& config() const { return cfg_; }

  // Attention blocks in the decoder segment (mid blocks excluded).
  std::vector<int> decoder_attention_layers() const;
  int block_channels(int block_id) const;

  // Weight file: magic "SDNZ v1", one-line JSON config header, then named
  // f64 TNSR blobs with per-blob checksums, in a fixed order.
  void save_weights(const std::string& path) const;
  static ToyDenoiser load_weights(const std::string& path);

  uint64_t weights_checksum() const;

 private:
  ToyDenoiser() = default;
  void init_from_seed();

  DenoiserConfig cfg_;
  std::map<std::string, Eigen::MatrixXd> params_;

  const Eigen::MatrixXd& p(const std::string& name) const;
};

}  // namespace stylus
