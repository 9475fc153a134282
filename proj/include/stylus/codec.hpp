#pragma once

#include <cstdint>
#include <string>

#include "stylus/mel.hpp"
#include "stylus/tensor.hpp"

namespace stylus {

enum class LatentBranch { content, style, style_b, output };
std::string to_string(LatentBranch b);

struct LatentState {
  Tensor3 tensor;  // [channels x height x width]
  int timestep = 0;
  LatentBranch branch = LatentBranch::content;
};

enum class CodecKind { identity, strided_orthogonal };

// Stand-in for a learned autoencoder: exactly invertible maps between the mel
// image and the latent tensor, so round-trip invariants are testable to
// machine precision. A real decoder can be slotted in behind the same calls.
struct CodecSpec {
  CodecKind kind = CodecKind::strided_orthogonal;
  int spatial_factor = 4;    // identity kind requires 1
  int latent_channels = 16;  // strided_orthogonal requires spatial_factor^2
  uint64_t seed = 7;         // orthogonal mixing matrix seed
};

void validate(const CodecSpec& spec);

// identity: mel [0,1] -> single-channel latent in [-1,1].
// strided_orthogonal: non-overlapping f x f patches -> f^2 channels, mixed by
// a fixed seeded orthogonal matrix (norm-preserving, exactly invertible).
LatentState encode(const MelSpectrogram& m, const CodecSpec& spec,
                   LatentBranch branch = LatentBranch::content);

// Exact inverse of encode, clamped to [0,1]. norm_meta/filterbank_id are not
// stored in the latent; callers re-attach them (the pipeline keeps content's).
MelSpectrogram decode(const LatentState& z, const CodecSpec& spec);

// The seeded orthogonal patch mixing matrix [f^2 x f^2]; exposed for tests.
Eigen::MatrixXd codec_orthogonal_matrix(const CodecSpec& spec);

}  // namespace stylus
