#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "stylus/mel.hpp"
#include "stylus/stft.hpp"
#include "stylus/wave.hpp"

namespace stylus {

// Pairs stylized mel magnitudes with the content clip's original STFT phase
// and synthesizes audio. Frame-count differences up to pad_tolerance are
// absorbed by edge replication (or cropping) of the mel; beyond that, error.
Waveform phase_preserving_reconstruct(const MelSpectrogram& stylized_mel,
                                      const ComplexSpectrogram& content_phase, const MelFilterbank& fb,
                                      int pad_tolerance = 2);

enum class GriffinLimInit { zero_phase, random_phase };

struct GriffinLimResult {
  Waveform wave;
  std::vector<double> residuals;  // spectral convergence ||(|STFT(x_k)| - mag)|| / ||mag|| per iteration
};

// Classic iterative phase retrieval: alternate STFT-consistency and
// magnitude-replacement projections. No momentum, so the residual sequence is
// non-increasing with the deterministic zero-phase init.
GriffinLimResult griffin_lim(const Eigen::MatrixXd& mag, const StftConfig& cfg, int n_iters,
                             int sample_rate, size_t target_length = 0,
                             GriffinLimInit init = GriffinLimInit::zero_phase, uint64_t seed = 0);

}  // namespace stylus
