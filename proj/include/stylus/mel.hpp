#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace stylus {

struct MelFilterbank {
  Eigen::MatrixXd weights;       // [n_mels x n_bins], triangular rows
  Eigen::MatrixXd pinv_weights;  // [n_bins x n_mels], Moore-Penrose pseudo-inverse
  double f_min = 0.0;
  double f_max = 0.0;
  int sample_rate = 0;
  int n_fft = 0;
  uint64_t id = 0;

  int n_mels() const { return int(weights.rows()); }
  int n_bins() const { return int(weights.cols()); }
};

// Slaney mel scale (linear below 1 kHz, log above), triangular filters with
// adjacent overlap, no area normalization.
double hz_to_mel(double hz);
double mel_to_hz(double mel);
MelFilterbank make_mel_filterbank(int n_mels, int n_fft, int sample_rate, double f_min = 0.0,
                                  double f_max = 0.0 /* 0 -> sr/2 */);

struct NormMeta {
  double floor_db = -80.0;
  double min_val = -80.0;  // dB value mapped to 0
  double max_val = 0.0;    // dB value mapped to 1
};

struct MelSpectrogram {
  Eigen::MatrixXd values;  // [n_mels x n_frames], in [0,1]
  NormMeta norm_meta;
  uint64_t filterbank_id = 0;

  int n_mels() const { return int(values.rows()); }
  int n_frames() const { return int(values.cols()); }
};

// Mel projection of a linear magnitude spectrogram, then log-amplitude dB with
// a floor clamp and per-clip min-max normalization to [0,1].
MelSpectrogram mel_project(const Eigen::MatrixXd& mag, const MelFilterbank& fb, double floor_db = -80.0);

// Inverse path: denormalize (invert min-max, invert dB; cells at the floor are
// treated as silence), apply the pseudo-inverse, clamp negatives to zero.
Eigen::MatrixXd mel_invert(const MelSpectrogram& m, const MelFilterbank& fb);

// dB-domain helpers shared by project/invert
Eigen::MatrixXd normalize_db(const Eigen::MatrixXd& db, const NormMeta& meta);
Eigen::MatrixXd denormalize_db(const Eigen::MatrixXd& values01, const NormMeta& meta);

}  // namespace stylus
