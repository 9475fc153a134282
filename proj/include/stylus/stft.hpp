#pragma once

#include <Eigen/Core>
#include <complex>
#include <vector>

#include "stylus/wave.hpp"

namespace stylus {

enum class WindowKind { hann_periodic };

struct StftConfig {
  int n_fft = 1024;
  int hop = 256;
  WindowKind window = WindowKind::hann_periodic;
  int win_length = 0;  // 0 -> n_fft

  int n_bins() const { return n_fft / 2 + 1; }
  int effective_win_length() const { return win_length > 0 ? win_length : n_fft; }
};

std::vector<double> make_window(const StftConfig& cfg);

// Invertibility check: the squared analysis window must overlap-add to a
// strictly positive envelope at the given hop (NOLA). Hop > n_fft or a
// vanishing envelope makes synthesis impossible.
bool cola_ok(const StftConfig& cfg);
void validate(const StftConfig& cfg);  // throws on non-invertible configuration

struct ComplexSpectrogram {
  Eigen::MatrixXcd frames;  // [n_bins x n_frames]
  StftConfig config;
  size_t origin_length = 0;  // sample count of the source waveform
  int sample_rate = 0;

  int n_bins() const { return int(frames.rows()); }
  int n_frames() const { return int(frames.cols()); }
};

// Centered STFT with reflect padding. Frame t is centered at sample t*hop.
ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg);

// Weighted overlap-add synthesis with window-square normalization; output is
// truncated to origin_length.
Waveform istft(const ComplexSpectrogram& s);

Eigen::MatrixXd magnitude(const ComplexSpectrogram& s);

// Magnitude/phase recombination: |mag| from one source, phase angles from
// another spectrogram of the same shape.
ComplexSpectrogram with_magnitude(const ComplexSpectrogram& phase_source, const Eigen::MatrixXd& mag);

}  // namespace stylus
