#include "stylus/reconstruct.hpp"

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

#include "stylus/rng.hpp"

namespace stylus {

Waveform phase_preserving_reconstruct(const MelSpectrogram& stylized_mel,
                                      const ComplexSpectrogram& content_phase, const MelFilterbank& fb,
                                      int pad_tolerance) {
  const int want = content_phase.n_frames();
  const int have = stylized_mel.n_frames();
  if (std::abs(want - have) > pad_tolerance) {
    std::ostringstream os;
    os << "phase_preserving_reconstruct: frame count mismatch (mel " << have << ", phase " << want
       << ", tolerance " << pad_tolerance << ")";
    throw std::invalid_argument(os.str());
  }

  MelSpectrogram mel = stylized_mel;
  if (have > want) {
    mel.values = stylized_mel.values.leftCols(want).eval();
  } else if (have < want) {
    mel.values.resize(stylized_mel.n_mels(), want);
    mel.values.leftCols(have) = stylized_mel.values;
    for (int c = have; c < want; ++c) mel.values.col(c) = stylized_mel.values.col(have - 1);  // edge replication
  }

  const Eigen::MatrixXd mag = mel_invert(mel, fb);
  if (mag.rows() != content_phase.frames.rows())
    throw std::invalid_argument("phase_preserving_reconstruct: bin count mismatch between filterbank and phase");
  return istft(with_magnitude(content_phase, mag));
}

GriffinLimResult griffin_lim(const Eigen::MatrixXd& mag, const StftConfig& cfg, int n_iters,
                             int sample_rate, size_t target_length, GriffinLimInit init, uint64_t seed) {
  validate(cfg);
  if (n_iters < 1) throw std::invalid_argument("griffin_lim: n_iters must be >= 1");
  if (mag.rows() != cfg.n_bins()) throw std::invalid_argument("griffin_lim: magnitude rows != n_fft/2+1");
  if ((mag.array() < 0.0).any()) throw std::invalid_argument("griffin_lim: negative magnitudes");

  const double mag_norm = mag.norm();
  ComplexSpectrogram cur;
  cur.config = cfg;
  cur.sample_rate = sample_rate;
  cur.origin_length = target_length > 0 ? target_length : size_t(std::max(0, int(mag.cols()) - 1)) * size_t(cfg.hop);
  cur.frames.resize(mag.rows(), mag.cols());

  if (init == GriffinLimInit::zero_phase) {
    cur.frames = mag.cast<std::complex<double>>();
  } else {
    Xoshiro256 rng(seed);
    for (Eigen::Index c = 0; c < mag.cols(); ++c)
      for (Eigen::Index r = 0; r < mag.rows(); ++r) {
        const double a = 2.0 * M_PI * rng.uniform();
        cur.frames(r, c) = std::polar(mag(r, c), a);
      }
  }

  GriffinLimResult out;
  out.residuals.reserve(size_t(n_iters));
  Waveform x;
  for (int k = 0; k < n_iters; ++k) {
    x = istft(cur);
    ComplexSpectrogram consistent = stft(x, cfg);
    // the synthesized signal can gain a frame at the tail; keep the target grid
    const Eigen::Index cols = std::min(consistent.frames.cols(), cur.frames.cols());
    double err = 0.0;
    for (Eigen::Index c = 0; c < mag.cols(); ++c)
      for (Eigen::Index r = 0; r < mag.rows(); ++r) {
        const double a = c < cols ? std::abs(consistent.frames(r, c)) : 0.0;
        const double d = a - mag(r, c);
        err += d * d;
      }
    out.residuals.push_back(mag_norm > 0.0 ? std::sqrt(err) / mag_norm : 0.0);
    // magnitude replacement, keep the estimated phase
    for (Eigen::Index c = 0; c < mag.cols(); ++c)
      for (Eigen::Index r = 0; r < mag.rows(); ++r) {
        const std::complex<double> z = c < cols ? consistent.frames(r, c) : std::complex<double>(0.0, 0.0);
        const double a = std::abs(z);
        cur.frames(r, c) = a > 0.0 ? z / a * mag(r, c) : std::complex<double>(mag(r, c), 0.0);
      }
    if (mag_norm == 0.0) break;  // all-zero magnitudes: silence, done in one pass
  }
  out.wave = istft(cur);
  return out;
}

}  // namespace stylus
