#include "stylus/stft.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <stdexcept>

namespace stylus {

std::vector<double> make_window(const StftConfig& cfg) {
  const int n = cfg.effective_win_length();
  std::vector<double> w(size_t(cfg.n_fft), 0.0);
  const int off = (cfg.n_fft - n) / 2;  // center a shorter window in the frame
  for (int i = 0; i < n; ++i) {
    // periodic Hann
    w[size_t(off + i)] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
  }
  return w;
}

bool cola_ok(const StftConfig& cfg) {
  if (cfg.n_fft <= 0 || cfg.hop <= 0 || cfg.hop > cfg.n_fft) return false;
  const auto w = make_window(cfg);
  // steady-state squared-window overlap-add envelope over one hop period:
  // position p accumulates w^2 at offsets p + k*hop
  std::vector<double> env(size_t(cfg.hop), 0.0);
  for (int p = 0; p < cfg.hop; ++p)
    for (int k = p; k < cfg.n_fft; k += cfg.hop) env[size_t(p)] += w[size_t(k)] * w[size_t(k)];
  for (double e : env)
    if (e < 1e-10) return false;
  return true;
}

void validate(const StftConfig& cfg) {
  if (cfg.n_fft <= 0 || (cfg.n_fft & 1)) throw std::invalid_argument("stft: n_fft must be positive and even");
  if (cfg.hop <= 0 || cfg.hop > cfg.n_fft) throw std::invalid_argument("stft: need 0 < hop <= n_fft");
  if (cfg.win_length > cfg.n_fft) throw std::invalid_argument("stft: win_length exceeds n_fft");
  if (!cola_ok(cfg)) throw std::invalid_argument("stft: non-invertible configuration (window/hop fails overlap-add)");
}

// reflect-pad sample lookup: index i into w padded by n_fft/2 on both sides
static double reflect_at(const std::vector<double>& x, long i) {
  const long n = long(x.size());
  if (n == 1) return x[0];
  // reflect without repeating the edge sample (librosa-style)
  long p = i;
  while (p < 0 || p >= n) {
    if (p < 0) p = -p;
    if (p >= n) p = 2 * (n - 1) - p;
  }
  return x[size_t(p)];
}

ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg) {
  validate(cfg);
  stylus::validate(w);
  if (long(w.samples.size()) < cfg.n_fft) throw std::invalid_argument("stft: input too short (need at least n_fft samples)");

  const int n_bins = cfg.n_bins();
  const int n_frames = 1 + int(w.samples.size() / size_t(cfg.hop));
  const auto win = make_window(cfg);
  const int half = cfg.n_fft / 2;

  ComplexSpectrogram out;
  out.config = cfg;
  out.origin_length = w.samples.size();
  out.sample_rate = w.sample_rate;
  out.frames.resize(n_bins, n_frames);

  Eigen::FFT<double> fft;
  std::vector<double> buf(size_t(cfg.n_fft));
  std::vector<std::complex<double>> spec(size_t(n_bins));
  for (int t = 0; t < n_frames; ++t) {
    const long start = long(t) * cfg.hop - half;
    for (int i = 0; i < cfg.n_fft; ++i) buf[size_t(i)] = reflect_at(w.samples, start + i) * win[size_t(i)];
    fft.fwd(spec, buf);  // real input -> half spectrum (n_fft/2+1 bins)
    for (int b = 0; b < n_bins; ++b) out.frames(b, t) = spec[size_t(b)];
  }
  return out;
}

Waveform istft(const ComplexSpectrogram& s) {
  validate(s.config);
  if (s.n_bins() != s.config.n_bins())
    throw std::invalid_argument("istft: n_bins inconsistent with config");
  if (!s.frames.allFinite()) throw std::invalid_argument("istft: non-finite spectrogram");

  const int n_fft = s.config.n_fft;
  const int hop = s.config.hop;
  const int half = n_fft / 2;
  const auto win = make_window(s.config);
  const size_t padded_len = size_t(s.n_frames() - 1) * hop + size_t(n_fft);

  std::vector<double> acc(padded_len, 0.0);
  std::vector<double> wsq(padded_len, 0.0);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> spec(size_t(s.n_bins()));
  std::vector<double> frame(size_t(n_fft));
  for (int t = 0; t < s.n_frames(); ++t) {
    for (int b = 0; b < s.n_bins(); ++b) spec[size_t(b)] = s.frames(b, t);
    fft.inv(frame, spec, n_fft);
    const size_t start = size_t(t) * hop;
    for (int i = 0; i < n_fft; ++i) {
      acc[start + i] += frame[size_t(i)] * win[size_t(i)];
      wsq[start + i] += win[size_t(i)] * win[size_t(i)];
    }
  }

  Waveform out;
  out.sample_rate = s.sample_rate;
  const size_t want = s.origin_length > 0 ? s.origin_length : padded_len - 2 * size_t(half);
  out.samples.assign(want, 0.0);
  for (size_t i = 0; i < want; ++i) {
    const size_t p = i + size_t(half);  // undo centering pad
    if (p < padded_len && wsq[p] > 1e-12) out.samples[i] = acc[p] / wsq[p];
  }
  return out;
}

Eigen::MatrixXd magnitude(const ComplexSpectrogram& s) { return s.frames.cwiseAbs(); }

ComplexSpectrogram with_magnitude(const ComplexSpectrogram& phase_source, const Eigen::MatrixXd& mag) {
  if (mag.rows() != phase_source.frames.rows() || mag.cols() != phase_source.frames.cols())
    throw std::invalid_argument("with_magnitude: shape mismatch");
  ComplexSpectrogram out = phase_source;
  for (Eigen::Index c = 0; c < out.frames.cols(); ++c) {
    for (Eigen::Index r = 0; r < out.frames.rows(); ++r) {
      const std::complex<double> z = phase_source.frames(r, c);
      const double a = std::abs(z);
      if (a > 0.0) {
        out.frames(r, c) = z / a * mag(r, c);
      } else {
        out.frames(r, c) = std::complex<double>(mag(r, c), 0.0);  // zero phase where undefined
      }
    }
  }
  return out;
}

}  // namespace stylus
