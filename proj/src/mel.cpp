#include "stylus/mel.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "stylus/rng.hpp"

namespace stylus {

// Slaney mel scale: linear up to 1 kHz, logarithmic above.
double hz_to_mel(double hz) {
  const double f_sp = 200.0 / 3.0;
  const double min_log_hz = 1000.0;
  const double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (hz < min_log_hz) return hz / f_sp;
  return min_log_mel + std::log(hz / min_log_hz) / logstep;
}

double mel_to_hz(double mel) {
  const double f_sp = 200.0 / 3.0;
  const double min_log_hz = 1000.0;
  const double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (mel < min_log_mel) return mel * f_sp;
  return min_log_hz * std::exp(logstep * (mel - min_log_mel));
}

MelFilterbank make_mel_filterbank(int n_mels, int n_fft, int sample_rate, double f_min, double f_max) {
  if (n_mels <= 0 || n_fft <= 0 || sample_rate <= 0)
    throw std::invalid_argument("mel filterbank: n_mels, n_fft, sample_rate must be positive");
  if (f_max <= 0.0) f_max = sample_rate / 2.0;
  if (!(f_min >= 0.0 && f_min < f_max && f_max <= sample_rate / 2.0 + 1e-9))
    throw std::invalid_argument("mel filterbank: need 0 <= f_min < f_max <= sr/2");

  const int n_bins = n_fft / 2 + 1;
  MelFilterbank fb;
  fb.f_min = f_min;
  fb.f_max = f_max;
  fb.sample_rate = sample_rate;
  fb.n_fft = n_fft;
  fb.weights = Eigen::MatrixXd::Zero(n_mels, n_bins);

  const double mel_lo = hz_to_mel(f_min);
  const double mel_hi = hz_to_mel(f_max);
  std::vector<double> centers(size_t(n_mels) + 2);
  for (int i = 0; i < n_mels + 2; ++i)
    centers[size_t(i)] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));

  for (int m = 0; m < n_mels; ++m) {
    const double left = centers[size_t(m)];
    const double mid = centers[size_t(m) + 1];
    const double right = centers[size_t(m) + 2];
    for (int b = 0; b < n_bins; ++b) {
      const double f = double(b) * sample_rate / n_fft;
      double v = 0.0;
      if (f > left && f < right) v = (f <= mid) ? (f - left) / (mid - left) : (right - f) / (right - mid);
      fb.weights(m, b) = std::max(0.0, v);
    }
    if (fb.weights.row(m).maxCoeff() <= 0.0) {
      std::ostringstream os;
      os << "mel filterbank: filter " << m << " has no positive bin (too many mels for n_fft=" << n_fft << ")";
      throw std::invalid_argument(os.str());
    }
  }

  // pseudo-inverse with small singular values dropped
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(fb.weights, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double tol = 1e-10 * svd.singularValues()(0) * std::max(n_mels, n_bins);
  Eigen::VectorXd inv_s = svd.singularValues();
  for (Eigen::Index i = 0; i < inv_s.size(); ++i) inv_s(i) = inv_s(i) > tol ? 1.0 / inv_s(i) : 0.0;
  fb.pinv_weights = svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();

  uint64_t h = fnv1a64("melfb.slaney.v1");
  const struct {
    int a, b, c;
    double d, e;
  } key{n_mels, n_fft, sample_rate, f_min, f_max};
  fb.id = fnv1a64(&key, sizeof key, h);
  return fb;
}

Eigen::MatrixXd normalize_db(const Eigen::MatrixXd& db, const NormMeta& meta) {
  if (!(meta.min_val < meta.max_val)) throw std::invalid_argument("norm_meta: min_val must be < max_val");
  return ((db.array() - meta.min_val) / (meta.max_val - meta.min_val)).cwiseMax(0.0).cwiseMin(1.0).matrix();
}

Eigen::MatrixXd denormalize_db(const Eigen::MatrixXd& values01, const NormMeta& meta) {
  if (!(meta.min_val < meta.max_val)) throw std::invalid_argument("norm_meta: min_val must be < max_val");
  return (values01.array() * (meta.max_val - meta.min_val) + meta.min_val).matrix();
}

MelSpectrogram mel_project(const Eigen::MatrixXd& mag, const MelFilterbank& fb, double floor_db) {
  if (mag.rows() != fb.n_bins())
    throw std::invalid_argument("mel_project: magnitude rows do not match filterbank bins");
  if ((mag.array() < 0.0).any()) throw std::invalid_argument("mel_project: negative magnitudes");

  Eigen::MatrixXd mel = fb.weights * mag;
  Eigen::MatrixXd db(mel.rows(), mel.cols());
  for (Eigen::Index c = 0; c < mel.cols(); ++c)
    for (Eigen::Index r = 0; r < mel.rows(); ++r) {
      const double a = mel(r, c);
      db(r, c) = a > 0.0 ? std::max(20.0 * std::log10(a), floor_db) : floor_db;
    }

  MelSpectrogram out;
  out.filterbank_id = fb.id;
  out.norm_meta.floor_db = floor_db;
  out.norm_meta.min_val = floor_db;
  double peak = db.maxCoeff();
  if (peak <= floor_db) peak = floor_db + 1.0;  // silent clip; any span maps everything to 0
  out.norm_meta.max_val = peak;
  out.values = normalize_db(db, out.norm_meta);
  return out;
}

Eigen::MatrixXd mel_invert(const MelSpectrogram& m, const MelFilterbank& fb) {
  if (m.filterbank_id != fb.id) throw std::invalid_argument("mel_invert: filterbank does not match spectrogram");
  if (m.n_mels() != fb.n_mels()) throw std::invalid_argument("mel_invert: mel dimension mismatch");

  const Eigen::MatrixXd db = denormalize_db(m.values, m.norm_meta);
  Eigen::MatrixXd mel(db.rows(), db.cols());
  const double floor_eps = 1e-9;
  for (Eigen::Index c = 0; c < db.cols(); ++c)
    for (Eigen::Index r = 0; r < db.rows(); ++r) {
      const double v = db(r, c);
      // cells clamped at the floor stand for silence, not 10^(floor/20)
      mel(r, c) = (v <= m.norm_meta.floor_db + floor_eps) ? 0.0 : std::pow(10.0, v / 20.0);
    }
  return (fb.pinv_weights * mel).cwiseMax(0.0);
}

}  // namespace stylus
