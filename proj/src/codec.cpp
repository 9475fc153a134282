#include "stylus/codec.hpp"

#include <sstream>
#include <stdexcept>

#include "stylus/rng.hpp"

namespace stylus {

std::string to_string(LatentBranch b) {
  switch (b) {
    case LatentBranch::content: return "content";
    case LatentBranch::style: return "style";
    case LatentBranch::style_b: return "style_b";
    case LatentBranch::output: return "output";
  }
  return "?";
}

void validate(const CodecSpec& spec) {
  if (spec.spatial_factor < 1) throw std::invalid_argument("codec: spatial_factor must be >= 1");
  if (spec.kind == CodecKind::identity) {
    if (spec.spatial_factor != 1 || spec.latent_channels != 1)
      throw std::invalid_argument("codec: identity kind requires spatial_factor 1 and 1 channel");
  } else {
    if (spec.latent_channels != spec.spatial_factor * spec.spatial_factor)
      throw std::invalid_argument("codec: strided-orthogonal requires latent_channels == spatial_factor^2");
  }
}

Eigen::MatrixXd codec_orthogonal_matrix(const CodecSpec& spec) {
  const int d = spec.spatial_factor * spec.spatial_factor;
  Xoshiro256 rng(spec.seed);
  Eigen::MatrixXd g(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) g(r, c) = rng.gaussian();
  // modified Gram-Schmidt; platform-stable, no LAPACK sign ambiguity
  Eigen::MatrixXd q(d, d);
  for (int c = 0; c < d; ++c) {
    Eigen::VectorXd v = g.col(c);
    for (int p = 0; p < c; ++p) v -= q.col(p).dot(v) * q.col(p);
    const double n = v.norm();
    if (n < 1e-12) throw std::runtime_error("codec: degenerate random matrix (try another seed)");
    q.col(c) = v / n;
  }
  return q;
}

static void check_dims(const MelSpectrogram& m, const CodecSpec& spec) {
  if (m.n_mels() % spec.spatial_factor != 0 || m.n_frames() % spec.spatial_factor != 0) {
    std::ostringstream os;
    os << "codec: mel dims " << m.n_mels() << "x" << m.n_frames() << " not divisible by spatial_factor "
       << spec.spatial_factor;
    throw std::invalid_argument(os.str());
  }
}

LatentState encode(const MelSpectrogram& m, const CodecSpec& spec, LatentBranch branch) {
  validate(spec);
  check_dims(m, spec);
  LatentState z;
  z.timestep = 0;
  z.branch = branch;

  if (spec.kind == CodecKind::identity) {
    z.tensor = Tensor3(1, m.n_mels(), m.n_frames());
    auto p = z.tensor.plane(0);
    p = (m.values.array() * 2.0 - 1.0).matrix();  // [0,1] -> [-1,1]
    return z;
  }

  const int f = spec.spatial_factor;
  const int d = f * f;
  const int h = m.n_mels() / f;
  const int w = m.n_frames() / f;
  const Eigen::MatrixXd q = codec_orthogonal_matrix(spec);
  z.tensor = Tensor3(d, h, w);
  Eigen::VectorXd patch(d);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      for (int i = 0; i < f; ++i)
        for (int j = 0; j < f; ++j) patch(i * f + j) = m.values(y * f + i, x * f + j);
      const Eigen::VectorXd mixed = q.transpose() * patch;
      for (int c = 0; c < d; ++c) z.tensor.at(c, y, x) = mixed(c);
    }
  return z;
}

MelSpectrogram decode(const LatentState& z, const CodecSpec& spec) {
  validate(spec);
  if (z.tensor.channels != spec.latent_channels)
    throw std::invalid_argument("codec: latent channels do not match spec");

  MelSpectrogram m;
  if (spec.kind == CodecKind::identity) {
    m.values = ((z.tensor.plane(0).array() + 1.0) / 2.0).cwiseMax(0.0).cwiseMin(1.0).matrix();
    return m;
  }

  const int f = spec.spatial_factor;
  const int d = f * f;
  const Eigen::MatrixXd q = codec_orthogonal_matrix(spec);
  m.values.resize(z.tensor.height * f, z.tensor.width * f);
  Eigen::VectorXd mixed(d);
  for (int y = 0; y < z.tensor.height; ++y)
    for (int x = 0; x < z.tensor.width; ++x) {
      for (int c = 0; c < d; ++c) mixed(c) = z.tensor.at(c, y, x);
      const Eigen::VectorXd patch = q * mixed;
      for (int i = 0; i < f; ++i)
        for (int j = 0; j < f; ++j)
          m.values(y * f + i, x * f + j) = std::min(1.0, std::max(0.0, patch(i * f + j)));
    }
  return m;
}

}  // namespace stylus
