#include "stylus/ddim.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace stylus {

static void check_step_output(const Tensor3& z, const Tensor3& eps, int t) {
  if (!eps.same_shape(z)) {
    std::ostringstream os;
    os << "ddim: denoiser output shape " << eps.shape_str() << " != latent shape " << z.shape_str()
       << " at t=" << t;
    throw std::runtime_error(os.str());
  }
}

static void check_finite(const Tensor3& z, int t, const char* pass) {
  if (!z.all_finite()) {
    std::ostringstream os;
    os << "ddim: non-finite latent during " << pass << " at t=" << t;
    throw std::runtime_error(os.str());
  }
}

std::vector<LatentState> ddim_invert(const LatentState& z0, const NoiseSchedule& sched,
                                     const DenoiserInterface& d, const AttentionHookSet* hooks) {
  if (z0.timestep != 0) throw std::invalid_argument("ddim_invert: input must be at timestep 0");
  if (!z0.tensor.all_finite()) throw std::invalid_argument("ddim_invert: non-finite input latent");

  std::vector<LatentState> traj;
  traj.reserve(size_t(sched.T) + 1);
  traj.push_back(z0);

  Tensor3 z = z0.tensor;
  for (int t = 0; t < sched.T; ++t) {
    const int label = t + 1;
    const Tensor3 eps = d.predict_noise(z, label, hooks);
    check_step_output(z, eps, label);
    const double a_t = sched.alpha_bar(t);
    const double a_next = sched.alpha_bar(t + 1);
    const double inv_sqrt_a = 1.0 / std::sqrt(a_t);
    const double sq_1ma = std::sqrt(1.0 - a_t);
    const double sq_anext = std::sqrt(a_next);
    const double sq_1manext = std::sqrt(1.0 - a_next);
    for (size_t i = 0; i < z.data.size(); ++i) {
      const double x0 = (z.data[i] - sq_1ma * eps.data[i]) * inv_sqrt_a;
      z.data[i] = sq_anext * x0 + sq_1manext * eps.data[i];
    }
    check_finite(z, label, "inversion");
    LatentState s;
    s.tensor = z;
    s.timestep = t + 1;
    s.branch = z0.branch;
    traj.push_back(std::move(s));
  }
  return traj;
}

LatentState ddim_sample(const LatentState& zT, const NoiseSchedule& sched, const DenoiserInterface& d,
                        const AttentionHookSet* hooks) {
  if (zT.timestep != sched.T) throw std::invalid_argument("ddim_sample: input must be at timestep T");
  if (!zT.tensor.all_finite()) throw std::invalid_argument("ddim_sample: non-finite input latent");

  Tensor3 z = zT.tensor;
  for (int t = sched.T; t >= 1; --t) {
    const Tensor3 eps = d.predict_noise(z, t, hooks);
    check_step_output(z, eps, t);
    const double a_t = sched.alpha_bar(t);
    const double a_prev = sched.alpha_bar(t - 1);
    const double inv_sqrt_a = 1.0 / std::sqrt(a_t);
    const double sq_1ma = std::sqrt(1.0 - a_t);
    const double sq_aprev = std::sqrt(a_prev);
    const double sq_1maprev = std::sqrt(1.0 - a_prev);
    for (size_t i = 0; i < z.data.size(); ++i) {
      const double x0 = (z.data[i] - sq_1ma * eps.data[i]) * inv_sqrt_a;
      z.data[i] = sq_aprev * x0 + sq_1maprev * eps.data[i];
    }
    check_finite(z, t, "sampling");
  }
  LatentState out;
  out.tensor = std::move(z);
  out.timestep = 0;
  out.branch = zT.branch;
  return out;
}

}  // namespace stylus
