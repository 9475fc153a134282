#include "stylus/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace stylus {

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 0 || t > T) throw std::out_of_range("schedule: timestep out of [0,T]");
  return t == 0 ? 1.0 : alpha_bars[size_t(t) - 1];
}

NoiseSchedule schedule_from_betas(const std::vector<double>& betas) {
  if (betas.empty()) throw std::invalid_argument("schedule: need at least one beta");
  NoiseSchedule s;
  s.T = int(betas.size());
  s.betas = betas;
  s.alpha_bars.resize(betas.size());
  double prod = 1.0;
  for (size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0 && betas[i] < 1.0)) throw std::invalid_argument("schedule: betas must lie in (0,1)");
    prod *= 1.0 - betas[i];
    s.alpha_bars[i] = prod;
  }
  // strictly decreasing by construction since every factor is in (0,1)
  return s;
}

NoiseSchedule make_schedule(int T, double beta_min, double beta_max) {
  if (T < 1) throw std::invalid_argument("schedule: T must be >= 1");
  if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0))
    throw std::invalid_argument("schedule: need 0 < beta_min <= beta_max < 1");
  std::vector<double> betas(size_t(T));
  const double lo = std::sqrt(beta_min);
  const double hi = std::sqrt(beta_max);
  for (int i = 0; i < T; ++i) {
    const double s = T == 1 ? lo : lo + (hi - lo) * i / (T - 1);
    betas[size_t(i)] = s * s;
  }
  return schedule_from_betas(betas);
}

}  // namespace stylus
