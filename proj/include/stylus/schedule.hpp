#pragma once

#include <vector>

namespace stylus {

// Diffusion noise schedule. betas[i] and alpha_bars[i] describe level t = i+1;
// alpha_bar(0) = 1 is the clean image.
struct NoiseSchedule {
  int T = 0;
  std::vector<double> betas;       // size T
  std::vector<double> alpha_bars;  // size T, running products of (1 - beta)

  double alpha_bar(int t) const;  // t in [0, T]
};

// Scaled-linear schedule: betas are linear in sqrt space between beta_min and
// beta_max (the convention latent diffusion models ship with).
NoiseSchedule make_schedule(int T, double beta_min = 0.00085, double beta_max = 0.012);

NoiseSchedule schedule_from_betas(const std::vector<double>& betas);

}  // namespace stylus
