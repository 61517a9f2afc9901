#pragma once

// Small phantom acquisitions shared by unit and acceptance tests.

#include "flowforge/phantom.hpp"
#include "flowforge/sampling.hpp"

namespace fixture {

inline flowforge::sampling::SamplingConfig sampling_for(const flowforge::phantom::PhantomConfig& p) {
  flowforge::sampling::SamplingConfig s;
  s.n_y = p.grid.ny;
  s.n_z = p.grid.nz;
  s.encodings = 4;
  s.n_readouts = p.n_readouts();
  s.sg_interval = 9;
  return s;
}

inline flowforge::phantom::RawAcquisition acquire(const flowforge::phantom::PhantomConfig& p) {
  return flowforge::phantom::acquire(p, flowforge::sampling::generate_schedule(sampling_for(p)));
}

/// Desk phantom with a chosen heart rate and scan length.
inline flowforge::phantom::PhantomConfig gating_phantom(double hr_hz, double duration_s, std::uint64_t seed) {
  flowforge::phantom::PhantomConfig p;
  p.heart_rate_hz = hr_hz;
  p.duration = duration_s;
  p.seed = seed;
  return p;
}

}  // namespace fixture
