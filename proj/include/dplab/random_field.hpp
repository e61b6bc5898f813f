#pragma once

// Seeded smooth test fields: finite tensor Fourier sums over space and time.

#include <cstdint>

#include "dplab/mesh.hpp"

namespace dplab {

/// Per axis the basis is 1, cos(j pi s), sin(j pi s) for j = 1..modes, with s
/// the coordinate rescaled to [-1, 1] over the grid box. The coefficient of a
/// product mode with frequencies (j1, j2, jt) is uniform in [-1, 1] times
/// (1 + j1 + j2 + jt)^-decay.
struct RandomFieldSpec {
  int modes = 3;
  double decay = 2.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Deterministic in (spec, grid).
Field generate_field(const RandomFieldSpec& spec, const SpaceTimeGrid& grid);

}  // namespace dplab
