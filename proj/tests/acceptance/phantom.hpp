#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "convexsdf/grid.hpp"
#include "convexsdf/transforms.hpp"

namespace convexsdf::acceptance {

// Bright disc on a dark background with a dark crescent inside the disc.
struct BlotchPhantom {
  ScalarField image;
  MaskField truth;   // the disc, blotch included
  MaskField blotch;
  MaskField outside_labels;
  MaskField inside_labels;
};

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline BlotchPhantom make_blotch_phantom(Index n, int scribbles, std::uint64_t seed) {
  const GridShape shape{n, n};
  const double c = 0.5 * static_cast<double>(n - 1);
  const double r_disc = 0.32 * static_cast<double>(n);
  const double r_outer = 0.13 * static_cast<double>(n);
  const double r_inner = 0.10 * static_cast<double>(n);
  const double shift = 0.035 * static_cast<double>(n);

  BlotchPhantom ph{ScalarField(shape), MaskField(shape), MaskField(shape), MaskField(shape), MaskField(shape)};
  std::mt19937_64 rng(seed);
  for (Index i = 0; i < shape.size(); ++i) {
    const auto x = shape.coord(i);
    const double y0 = static_cast<double>(x[0]) - c;
    const double y1 = static_cast<double>(x[1]) - c;
    const bool disc = y0 * y0 + y1 * y1 <= r_disc * r_disc;
    const bool a = y0 * y0 + (y1 + shift) * (y1 + shift) <= r_outer * r_outer;
    const bool b = y0 * y0 + (y1 - shift) * (y1 - shift) <= r_inner * r_inner;
    ph.truth.set(i, disc);
    ph.blotch.set(i, a && !b);
    // Box-Muller keeps the noise independent of the library's distributions.
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    const double noise = 0.04 * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    ph.image[i] = (disc ? (ph.blotch[i] ? 0.2 : 0.75) : 0.15) + noise;
  }

  const MaskField near_blotch = dilate(ph.blotch, 3.0);
  const MaskField near_disc = dilate(ph.truth, 4.0);
  const MaskField core = mask_not(dilate(mask_not(ph.truth), 3.0));
  const auto stroke = [&](MaskField& labels, const MaskField& allowed) {
    for (int placed = 0; placed < scribbles;) {
      const auto i = static_cast<Index>(rng() % static_cast<std::uint64_t>(shape.size()));
      if (!allowed[i]) continue;
      const auto x = shape.coord(i);
      for (Index d = -2; d <= 2; ++d) {
        const Index col = x[1] + d;
        if (col < 0 || col >= n) continue;
        const Index j = x[0] * n + col;
        if (allowed[j]) labels.set(j, true);
      }
      ++placed;
    }
  };
  stroke(ph.inside_labels, mask_and(core, mask_not(near_blotch)));
  stroke(ph.outside_labels, mask_not(near_disc));
  return ph;
}

inline double dice(const MaskField& a, const MaskField& b) {
  Index both = 0;
  for (Index i = 0; i < a.point_count(); ++i) both += (a[i] && b[i]) ? 1 : 0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(a.count() + b.count());
}

}  // namespace convexsdf::acceptance
