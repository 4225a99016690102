#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <algorithm>
#include <functional>
#include <random>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "convexsdf/grid.hpp"

namespace testing {

using namespace convexsdf;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename Field>
Field random_field(const GridShape& shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Field f(shape);
  std::mt19937_64 rng(seed);
  for (double& v : f.values()) v = uniform(rng, lo, hi);
  return f;
}

inline MaskField random_mask(const GridShape& shape, std::uint64_t seed, double p = 0.5) {
  MaskField m(shape);
  std::mt19937_64 rng(seed);
  for (Index i = 0; i < shape.size(); ++i) m.set(i, uniform(rng, 0.0, 1.0) < p);
  return m;
}

// Value of f at an integer coordinate, wrapped periodically.
inline double at(const ScalarField& f, Index c0, Index c1, Index c2 = 0) {
  const GridShape& s = f.shape();
  const Index c[3] = {c0, c1, c2};
  return f[wrap_index(s, std::span<const Index>(c, static_cast<std::size_t>(s.ndim())))];
}

inline Index flat(const GridShape& s, Index c0, Index c1, Index c2 = 0) {
  const Index c[3] = {c0, c1, c2};
  return s.index(std::span<const Index>(c, static_cast<std::size_t>(s.ndim())));
}

// Copy of a field's values; safe to iterate when the field is a temporary.
template <typename Field>
auto vals(const Field& f) {
  const auto v = f.values();
  return std::vector<std::remove_const_t<typename decltype(v)::element_type>>(v.begin(), v.end());
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

template <typename Fn>
void for_each_point(const GridShape& s, Fn&& fn) {
  for (Index i = 0; i < s.size(); ++i) {
    const auto c = s.coord(i);
    fn(i, c[0], c[1], c[2]);
  }
}

inline MaskField disc_mask(const GridShape& s, double cx, double cy, double r) {
  MaskField m(s);
  for_each_point(s, [&](Index i, Index a, Index b, Index) {
    const double x = static_cast<double>(a) - cx;
    const double y = static_cast<double>(b) - cy;
    m.set(i, x * x + y * y <= r * r);
  });
  return m;
}

}  // namespace testing
