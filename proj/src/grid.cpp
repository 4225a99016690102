#include "convexsdf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace convexsdf {

GridShape::GridShape(std::initializer_list<Index> dims)
    : GridShape(std::span<const Index>(dims.begin(), dims.size())) {}

GridShape::GridShape(std::span<const Index> dims) {
  if (dims.size() != 2 && dims.size() != 3) {
    throw std::invalid_argument("grid must be 2D or 3D, got " + std::to_string(dims.size()) +
                                " axes");
  }
  ndim_ = static_cast<int>(dims.size());
  Index total = 1;
  for (std::size_t a = 0; a < dims.size(); ++a) {
    if (dims[a] < 4) {
      throw std::invalid_argument("grid extent must be at least 4 along axis " +
                                  std::to_string(a) + ", got " + std::to_string(dims[a]));
    }
    if (total > std::numeric_limits<Index>::max() / dims[a]) {
      throw std::overflow_error("grid point count overflows");
    }
    total *= dims[a];
    dims_[a] = dims[a];
  }
  size_ = total;
  Index stride = 1;
  for (int a = ndim_ - 1; a >= 0; --a) {
    strides_[static_cast<std::size_t>(a)] = stride;
    stride *= dims_[static_cast<std::size_t>(a)];
  }
}

Index GridShape::index(std::span<const Index> coord) const {
  Index flat = 0;
  for (int a = 0; a < ndim_; ++a) flat += coord[static_cast<std::size_t>(a)] * stride(a);
  return flat;
}

std::array<Index, 3> GridShape::coord(Index flat) const {
  std::array<Index, 3> c{};
  for (int a = 0; a < ndim_; ++a) {
    c[static_cast<std::size_t>(a)] = (flat / stride(a)) % dim(a);
  }
  return c;
}

double GridShape::diameter() const {
  double s = 0.0;
  for (int a = 0; a < ndim_; ++a) s += static_cast<double>(dim(a)) * static_cast<double>(dim(a));
  return std::sqrt(s);
}

Index wrap_index(const GridShape& shape, std::span<const Index> coord) {
  if (static_cast<int>(coord.size()) != shape.ndim()) {
    throw std::invalid_argument("coordinate rank does not match grid rank");
  }
  Index flat = 0;
  for (int a = 0; a < shape.ndim(); ++a) {
    const Index n = shape.dim(a);
    Index c = coord[static_cast<std::size_t>(a)] % n;
    if (c < 0) c += n;
    flat += c * shape.stride(a);
  }
  return flat;
}

int sym_slot(int ndim, int i, int j) {
  if (i > j) std::swap(i, j);
  // Row i of the upper triangle starts after rows 0..i-1, which hold d, d-1, ... entries.
  return i * ndim - i * (i - 1) / 2 + (j - i);
}

ScalarField::ScalarField(const GridShape& shape, std::vector<double> values)
    : FieldStorage(shape, 1, 0.0) {
  if (static_cast<Index>(values.size()) != shape.size()) {
    throw std::invalid_argument("value count " + std::to_string(values.size()) +
                                " does not match grid size " + std::to_string(shape.size()));
  }
  values_ = std::move(values);
}

Index MaskField::count() const {
  Index n = 0;
  for (auto v : values_) n += v ? 1 : 0;
  return n;
}

void require_same_shape(const GridShape& a, const GridShape& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid shape mismatch");
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double inner_product(const ScalarField& a, const ScalarField& b) {
  require_same_shape(a.shape(), b.shape(), "inner_product");
  return dot(a.values(), b.values());
}

double inner_product(const VectorField& a, const VectorField& b) {
  require_same_shape(a.shape(), b.shape(), "inner_product");
  return dot(a.values(), b.values());
}

double inner_product(const SymMatField& a, const SymMatField& b) {
  require_same_shape(a.shape(), b.shape(), "inner_product");
  const int d = a.shape().ndim();
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const double w = (i == j) ? 1.0 : 2.0;
      s += w * dot(a.entry(i, j), b.entry(i, j));
    }
  }
  return s;
}

bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double max_abs(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

MaskField mask_and(const MaskField& a, const MaskField& b) {
  require_same_shape(a.shape(), b.shape(), "mask_and");
  MaskField out(a.shape());
  for (Index i = 0; i < a.point_count(); ++i) out.set(i, a[i] && b[i]);
  return out;
}

MaskField mask_or(const MaskField& a, const MaskField& b) {
  require_same_shape(a.shape(), b.shape(), "mask_or");
  MaskField out(a.shape());
  for (Index i = 0; i < a.point_count(); ++i) out.set(i, a[i] || b[i]);
  return out;
}

MaskField mask_not(const MaskField& a) {
  MaskField out(a.shape());
  for (Index i = 0; i < a.point_count(); ++i) out.set(i, !a[i]);
  return out;
}

int connected_components(const MaskField& m) {
  const GridShape& shape = m.shape();
  std::vector<int> label(static_cast<std::size_t>(shape.size()), -1);
  std::vector<Index> stack;
  int components = 0;
  for (Index seed = 0; seed < shape.size(); ++seed) {
    if (!m[seed] || label[static_cast<std::size_t>(seed)] >= 0) continue;
    label[static_cast<std::size_t>(seed)] = components;
    stack.push_back(seed);
    while (!stack.empty()) {
      const Index cur = stack.back();
      stack.pop_back();
      const auto c = shape.coord(cur);
      for (int a = 0; a < shape.ndim(); ++a) {
        for (int step : {-1, 1}) {
          const Index ca = c[static_cast<std::size_t>(a)] + step;
          if (ca < 0 || ca >= shape.dim(a)) continue;
          const Index nb = cur + step * shape.stride(a);
          if (m[nb] && label[static_cast<std::size_t>(nb)] < 0) {
            label[static_cast<std::size_t>(nb)] = components;
            stack.push_back(nb);
          }
        }
      }
    }
    ++components;
  }
  return components;
}

MaskField sublevel_mask(const ScalarField& phi, double level) {
  MaskField out(phi.shape());
  for (Index i = 0; i < phi.point_count(); ++i) out.set(i, phi[i] < level);
  return out;
}

}  // namespace convexsdf
