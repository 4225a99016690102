#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace convexsdf {

using Index = std::ptrdiff_t;

/// Extent of a periodic 2D or 3D grid with unit spacing.
///
/// Storage is row-major with axis 0 slowest, so the flat index of
/// (c0, c1, c2) is (c0 * N1 + c1) * N2 + c2.
class GridShape {
 public:
  GridShape() = default;
  GridShape(std::initializer_list<Index> dims);
  explicit GridShape(std::span<const Index> dims);

  int ndim() const { return ndim_; }
  Index dim(int axis) const { return dims_[static_cast<std::size_t>(axis)]; }
  Index stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
  Index size() const { return size_; }
  std::span<const Index> dims() const { return {dims_.data(), static_cast<std::size_t>(ndim_)}; }

  /// Flat index of an in-range coordinate (no wrapping).
  Index index(std::span<const Index> coord) const;
  /// Coordinate of a flat index; unused trailing entries are zero.
  std::array<Index, 3> coord(Index flat) const;

  /// Euclidean diameter of the grid box.
  double diameter() const;

  bool operator==(const GridShape& other) const = default;

 private:
  int ndim_ = 0;
  std::array<Index, 3> dims_{};
  std::array<Index, 3> strides_{};
  Index size_ = 0;
};

/// Flat index of a coordinate reduced modulo the grid extent in every axis.
Index wrap_index(const GridShape& shape, std::span<const Index> coord);

/// Number of stored entries of a symmetric d x d matrix (upper triangle).
constexpr int sym_components(int ndim) { return ndim * (ndim + 1) / 2; }

/// Storage slot of entry (i, j) of a symmetric matrix; order is row-wise
/// over the upper triangle: 00, 01, (02), 11, (12), 22.
int sym_slot(int ndim, int i, int j);

namespace detail {

template <typename T>
class FieldStorage {
 public:
  FieldStorage() = default;
  FieldStorage(const GridShape& shape, int components, T fill)
      : shape_(shape),
        components_(components),
        values_(static_cast<std::size_t>(shape.size() * components), fill) {}

  const GridShape& shape() const { return shape_; }
  int components() const { return components_; }
  Index point_count() const { return shape_.size(); }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  std::span<T> component(int c) {
    return std::span<T>(values_).subspan(static_cast<std::size_t>(c * shape_.size()),
                                         static_cast<std::size_t>(shape_.size()));
  }
  std::span<const T> component(int c) const {
    return std::span<const T>(values_).subspan(static_cast<std::size_t>(c * shape_.size()),
                                               static_cast<std::size_t>(shape_.size()));
  }

  bool operator==(const FieldStorage& other) const = default;

 protected:
  GridShape shape_;
  int components_ = 0;
  std::vector<T> values_;
};

}  // namespace detail

/// One real per grid point.
class ScalarField : public detail::FieldStorage<double> {
 public:
  ScalarField() = default;
  explicit ScalarField(const GridShape& shape, double fill = 0.0)
      : FieldStorage(shape, 1, fill) {}
  ScalarField(const GridShape& shape, std::vector<double> values);

  double& operator[](Index i) { return values_[static_cast<std::size_t>(i)]; }
  double operator[](Index i) const { return values_[static_cast<std::size_t>(i)]; }
};

/// d reals per grid point; component i (axis i) is stored as a contiguous block.
class VectorField : public detail::FieldStorage<double> {
 public:
  VectorField() = default;
  explicit VectorField(const GridShape& shape, double fill = 0.0)
      : FieldStorage(shape, shape.ndim(), fill) {}
};

/// A symmetric d x d matrix per grid point, upper triangle only.
class SymMatField : public detail::FieldStorage<double> {
 public:
  SymMatField() = default;
  explicit SymMatField(const GridShape& shape, double fill = 0.0)
      : FieldStorage(shape, sym_components(shape.ndim()), fill) {}

  std::span<double> entry(int i, int j) { return component(sym_slot(shape_.ndim(), i, j)); }
  std::span<const double> entry(int i, int j) const {
    return component(sym_slot(shape_.ndim(), i, j));
  }
};

/// One boolean per grid point.
class MaskField : public detail::FieldStorage<std::uint8_t> {
 public:
  MaskField() = default;
  explicit MaskField(const GridShape& shape, bool fill = false)
      : FieldStorage(shape, 1, fill ? 1 : 0) {}

  bool operator[](Index i) const { return values_[static_cast<std::size_t>(i)] != 0; }
  void set(Index i, bool v) { values_[static_cast<std::size_t>(i)] = v ? 1 : 0; }
  Index count() const;
};

/// Euclidean pairing summed over all points.
double inner_product(const ScalarField& a, const ScalarField& b);
double inner_product(const VectorField& a, const VectorField& b);
/// Frobenius pairing; each stored off-diagonal entry stands for two matrix entries.
double inner_product(const SymMatField& a, const SymMatField& b);

void require_same_shape(const GridShape& a, const GridShape& b, const char* what);
bool all_finite(std::span<const double> values);
double max_abs(std::span<const double> values);

/// Mask operations used throughout the solver and the tests.
MaskField mask_and(const MaskField& a, const MaskField& b);
MaskField mask_or(const MaskField& a, const MaskField& b);
MaskField mask_not(const MaskField& a);
/// Number of face-connected components of the true cells (non-periodic).
int connected_components(const MaskField& m);
/// Mask of cells where phi < 0.
MaskField sublevel_mask(const ScalarField& phi, double level = 0.0);

}  // namespace convexsdf
