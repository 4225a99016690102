#include "convexsdf/diff_ops.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace convexsdf {

namespace {

void check_axis(const GridShape& shape, int axis) {
  if (axis < 0 || axis >= shape.ndim()) {
    throw std::invalid_argument("axis " + std::to_string(axis) + " out of range for " +
                                std::to_string(shape.ndim()) + "D grid");
  }
}

// Visits every line along `axis`: the flat index of element k on the line is
// base + k * stride.
template <typename Fn>
void for_each_line(const GridShape& shape, int axis, Fn&& fn) {
  const Index n = shape.dim(axis);
  const Index stride = shape.stride(axis);
  const Index outer = shape.size() / (n * stride);
  for (Index o = 0; o < outer; ++o) {
    for (Index r = 0; r < stride; ++r) fn(o * n * stride + r, n, stride);
  }
}

}  // namespace

namespace stencil {

void forward(const GridShape& shape, std::span<const double> in, std::span<double> out, int axis) {
  for_each_line(shape, axis, [&](Index base, Index n, Index stride) {
    for (Index k = 0; k + 1 < n; ++k) {
      const Index i = base + k * stride;
      out[static_cast<std::size_t>(i)] =
          in[static_cast<std::size_t>(i + stride)] - in[static_cast<std::size_t>(i)];
    }
    const Index last = base + (n - 1) * stride;
    out[static_cast<std::size_t>(last)] =
        in[static_cast<std::size_t>(base)] - in[static_cast<std::size_t>(last)];
  });
}

void backward(const GridShape& shape, std::span<const double> in, std::span<double> out,
              int axis) {
  for_each_line(shape, axis, [&](Index base, Index n, Index stride) {
    const Index last = base + (n - 1) * stride;
    out[static_cast<std::size_t>(base)] =
        in[static_cast<std::size_t>(base)] - in[static_cast<std::size_t>(last)];
    for (Index k = 1; k < n; ++k) {
      const Index i = base + k * stride;
      out[static_cast<std::size_t>(i)] =
          in[static_cast<std::size_t>(i)] - in[static_cast<std::size_t>(i - stride)];
    }
  });
}

void backward_accumulate(const GridShape& shape, std::span<const double> in,
                         std::span<double> out, int axis, double scale) {
  for_each_line(shape, axis, [&](Index base, Index n, Index stride) {
    const Index last = base + (n - 1) * stride;
    out[static_cast<std::size_t>(base)] +=
        scale * (in[static_cast<std::size_t>(base)] - in[static_cast<std::size_t>(last)]);
    for (Index k = 1; k < n; ++k) {
      const Index i = base + k * stride;
      out[static_cast<std::size_t>(i)] +=
          scale * (in[static_cast<std::size_t>(i)] - in[static_cast<std::size_t>(i - stride)]);
    }
  });
}

}  // namespace stencil

ScalarField forward_diff(const ScalarField& f, int axis) {
  check_axis(f.shape(), axis);
  ScalarField out(f.shape());
  stencil::forward(f.shape(), f.values(), out.values(), axis);
  return out;
}

ScalarField backward_diff(const ScalarField& f, int axis) {
  check_axis(f.shape(), axis);
  ScalarField out(f.shape());
  stencil::backward(f.shape(), f.values(), out.values(), axis);
  return out;
}

VectorField gradient(const ScalarField& f) {
  VectorField out(f.shape());
  for (int a = 0; a < f.shape().ndim(); ++a) {
    stencil::forward(f.shape(), f.values(), out.component(a), a);
  }
  return out;
}

ScalarField divergence_adjoint(const VectorField& p) {
  ScalarField out(p.shape());
  for (int a = 0; a < p.shape().ndim(); ++a) {
    stencil::backward_accumulate(p.shape(), p.component(a), out.values(), a, -1.0);
  }
  return out;
}

ScalarField laplacian(const ScalarField& f) {
  const GridShape& shape = f.shape();
  ScalarField out(shape);
  std::vector<double> tmp(static_cast<std::size_t>(shape.size()));
  for (int a = 0; a < shape.ndim(); ++a) {
    stencil::forward(shape, f.values(), tmp, a);
    stencil::backward_accumulate(shape, tmp, out.values(), a, 1.0);
  }
  return out;
}

SymMatField hessian(const ScalarField& f) {
  const GridShape& shape = f.shape();
  const int d = shape.ndim();
  SymMatField out(shape);
  std::vector<double> tmp(static_cast<std::size_t>(shape.size()));
  for (int j = 0; j < d; ++j) {
    stencil::forward(shape, f.values(), tmp, j);
    stencil::backward(shape, tmp, out.entry(j, j), j);
    for (int i = 0; i < j; ++i) stencil::forward(shape, tmp, out.entry(i, j), i);
  }
  return out;
}

ScalarField hessian_adjoint(const SymMatField& q) {
  const GridShape& shape = q.shape();
  const int d = shape.ndim();
  ScalarField out(shape);
  std::vector<double> tmp(static_cast<std::size_t>(shape.size()));
  for (int i = 0; i < d; ++i) {
    // Diagonal: backward(forward(Q_ii)); the operator is self-adjoint.
    stencil::forward(shape, q.entry(i, i), tmp, i);
    stencil::backward_accumulate(shape, tmp, out.values(), i, 1.0);
    // Off-diagonal: the (i,j) and (j,i) terms coincide, so the stored entry counts twice.
    for (int j = i + 1; j < d; ++j) {
      stencil::backward(shape, q.entry(i, j), tmp, j);
      stencil::backward_accumulate(shape, tmp, out.values(), i, 2.0);
    }
  }
  return out;
}

}  // namespace convexsdf
