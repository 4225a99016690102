#pragma once

#include <span>

#include "convexsdf/grid.hpp"

/// Unit-spaced periodic finite differences and their exact adjoints.
///
/// Axes are zero-based. The Hessian uses backward(forward) differences on
/// the diagonal and forward(forward) differences off the diagonal; with
/// these stencils hessian_adjoint(hessian(f)) equals laplacian(laplacian(f)).
namespace convexsdf {

ScalarField forward_diff(const ScalarField& f, int axis);
ScalarField backward_diff(const ScalarField& f, int axis);

/// Components are forward differences along each axis.
VectorField gradient(const ScalarField& f);
/// -sum_i backward_diff(p_i, i); the adjoint of gradient.
ScalarField divergence_adjoint(const VectorField& p);
/// Standard periodic (-2d)-center stencil.
ScalarField laplacian(const ScalarField& f);
SymMatField hessian(const ScalarField& f);
/// Adjoint of hessian under the Frobenius pairing.
ScalarField hessian_adjoint(const SymMatField& q);

namespace stencil {

// Span-level kernels: `out` must not alias `in`. These back the public
// operators and let the solver reuse buffers.
void forward(const GridShape& shape, std::span<const double> in, std::span<double> out, int axis);
void backward(const GridShape& shape, std::span<const double> in, std::span<double> out,
              int axis);
// out += scale * (in(x) - in(x - e_axis))
void backward_accumulate(const GridShape& shape, std::span<const double> in,
                         std::span<double> out, int axis, double scale);

}  // namespace stencil

}  // namespace convexsdf
