#pragma once

#include "qlab/numkernel/types.hpp"

#include <vector>

namespace qlab::qdynamics::detail {

// Weights w_s with sum_s w_s f(x + s h) = h^order f^(order)(x), exact for
// polynomials of degree below offsets.size(); solved from the moment conditions.
std::vector<double> derivative_weights(const std::vector<int>& offsets, int order);

// Central offsets -r..r with r = (order+1)/2: width order+2 for odd orders and
// order+1 for even ones, second-order accurate either way.
std::vector<int> central_offsets(int order);

// d^order/dP^order along each row (columns are P), zero padding.
RMatrix p_derivative(const RMatrix& w, int order, double dp);
// d/dQ down each column (rows are Q), zero padding.
RMatrix q_derivative(const RMatrix& w, double dq);

// Largest |symbol| of the central stencil of `order` on a unit grid.
double stencil_radius(int order);

// Derivative of arbitrary samples on a uniform grid, central in the interior
// and shifted inward near the ends with the same width.
RVector sample_derivative(const RVector& f, int order, double h);

}  // namespace qlab::qdynamics::detail
