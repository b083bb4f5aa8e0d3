#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cmc/geometry.hpp"
#include "cmc/graph_curvature.hpp"

namespace cmc {

struct Tap {
  std::size_t index;
  double weight;
};

using Stencil = std::vector<Tap>;

// Second-order finite-difference stencils for the six jet components at a
// node: centered in the interior, periodic wrap or mirror ghost in t per the
// grid mode, one-sided second order at non-periodic edges.
struct NodeStencil {
  Stencil u, ut, us, utt, uts, uss;
};

NodeStencil node_stencil(const Grid& grid, int i, int j);

double apply_stencil(const Stencil& stencil, std::span<const double> values);

LocalJet<double> evaluate_jet(const NodeStencil& stencil, std::span<const double> values);

}  // namespace cmc
