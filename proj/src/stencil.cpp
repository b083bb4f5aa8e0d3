#include "cmc/stencil.hpp"

#include <algorithm>
#include <utility>

namespace cmc {
namespace {

using Line = std::vector<std::pair<int, double>>;

void add(Line& line, int k, double w) {
  for (auto& [idx, weight] : line) {
    if (idx == k) {
      weight += w;
      return;
    }
  }
  line.emplace_back(k, w);
}

// One-dimensional first/second derivative stencils on n points of spacing h.
// mode selects how the ends are closed.
enum class Closure { OneSided, Periodic, Mirror };

Line first_derivative(int k, int n, double h, Closure closure) {
  Line line;
  const double c = 1.0 / (2.0 * h);
  if (closure == Closure::Periodic) {
    add(line, (k - 1 + n) % n, -c);
    add(line, (k + 1) % n, c);
    return line;
  }
  if (closure == Closure::Mirror) {
    const int lo = k == 0 ? 1 : k - 1;
    const int hi = k == n - 1 ? n - 2 : k + 1;
    add(line, lo, -c);
    add(line, hi, c);
    return line;
  }
  if (k == 0) {
    add(line, 0, -3.0 * c);
    add(line, 1, 4.0 * c);
    add(line, 2, -c);
  } else if (k == n - 1) {
    add(line, n - 1, 3.0 * c);
    add(line, n - 2, -4.0 * c);
    add(line, n - 3, c);
  } else {
    add(line, k - 1, -c);
    add(line, k + 1, c);
  }
  return line;
}

Line second_derivative(int k, int n, double h, Closure closure) {
  Line line;
  const double c = 1.0 / (h * h);
  if (closure == Closure::Periodic) {
    add(line, (k - 1 + n) % n, c);
    add(line, k, -2.0 * c);
    add(line, (k + 1) % n, c);
    return line;
  }
  if (closure == Closure::Mirror) {
    const int lo = k == 0 ? 1 : k - 1;
    const int hi = k == n - 1 ? n - 2 : k + 1;
    add(line, lo, c);
    add(line, k, -2.0 * c);
    add(line, hi, c);
    return line;
  }
  if (k == 0) {
    add(line, 0, 2.0 * c);
    add(line, 1, -5.0 * c);
    add(line, 2, 4.0 * c);
    add(line, 3, -c);
  } else if (k == n - 1) {
    add(line, n - 1, 2.0 * c);
    add(line, n - 2, -5.0 * c);
    add(line, n - 3, 4.0 * c);
    add(line, n - 4, -c);
  } else {
    add(line, k - 1, c);
    add(line, k, -2.0 * c);
    add(line, k + 1, c);
  }
  return line;
}

Closure t_closure(TMode mode) {
  switch (mode) {
    case TMode::Periodic: return Closure::Periodic;
    case TMode::HalfPeriodNeumann: return Closure::Mirror;
    case TMode::DirichletEnds: return Closure::OneSided;
  }
  return Closure::OneSided;
}

}  // namespace

NodeStencil node_stencil(const Grid& grid, int i, int j) {
  const Closure tc = t_closure(grid.t_mode);
  const Line dt1 = first_derivative(i, grid.nt, grid.dt(), tc);
  const Line dt2 = second_derivative(i, grid.nt, grid.dt(), tc);
  const Line ds1 = first_derivative(j, grid.ns, grid.ds(), Closure::OneSided);
  const Line ds2 = second_derivative(j, grid.ns, grid.ds(), Closure::OneSided);

  NodeStencil st;
  st.u.push_back({grid.index(i, j), 1.0});
  for (const auto& [ti, w] : dt1) st.ut.push_back({grid.index(ti, j), w});
  for (const auto& [ti, w] : dt2) st.utt.push_back({grid.index(ti, j), w});
  for (const auto& [sj, w] : ds1) st.us.push_back({grid.index(i, sj), w});
  for (const auto& [sj, w] : ds2) st.uss.push_back({grid.index(i, sj), w});
  for (const auto& [ti, wt] : dt1) {
    for (const auto& [sj, ws] : ds1) st.uts.push_back({grid.index(ti, sj), wt * ws});
  }
  return st;
}

double apply_stencil(const Stencil& stencil, std::span<const double> values) {
  double acc = 0.0;
  for (const auto& tap : stencil) acc += tap.weight * values[tap.index];
  return acc;
}

LocalJet<double> evaluate_jet(const NodeStencil& st, std::span<const double> values) {
  return {apply_stencil(st.u, values),   apply_stencil(st.ut, values),  apply_stencil(st.us, values),
          apply_stencil(st.utt, values), apply_stencil(st.uts, values), apply_stencil(st.uss, values)};
}

}  // namespace cmc
