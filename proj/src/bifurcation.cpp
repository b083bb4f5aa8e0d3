#include "cmc/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SparseLU>

#include "cmc/dual.hpp"
#include "cmc/errors.hpp"
#include "cmc/graph_curvature.hpp"
#include "cmc/oracle.hpp"
#include "cmc/spectrum.hpp"

namespace cmc {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using D6 = Dual<6>;

LocalJet<D6> dual_jet(const LocalJet<double>& j) {
  return {D6::variable(j.u, 0),   D6::variable(j.ut, 1),  D6::variable(j.us, 2),
          D6::variable(j.utt, 3), D6::variable(j.uts, 4), D6::variable(j.uss, 5)};
}

const Stencil& component(const NodeStencil& st, int c) {
  switch (c) {
    case 0: return st.u;
    case 1: return st.ut;
    case 2: return st.us;
    case 3: return st.utt;
    case 4: return st.uts;
    default: return st.uss;
  }
}

void check_guard(const CylinderConfig& config, const ScalarField& u) {
  const double guard = kGraphGuard * config.r;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (!(std::abs(u[k]) < guard)) {
      fail(ErrorCode::GraphDegenerate, "|u| reached " + std::to_string(std::abs(u[k])));
    }
  }
}

}  // namespace

ResidualSystem::ResidualSystem(const CylinderConfig& config, const Grid& grid)
    : config_(config), grid_(grid) {
  config_.validate();
  kinds_.resize(grid.size());
  stencils_.resize(grid.size());
  for (int i = 0; i < grid.nt; ++i) {
    for (int j = 0; j < grid.ns; ++j) {
      const std::size_t p = grid.index(i, j);
      if (is_dirichlet_node(config, grid, i, j)) {
        kinds_[p] = Row::Dirichlet;
      } else if (config.has_free_boundary() && j == grid.ns - 1) {
        kinds_[p] = Row::Contact;
      } else {
        kinds_[p] = Row::Curvature;
      }
      stencils_[p] = node_stencil(grid, i, j);
    }
  }
  for (int j = 0; j < grid.ns; ++j) tilts_.push_back(displacement_tilt(config, grid.s(j)));
}

ScalarField ResidualSystem::residual(const ScalarField& u, double H) const {
  if (!u.grid().same_shape(grid_)) fail(ErrorCode::InvalidConfig, "field grid mismatch");
  check_guard(config_, u);
  const auto vals = u.values();
  const double r = config_.r;
  const double sg = std::sin(config_.gamma);
  const double cg = std::cos(config_.gamma);
  ScalarField out(grid_);
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    const int j = static_cast<int>(p % grid_.ns);
    switch (kinds_[p]) {
      case Row::Dirichlet: out[p] = u[p]; break;
      case Row::Contact: {
        const auto jet = evaluate_jet(stencils_[p], vals);
        out[p] = graph_contact_cosine(jet, r, tilts_[j], sg, cg) - cg;
        break;
      }
      case Row::Curvature: {
        const auto jet = evaluate_jet(stencils_[p], vals);
        if (!(graph_metric_determinant(jet, r, tilts_[j]) > 0.0)) {
          fail(ErrorCode::DegenerateMetric, "EG - F^2 <= 0 in residual");
        }
        out[p] = 2.0 * (H - graph_mean_curvature(jet, r, tilts_[j]));
        break;
      }
    }
  }
  return out;
}

SpMat ResidualSystem::jacobian(const ScalarField& u) const {
  const auto vals = u.values();
  const double r = config_.r;
  const double sg = std::sin(config_.gamma);
  const double cg = std::cos(config_.gamma);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(grid_.size() * 16);
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    const int row = static_cast<int>(p);
    if (kinds_[p] == Row::Dirichlet) {
      trip.emplace_back(row, row, 1.0);
      continue;
    }
    const int j = static_cast<int>(p % grid_.ns);
    const auto jet = dual_jet(evaluate_jet(stencils_[p], vals));
    D6 value;
    double scale;
    if (kinds_[p] == Row::Contact) {
      value = graph_contact_cosine(jet, r, tilts_[j], sg, cg);
      scale = 1.0;
    } else {
      value = graph_mean_curvature(jet, r, tilts_[j]);
      scale = -2.0;
    }
    for (int c = 0; c < 6; ++c) {
      if (value.d[c] == 0.0) continue;
      for (const Tap& tap : component(stencils_[p], c)) {
        trip.emplace_back(row, static_cast<int>(tap.index), scale * value.d[c] * tap.weight);
      }
    }
  }
  const auto n = static_cast<int>(grid_.size());
  SpMat J(n, n);
  J.setFromTriplets(trip.begin(), trip.end());
  J.makeCompressed();
  return J;
}

ScalarField residual(const CylinderConfig& config, const Grid& grid, const ScalarField& u,
                     double H) {
  return ResidualSystem(config, grid).residual(u, H);
}

// ---------------------------------------------------------------------------

namespace {

// Linear side condition a.u + aH H = rhs appended to F = 0.
struct Constraint {
  Eigen::VectorXd a;
  double aH = 0.0;
  double rhs = 0.0;
};

struct NewtonOutcome {
  ScalarField u;
  double H = 0.0;
  int iterations = 0;
  double residual_norm = 0.0;
};

Eigen::VectorXd weighted(const CylinderConfig& config, const ScalarField& f) {
  const Grid& g = f.grid();
  const double cell = config.r * g.dt() * g.ds();
  Eigen::VectorXd a(static_cast<Eigen::Index>(g.size()));
  for (int i = 0; i < g.nt; ++i) {
    for (int j = 0; j < g.ns; ++j) {
      const std::size_t p = g.index(i, j);
      a[static_cast<Eigen::Index>(p)] = cell * g.trapezoid_weight(i, j) * f[p];
    }
  }
  return a;
}

SpMat bordered_matrix(const ResidualSystem& sys, const ScalarField& u, const Constraint& c) {
  const SpMat Ju = sys.jacobian(u);
  const auto n = static_cast<int>(Ju.rows());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(Ju.nonZeros() + 2 * n + 1);
  for (int k = 0; k < Ju.outerSize(); ++k) {
    for (SpMat::InnerIterator it(Ju, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  }
  for (int p = 0; p < n; ++p) {
    const double dh = sys.d_dH(static_cast<std::size_t>(p));
    if (dh != 0.0) trip.emplace_back(p, n, dh);
    if (c.a[p] != 0.0) trip.emplace_back(n, p, c.a[p]);
  }
  if (c.aH != 0.0) trip.emplace_back(n, n, c.aH);
  SpMat J(n + 1, n + 1);
  J.setFromTriplets(trip.begin(), trip.end());
  J.makeCompressed();
  return J;
}

NewtonOutcome newton(const ResidualSystem& sys, ScalarField u, double H, const Constraint& c,
                     const NewtonOptions& opt) {
  const auto n = static_cast<Eigen::Index>(sys.grid().size());
  double prev_step = std::numeric_limits<double>::infinity();
  int growth = 0;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  for (int it = 0;; ++it) {
    const ScalarField F = sys.residual(u, H);
    Eigen::VectorXd rhs(n + 1);
    double fnorm = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      rhs[p] = -F[static_cast<std::size_t>(p)];
      fnorm = std::max(fnorm, std::abs(rhs[p]));
    }
    const double g = c.a.dot(Eigen::Map<const Eigen::VectorXd>(u.values().data(), n)) + c.aH * H - c.rhs;
    rhs[n] = -g;
    if (!std::isfinite(fnorm) || !std::isfinite(g)) fail(ErrorCode::NewtonDiverged, "non-finite residual");
    if (std::max(fnorm, std::abs(g)) < opt.tol) return {std::move(u), H, it, fnorm};
    if (it >= opt.max_iter) break;

    const SpMat J = bordered_matrix(sys, u, c);
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) fail(ErrorCode::NewtonDiverged, "singular Newton matrix");
    const Eigen::VectorXd delta = lu.solve(rhs);
    const double step = delta.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(step)) fail(ErrorCode::NewtonDiverged, "non-finite Newton step");
    growth = step > prev_step ? growth + 1 : 0;
    if (growth >= 2) fail(ErrorCode::NewtonDiverged, "Newton step grew twice in a row");
    prev_step = step;
    for (Eigen::Index p = 0; p < n; ++p) u[static_cast<std::size_t>(p)] += delta[p];
    H += delta[n];
  }
  fail(ErrorCode::NewtonDiverged, "no convergence in " + std::to_string(opt.max_iter) + " iterations");
}

void orient_kernel(ScalarField& k) {
  const Grid& g = k.grid();
  const double mx = k.max_abs();
  const double probe = k(0, g.ns / 2);
  double sign = 1.0;
  if (std::abs(probe) > 1e-6 * mx) {
    sign = probe < 0.0 ? -1.0 : 1.0;
  } else {
    for (std::size_t p = 0; p < k.size(); ++p) {
      if (std::abs(k[p]) > 1e-3 * mx) {
        sign = k[p] < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
  }
  k *= sign;
}

}  // namespace

BifurcationPoint locate_bifurcation(const CylinderConfig& config, TMode t_mode,
                                    const BifurcationOptions& options) {
  config.validate();
  const double T = bifurcation_period(config);
  const double extent = t_mode == TMode::Periodic ? T : 0.5 * T;
  BifurcationPoint bp;
  bp.config = config;
  bp.T = T;
  bp.H0 = 0.5 / config.r;
  bp.grid = build_grid(config, options.nt, options.ns, extent, t_mode);

  const auto pairs = full_2d_jacobi_spectrum(config, bp.grid, options.eigenpairs);
  std::size_t best = 0;
  for (std::size_t k = 1; k < pairs.size(); ++k) {
    if (std::abs(pairs[k].lambda) < std::abs(pairs[best].lambda)) best = k;
  }
  bp.kernel = pairs[best].field;
  orient_kernel(bp.kernel);
  bp.nominal_lambda = pairs[best].lambda;

  // The eigenvectors of the separable discrete operator do not depend on r,
  // so along L_H = D_tt + 4H^2 (D_ss + 1) the eigenvalue is a + 4H^2 b.
  const JacobiParts parts = jacobi_parts(config, bp.grid, bp.kernel);
  const double a = -inner_product(config, bp.kernel, parts.tt);
  const double b = -inner_product(config, bp.kernel, parts.ss1);
  if (!(a > 0.0 && b < 0.0)) {
    fail(ErrorCode::NoBifurcation, "no zero crossing of the kernel eigenvalue in H");
  }
  bp.H_star = 0.5 * std::sqrt(-a / b);
  const auto search = options.search.value_or(std::pair{0.9 * bp.H0, 1.1 * bp.H0});
  if (!(bp.H_star >= search.first && bp.H_star <= search.second)) {
    fail(ErrorCode::NoBifurcation, "crossing H* = " + std::to_string(bp.H_star) +
                                       " outside the search interval");
  }
  bp.kernel_lambda = a + 4.0 * bp.H_star * bp.H_star * b;

  const JacobiMatrix jm = assemble_jacobi(config.with_radius(0.5 / bp.H_star), bp.grid);
  const double delta = 1e-4 / (config.r * config.r);
  bp.kernel_dim = count_eigenvalues_below(jm, delta) - count_eigenvalues_below(jm, -delta);
  if (bp.kernel_dim != 1) {
    fail(ErrorCode::DegenerateKernel,
         "kernel dimension " + std::to_string(bp.kernel_dim) + " at the crossing");
  }

  bp.transversality = 8.0 * bp.H0 * inner_product(config, bp.kernel, parts.ss1);
  return bp;
}

BranchState branch_switch(const BifurcationPoint& point, double epsilon,
                          const NewtonOptions& newton_opt) {
  BranchState st;
  st.u = ScalarField(point.grid);
  st.H = point.H0;
  if (epsilon == 0.0) return st;

  const ResidualSystem sys(point.config, point.grid);
  Constraint c;
  c.a = weighted(point.config, point.kernel);
  c.rhs = epsilon;
  const NewtonOutcome out = newton(sys, epsilon * point.kernel, point.H0, c, newton_opt);
  st.u = out.u;
  st.H = out.H;
  st.epsilon = inner_product(point.config, st.u, point.kernel);
  st.residual_norm = out.residual_norm;
  st.newton_iterations = out.iterations;
  return st;
}

std::vector<BranchState> continue_branch(const BifurcationPoint& point, const BranchState& start,
                                         int steps, double ds,
                                         const ContinuationOptions& options) {
  if (steps < 0 || ds == 0.0 || !std::isfinite(ds)) {
    fail(ErrorCode::InvalidConfig, "continuation needs steps >= 0 and ds != 0");
  }
  if (start.epsilon == 0.0) {
    fail(ErrorCode::InvalidConfig, "continuation must start off the trivial branch (epsilon != 0)");
  }
  const CylinderConfig& config = point.config;
  const ResidualSystem sys(config, point.grid);
  const auto n = static_cast<Eigen::Index>(point.grid.size());

  auto metric_dot = [&](const ScalarField& u1, double h1, const ScalarField& u2, double h2) {
    return inner_product(config, u1, u2) + h1 * h2;
  };

  // First tangent: null vector of [DF; <., kernel>].
  ScalarField tu(point.grid);
  double tH = 0.0;
  {
    Constraint c;
    c.a = weighted(config, point.kernel);
    const SpMat J = bordered_matrix(sys, start.u, c);
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu(J);
    if (lu.info() != Eigen::Success) fail(ErrorCode::NewtonDiverged, "singular tangent system");
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n + 1);
    e[n] = 1.0;
    const Eigen::VectorXd z = lu.solve(e);
    for (Eigen::Index p = 0; p < n; ++p) tu[static_cast<std::size_t>(p)] = z[p];
    tH = z[n];
    const double nrm = std::sqrt(metric_dot(tu, tH, tu, tH));
    double sign = (start.epsilon > 0.0 ? 1.0 : -1.0) * (ds > 0.0 ? 1.0 : -1.0);
    tu *= sign / nrm;
    tH *= sign / nrm;
  }

  const double ds0 = std::abs(ds);
  const double ds_min = ds0 * options.ds_min_factor;
  const double ds_max = ds0 * options.ds_max_factor;
  double h = ds0;
  int easy = 0;

  std::vector<BranchState> out{start};
  BranchState prev = start;
  while (static_cast<int>(out.size()) <= steps) {
    Constraint c;
    c.a = weighted(config, tu);
    c.aH = tH;
    c.rhs = metric_dot(prev.u, prev.H, tu, tH) + h;
    ScalarField guess = prev.u;
    for (std::size_t p = 0; p < guess.size(); ++p) guess[p] += h * tu[p];
    NewtonOutcome res;
    try {
      res = newton(sys, std::move(guess), prev.H + h * tH, c, options.newton);
    } catch (const Error& e) {
      const ErrorCode code = e.code();
      if (code != ErrorCode::NewtonDiverged && code != ErrorCode::GraphDegenerate &&
          code != ErrorCode::DegenerateMetric) {
        throw;
      }
      h *= 0.5;
      easy = 0;
      if (h < ds_min) {
        fail(ErrorCode::ContinuationStalled,
             "step fell below ds/64 after " + std::to_string(out.size() - 1) + " steps");
      }
      continue;
    }
    BranchState st;
    st.u = res.u;
    st.H = res.H;
    st.epsilon = inner_product(config, st.u, point.kernel);
    st.arclength = prev.arclength + h;
    st.residual_norm = res.residual_norm;
    st.newton_iterations = res.iterations;

    // Secant tangent.
    ScalarField du = st.u - prev.u;
    double dH = st.H - prev.H;
    const double nrm = std::sqrt(metric_dot(du, dH, du, dH));
    if (nrm > 0.0) {
      tu = (1.0 / nrm) * du;
      tH = dH / nrm;
    }
    out.push_back(st);
    prev = std::move(st);

    if (res.iterations <= options.easy_iterations) {
      if (++easy >= options.easy_steps_to_grow) {
        h = std::min(2.0 * h, ds_max);
        easy = 0;
      }
    } else {
      easy = 0;
    }
  }
  return out;
}

double check_alexandrov_symmetry(const CylinderConfig& config, const BranchState& state) {
  if (config.scenario != Scenario::PlanarStrip) {
    fail(ErrorCode::InvalidConfig, "mid-plane symmetry check applies to planar strips");
  }
  const Grid& g = state.u.grid();
  double defect = 0.0;
  for (int i = 0; i < g.nt; ++i) {
    for (int j = 0; j < g.ns; ++j) {
      defect = std::max(defect, std::abs(state.u(i, j) - state.u(i, g.ns - 1 - j)));
    }
  }
  return defect;
}

double non_rotationality(const BranchState& state) {
  const Grid& g = state.u.grid();
  double best = 0.0;
  for (int j = 0; j < g.ns; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < g.nt; ++i) {
      lo = std::min(lo, state.u(i, j));
      hi = std::max(hi, state.u(i, j));
    }
    best = std::max(best, hi - lo);
  }
  return best;
}

QuadraticFit fit_quadratic(const std::vector<BranchState>& states) {
  QuadraticFit fit;
  const double n = static_cast<double>(states.size());
  if (states.size() < 2) fail(ErrorCode::InvalidConfig, "need at least two states to fit");
  double sx = 0, sy = 0;
  for (const auto& s : states) {
    sx += s.epsilon * s.epsilon;
    sy += s.H;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& s : states) {
    const double dx = s.epsilon * s.epsilon - mx;
    const double dy = s.H - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) fail(ErrorCode::InvalidConfig, "all states share one amplitude");
  fit.c2 = sxy / sxx;
  fit.c0 = my - fit.c2 * mx;
  double ss_res = 0.0;
  for (const auto& s : states) {
    const double e = s.H - (fit.c0 + fit.c2 * s.epsilon * s.epsilon);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

}  // namespace cmc
