#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "cmc/geometry.hpp"
#include "cmc/stencil.hpp"

namespace cmc {

// Discrete F(u, H) on a fixed reference cylinder of radius r:
//   Dirichlet nodes        u
//   Gamma_2 column (wedge) <n, N_tilde> - cos(gamma)
//   everything else        2 (H - H(u))
class ResidualSystem {
 public:
  enum class Row { Dirichlet, Curvature, Contact };

  ResidualSystem(const CylinderConfig& config, const Grid& grid);

  const CylinderConfig& config() const { return config_; }
  const Grid& grid() const { return grid_; }
  Row row_kind(std::size_t node) const { return kinds_[node]; }

  ScalarField residual(const ScalarField& u, double H) const;

  // d residual / d u (square, one row and column per node).
  Eigen::SparseMatrix<double> jacobian(const ScalarField& u) const;

  // d residual / d H: 2 on curvature rows, 0 elsewhere.
  double d_dH(std::size_t node) const { return kinds_[node] == Row::Curvature ? 2.0 : 0.0; }

 private:
  CylinderConfig config_;
  Grid grid_;
  std::vector<Row> kinds_;
  std::vector<NodeStencil> stencils_;
  std::vector<TiltProfile> tilts_;  // per s column
};

ScalarField residual(const CylinderConfig& config, const Grid& grid, const ScalarField& u, double H);

struct BifurcationOptions {
  int nt = 64;
  int ns = 64;
  // Search interval for the crossing H*; defaults to [0.9, 1.1] / (2r).
  std::optional<std::pair<double, double>> search;
  int eigenpairs = 4;
};

struct BifurcationPoint {
  CylinderConfig config;
  Grid grid;
  double H0 = 0.0;      // 1/(2r), where u = 0 solves the discrete problem exactly
  double H_star = 0.0;  // where the discrete L_H = D_tt + 4H^2 (D_ss + 1) has the zero eigenvalue
  double T = 0.0;
  ScalarField kernel;   // unit quadrature norm, positive at (t = 0, mid-arc)
  int kernel_dim = 0;   // eigenvalues of -L_{H*} in (-1e-4/r^2, 1e-4/r^2)
  double nominal_lambda = 0.0;  // kernel eigenvalue at H0
  double kernel_lambda = 0.0;   // at H_star
  double transversality = 0.0;  // <u0, 8 H0 (u0_ss + u0)>
};

// Extent of the t grid is T for Periodic and T/2 otherwise (cosine modes with
// mirror ends, sine modes with Dirichlet ends). Periodic grids carry a
// translation pair and end in DegenerateKernel.
BifurcationPoint locate_bifurcation(const CylinderConfig& config,
                                    TMode t_mode = TMode::HalfPeriodNeumann,
                                    const BifurcationOptions& options = {});

struct BranchState {
  ScalarField u;
  double H = 0.0;
  double epsilon = 0.0;  // <u, kernel>
  double arclength = 0.0;
  double residual_norm = 0.0;  // max norm of F
  int newton_iterations = 0;
};

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 30;
};

// Newton on {F(u, H) = 0, <u, kernel> = epsilon} from (epsilon kernel, H0).
// epsilon = 0 returns the trivial state: there the system is singular along
// the cylinder family through the support lines.
BranchState branch_switch(const BifurcationPoint& point, double epsilon,
                          const NewtonOptions& newton = {});

struct ContinuationOptions {
  NewtonOptions newton;
  double ds_max_factor = 4.0;   // ds_max = factor * |ds|
  double ds_min_factor = 1.0 / 64.0;
  int easy_iterations = 3;      // a step this cheap counts toward doubling
  int easy_steps_to_grow = 3;
};

// Pseudo-arclength continuation in the metric <u, u>_W + H^2. The first
// tangent orients toward growing |epsilon|; ds < 0 reverses it. Returns
// start followed by the accepted states.
std::vector<BranchState> continue_branch(const BifurcationPoint& point, const BranchState& start,
                                         int steps, double ds,
                                         const ContinuationOptions& options = {});

// max |u(t, s) - u(t, s_lo + s_hi - s)|; planar only.
double check_alexandrov_symmetry(const CylinderConfig& config, const BranchState& state);

// max over s columns of (max_t u - min_t u).
double non_rotationality(const BranchState& state);

// Least squares H = c0 + c2 eps^2 over the states.
struct QuadraticFit {
  double c0 = 0.0;
  double c2 = 0.0;
  double r_squared = 0.0;
};
QuadraticFit fit_quadratic(const std::vector<BranchState>& states);

}  // namespace cmc
