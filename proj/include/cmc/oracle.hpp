#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "cmc/geometry.hpp"
#include "cmc/spectrum.hpp"

namespace cmc {

// -g'' = mu g on [s_lo, s_hi], g(s_lo) = 0, right end Dirichlet or
// g'(s_hi) - rho g(s_hi) = 0.
enum class RightBc { Dirichlet, Robin };

struct SturmProblem {
  double s_lo = 0.0;
  double s_hi = 1.0;
  RightBc right_bc = RightBc::Dirichlet;
  double rho = 0.0;
  int ns = 1001;  // grid points including both ends
};

// Arc problem of a cylinder: Dirichlet-Dirichlet for the planar strip,
// Dirichlet-Robin (rho = robin_rho()) for the wedge.
SturmProblem arc_problem(const CylinderConfig& config, int ns);

struct EigenResult {
  std::vector<double> mu;                  // ascending
  std::vector<std::vector<double>> modes;  // ns samples each, max-norm 1, positive slope at s_lo
};

// Symmetric tridiagonal matrix: diag[0..n), off[i] couples i and i+1.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;
};

// Number of eigenvalues strictly below x (Sturm sequence).
int sturm_count(const Tridiagonal& t, double x);

// k-th smallest eigenvalue (0-based) by bisection to 1e-12 (1 + |mu|).
double tridiagonal_eigenvalue(const Tridiagonal& t, int k);

// Symmetrized second-difference matrix of the problem. The Robin row comes
// from the ghost node, made symmetric by the half-cell weight.
Tridiagonal assemble_sturm(const SturmProblem& p);

EigenResult sturm_eigen(const SturmProblem& p, int m, bool want_modes = false);

struct ModalOptions {
  // Combine ns and 2 ns - 1 to cancel the O(ds^2) term.
  bool richardson = true;
  // When > 0 the axial wavenumber w^2 is replaced by the symbol
  // (4/dt^2) sin^2(w dt / 2) of a 3-point stencil on nt samples, which is
  // what a 2D grid of that size sees.
  int nt = 0;
};

// m smallest lambda = (mu_k - 1)/r^2 + w_n^2. h_or_T is the length h for
// DirichletEnds (w = n pi/h, n >= 1) and the period T for Periodic and
// HalfPeriodNeumann (w = 2 pi n/T, n >= 0).
std::vector<SpectrumEntry> modal_jacobi_spectrum(const CylinderConfig& config, double h_or_T,
                                                 TMode t_mode, int m, int ns,
                                                 ModalOptions options = {});

// Every (k, n) with k <= k_max and n_first <= n <= n_max, sorted; n_first is 1
// for DirichletEnds and 0 otherwise.
std::vector<SpectrumEntry> modal_jacobi_table(const CylinderConfig& config, double h_or_T,
                                              TMode t_mode, int k_max, int n_max, int ns,
                                              ModalOptions options = {});

// Assembled -L on the free (non-Dirichlet) nodes in symmetric form
// S = W^{1/2} A W^{-1/2}, W the trapezoid weights.
struct JacobiMatrix {
  Eigen::SparseMatrix<double> S;
  std::vector<std::size_t> free_nodes;  // grid index of each row
  std::vector<double> sqrt_w;           // per row
};
JacobiMatrix assemble_jacobi(const CylinderConfig& config, const Grid& grid);

// Eigenvalues of -L below x, from the LDL^T inertia of S - x I.
int count_eigenvalues_below(const JacobiMatrix& jm, double x);

struct EigenPair {
  double lambda = 0.0;
  ScalarField field;  // unit quadrature norm
};

// m smallest eigenpairs of -L by shift-invert subspace iteration with
// Rayleigh-Ritz. ConvergenceFailure after 500 iterations.
std::vector<EigenPair> full_2d_jacobi_spectrum(const CylinderConfig& config, const Grid& grid,
                                               int m);

// Inverse iteration at a shift from a given start field. A start with zero
// norm on the free nodes is rejected (InvalidConfig).
EigenPair inverse_iteration(const CylinderConfig& config, const Grid& grid, double shift,
                            const ScalarField& start, int max_iter = 500);

}  // namespace cmc
