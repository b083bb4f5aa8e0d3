#include "cmc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "cmc/errors.hpp"

namespace cmc {

using std::numbers::pi;

SturmProblem arc_problem(const CylinderConfig& config, int ns) {
  config.validate();
  SturmProblem p;
  p.s_lo = config.s_lo();
  p.s_hi = config.s_hi();
  p.ns = ns;
  if (config.has_free_boundary()) {
    p.right_bc = RightBc::Robin;
    p.rho = config.robin_rho();
  }
  return p;
}

Tridiagonal assemble_sturm(const SturmProblem& p) {
  if (p.ns < 4 || !(p.s_hi > p.s_lo)) fail(ErrorCode::InvalidConfig, "bad Sturm problem");
  const double h = (p.s_hi - p.s_lo) / (p.ns - 1);
  const double ih2 = 1.0 / (h * h);
  const int n = p.right_bc == RightBc::Dirichlet ? p.ns - 2 : p.ns - 1;
  Tridiagonal t;
  t.diag.assign(n, 2.0 * ih2);
  t.off.assign(n - 1, -ih2);
  if (p.right_bc == RightBc::Robin) {
    // Ghost g_{N+1} = g_{N-1} + 2 h rho g_N, then the half-cell weight.
    t.diag[n - 1] = 2.0 * (1.0 - h * p.rho) * ih2;
    t.off[n - 2] = -std::sqrt(2.0) * ih2;
  }
  return t;
}

int sturm_count(const Tridiagonal& t, double x) {
  const std::size_t n = t.diag.size();
  const double pivmin = std::numeric_limits<double>::min() * 1e3;
  int count = 0;
  double q = t.diag[0] - x;
  for (std::size_t i = 0;; ++i) {
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
    if (i + 1 == n) break;
    q = t.diag[i + 1] - x - t.off[i] * t.off[i] / q;
  }
  return count;
}

namespace {

void gershgorin(const Tridiagonal& t, double& lo, double& hi) {
  const std::size_t n = t.diag.size();
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double rad = 0.0;
    if (i > 0) rad += std::abs(t.off[i - 1]);
    if (i + 1 < n) rad += std::abs(t.off[i]);
    lo = std::min(lo, t.diag[i] - rad);
    hi = std::max(hi, t.diag[i] + rad);
  }
}

// Solve (T - shift) y = b with partial pivoting (gtsv style).
std::vector<double> shifted_tridiagonal_solve(const Tridiagonal& t, double shift,
                                              std::vector<double> b) {
  const std::size_t n = t.diag.size();
  std::vector<double> dl(t.off), d(t.diag), du(t.off), du2(n, 0.0);
  for (double& v : d) v -= shift;
  const double tiny = 1e-300;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (std::abs(d[i]) < tiny) d[i] = tiny;
      const double f = dl[i] / d[i];
      d[i + 1] -= f * du[i];
      b[i + 1] -= f * b[i];
      dl[i] = 0.0;
    } else {
      const double f = d[i] / dl[i];
      d[i] = dl[i];
      const double tmp = d[i + 1];
      d[i + 1] = du[i] - f * tmp;
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -f * du2[i];
      }
      du[i] = tmp;
      std::swap(b[i], b[i + 1]);
      b[i + 1] -= f * b[i];
    }
  }
  if (std::abs(d[n - 1]) < tiny) d[n - 1] = tiny;
  b[n - 1] /= d[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
  for (std::size_t k = n - 2; k-- > 0;) {
    b[k] = (b[k] - du[k] * b[k + 1] - du2[k] * b[k + 2]) / d[k];
  }
  return b;
}

}  // namespace

double tridiagonal_eigenvalue(const Tridiagonal& t, int k) {
  const int n = static_cast<int>(t.diag.size());
  if (k < 0 || k >= n) fail(ErrorCode::InvalidConfig, "eigenvalue index out of range");
  double lo, hi;
  gershgorin(t, lo, hi);
  const double pad = 1e-12 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  lo -= pad;
  hi += pad;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-12 * (1.0 + std::abs(mid)) || mid <= lo || mid >= hi) break;
    if (sturm_count(t, mid) > k) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  if (sturm_count(t, lo) > k || sturm_count(t, hi) <= k) {
    fail(ErrorCode::ConvergenceFailure, "bisection lost eigenvalue " + std::to_string(k));
  }
  return 0.5 * (lo + hi);
}

EigenResult sturm_eigen(const SturmProblem& p, int m, bool want_modes) {
  if (p.ns < 64) fail(ErrorCode::InvalidConfig, "sturm_eigen needs ns >= 64");
  if (m < 1 || m > p.ns / 4) fail(ErrorCode::InvalidConfig, "sturm_eigen needs 1 <= m <= ns/4");
  const Tridiagonal t = assemble_sturm(p);
  EigenResult res;
  res.mu.reserve(m);
  for (int k = 0; k < m; ++k) res.mu.push_back(tridiagonal_eigenvalue(t, k));
  if (!want_modes) return res;

  const std::size_t n = t.diag.size();
  const bool robin = p.right_bc == RightBc::Robin;
  for (int k = 0; k < m; ++k) {
    const double mu = res.mu[k];
    const double shift = mu + 1e-10 * (1.0 + std::abs(mu));
    std::vector<double> x(n);
    // Deterministic, non-symmetric start.
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.5 * std::sin(1.7 * i + 0.3 * k);
    for (int it = 0; it < 3; ++it) {
      x = shifted_tridiagonal_solve(t, shift, x);
      double nrm = 0.0;
      for (double v : x) nrm += v * v;
      nrm = std::sqrt(nrm);
      for (double& v : x) v /= nrm;
    }
    std::vector<double> g(p.ns, 0.0);
    for (std::size_t i = 0; i < n; ++i) g[i + 1] = x[i];
    if (robin) g[p.ns - 1] *= std::sqrt(2.0);
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    const double sign = g[1] < 0.0 ? -1.0 : 1.0;
    for (double& v : g) v *= sign / gmax;
    res.modes.push_back(std::move(g));
  }
  return res;
}

std::vector<SpectrumEntry> modal_jacobi_table(const CylinderConfig& config, double h_or_T,
                                              TMode t_mode, int k_max, int n_max, int ns,
                                              ModalOptions options) {
  config.validate();
  if (!(h_or_T > 0.0)) fail(ErrorCode::InvalidConfig, "length/period must be positive");
  if (k_max < 1 || n_max < 0) fail(ErrorCode::InvalidConfig, "bad mode bounds");
  SturmProblem p = arc_problem(config, ns);
  std::vector<double> mu = sturm_eigen(p, k_max).mu;
  if (options.richardson) {
    p.ns = 2 * ns - 1;
    const std::vector<double> fine = sturm_eigen(p, k_max).mu;
    for (int k = 0; k < k_max; ++k) mu[k] = (4.0 * fine[k] - mu[k]) / 3.0;
  }

  const bool dirichlet = t_mode == TMode::DirichletEnds;
  const int n_first = dirichlet ? 1 : 0;
  int n_last = n_max;
  // Dirichlet: w = n pi / h. Periodic and half period: w = 2 pi n / T.
  const double w1 = dirichlet ? pi / h_or_T : 2.0 * pi / h_or_T;
  const double extent = t_mode == TMode::HalfPeriodNeumann ? 0.5 * h_or_T : h_or_T;
  double dt = 0.0;
  if (options.nt > 0) {
    const int nt = options.nt;
    if (nt < 4) fail(ErrorCode::InvalidConfig, "nt must be >= 4");
    dt = t_mode == TMode::Periodic ? extent / nt : extent / (nt - 1);
    const int n_grid = dirichlet ? nt - 2 : t_mode == TMode::Periodic ? nt / 2 : nt - 1;
    n_last = std::min(n_last, n_grid);
  }
  auto axial = [&](int n) {
    const double wn = n * w1;
    if (dt == 0.0) return wn * wn;
    const double sn = std::sin(0.5 * wn * dt);
    return 4.0 * sn * sn / (dt * dt);
  };

  const double r2 = config.r * config.r;
  std::vector<SpectrumEntry> all;
  for (int k = 0; k < k_max; ++k) {
    const double c = std::sqrt(std::abs(mu[k]));
    const ArcBranch b = mu[k] > 0.0   ? ArcBranch::Oscillatory
                        : mu[k] < 0.0 ? ArcBranch::Exponential
                                      : ArcBranch::Linear;
    for (int n = n_first; n <= n_last; ++n) {
      all.push_back({k + 1, n, (mu[k] - 1.0) / r2 + axial(n), c, b});
    }
  }
  std::sort(all.begin(), all.end(), spectrum_order);
  return all;
}

std::vector<SpectrumEntry> modal_jacobi_spectrum(const CylinderConfig& config, double h_or_T,
                                                 TMode t_mode, int m, int ns,
                                                 ModalOptions options) {
  if (m < 1) fail(ErrorCode::InvalidConfig, "m must be >= 1");
  // lambda grows in k and n, so the m smallest need k <= m and m axial modes.
  const int n_max = t_mode == TMode::DirichletEnds ? m : m - 1;
  auto all = modal_jacobi_table(config, h_or_T, t_mode, m, n_max, ns, options);
  if (all.size() > static_cast<std::size_t>(m)) all.resize(m);
  return all;
}

JacobiMatrix assemble_jacobi(const CylinderConfig& config, const Grid& grid) {
  config.validate();
  const int nt = grid.nt;
  const int ns = grid.ns;
  std::vector<long> row_of(grid.size(), -1);
  JacobiMatrix jm;
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < ns; ++j) {
      if (is_dirichlet_node(config, grid, i, j)) continue;
      row_of[grid.index(i, j)] = static_cast<long>(jm.free_nodes.size());
      jm.free_nodes.push_back(grid.index(i, j));
      jm.sqrt_w.push_back(std::sqrt(grid.trapezoid_weight(i, j)));
    }
  }
  const double idt2 = 1.0 / (grid.dt() * grid.dt());
  const double ds = grid.ds();
  const double ids2 = 1.0 / (ds * ds);
  const double ir2 = 1.0 / (config.r * config.r);
  const double rho = config.robin_rho();

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(jm.free_nodes.size() * 5);
  for (std::size_t row = 0; row < jm.free_nodes.size(); ++row) {
    const int i = static_cast<int>(jm.free_nodes[row] / ns);
    const int j = static_cast<int>(jm.free_nodes[row] % ns);
    // Entries of A = -L; the symmetric form rescales each by sqrt(w_a / w_b).
    auto put = [&](int ii, int jj, double a) {
      const long col = row_of[grid.index(ii, jj)];
      if (col < 0) return;  // Dirichlet neighbour carries zero
      trip.emplace_back(static_cast<int>(row), static_cast<int>(col),
                        -a * jm.sqrt_w[row] / jm.sqrt_w[col]);
    };
    int lo = i - 1, hi = i + 1;
    if (grid.t_mode == TMode::Periodic) {
      lo = (lo + nt) % nt;
      hi %= nt;
    } else if (grid.t_mode == TMode::HalfPeriodNeumann) {
      if (lo < 0) lo = 1;
      if (hi > nt - 1) hi = nt - 2;
    }
    put(lo, j, idt2);
    put(hi, j, idt2);
    double center = -2.0 * idt2 + ir2;
    if (j == ns - 1) {
      put(i, j - 1, 2.0 * ir2 * ids2);
      center += (-2.0 + 2.0 * ds * rho) * ir2 * ids2;
    } else {
      put(i, j - 1, ir2 * ids2);
      put(i, j + 1, ir2 * ids2);
      center += -2.0 * ir2 * ids2;
    }
    put(i, j, center);
  }
  const auto n = static_cast<int>(jm.free_nodes.size());
  jm.S.resize(n, n);
  jm.S.setFromTriplets(trip.begin(), trip.end());
  jm.S.makeCompressed();
  return jm;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

SpMat shifted(const SpMat& S, double x) {
  SpMat I(S.rows(), S.cols());
  I.setIdentity();
  SpMat out = S - x * I;
  out.makeCompressed();
  return out;
}

void gershgorin(const SpMat& S, double& lo, double& hi) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(S.rows());
  Eigen::VectorXd rad = Eigen::VectorXd::Zero(S.rows());
  for (int k = 0; k < S.outerSize(); ++k) {
    for (SpMat::InnerIterator it(S, k); it; ++it) {
      if (it.row() == it.col()) {
        diag[it.row()] += it.value();
      } else {
        rad[it.row()] += std::abs(it.value());
      }
    }
  }
  lo = (diag - rad).minCoeff();
  hi = (diag + rad).maxCoeff();
}

ScalarField to_field(const CylinderConfig& config, const Grid& grid, const JacobiMatrix& jm,
                     const Eigen::VectorXd& x) {
  ScalarField u(grid);
  for (std::size_t row = 0; row < jm.free_nodes.size(); ++row) {
    u[jm.free_nodes[row]] = x[static_cast<int>(row)] / jm.sqrt_w[row];
  }
  const double nrm = l2_norm(config, u);
  double sign = 1.0;
  const double thresh = 1e-8 * u.max_abs();
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (std::abs(u[k]) > thresh) {
      sign = u[k] < 0.0 ? -1.0 : 1.0;
      break;
    }
  }
  u *= sign / nrm;
  return u;
}

}  // namespace

int count_eigenvalues_below(const JacobiMatrix& jm, double x) {
  Eigen::SimplicialLDLT<SpMat> ldlt(shifted(jm.S, x));
  if (ldlt.info() != Eigen::Success) {
    fail(ErrorCode::ConvergenceFailure, "LDL^T factorization failed at shift " + std::to_string(x));
  }
  const Eigen::VectorXd d = ldlt.vectorD();
  int count = 0;
  for (int k = 0; k < d.size(); ++k) count += d[k] < 0.0 ? 1 : 0;
  return count;
}

std::vector<EigenPair> full_2d_jacobi_spectrum(const CylinderConfig& config, const Grid& grid,
                                               int m) {
  if (grid.size() > 16384) fail(ErrorCode::InvalidConfig, "grid too large for the 2D oracle");
  const JacobiMatrix jm = assemble_jacobi(config, grid);
  const int n = static_cast<int>(jm.S.rows());
  if (m < 1 || m > n) fail(ErrorCode::InvalidConfig, "bad eigenpair count");

  std::vector<EigenPair> out;
  if (n <= 400) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(jm.S));
    for (int k = 0; k < m; ++k) {
      out.push_back({es.eigenvalues()[k], to_field(config, grid, jm, es.eigenvectors().col(k))});
    }
    return out;
  }

  double glo, ghi;
  gershgorin(jm.S, glo, ghi);
  const double scale = std::max(std::abs(glo), std::abs(ghi));

  // Shift just below the lowest eigenvalue, located by inertia.
  double a = glo - 1e-6 * scale;
  double b = ghi;
  for (int it = 0; it < 60 && b - a > 1e-4 * std::max(1.0, std::abs(a)); ++it) {
    const double mid = 0.5 * (a + b);
    if (count_eigenvalues_below(jm, mid) == 0) {
      a = mid;
    } else {
      b = mid;
    }
  }
  const double sigma = a - (b - a);
  Eigen::SimplicialLDLT<SpMat> solver(shifted(jm.S, sigma));
  if (solver.info() != Eigen::Success) fail(ErrorCode::ConvergenceFailure, "shifted factorization failed");

  const int p = std::min(n, m + 4);
  std::mt19937_64 rng(20240611ULL);
  Eigen::MatrixXd Q(n, p);
  for (int c = 0; c < p; ++c) {
    for (int r = 0; r < n; ++r) {
      Q(r, c) = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    }
  }
  auto orthonormalize = [&](Eigen::MatrixXd& M) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    M = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  };
  orthonormalize(Q);

  const double tol = 1e-10 * scale;
  for (int it = 0; it < 500; ++it) {
    Eigen::MatrixXd Y = solver.solve(Q);
    orthonormalize(Y);
    const Eigen::MatrixXd SY = jm.S * Y;
    Eigen::MatrixXd Tm = Y.transpose() * SY;
    Tm = 0.5 * (Tm + Tm.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tm);
    Q = Y * es.eigenvectors();
    const Eigen::MatrixXd R = SY * es.eigenvectors() - Q * es.eigenvalues().asDiagonal();
    bool done = true;
    for (int k = 0; k < m; ++k) done = done && R.col(k).norm() <= tol;
    if (done) {
      for (int k = 0; k < m; ++k) {
        out.push_back({es.eigenvalues()[k], to_field(config, grid, jm, Q.col(k))});
      }
      return out;
    }
  }
  fail(ErrorCode::ConvergenceFailure, "subspace iteration did not converge in 500 iterations");
}

EigenPair inverse_iteration(const CylinderConfig& config, const Grid& grid, double shift,
                            const ScalarField& start, int max_iter) {
  const JacobiMatrix jm = assemble_jacobi(config, grid);
  const int n = static_cast<int>(jm.S.rows());
  Eigen::VectorXd x(n);
  for (int row = 0; row < n; ++row) x[row] = start[jm.free_nodes[row]] * jm.sqrt_w[row];
  if (!(x.norm() > 0.0)) fail(ErrorCode::InvalidConfig, "zero-norm start vector rejected");
  x.normalize();

  Eigen::SparseLU<SpMat> lu;
  lu.compute(shifted(jm.S, shift));
  if (lu.info() != Eigen::Success) fail(ErrorCode::ConvergenceFailure, "shifted factorization failed");

  double glo, ghi;
  gershgorin(jm.S, glo, ghi);
  const double tol = 1e-10 * std::max(std::abs(glo), std::abs(ghi));
  for (int it = 0; it < max_iter; ++it) {
    x = lu.solve(x);
    x.normalize();
    const Eigen::VectorXd Sx = jm.S * x;
    const double theta = x.dot(Sx);
    if ((Sx - theta * x).norm() <= tol) return {theta, to_field(config, grid, jm, x)};
  }
  fail(ErrorCode::ConvergenceFailure, "inverse iteration did not converge");
}

}  // namespace cmc
