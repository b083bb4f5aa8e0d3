#include "cmc/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "cmc/errors.hpp"
#include "cmc/graph_curvature.hpp"
#include "cmc/stencil.hpp"

namespace cmc {

using std::numbers::pi;

const char* to_string(Scenario s) noexcept {
  return s == Scenario::PlanarStrip ? "planar" : "wedge";
}

const char* to_string(Convexity c) noexcept {
  return c == Convexity::Convex ? "convex" : "concave";
}

const char* to_string(TMode m) noexcept {
  switch (m) {
    case TMode::DirichletEnds: return "dirichlet";
    case TMode::Periodic: return "periodic";
    case TMode::HalfPeriodNeumann: return "half_period_neumann";
  }
  return "unknown";
}

CylinderConfig CylinderConfig::planar(double r, double gamma) {
  CylinderConfig c;
  c.scenario = Scenario::PlanarStrip;
  c.r = r;
  c.gamma = gamma;
  return c;
}

CylinderConfig CylinderConfig::wedge(double r, double gamma, double beta, Convexity convexity) {
  CylinderConfig c;
  c.scenario = Scenario::RightWedge;
  c.r = r;
  c.gamma = gamma;
  c.beta = beta;
  c.convexity = convexity;
  return c;
}

void CylinderConfig::validate() const {
  if (!(std::isfinite(r) && r > 0.0)) fail(ErrorCode::InvalidConfig, "radius must be positive");
  if (!(gamma > 0.0 && gamma < pi)) fail(ErrorCode::InvalidConfig, "gamma must lie in (0, pi)");
  if (scenario == Scenario::PlanarStrip) return;
  if (!(beta > 0.0 && beta < 1.5 * pi)) {
    fail(ErrorCode::InvalidConfig, "wedge arc extent beta must lie in (0, 3pi/2)");
  }
  if (convexity == Convexity::Concave) {
    if (!(gamma < pi / 2)) fail(ErrorCode::InvalidConfig, "concave wedge needs gamma < pi/2");
    if (!(beta < pi / 2 - gamma)) {
      fail(ErrorCode::InvalidConfig, "concave wedge needs beta < pi/2 - gamma");
    }
  }
}

double CylinderConfig::s_lo() const {
  return scenario == Scenario::PlanarStrip ? pi / 2 - gamma : 0.0;
}

double CylinderConfig::s_hi() const {
  return scenario == Scenario::PlanarStrip ? pi / 2 + gamma : beta;
}

double CylinderConfig::robin_rho() const {
  if (scenario == Scenario::PlanarStrip) return 0.0;
  const double cot = std::cos(gamma) / std::sin(gamma);
  return convexity == Convexity::Convex ? cot : -cot;
}

double CylinderConfig::vertical_offset() const {
  return scenario == Scenario::PlanarStrip ? r * std::cos(gamma) : 0.0;
}

CylinderConfig CylinderConfig::with_radius(double radius) const {
  CylinderConfig c = *this;
  c.r = radius;
  return c;
}

double Grid::dt() const {
  return t_mode == TMode::Periodic ? t_extent / nt : t_extent / (nt - 1);
}

double Grid::trapezoid_weight(int i, int j) const {
  double w = 1.0;
  if (t_mode != TMode::Periodic && (i == 0 || i == nt - 1)) w *= 0.5;
  if (j == 0 || j == ns - 1) w *= 0.5;
  return w;
}

bool Grid::same_shape(const Grid& o) const {
  return nt == o.nt && ns == o.ns && t_mode == o.t_mode && t_extent == o.t_extent &&
         s_lo == o.s_lo && s_hi == o.s_hi;
}

Grid build_grid(const CylinderConfig& config, int nt, int ns, double t_extent, TMode t_mode) {
  config.validate();
  if (nt < 4 || ns < 4) fail(ErrorCode::InvalidConfig, "grid needs at least 4 samples per direction");
  if (!(std::isfinite(t_extent) && t_extent > 0.0)) {
    fail(ErrorCode::InvalidConfig, "t extent must be positive");
  }
  Grid g;
  g.nt = nt;
  g.ns = ns;
  g.t_extent = t_extent;
  g.t_mode = t_mode;
  g.s_lo = config.s_lo();
  g.s_hi = config.s_hi();
  return g;
}

ScalarField::ScalarField(const Grid& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) fail(ErrorCode::InvalidConfig, "field size does not match grid");
}

ScalarField ScalarField::from_function(const Grid& grid,
                                       const std::function<double(double, double)>& f) {
  ScalarField out(grid);
  for (int i = 0; i < grid.nt; ++i) {
    for (int j = 0; j < grid.ns; ++j) out(i, j) = f(grid.t(i), grid.s(j));
  }
  return out;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

ScalarField& ScalarField::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double a, ScalarField f) { return f *= a; }

bool is_dirichlet_node(const CylinderConfig& config, const Grid& grid, int i, int j) {
  if (j == 0) return true;
  if (j == grid.ns - 1 && !config.has_free_boundary()) return true;
  if (grid.t_mode == TMode::DirichletEnds && (i == 0 || i == grid.nt - 1)) return true;
  return false;
}

void apply_boundary_conventions(const CylinderConfig& config, ScalarField& field) {
  const Grid& g = field.grid();
  for (int i = 0; i < g.nt; ++i) {
    for (int j = 0; j < g.ns; ++j) {
      if (is_dirichlet_node(config, g, i, j)) field(i, j) = 0.0;
    }
  }
}

double integrate(const CylinderConfig& config, const ScalarField& f) {
  const Grid& g = f.grid();
  double acc = 0.0;
  for (int i = 0; i < g.nt; ++i) {
    for (int j = 0; j < g.ns; ++j) acc += g.trapezoid_weight(i, j) * f(i, j);
  }
  return acc * config.r * g.dt() * g.ds();
}

double inner_product(const CylinderConfig& config, const ScalarField& a, const ScalarField& b) {
  const Grid& g = a.grid();
  double acc = 0.0;
  for (int i = 0; i < g.nt; ++i) {
    for (int j = 0; j < g.ns; ++j) acc += g.trapezoid_weight(i, j) * a(i, j) * b(i, j);
  }
  return acc * config.r * g.dt() * g.ds();
}

double l2_norm(const CylinderConfig& config, const ScalarField& f) {
  return std::sqrt(inner_product(config, f, f));
}

Vec3 cylinder_point(const CylinderConfig& config, double t, double s) {
  return {t, config.r * std::cos(s), config.r * std::sin(s) - config.vertical_offset()};
}

Vec3 cylinder_normal(const CylinderConfig&, double s) {
  return {0.0, -std::cos(s), -std::sin(s)};
}

TiltProfile displacement_tilt(const CylinderConfig& config, double s) {
  TiltProfile z;
  if (!config.has_free_boundary()) return z;
  const double cot = std::cos(config.gamma) / std::sin(config.gamma);
  const double span = config.s_hi() - config.s_lo();
  z.f = -cot * (s - config.s_lo()) / span;
  z.df = -cot / span;
  return z;
}

Vec3 displacement_direction(const CylinderConfig& config, double s) {
  const TiltProfile z = displacement_tilt(config, s);
  const Vec3 n = cylinder_normal(config, s);
  const Vec3 e_theta{0.0, -std::sin(s), std::cos(s)};
  return {n[0] + z.f * e_theta[0], n[1] + z.f * e_theta[1], n[2] + z.f * e_theta[2]};
}

Vec3 support_plane_normal(const CylinderConfig& config) {
  const double s = config.s_hi();
  const double sg = std::sin(config.gamma);
  const double cg = std::cos(config.gamma);
  const Vec3 n = cylinder_normal(config, s);
  const Vec3 e_theta{0.0, -std::sin(s), std::cos(s)};
  return {sg * e_theta[0] + cg * n[0], sg * e_theta[1] + cg * n[1], sg * e_theta[2] + cg * n[2]};
}

SurfaceMesh normal_graph(const CylinderConfig& config, const Grid& grid, const ScalarField& u) {
  if (!u.grid().same_shape(grid)) fail(ErrorCode::InvalidConfig, "displacement grid mismatch");
  const double guard = kGraphGuard * config.r;
  SurfaceMesh mesh;
  mesh.config = config;
  mesh.grid = grid;
  mesh.displacement = u;
  mesh.positions.resize(grid.size());
  for (int i = 0; i < grid.nt; ++i) {
    for (int j = 0; j < grid.ns; ++j) {
      const double v = u(i, j);
      if (!(std::abs(v) < guard)) {
        fail(ErrorCode::GraphDegenerate, "|u| reached " + std::to_string(std::abs(v)) +
                                             " at node (" + std::to_string(i) + "," +
                                             std::to_string(j) + ")");
      }
      const double t = grid.t(i);
      const double s = grid.s(j);
      const Vec3 p = cylinder_point(config, t, s);
      const Vec3 z = displacement_direction(config, s);
      mesh.positions[grid.index(i, j)] = {p[0] + v * z[0], p[1] + v * z[1], p[2] + v * z[2]};
    }
  }
  return mesh;
}

ScalarField mean_curvature(const SurfaceMesh& mesh) {
  const Grid& g = mesh.grid;
  const auto u = mesh.displacement.values();
  ScalarField h(g);
  for (int i = 0; i < g.nt; ++i) {
    for (int j = 0; j < g.ns; ++j) {
      const LocalJet<double> jet = evaluate_jet(node_stencil(g, i, j), u);
      const TiltProfile z = displacement_tilt(mesh.config, g.s(j));
      if (!(graph_metric_determinant(jet, mesh.config.r, z) > 0.0)) {
        fail(ErrorCode::DegenerateMetric, "EG - F^2 <= 0 at node (" + std::to_string(i) + "," +
                                              std::to_string(j) + ")");
      }
      h(i, j) = mesh.normal_orientation * graph_mean_curvature(jet, mesh.config.r, z);
    }
  }
  return h;
}

ScalarField mean_curvature_from_positions(const SurfaceMesh& mesh) {
  // Mirror ghosts assume even data, which the x coordinate is not, so the
  // half-period grid falls back to one-sided differences at its ends.
  Grid g = mesh.grid;
  if (g.t_mode == TMode::HalfPeriodNeumann) g.t_mode = TMode::DirichletEnds;

  // Y = X - (t, 0, 0) is periodic whenever the surface is.
  std::array<std::vector<double>, 3> y;
  for (auto& c : y) c.resize(g.size());
  for (int i = 0; i < g.nt; ++i) {
    for (int j = 0; j < g.ns; ++j) {
      const std::size_t k = g.index(i, j);
      y[0][k] = mesh.positions[k][0] - g.t(i);
      y[1][k] = mesh.positions[k][1];
      y[2][k] = mesh.positions[k][2];
    }
  }

  ScalarField h(mesh.grid);
  for (int i = 0; i < g.nt; ++i) {
    for (int j = 0; j < g.ns; ++j) {
      const NodeStencil st = node_stencil(g, i, j);
      Vec3 xt, xs, xtt, xts, xss;
      for (int c = 0; c < 3; ++c) {
        xt[c] = apply_stencil(st.ut, y[c]) + (c == 0 ? 1.0 : 0.0);
        xs[c] = apply_stencil(st.us, y[c]);
        xtt[c] = apply_stencil(st.utt, y[c]);
        xts[c] = apply_stencil(st.uts, y[c]);
        xss[c] = apply_stencil(st.uss, y[c]);
      }
      auto dot = [](const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; };
      Vec3 n{xt[1] * xs[2] - xt[2] * xs[1], xt[2] * xs[0] - xt[0] * xs[2],
             xt[0] * xs[1] - xt[1] * xs[0]};
      const double e = dot(xt, xt);
      const double f = dot(xt, xs);
      const double gg = dot(xs, xs);
      const double det = e * gg - f * f;
      if (!(det > 0.0)) {
        fail(ErrorCode::DegenerateMetric, "EG - F^2 <= 0 at node (" + std::to_string(i) + "," +
                                              std::to_string(j) + ")");
      }
      double w = std::sqrt(dot(n, n));
      // Orient continuously with the reference convex-side normal.
      if (dot(n, cylinder_normal(mesh.config, g.s(j))) < 0.0) w = -w;
      for (double& c : n) c /= w;
      const double l = dot(xtt, n);
      const double m = dot(xts, n);
      const double nn = dot(xss, n);
      h(i, j) = mesh.normal_orientation * (e * nn - 2.0 * f * m + gg * l) / (2.0 * det);
    }
  }
  return h;
}

JacobiParts jacobi_parts(const CylinderConfig& config, const Grid& grid, const ScalarField& v) {
  if (!v.grid().same_shape(grid)) fail(ErrorCode::InvalidConfig, "field grid mismatch");
  const int nt = grid.nt;
  const int ns = grid.ns;
  const double idt2 = 1.0 / (grid.dt() * grid.dt());
  const double ds = grid.ds();
  const double ids2 = 1.0 / (ds * ds);
  const double rho = config.robin_rho();

  JacobiParts out{ScalarField(grid), ScalarField(grid)};
  for (int i = 0; i < nt; ++i) {
    int lo = i - 1;
    int hi = i + 1;
    if (grid.t_mode == TMode::Periodic) {
      lo = (lo + nt) % nt;
      hi = hi % nt;
    } else if (grid.t_mode == TMode::HalfPeriodNeumann) {
      if (lo < 0) lo = 1;
      if (hi > nt - 1) hi = nt - 2;
    }
    for (int j = 0; j < ns; ++j) {
      if (is_dirichlet_node(config, grid, i, j)) continue;
      const double c = v(i, j);
      double vss;
      if (j == ns - 1) {
        // Ghost node v_{N+1} = v_{N-1} + 2 ds rho v_N.
        vss = (2.0 * v(i, j - 1) - 2.0 * c + 2.0 * ds * rho * c) * ids2;
      } else {
        vss = (v(i, j - 1) - 2.0 * c + v(i, j + 1)) * ids2;
      }
      out.tt(i, j) = (v(lo, j) - 2.0 * c + v(hi, j)) * idt2;
      out.ss1(i, j) = vss + c;
    }
  }
  return out;
}

ScalarField jacobi_apply(const CylinderConfig& config, const Grid& grid, const ScalarField& v) {
  JacobiParts p = jacobi_parts(config, grid, v);
  const double ir2 = 1.0 / (config.r * config.r);
  for (std::size_t k = 0; k < p.tt.size(); ++k) p.tt[k] += ir2 * p.ss1[k];
  return p.tt;
}

double index_form(const CylinderConfig& config, const Grid& grid, const ScalarField& u,
                  const ScalarField& v) {
  const int nt = grid.nt;
  const int ns = grid.ns;
  const double dt = grid.dt();
  const double ds = grid.ds();
  const double ir2 = 1.0 / (config.r * config.r);
  const bool periodic = grid.t_mode == TMode::Periodic;
  auto wt = [&](int i) { return (!periodic && (i == 0 || i == nt - 1)) ? 0.5 : 1.0; };
  auto ws = [&](int j) { return (j == 0 || j == ns - 1) ? 0.5 : 1.0; };

  double grad_t = 0.0;
  const int t_edges = periodic ? nt : nt - 1;
  for (int i = 0; i < t_edges; ++i) {
    const int ip = (i + 1) % nt;
    for (int j = 0; j < ns; ++j) {
      grad_t += ws(j) * (u(ip, j) - u(i, j)) * (v(ip, j) - v(i, j));
    }
  }
  grad_t *= ds / dt;

  double grad_s = 0.0;
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j + 1 < ns; ++j) {
      grad_s += wt(i) * (u(i, j + 1) - u(i, j)) * (v(i, j + 1) - v(i, j));
    }
  }
  grad_s *= ir2 * dt / ds;

  double mass = 0.0;
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < ns; ++j) mass += wt(i) * ws(j) * u(i, j) * v(i, j);
  }
  mass *= ir2 * dt * ds;

  double boundary = 0.0;
  if (config.has_free_boundary()) {
    for (int i = 0; i < nt; ++i) boundary += wt(i) * u(i, ns - 1) * v(i, ns - 1);
    boundary *= config.robin_q() * dt;
  }
  return config.r * (grad_t + grad_s - mass) - boundary;
}

void write_obj(std::ostream& out, const SurfaceMesh& mesh) {
  const Grid& g = mesh.grid;
  char buf[128];
  for (const Vec3& p : mesh.positions) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p[0], p[1], p[2]);
    out << buf;
  }
  for (int i = 0; i + 1 < g.nt; ++i) {
    for (int j = 0; j + 1 < g.ns; ++j) {
      const std::size_t a = g.index(i, j) + 1;
      const std::size_t b = g.index(i + 1, j) + 1;
      const std::size_t c = g.index(i + 1, j + 1) + 1;
      const std::size_t d = g.index(i, j + 1) + 1;
      out << "f " << a << ' ' << b << ' ' << c << '\n';
      out << "f " << a << ' ' << c << ' ' << d << '\n';
    }
  }
}

}  // namespace cmc
