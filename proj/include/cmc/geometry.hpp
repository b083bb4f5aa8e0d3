#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace cmc {

enum class Scenario { PlanarStrip, RightWedge };
enum class Convexity { Convex, Concave };

// How the axial variable t is closed off.
enum class TMode { DirichletEnds, Periodic, HalfPeriodNeumann };

const char* to_string(Scenario s) noexcept;
const char* to_string(Convexity c) noexcept;
const char* to_string(TMode m) noexcept;

// Geometric description of the reference cylinder. Planar strips use the arc
// s in [pi/2 - gamma, pi/2 + gamma] and sit on the plane z = 0; wedge
// cylinders use s in [0, beta] with Gamma_1 at s = 0 and the free contact
// line Gamma_2 at s = beta.
struct CylinderConfig {
  Scenario scenario = Scenario::PlanarStrip;
  double r = 1.0;
  double gamma = 0.0;
  double beta = 0.0;  // wedge only
  Convexity convexity = Convexity::Convex;  // wedge only

  static CylinderConfig planar(double r, double gamma);
  static CylinderConfig wedge(double r, double gamma, double beta,
                              Convexity convexity = Convexity::Convex);

  // Throws InvalidConfig when an invariant is violated.
  void validate() const;

  double s_lo() const;
  double s_hi() const;
  double arc_length() const { return s_hi() - s_lo(); }

  bool has_free_boundary() const { return scenario == Scenario::RightWedge; }

  // Dimensionless Robin coefficient rho = q r of the condition
  // g'(s_hi) - rho g(s_hi) = 0: +cot(gamma) convex, -cot(gamma) concave.
  double robin_rho() const;

  // Boundary weight q of the index form (zero when there is no Gamma_2).
  double robin_q() const { return has_free_boundary() ? robin_rho() / r : 0.0; }

  // Vertical shift that puts the planar boundary lines on z = 0.
  double vertical_offset() const;

  // Same scenario with another radius; angles and arc interval unchanged.
  CylinderConfig with_radius(double radius) const;
};

struct Grid {
  int nt = 0;
  int ns = 0;
  double t_extent = 0.0;
  TMode t_mode = TMode::DirichletEnds;
  double s_lo = 0.0;
  double s_hi = 0.0;

  double dt() const;
  double ds() const { return (s_hi - s_lo) / (ns - 1); }
  double t(int i) const { return i * dt(); }
  double s(int j) const { return s_lo + j * ds(); }

  std::size_t size() const { return static_cast<std::size_t>(nt) * ns; }
  // t-major storage.
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * ns + j; }

  // Trapezoidal weight of node (i, j) in units of dt*ds (1, 1/2 or 1/4).
  double trapezoid_weight(int i, int j) const;

  bool same_shape(const Grid& other) const;
};

Grid build_grid(const CylinderConfig& config, int nt, int ns, double t_extent, TMode t_mode);

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& grid, double fill = 0.0);
  ScalarField(const Grid& grid, std::vector<double> values);

  static ScalarField from_function(const Grid& grid,
                                   const std::function<double(double t, double s)>& f);

  const Grid& grid() const { return grid_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  double max_abs() const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double a);

 private:
  Grid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double a, ScalarField f);

// Nodes where the field is pinned to zero: Gamma_1 columns and, for
// DirichletEnds, the first and last t rows.
bool is_dirichlet_node(const CylinderConfig& config, const Grid& grid, int i, int j);

// Zeroes the Dirichlet nodes in place.
void apply_boundary_conventions(const CylinderConfig& config, ScalarField& field);

// Trapezoidal surface quadrature with area element r dt ds.
double integrate(const CylinderConfig& config, const ScalarField& f);
double inner_product(const CylinderConfig& config, const ScalarField& a, const ScalarField& b);
double l2_norm(const CylinderConfig& config, const ScalarField& f);

using Vec3 = std::array<double, 3>;

// Discrete immersion of a graph over the cylinder.
struct SurfaceMesh {
  CylinderConfig config;
  Grid grid;
  ScalarField displacement;
  std::vector<Vec3> positions;  // t-major, same layout as the grid
  int normal_orientation = 1;   // +1: normal toward the convex side
};

// Unperturbed cylinder point and the displacement direction used for graphs.
// The direction is the inward unit normal N for planar strips; wedges tilt it
// along e_theta so Gamma_2 slides inside P2 (Z = N + f(s) e_theta, Z.N = 1).
Vec3 cylinder_point(const CylinderConfig& config, double t, double s);
Vec3 cylinder_normal(const CylinderConfig& config, double s);
Vec3 displacement_direction(const CylinderConfig& config, double s);

struct TiltProfile {
  double f = 0.0;
  double df = 0.0;
  double d2f = 0.0;
};
TiltProfile displacement_tilt(const CylinderConfig& config, double s);

// Unit normal of the wedge's support plane P2, pointing out of the wedge.
Vec3 support_plane_normal(const CylinderConfig& config);

// Largest admissible |u| relative to r.
inline constexpr double kGraphGuard = 0.9;

SurfaceMesh normal_graph(const CylinderConfig& config, const Grid& grid, const ScalarField& u);

// Mean curvature of the graph with respect to the convex-side normal. The
// fundamental forms are assembled from the analytic cylinder frame and
// second-order finite differences of the displacement, so H(0) = 1/(2r)
// exactly and the linearization at u = 0 is (1/2) jacobi_apply.
ScalarField mean_curvature(const SurfaceMesh& mesh);

// Same quantity from finite differences of the Cartesian positions alone.
// Independent of the graph structure; second-order accurate.
ScalarField mean_curvature_from_positions(const SurfaceMesh& mesh);

// Discrete L v = v_tt + (1/r^2)(v_ss + v). Dirichlet nodes return 0; Gamma_2
// uses the ghost-node Robin closure v_s = rho v.
ScalarField jacobi_apply(const CylinderConfig& config, const Grid& grid, const ScalarField& v);

// The two pieces of L: v_tt and v_ss + v, so L v = tt + ss1 / r^2.
struct JacobiParts {
  ScalarField tt;
  ScalarField ss1;
};
JacobiParts jacobi_parts(const CylinderConfig& config, const Grid& grid, const ScalarField& v);

// I(u, v) with gradient terms integrated exactly on the piecewise-linear
// interpolant, so I(u, u) = <-L u, u> for fields obeying the conventions.
double index_form(const CylinderConfig& config, const Grid& grid, const ScalarField& u,
                  const ScalarField& v);

// Wavefront OBJ: vertices t-major, each quad split into two triangles.
void write_obj(std::ostream& out, const SurfaceMesh& mesh);

}  // namespace cmc
