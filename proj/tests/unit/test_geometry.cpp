#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"

#include "cmc/errors.hpp"
#include "cmc/geometry.hpp"
#include "cmc/spectrum.hpp"

using namespace cmc;
using std::numbers::pi;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no cmc::Error thrown");
  return ErrorCode::InvalidConfig;
}

ScalarField random_field(const CylinderConfig& cfg, const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField f(g);
  for (std::size_t q = 0; q < f.size(); ++q) f[q] = u(rng);
  apply_boundary_conventions(cfg, f);
  return f;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("grid layout and spacing") {
    const auto cfg = CylinderConfig::planar(1.0, pi / 2);
    const Grid g = build_grid(cfg, 8, 8, pi, TMode::DirichletEnds);
    CHECK(g.s_lo == doctest::Approx(0.0));
    CHECK(g.s_hi == doctest::Approx(pi));
    CHECK(g.ds() == doctest::Approx(pi / 7));
    CHECK(g.dt() == doctest::Approx(pi / 7));

    const Grid w = build_grid(CylinderConfig::wedge(1.0, pi / 4, 1.0), 8, 5, 2.0, TMode::Periodic);
    CHECK(w.ds() == doctest::Approx(0.25));
    CHECK(w.dt() == doctest::Approx(0.25));  // periodic: T / nt
    CHECK(w.trapezoid_weight(0, 0) == doctest::Approx(0.5));
    CHECK(w.trapezoid_weight(3, 2) == doctest::Approx(1.0));

    CHECK(code_of([&] { build_grid(cfg, 2, 8, 1.0, TMode::DirichletEnds); }) ==
          ErrorCode::InvalidConfig);
  }

  TEST_CASE("config invariants") {
    CHECK(code_of([] { CylinderConfig::planar(-1.0, 1.0).validate(); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { CylinderConfig::planar(1.0, 4.0).validate(); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { CylinderConfig::wedge(1.0, 1.0, 0.0).validate(); }) == ErrorCode::InvalidConfig);
    CHECK(CylinderConfig::wedge(1.0, pi / 3, 1.0).robin_rho() == doctest::Approx(1.0 / std::tan(pi / 3)));
    CHECK(CylinderConfig::wedge(1.0, pi / 3, 1.0, Convexity::Concave).robin_rho() ==
          doctest::Approx(-1.0 / std::tan(pi / 3)));
  }

  TEST_CASE("zero graph is the cylinder and sits on z = 0 at the support lines") {
    const auto cfg = CylinderConfig::planar(1.5, 3 * pi / 4);
    const Grid g = build_grid(cfg, 6, 9, 4.0, TMode::DirichletEnds);
    const auto mesh = normal_graph(cfg, g, ScalarField(g));
    for (int i = 0; i < g.nt; ++i) {
      CHECK(std::abs(mesh.positions[g.index(i, 0)][2]) < 1e-14);
      CHECK(std::abs(mesh.positions[g.index(i, g.ns - 1)][2]) < 1e-14);
      for (int j = 0; j < g.ns; ++j) {
        const Vec3 x = mesh.positions[g.index(i, j)];
        const Vec3 c = cylinder_point(cfg, g.t(i), g.s(j));
        for (int a = 0; a < 3; ++a) CHECK(x[a] == doctest::Approx(c[a]));
      }
    }
  }

  TEST_CASE("constant planar displacement gives the coaxial cylinder") {
    const auto cfg = CylinderConfig::planar(1.0, 2.0);
    const Grid g = build_grid(cfg, 5, 17, 3.0, TMode::DirichletEnds);
    const auto mesh = normal_graph(cfg, g, ScalarField(g, 0.25));
    const double zc = -cfg.vertical_offset();
    for (const Vec3& x : mesh.positions) {
      CHECK(std::hypot(x[1], x[2] - zc) == doctest::Approx(0.75).epsilon(1e-13));
    }
    const auto Hs = mean_curvature(mesh);
    for (double H : Hs.values()) CHECK(H == doctest::Approx(1.0 / 1.5).epsilon(1e-13));
  }

  TEST_CASE("graph positions by hand") {
    const auto cfg = CylinderConfig::planar(1.0, pi / 2);
    const Grid g = build_grid(cfg, 5, 5, 2.0, TMode::DirichletEnds);
    const auto u = ScalarField::from_function(g, [](double t, double s) { return 0.1 * std::sin(s) * std::sin(t); });
    const auto mesh = normal_graph(cfg, g, u);
    for (auto [i, j] : {std::pair{1, 2}, std::pair{2, 1}, std::pair{3, 3}}) {
      const double t = g.t(i), s = g.s(j), v = u(i, j);
      const Vec3 c = cylinder_point(cfg, t, s);
      const Vec3 n{0.0, -std::cos(s), -std::sin(s)};
      for (int a = 0; a < 3; ++a) CHECK(mesh.positions[g.index(i, j)][a] == doctest::Approx(c[a] + v * n[a]));
    }
  }

  TEST_CASE("wedge tilt keeps the contact line in the support plane") {
    const auto cfg = CylinderConfig::wedge(1.0, pi / 3, 1.2);
    const Grid g = build_grid(cfg, 4, 9, 2.0, TMode::DirichletEnds);
    const auto mesh = normal_graph(cfg, g, ScalarField(g, 0.2));
    const Vec3 nu = support_plane_normal(cfg);
    const Vec3 p0 = cylinder_point(cfg, 0.0, cfg.s_hi());
    for (int i = 0; i < g.nt; ++i) {
      const Vec3 x = mesh.positions[g.index(i, g.ns - 1)];
      double d = 0.0;
      for (int a = 0; a < 3; ++a) d += (x[a] - p0[a]) * nu[a];
      CHECK(std::abs(d) < 1e-13);
    }
    const Vec3 z = displacement_direction(cfg, 0.4), n = cylinder_normal(cfg, 0.4);
    CHECK(z[0] * n[0] + z[1] * n[1] + z[2] * n[2] == doctest::Approx(1.0));
  }

  TEST_CASE("H of the unperturbed cylinder is 1/(2r)") {
    for (const auto& cfg : {CylinderConfig::planar(0.7, 2.2), CylinderConfig::wedge(1.3, 2.0, 1.0),
                            CylinderConfig::wedge(2.0, pi / 5, 0.6, Convexity::Concave)}) {
      for (TMode m : {TMode::DirichletEnds, TMode::Periodic, TMode::HalfPeriodNeumann}) {
        const Grid g = build_grid(cfg, 16, 16, 3.0, m);
        const auto Hs = mean_curvature(normal_graph(cfg, g, ScalarField(g)));
        for (double H : Hs.values()) {
          CHECK(std::abs(H - 0.5 / cfg.r) < 1e-14);
        }
      }
    }
  }

  TEST_CASE("position route converges at second order") {
    const auto cfg = CylinderConfig::wedge(1.0, 2.0, 1.4);
    double prev = 0.0;
    for (int n : {17, 33, 65}) {
      const Grid g = build_grid(cfg, n, n, 3.0, TMode::DirichletEnds);
      double e = 0.0;
      const auto Hs = mean_curvature_from_positions(normal_graph(cfg, g, ScalarField(g)));
      for (double H : Hs.values()) {
        e = std::max(e, std::abs(H - 0.5));
      }
      if (prev > 0.0) CHECK(std::log2(prev / e) == doctest::Approx(2.0).epsilon(0.1));
      prev = e;
    }
  }

  TEST_CASE("graph and position routes agree on a perturbed surface") {
    const auto cfg = CylinderConfig::planar(1.0, 2.0);
    const Grid g = build_grid(cfg, 129, 129, 4.0, TMode::DirichletEnds);
    const double s_lo = cfg.s_lo();
    const auto u = ScalarField::from_function(g, [&](double t, double s) {
      return 0.1 * std::sin(pi * (s - s_lo) / 4.0) * std::sin(pi * t / 4.0);
    });
    const auto mesh = normal_graph(cfg, g, u);
    const auto a = mean_curvature(mesh), b = mean_curvature_from_positions(mesh);
    double e = 0.0;
    for (std::size_t q = 0; q < a.size(); ++q) e = std::max(e, std::abs(a[q] - b[q]));
    CHECK(e < 2e-3);
  }

  TEST_CASE("directional derivative of H is half the Jacobi operator") {
    const auto cfg = CylinderConfig::planar(1.0, 3 * pi / 4);
    const Grid g = build_grid(cfg, 32, 32, 4.0, TMode::HalfPeriodNeumann);
    const double s_lo = cfg.s_lo();
    const auto v = ScalarField::from_function(g, [&](double t, double s) {
      return std::sin(2 * (s - s_lo) / 3.0) * std::cos(pi * t / 4.0) + 0.3 * std::sin(4 * (s - s_lo) / 3.0);
    });
    const auto Lv = jacobi_apply(cfg, g, v);
    // Central difference, O(eps^2).
    const double eps = 1e-4;
    auto d = mean_curvature(normal_graph(cfg, g, eps * v)) - mean_curvature(normal_graph(cfg, g, -eps * v));
    d *= 0.5 / eps;
    double err = 0.0;
    for (int i = 0; i < g.nt; ++i)
      for (int j = 1; j < g.ns - 1; ++j) err = std::max(err, std::abs(d(i, j) - 0.5 * Lv(i, j)));
    CHECK(err / (0.5 * Lv.max_abs()) < 1e-6);
  }

  TEST_CASE("Jacobi operator on an analytic mode") {
    const double gamma = 2.0, h = 3.0;
    const auto cfg = CylinderConfig::planar(1.0, gamma);
    double prev = 0.0;
    for (int n : {33, 65, 129}) {
      const Grid g = build_grid(cfg, n, n, h, TMode::DirichletEnds);
      const double s_lo = cfg.s_lo();
      const auto v = ScalarField::from_function(g, [&](double t, double s) {
        return std::sin(pi * (s - s_lo) / (2 * gamma)) * std::sin(pi * t / h);
      });
      const double lambda = planar_eigenvalue(1.0, gamma, h, 1, 1);
      auto Lv = jacobi_apply(cfg, g, v);
      double e = 0.0;
      for (std::size_t q = 0; q < v.size(); ++q) e = std::max(e, std::abs(Lv[q] + lambda * v[q]));
      if (prev > 0.0) CHECK(std::log2(prev / e) == doctest::Approx(2.0).epsilon(0.1));
      prev = e;
    }
  }

  TEST_CASE("index form equals <-L u, u>") {
    for (const auto& cfg : {CylinderConfig::planar(1.2, 2.0), CylinderConfig::wedge(0.8, pi / 4, 2.0),
                            CylinderConfig::wedge(1.0, pi / 3, 0.4, Convexity::Concave)}) {
      for (TMode m : {TMode::DirichletEnds, TMode::Periodic, TMode::HalfPeriodNeumann}) {
        const Grid g = build_grid(cfg, 12, 15, 2.5, m);
        const auto u = random_field(cfg, g, 3), v = random_field(cfg, g, 4);
        const double I = index_form(cfg, g, u, u);
        const double rhs = -inner_product(cfg, jacobi_apply(cfg, g, u), u);
        CHECK(I == doctest::Approx(rhs).epsilon(1e-12));
        CHECK(index_form(cfg, g, u, v) == doctest::Approx(index_form(cfg, g, v, u)).epsilon(1e-12));
        CHECK(index_form(cfg, g, ScalarField(g), ScalarField(g)) == 0.0);
      }
    }
  }

  TEST_CASE("index form sign below and at the critical length") {
    const double gamma = 3 * pi / 4;
    const auto cfg = CylinderConfig::planar(1.0, gamma);
    const double h0 = planar_critical_length(1.0, gamma);
    const double s_lo = cfg.s_lo();
    for (double h : {0.5 * h0, h0, 1.5 * h0}) {
      const Grid g = build_grid(cfg, 129, 129, h, TMode::DirichletEnds);
      const auto u = ScalarField::from_function(g, [&](double t, double s) {
        return std::sin(pi * (s - s_lo) / (2 * gamma)) * std::sin(pi * t / h);
      });
      const double I = index_form(cfg, g, u, u);
      const double scale = std::pow(l2_norm(cfg, u), 2);
      if (h < h0) CHECK(I > 0.1 * scale);
      if (h == h0) CHECK(std::abs(I) < 1e-3 * scale);
      if (h > h0) CHECK(I < 0.0);
    }
  }

  TEST_CASE("planar operators commute with the arc reflection") {
    const auto cfg = CylinderConfig::planar(1.0, 2.0);
    const Grid g = build_grid(cfg, 10, 13, 2.0, TMode::HalfPeriodNeumann);
    const auto u = 0.05 * random_field(cfg, g, 11);
    ScalarField ur(g);
    for (int i = 0; i < g.nt; ++i)
      for (int j = 0; j < g.ns; ++j) ur(i, j) = u(i, g.ns - 1 - j);
    const auto H = mean_curvature(normal_graph(cfg, g, u));
    const auto Hr = mean_curvature(normal_graph(cfg, g, ur));
    const auto L = jacobi_apply(cfg, g, u), Lr = jacobi_apply(cfg, g, ur);
    for (int i = 0; i < g.nt; ++i) {
      for (int j = 0; j < g.ns; ++j) {
        CHECK(std::abs(Hr(i, j) - H(i, g.ns - 1 - j)) < 1e-13);
        CHECK(std::abs(Lr(i, j) - L(i, g.ns - 1 - j)) < 1e-11);
      }
    }
  }

  TEST_CASE("graph guard") {
    const auto cfg = CylinderConfig::planar(1.0, 2.0);
    const Grid g = build_grid(cfg, 8, 8, 2.0, TMode::DirichletEnds);
    ScalarField u(g);
    u(3, 3) = 0.95;
    CHECK(code_of([&] { normal_graph(cfg, g, u); }) == ErrorCode::GraphDegenerate);
    u(3, 3) = 0.85;
    CHECK_NOTHROW(normal_graph(cfg, g, u));
  }

  TEST_CASE("OBJ output") {
    const auto cfg = CylinderConfig::planar(1.0, 2.0);
    const Grid g = build_grid(cfg, 4, 5, 2.0, TMode::DirichletEnds);
    std::ostringstream a, b;
    write_obj(a, normal_graph(cfg, g, ScalarField(g)));
    write_obj(b, normal_graph(cfg, g, ScalarField(g)));
    CHECK(a.str() == b.str());
    std::istringstream in(a.str());
    std::string line;
    int v = 0, f = 0;
    while (std::getline(in, line)) {
      v += line.rfind("v ", 0) == 0;
      f += line.rfind("f ", 0) == 0;
    }
    CHECK(v == 20);
    CHECK(f == 2 * 3 * 4);
  }
}
