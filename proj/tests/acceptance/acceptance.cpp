// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: cmc_acceptance <path to cmc_bifurcate> <scratch dir>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cmc/bifurcation.hpp"
#include "cmc/errors.hpp"
#include "cmc/geometry.hpp"
#include "cmc/oracle.hpp"
#include "cmc/spectrum.hpp"

namespace fs = std::filesystem;
using namespace cmc;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// 1. closed-form planar spectrum against the Sturm oracle
Outcome closed_form_vs_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> ug(0.2, pi - 0.2), ur(0.5, 2.0), uh(1.0, 10.0);
  double worst = 0.0;
  int compared = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const double gamma = ug(rng), r = ur(rng), h = uh(rng);
    const auto cfg = CylinderConfig::planar(r, gamma);
    const auto table = modal_jacobi_table(cfg, h, TMode::DirichletEnds, 3, 3, 1001);
    for (const auto& e : table) {
      const double closed = planar_eigenvalue(r, gamma, h, e.k, e.n);
      worst = std::max(worst, rel(e.lambda, closed));
      ++compared;
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = compared == 270 && worst < 1e-6 && secs < 30.0;
  o.detail = std::to_string(compared) + " modes, max rel err " + fmt("%.3e", worst) +
             ", " + fmt("%.2f s", secs);
  return o;
}

// 2. zero crossing of the oracle's lowest eigenvalue in h
Outcome critical_length() {
  double worst = 0.0;
  std::string shown;
  for (double g : {0.55, 0.6, 0.75, 0.9}) {
    const auto cfg = CylinderConfig::planar(1.0, g * pi);
    auto lambda1 = [&](double h) {
      return modal_jacobi_spectrum(cfg, h, TMode::DirichletEnds, 1, 2001)[0].lambda;
    };
    double lo = 0.5, hi = 200.0;
    if (!(lambda1(lo) > 0.0 && lambda1(hi) < 0.0)) return {false, "no sign change for gamma " + fmt("%.2f pi", g)};
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (lambda1(mid) > 0.0 ? lo : hi) = mid;
    }
    const double h_oracle = 0.5 * (lo + hi);
    const double h0 = 2.0 * pi * g * pi / std::sqrt(4.0 * g * g * pi * pi - pi * pi);
    worst = std::max(worst, rel(h_oracle, h0));
    if (g == 0.75) shown = fmt("h0(3pi/4) = %.10f", h_oracle);
  }
  return {worst < 1e-4, shown + ", max rel err " + fmt("%.3e", worst)};
}

// 3. period identities
Outcome period_identities() {
  bool exact = true;
  for (double g : {0.51, 0.55, 0.6, 0.75, 0.9, 0.99}) {
    for (double r : {0.5, 1.0, 2.0}) {
      exact = exact && planar_bifurcation_period(r, g * pi) == 2.0 * planar_critical_length(r, g * pi);
    }
  }
  const double beta = 2.0 * pi / 3.0;
  const auto w = wedge_bifurcation_period(CylinderConfig::wedge(1.0, pi / 2.0, beta));
  const double a = 4.0 * pi * beta / std::sqrt(4.0 * beta * beta - pi * pi);
  const double b = 2.0 * pi / std::sqrt(1.0 - std::pow(pi / (2.0 * beta), 2));
  const double e = std::max(rel(w.T, a), rel(a, b));
  return {exact && e < 1e-14,
          std::string(exact ? "T = 2 h0 bitwise" : "T != 2 h0") + ", wedge T = " + fmt("%.15f", w.T) +
              " rel " + fmt("%.1e", e)};
}

// 4. wedge stability classifications
Outcome wedge_classifications() {
  int bad = 0;
  std::string note;
  for (double g : {pi / 6, pi / 4, pi / 3, 0.45 * pi, 0.7 * pi}) {
    for (double beta : {0.5, 1.0, 2.0, 3.0}) {
      const auto cfg = CylinderConfig::wedge(1.0, g, beta, Convexity::Concave);
      try {
        cfg.validate();
      } catch (const Error&) {
        continue;
      }
      for (double h : {1.0, 10.0, 100.0, 1000.0}) {
        if (wedge_stability(cfg, h).classification != Stability::Stable) ++bad;
      }
    }
  }
  for (double beta : {pi / 3, pi / 2}) {
    if (wedge_stability(CylinderConfig::wedge(1.0, pi / 2, beta), 1000.0).classification !=
        Stability::Stable)
      ++bad;
  }
  for (double beta : {2 * pi / 3, pi}) {
    if (wedge_stability(CylinderConfig::wedge(1.0, pi / 2, beta), 1000.0).classification !=
        Stability::Unstable)
      ++bad;
  }
  // One config per trigger: exp root, beta = tan(gamma), tan root below and above pi/2.
  struct Trig {
    double gamma, beta;
  };
  double worst = 0.0;
  for (Trig t : {Trig{pi / 4, 2.0}, Trig{pi / 4, 1.0}, Trig{1.2, 2.0}, Trig{2 * pi / 3, 2.5}}) {
    const auto cfg = CylinderConfig::wedge(1.0, t.gamma, t.beta);
    const auto v = wedge_stability(cfg, 100.0);
    const double oracle = modal_jacobi_spectrum(cfg, 100.0, TMode::DirichletEnds, 1, 2001)[0].lambda;
    if (v.classification != Stability::Unstable || !(oracle < 0.0)) ++bad;
    worst = std::max(worst, rel(oracle, v.lambda_min));
  }
  return {bad == 0 && worst < 1e-6,
          std::to_string(bad) + " misclassified, trigger lambda max rel err " + fmt("%.3e", worst)};
}

// 5. exponential-branch root and the Robin oracle
Outcome transcendental_root() {
  const auto tc = solve_transcendental(CaseId::ConvexExpEq, pi / 4, 2.0);
  if (!tc.root_c) return {false, "no root"};
  const double c = *tc.root_c;
  SturmProblem p = arc_problem(CylinderConfig::wedge(1.0, pi / 4, 2.0), 2001);
  const double mu = sturm_eigen(p, 1).mu[0];
  const double e = rel(mu, -c * c);
  // 30-digit root of tanh(2c) = c from an independent solver.
  const double c_ref = 0.95750402407726874;
  return {std::abs(c - 0.957) < 1e-3 && std::abs(c - c_ref) < 1e-12 &&
              std::abs(tc.residual) < 1e-12 && e < 1e-6,
          "c = " + fmt("%.12f", c) + ", residual " + fmt("%.1e", tc.residual) +
              ", oracle mu rel err " + fmt("%.3e", e)};
}

double max_rel_to(const ScalarField& H, double ref) {
  double e = 0.0;
  for (double v : H.values()) e = std::max(e, rel(v, ref));
  return e;
}

// 6. discrete curvature operator
Outcome operator_fidelity() {
  std::string detail;
  bool pass = true;
  const auto planar = CylinderConfig::planar(1.0, 3 * pi / 4);
  const auto wedge = CylinderConfig::wedge(1.3, pi / 3, 1.5);

  // H(0) at 64x64, both routes, both scenarios.
  double graph_err = 0.0, pos_err = 0.0;
  for (const auto& cfg : {planar, wedge}) {
    const Grid g = build_grid(cfg, 64, 64, 5.0, TMode::DirichletEnds);
    const auto mesh = normal_graph(cfg, g, ScalarField(g));
    graph_err = std::max(graph_err, max_rel_to(mean_curvature(mesh), 0.5 / cfg.r));
    pos_err = std::max(pos_err, max_rel_to(mean_curvature_from_positions(mesh), 0.5 / cfg.r));
  }
  // The solver's H is the graph route; positions are only a cross-check and are
  // reported, not gated, at 64x64.
  pass = pass && graph_err < 1e-4;
  detail += "H(0) err graph " + fmt("%.1e", graph_err) + " (positions " + fmt("%.1e", pos_err) + ")";

  // Order from the position route (the graph route is exact at u = 0), and
  // from the graph route on a nonzero field against a fine reference.
  std::vector<double> errs;
  for (int n : {17, 33, 65}) {
    const Grid g = build_grid(planar, n, n, 5.0, TMode::DirichletEnds);
    const auto mesh = normal_graph(planar, g, ScalarField(g));
    errs.push_back(max_rel_to(mean_curvature_from_positions(mesh), 0.5));
  }
  const double p1 = std::log2(errs[0] / errs[1]), p2 = std::log2(errs[1] / errs[2]);
  pass = pass && std::abs(p1 - 2.0) <= 0.2 && std::abs(p2 - 2.0) <= 0.2;
  detail += ", order positions " + fmt("%.3f", p1) + "/" + fmt("%.3f", p2);

  // Nested grids 33 < 65 < 129 share the coarse nodes.
  std::vector<ScalarField> Hs;
  for (int n : {33, 65, 129}) {
    const Grid g = build_grid(planar, n, n, 5.0, TMode::DirichletEnds);
    const double s_lo = planar.s_lo(), L = planar.arc_length();
    const ScalarField u = ScalarField::from_function(g, [&](double t, double s) {
      return 0.05 * std::sin(pi * (s - s_lo) / L) * std::sin(pi * t / 5.0);
    });
    Hs.push_back(mean_curvature(normal_graph(planar, g, u)));
  }
  double d1 = 0.0, d2 = 0.0;
  for (int i = 0; i < 33; ++i) {
    for (int j = 0; j < 33; ++j) {
      d1 = std::max(d1, std::abs(Hs[0](i, j) - Hs[1](2 * i, 2 * j)));
      d2 = std::max(d2, std::abs(Hs[1](2 * i, 2 * j) - Hs[2](4 * i, 4 * j)));
    }
  }
  const double pg = std::log2(d1 / d2);
  pass = pass && std::abs(pg - 2.0) <= 0.2;
  detail += ", graph " + fmt("%.3f", pg);

  // Directional derivative on random smooth fields.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  double worst = 0.0;
  for (int f = 0; f < 5; ++f) {
    const auto& cfg = f % 2 ? wedge : planar;
    const Grid g = build_grid(cfg, 64, 64, 5.0, TMode::DirichletEnds);
    double a[3][3];
    for (auto& row : a)
      for (double& x : row) x = coef(rng);
    // Wedge arcs only pin s_lo, so use quarter waves there.
    const double L = cfg.has_free_boundary() ? 2.0 * cfg.arc_length() : cfg.arc_length();
    const double s_lo = cfg.s_lo();
    ScalarField v = ScalarField::from_function(g, [&](double t, double s) {
      double acc = 0.0;
      for (int k = 1; k <= 3; ++k)
        for (int n = 1; n <= 3; ++n)
          acc += a[k - 1][n - 1] * std::sin(k * pi * (s - s_lo) / L) *
                 std::sin(n * pi * t / 5.0);
      return acc;
    });
    apply_boundary_conventions(cfg, v);
    const double eps = 1e-5;
    const ScalarField H0 = mean_curvature(normal_graph(cfg, g, ScalarField(g)));
    const ScalarField H1 = mean_curvature(normal_graph(cfg, g, eps * v));
    const ScalarField Lv = jacobi_apply(cfg, g, v);
    const ResidualSystem sys(cfg, g);
    double num = 0.0, den = 0.0;
    for (std::size_t q = 0; q < g.size(); ++q) {
      if (sys.row_kind(q) != ResidualSystem::Row::Curvature) continue;
      num = std::max(num, std::abs((H1[q] - H0[q]) / eps - 0.5 * Lv[q]));
      den = std::max(den, std::abs(0.5 * Lv[q]));
    }
    worst = std::max(worst, num / den);
  }
  pass = pass && worst < 1e-4;
  detail += ", dH rel err " + fmt("%.2e", worst);
  return {pass, detail};
}

// 7. Crandall-Rabinowitz hypotheses
Outcome crandall_rabinowitz() {
  const auto t0 = std::chrono::steady_clock::now();
  const double gamma = 3 * pi / 4;
  const auto cfg = CylinderConfig::planar(1.0, gamma);
  const auto bp = locate_bifurcation(cfg);
  const double secs = seconds_since(t0);
  const double s_lo = cfg.s_lo();
  ScalarField u11 = ScalarField::from_function(bp.grid, [&](double t, double s) {
    return std::sin(pi * (s - s_lo) / (2 * gamma)) * std::cos(2 * pi * t / bp.T);
  });
  const double corr = std::abs(inner_product(cfg, bp.kernel, u11)) /
                      (l2_norm(cfg, bp.kernel) * l2_norm(cfg, u11));
  const double closed = 8 * bp.H0 * (1 - pi * pi / (4 * gamma * gamma)) *
                        std::pow(l2_norm(cfg, bp.kernel), 2);
  const double terr = rel(bp.transversality, closed);
  return {bp.kernel_dim == 1 && corr > 0.999 && terr < 0.05 && secs < 60.0,
          "T = " + fmt("%.10f", bp.T) + ", dim " + std::to_string(bp.kernel_dim) + ", corr " +
              fmt("%.8f", corr) + ", transversality " + fmt("%.6f", bp.transversality) + " vs " +
              fmt("%.6f", closed) + ", " + fmt("%.2f s", secs)};
}

// 8. branch structure
Outcome branch_structure() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = CylinderConfig::planar(1.0, 3 * pi / 4);
  const auto bp = locate_bifurcation(cfg);
  const auto plus = continue_branch(bp, branch_switch(bp, 1e-2), 20, 0.01);
  const auto minus = continue_branch(bp, branch_switch(bp, -1e-2), 20, 0.01);
  double res = 0.0, sym = 0.0, rot_ratio = 1e300, dH = 0.0;
  for (const auto* branch : {&plus, &minus}) {
    for (const auto& s : *branch) {
      res = std::max(res, s.residual_norm);
      sym = std::max(sym, check_alexandrov_symmetry(cfg, s));
      rot_ratio = std::min(rot_ratio, non_rotationality(s) / std::abs(s.epsilon));
    }
  }
  const std::size_t n = std::min(plus.size(), minus.size());
  for (std::size_t i = 0; i < n; ++i) dH = std::max(dH, std::abs(plus[i].H - minus[i].H));
  const auto fit = fit_quadratic(plus);
  const double secs = seconds_since(t0);
  return {plus.size() == 21 && minus.size() == 21 && res < 1e-10 && rot_ratio > 0.5 &&
              sym < 1e-8 && dH < 1e-8 && fit.r_squared > 0.99 && secs < 300.0,
          std::to_string(plus.size() - 1) + " steps, max residual " + fmt("%.1e", res) +
              ", min nonrot/|eps| " + fmt("%.3f", rot_ratio) + ", symmetry " + fmt("%.1e", sym) +
              ", |H+ - H-| " + fmt("%.1e", dH) + ", R^2 " + fmt("%.6f", fit.r_squared) +
              ", eps range " + fmt("%.3f", plus.back().epsilon) + ", " + fmt("%.1f s", secs)};
}

// 9. determinism of the CLI outputs
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    files[fs::relative(e.path(), dir).string()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return files;
}

Outcome determinism(const std::string& cli, const fs::path& scratch) {
  struct Job {
    std::string name, sub, config, extra;
  };
  const std::vector<Job> jobs = {
      {"planar_spectrum", "spectrum",
       R"({"scenario":{"type":"planar","r":1,"gamma":"3pi/4"},"task":{"h":5,"m":8}})", ""},
      {"wedge_spectrum", "spectrum",
       R"({"scenario":{"type":"wedge","r":1,"gamma":"pi/4","beta":2},"task":{"h":10,"m":6}})",
       "--format json"},
      {"stability", "stability",
       R"({"scenario":{"type":"wedge","r":1,"gamma":"pi/2","beta":"2pi/3"},"task":{"h":20}})", ""},
      {"critical", "critical", R"({"scenario":{"type":"planar","r":2,"gamma":"0.6pi"}})", ""},
      {"bifurcate", "bifurcate",
       R"({"scenario":{"type":"planar","r":1,"gamma":"3pi/4"},"numerics":{"nt":32,"ns":32},"task":{"obj":true}})",
       ""},
      {"trace", "trace",
       R"({"scenario":{"type":"planar","r":1,"gamma":"3pi/4"},"numerics":{"nt":32,"ns":32},"task":{"steps":6,"obj":true}})",
       "--format json"},
      {"sweep", "sweep",
       R"({"scenario":{"type":"planar","r":1,"gamma":"3pi/4"},"task":{"sweep":{"axis":"gamma","values":["pi/3","0.55pi","0.6pi","0.75pi","0.9pi"]}}})",
       "--threads 4"},
  };
  std::error_code ec;
  fs::remove_all(scratch, ec);
  fs::create_directories(scratch);
  std::map<std::string, std::string> runs[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path root = scratch / ("run" + std::to_string(run));
    for (const auto& j : jobs) {
      const fs::path cfg = scratch / (j.name + ".json");
      std::ofstream(cfg) << j.config;
      const fs::path out = root / j.name;
      const std::string cmd = "\"" + cli + "\" " + j.sub + " --config \"" + cfg.string() +
                              "\" --out \"" + out.string() + "\" " + j.extra + " > \"" +
                              (scratch / "log.txt").string() + "\" 2>&1";
      const int status = std::system(cmd.c_str());
      if (status != 0) return {false, j.name + " exited with status " + std::to_string(status)};
    }
    runs[run] = snapshot(root);
  }
  int csv = 0, json = 0, obj = 0;
  for (const auto& [name, body] : runs[0]) {
    const auto ext = fs::path(name).extension();
    csv += ext == ".csv";
    json += ext == ".json";
    obj += ext == ".obj";
  }
  const bool same = runs[0] == runs[1];
  return {same && csv > 0 && json > 0 && obj > 0,
          std::to_string(runs[0].size()) + " files (" + std::to_string(csv) + " csv, " +
              std::to_string(json) + " json, " + std::to_string(obj) + " obj), " +
              (same ? "byte-identical" : "outputs differ")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s <cmc_bifurcate> <scratch dir>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path scratch = argv[2];

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"closed-form spectrum vs oracle", closed_form_vs_oracle},
      {"critical length from oracle zero crossing", critical_length},
      {"period identities", period_identities},
      {"wedge stability classifications", wedge_classifications},
      {"exponential root and Robin oracle", transcendental_root},
      {"discrete curvature operator", operator_fidelity},
      {"bifurcation point hypotheses", crandall_rabinowitz},
      {"branch existence and structure", branch_structure},
      {"determinism of CLI outputs", [&] { return determinism(cli, scratch); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
