#include "cmc/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

#include "cmc/oracle.hpp"
#include "cmc/spectrum.hpp"

namespace cmc {

using nlohmann::json;
using std::numbers::pi;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json scenario_json(const CylinderConfig& c) {
  json j;
  j["type"] = c.scenario == Scenario::PlanarStrip ? "planar" : "wedge";
  j["r"] = c.r;
  j["gamma"] = c.gamma;
  if (c.scenario == Scenario::RightWedge) {
    j["beta"] = c.beta;
    j["convexity"] = to_string(c.convexity);
  }
  return j;
}

json entry_json(const SpectrumEntry& e) {
  return {{"k", e.k}, {"n", e.n}, {"lambda", e.lambda}, {"c", e.c}, {"branch", to_string(e.branch)}};
}

json verdict_json(const StabilityVerdict& v) {
  json j;
  j["classification"] = to_string(v.classification);
  j["lambda_min"] = v.lambda_min;
  j["witness"] = v.witness ? entry_json(*v.witness) : json(nullptr);
  return j;
}

StabilityVerdict stability_of(const CylinderConfig& c, double h) {
  if (c.scenario == Scenario::PlanarStrip) return planar_stability(c.r, c.gamma, h);
  return wedge_stability(c, h);
}

double require_h(const RunConfig& rc) {
  if (!rc.task.h) fail(ErrorCode::InvalidConfig, "task.h is required for this command");
  return *rc.task.h;
}

NewtonOptions newton_options(const RunConfig& rc) {
  return {rc.numerics.newton_tol, rc.numerics.max_newton_iter};
}

BifurcationOptions bifurcation_options(const RunConfig& rc) {
  BifurcationOptions o;
  o.nt = rc.numerics.nt;
  o.ns = rc.numerics.ns;
  return o;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) fail(ErrorCode::InvalidConfig, "cannot write " + p.string());
  return f;
}

void write_table(const DiagramTable& t, const std::filesystem::path& dir, const std::string& stem,
                 const std::string& format) {
  if (format == "json") {
    auto f = open_out(dir / (stem + ".json"));
    write_json(f, t.to_json());
  } else {
    auto f = open_out(dir / (stem + ".csv"));
    t.write_csv(f);
  }
}

void write_report(const json& j, const std::filesystem::path& p) {
  auto f = open_out(p);
  write_json(f, j);
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidConfig: return 2;
    case ErrorCode::NoBifurcation:
    case ErrorCode::NoCriticalLength:
    case ErrorCode::DegenerateKernel: return 4;
    case ErrorCode::ContinuationStalled: return 5;
    default: return 3;
  }
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("CMC_BIFURCATE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return 1;
}

DiagramTable cmd_spectrum(const RunConfig& rc) {
  const double h = require_h(rc);
  const CylinderConfig& c = rc.scenario;
  const int m = rc.task.m;
  DiagramTable t({"k", "n", "lambda_closed", "lambda_oracle", "rel_err"},
                 {false, false, true, false, true}, false);

  if (c.scenario == Scenario::PlanarStrip) {
    // The oracle list is long enough to contain every (k, n) with k, n <= m.
    const int m_big = m * m;
    if (m_big > rc.numerics.oracle_ns / 4) {
      fail(ErrorCode::InvalidConfig, "task.m too large for numerics.oracle_ns");
    }
    const auto oracle = modal_jacobi_spectrum(c, h, TMode::DirichletEnds, m_big, rc.numerics.oracle_ns);
    for (const SpectrumEntry& e : planar_spectrum(c.r, c.gamma, h, m)) {
      double lo = kNaN;
      for (const SpectrumEntry& o : oracle) {
        if (o.k == e.k && o.n == e.n) lo = o.lambda;
      }
      if (std::isnan(lo)) fail(ErrorCode::ConvergenceFailure, "oracle missed a closed-form mode");
      t.add_row({double(e.k), double(e.n), e.lambda, lo, std::abs(e.lambda - lo) / std::abs(e.lambda)});
    }
    return t;
  }

  if (m > rc.numerics.oracle_ns / 4) fail(ErrorCode::InvalidConfig, "task.m too large for numerics.oracle_ns");
  const ArcMode first = wedge_lowest_arc_mode(c);
  for (const SpectrumEntry& o : modal_jacobi_spectrum(c, h, TMode::DirichletEnds, m, rc.numerics.oracle_ns)) {
    double closed = kNaN;
    if (o.k == 1) closed = (first.mu - 1.0) / (c.r * c.r) + o.n * o.n * pi * pi / (h * h);
    t.add_row({double(o.k), double(o.n), closed, o.lambda, std::abs(closed - o.lambda) / std::abs(closed)});
  }
  return t;
}

json cmd_stability(const RunConfig& rc) {
  const double h = require_h(rc);
  json j;
  j["scenario"] = scenario_json(rc.scenario);
  j["h"] = h;
  j["verdict"] = verdict_json(stability_of(rc.scenario, h));
  return j;
}

json cmd_critical(const RunConfig& rc) {
  const CylinderConfig& c = rc.scenario;
  json j;
  j["scenario"] = scenario_json(c);
  if (c.scenario == Scenario::PlanarStrip) {
    j["h0"] = planar_critical_length(c.r, c.gamma);
    j["T"] = planar_bifurcation_period(c.r, c.gamma);
    j["theorem_case"] = "planar";
    return j;
  }
  const WedgePeriod p = wedge_bifurcation_period(c);
  j["T"] = p.T;
  j["h0"] = 0.5 * p.T;  // lambda_{1,1} vanishes at h = T/2
  j["theorem_case"] = to_string(p.theorem);
  j["case_id"] = to_string(p.case_id);
  j["c"] = p.c;
  return j;
}

BifurcateResult cmd_bifurcate(const RunConfig& rc) {
  BifurcateResult res;
  res.point = locate_bifurcation(rc.scenario, rc.task.t_mode, bifurcation_options(rc));
  const BifurcationPoint& bp = res.point;
  json& j = res.report;
  j["scenario"] = scenario_json(rc.scenario);
  j["grid"] = {{"nt", bp.grid.nt},
               {"ns", bp.grid.ns},
               {"t_extent", bp.grid.t_extent},
               {"t_mode", to_string(bp.grid.t_mode)}};
  j["H0"] = bp.H0;
  j["H_star"] = bp.H_star;
  j["T"] = bp.T;
  j["kernel_dim"] = bp.kernel_dim;
  j["nominal_lambda"] = bp.nominal_lambda;
  j["kernel_lambda"] = bp.kernel_lambda;
  j["transversality"] = bp.transversality;
  if (rc.scenario.scenario == Scenario::PlanarStrip) {
    const double g = rc.scenario.gamma;
    j["transversality_closed_form"] = 8.0 * bp.H0 * (1.0 - pi * pi / (4.0 * g * g));
  }

  res.kernel = DiagramTable({"i", "j", "t", "s", "value"}, {}, false);
  for (int i = 0; i < bp.grid.nt; ++i) {
    for (int jj = 0; jj < bp.grid.ns; ++jj) {
      res.kernel.add_row({double(i), double(jj), bp.grid.t(i), bp.grid.s(jj), bp.kernel(i, jj)});
    }
  }
  return res;
}

TraceResult cmd_trace(const RunConfig& rc) {
  TraceResult res;
  res.point = locate_bifurcation(rc.scenario, rc.task.t_mode, bifurcation_options(rc));
  const NewtonOptions nopt = newton_options(rc);
  const BranchState start = branch_switch(res.point, rc.task.epsilon0, nopt);
  ContinuationOptions copt;
  copt.newton = nopt;
  res.states = continue_branch(res.point, start, rc.task.steps, rc.task.ds, copt);

  const bool planar = rc.scenario.scenario == Scenario::PlanarStrip;
  res.table = DiagramTable(
      {"step", "arclength", "epsilon", "H", "residual_norm", "symmetry_defect", "non_rotationality"},
      {false, false, false, false, false, true, false}, false);
  for (std::size_t k = 0; k < res.states.size(); ++k) {
    const BranchState& s = res.states[k];
    res.table.add_row({double(k), s.arclength, s.epsilon, s.H, s.residual_norm,
                       planar ? check_alexandrov_symmetry(rc.scenario, s) : kNaN,
                       non_rotationality(s)});
  }
  json& j = res.summary;
  j["scenario"] = scenario_json(rc.scenario);
  j["H0"] = res.point.H0;
  j["T"] = res.point.T;
  j["states"] = res.states.size();
  if (res.states.size() >= 2) {
    const QuadraticFit fit = fit_quadratic(res.states);
    j["fit"] = {{"c0", fit.c0}, {"c2", fit.c2}, {"r_squared", fit.r_squared}};
  }
  return res;
}

DiagramTable cmd_sweep(const RunConfig& rc, int threads) {
  const SweepBlock& sw = rc.task.sweep;
  const bool critical = sw.command == "critical";
  DiagramTable table = critical
                           ? DiagramTable({sw.axis, "h0", "T"}, {false, true, true}, true)
                           : DiagramTable({sw.axis, "lambda_min"}, {false, true}, true);
  const std::size_t n = sw.values.size();
  if (n == 0) return table;
  if (!critical && sw.axis != "h" && !rc.task.h) {
    fail(ErrorCode::InvalidConfig, "stability sweep needs task.h");
  }

  std::vector<std::vector<double>> rows(n);
  std::vector<std::string> status(n);
  auto work = [&](std::size_t i) {
    const double v = sw.values[i];
    CylinderConfig c = rc.scenario;
    double h = rc.task.h.value_or(0.0);
    if (sw.axis == "gamma") c.gamma = v;
    if (sw.axis == "beta") c.beta = v;
    if (sw.axis == "r") c.r = v;
    if (sw.axis == "h") h = v;
    try {
      c.validate();
      if (critical) {
        RunConfig local = rc;
        local.scenario = c;
        const json j = cmd_critical(local);
        rows[i] = {v, j.at("h0").get<double>(), j.at("T").get<double>()};
        status[i] = "ok";
      } else {
        const StabilityVerdict verdict = stability_of(c, h);
        rows[i] = {v, verdict.lambda_min};
        status[i] = to_string(verdict.classification);
      }
    } catch (const Error& e) {
      rows[i] = critical ? std::vector<double>{v, kNaN, kNaN} : std::vector<double>{v, kNaN};
      status[i] = to_string(e.code());
    }
  };

  const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (nthreads == 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < n; ++i) table.add_row(rows[i], status[i]);
  return table;
}

int run_command(const std::string& name, const RunConfig& rc, const std::string& out_dir,
                const std::string& format, int threads, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  try {
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::InvalidConfig, "cannot create output directory " + out_dir);

    if (name == "spectrum") {
      const DiagramTable t = cmd_spectrum(rc);
      write_table(t, dir, "spectrum", format);
      out << "spectrum: " << t.rows() << " rows\n";
    } else if (name == "stability") {
      const json j = cmd_stability(rc);
      write_report(j, dir / "stability.json");
      out << j["verdict"]["classification"].get<std::string>() << "\n";
    } else if (name == "critical") {
      const json j = cmd_critical(rc);
      write_report(j, dir / "critical.json");
      out << "h0 = " << format_real(j["h0"].get<double>()) << ", T = " << format_real(j["T"].get<double>())
          << "\n";
    } else if (name == "bifurcate") {
      const BifurcateResult r = cmd_bifurcate(rc);
      write_report(r.report, dir / "bifurcation.json");
      write_table(r.kernel, dir, "kernel", format);
      ScalarField u = r.point.kernel;
      u *= 0.1 * rc.scenario.r / u.max_abs();
      auto f = open_out(dir / "kernel.obj");
      write_obj(f, normal_graph(rc.scenario, r.point.grid, u));
      out << "kernel_dim = " << r.point.kernel_dim
          << ", transversality = " << format_real(r.point.transversality) << "\n";
    } else if (name == "trace") {
      const TraceResult r = cmd_trace(rc);
      write_table(r.table, dir, "trace", format);
      write_report(r.summary, dir / "trace_summary.json");
      {
        auto f = open_out(dir / "trace.svg");
        write_branch_svg(f, r.states, r.point.H0);
      }
      if (rc.task.write_obj) {
        for (std::size_t k = 0; k < r.states.size(); ++k) {
          char stem[32];
          std::snprintf(stem, sizeof stem, "state_%03zu.obj", k);
          auto f = open_out(dir / stem);
          write_obj(f, normal_graph(rc.scenario, r.point.grid, r.states[k].u));
        }
      }
      out << "trace: " << r.states.size() << " states\n";
    } else if (name == "sweep") {
      const DiagramTable t = cmd_sweep(rc, threads);
      write_table(t, dir, "sweep", format);
      out << "sweep: " << t.rows() << " rows\n";
    } else {
      fail(ErrorCode::InvalidConfig, "unknown subcommand " + name);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return 0;
}

}  // namespace cmc
