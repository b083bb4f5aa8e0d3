#include "cmc/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cmc/errors.hpp"

namespace cmc {

using std::numbers::pi;

namespace {

constexpr double kScanStep = 1e-3;
constexpr double kBisectTol = 1e-14;
constexpr double kMarginalTol = 1e-10;
constexpr double kTiny = 1e-9;

bool is_right_angle(double gamma) { return std::abs(gamma - pi / 2) < 1e-12; }

double cot(double x) { return std::cos(x) / std::sin(x); }

double derivative(CaseId id, double gamma, double beta, double c) {
  switch (id) {
    case CaseId::ConvexExpEq: {
      const double th = std::tanh(c * beta);
      return beta * (1.0 - th * th) - std::tan(gamma);
    }
    case CaseId::ConvexTanEq:
    case CaseId::ConcaveTanEq: {
      const double rho = id == CaseId::ConvexTanEq ? cot(gamma) : -cot(gamma);
      const double cb = std::cos(c * beta);
      const double sb = std::sin(c * beta);
      return cb - c * beta * sb - rho * beta * cb;
    }
    case CaseId::NeumannEq: return -beta * std::sin(c * beta);
    case CaseId::ConvexLinearEq: return 0.0;
  }
  return 0.0;
}

double residual_scale(CaseId id, double gamma, double c) {
  if (id == CaseId::ConvexExpEq) return 1.0 + c * std::abs(std::tan(gamma));
  if (id == CaseId::NeumannEq) return 1.0;
  return 1.0 + c + std::abs(cot(gamma));
}

// Does (lo, hi) contain a pole of tan(c beta)?
bool bracket_has_pole(double beta, double lo, double hi) {
  const double k = std::ceil((lo * beta - pi / 2) / pi);
  const double c = (pi / 2 + std::max(0.0, k) * pi) / beta;
  return c > lo && c < hi;
}

}  // namespace

const char* to_string(ArcBranch b) noexcept {
  switch (b) {
    case ArcBranch::Oscillatory: return "oscillatory";
    case ArcBranch::Linear: return "linear";
    case ArcBranch::Exponential: return "exponential";
  }
  return "unknown";
}

const char* to_string(Stability s) noexcept {
  switch (s) {
    case Stability::Stable: return "Stable";
    case Stability::MarginallyStable: return "MarginallyStable";
    case Stability::Unstable: return "Unstable";
  }
  return "unknown";
}

const char* to_string(CaseId c) noexcept {
  switch (c) {
    case CaseId::ConvexExpEq: return "ConvexExpEq";
    case CaseId::ConvexLinearEq: return "ConvexLinearEq";
    case CaseId::ConvexTanEq: return "ConvexTanEq";
    case CaseId::ConcaveTanEq: return "ConcaveTanEq";
    case CaseId::NeumannEq: return "NeumannEq";
  }
  return "unknown";
}

const char* to_string(WedgeTheorem t) noexcept {
  switch (t) {
    case WedgeTheorem::RightAngle: return "right_angle";
    case WedgeTheorem::ExponentialRoot: return "exponential_root";
    case WedgeTheorem::LinearCase: return "linear_case";
    case WedgeTheorem::TangentRoot: return "tangent_root";
  }
  return "unknown";
}

bool spectrum_order(const SpectrumEntry& a, const SpectrumEntry& b) {
  if (a.lambda != b.lambda) return a.lambda < b.lambda;
  if (a.k != b.k) return a.k < b.k;
  return a.n < b.n;
}

double planar_eigenvalue(double r, double gamma, double h, int k, int n) {
  const double kk = static_cast<double>(k) * k;
  const double nn = static_cast<double>(n) * n;
  return (kk * pi * pi / (4.0 * gamma * gamma) - 1.0) / (r * r) + nn * pi * pi / (h * h);
}

std::vector<SpectrumEntry> planar_spectrum(double r, double gamma, double h, int m) {
  if (!(r > 0.0 && h > 0.0 && gamma > 0.0 && gamma < pi) || m < 1) {
    fail(ErrorCode::InvalidConfig, "planar_spectrum: bad arguments");
  }
  // lambda grows in k and n, so the m smallest sit in the m x m corner.
  std::vector<SpectrumEntry> all;
  for (int k = 1; k <= m; ++k) {
    for (int n = 1; n <= m; ++n) {
      all.push_back({k, n, planar_eigenvalue(r, gamma, h, k, n), k * pi / (2.0 * gamma),
                     ArcBranch::Oscillatory});
    }
  }
  std::sort(all.begin(), all.end(), spectrum_order);
  all.resize(static_cast<std::size_t>(m));
  return all;
}

double planar_critical_length(double r, double gamma) {
  if (!(gamma > pi / 2 && gamma < pi)) {
    fail(ErrorCode::NoCriticalLength, "gamma <= pi/2: stable for every length");
  }
  return 2.0 * pi * r * gamma / std::sqrt(4.0 * gamma * gamma - pi * pi);
}

double planar_bifurcation_period(double r, double gamma) {
  if (!(gamma > pi / 2 && gamma < pi)) {
    fail(ErrorCode::NoBifurcation, "gamma <= pi/2: no bifurcation on the planar strip");
  }
  return 2.0 * planar_critical_length(r, gamma);
}

StabilityVerdict planar_stability(double r, double gamma, double h) {
  if (!(r > 0.0 && h > 0.0 && gamma > 0.0 && gamma < pi)) {
    fail(ErrorCode::InvalidConfig, "planar_stability: bad arguments");
  }
  StabilityVerdict v;
  const SpectrumEntry first{1, 1, planar_eigenvalue(r, gamma, h, 1, 1), pi / (2.0 * gamma),
                            ArcBranch::Oscillatory};
  v.lambda_min = first.lambda;
  if (gamma <= pi / 2) return v;
  const double h0 = planar_critical_length(r, gamma);
  if (std::abs(h - h0) <= kMarginalTol * h0) {
    v.classification = Stability::MarginallyStable;
  } else if (h > h0) {
    v.classification = Stability::Unstable;
    v.witness = first;
  }
  return v;
}

double transcendental_function(CaseId id, double gamma, double beta, double c) {
  switch (id) {
    case CaseId::ConvexExpEq: return std::tanh(c * beta) - c * std::tan(gamma);
    case CaseId::ConvexTanEq: return c * std::cos(c * beta) - cot(gamma) * std::sin(c * beta);
    case CaseId::ConcaveTanEq: return c * std::cos(c * beta) + cot(gamma) * std::sin(c * beta);
    case CaseId::NeumannEq: return std::cos(c * beta);
    case CaseId::ConvexLinearEq: return (beta - std::tan(gamma)) / std::max(1.0, beta);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

TranscendentalCase solve_transcendental(CaseId id, double gamma, double beta, Bracket bracket) {
  if (!(gamma > 0.0 && gamma < pi && beta > 0.0)) {
    fail(ErrorCode::InvalidConfig, "solve_transcendental: need gamma in (0, pi), beta > 0");
  }
  if (!(bracket.lo >= 0.0 && bracket.hi > bracket.lo)) {
    fail(ErrorCode::InvalidConfig, "solve_transcendental: bracket must satisfy 0 <= lo < hi");
  }
  if (id == CaseId::ConvexExpEq && !(gamma < pi / 2)) {
    fail(ErrorCode::InvalidConfig, "ConvexExpEq needs gamma < pi/2");
  }

  TranscendentalCase out;
  out.case_id = id;
  out.residual = std::numeric_limits<double>::quiet_NaN();

  if (id == CaseId::ConvexLinearEq) {
    out.residual = transcendental_function(id, gamma, beta, 0.0);
    return out;
  }

  if (id == CaseId::NeumannEq) {
    double k = std::max(0.0, std::ceil((bracket.lo * beta - pi / 2) / pi));
    double c = (0.5 + k) * pi / beta;
    if (c <= bracket.lo) c = (0.5 + ++k) * pi / beta;
    for (double ck = c; ck <= bracket.hi; ck += pi / beta) ++out.sign_changes;
    if (c <= bracket.hi) {
      out.root_c = c;
      out.residual = std::abs(std::cos(c * beta));
    }
    return out;
  }

  auto f = [&](double c) { return transcendental_function(id, gamma, beta, c); };

  // Every equation vanishes at c = 0, so the scan starts just above it; the
  // tiny first sample still resolves roots closer to zero than one step.
  double a = bracket.lo > 0.0 ? bracket.lo : kTiny;
  double fa = f(a);
  const long steps = static_cast<long>(std::ceil((bracket.hi - bracket.lo) / kScanStep));
  double root_lo = 0.0, root_hi = 0.0;
  bool found = false;
  for (long i = 1; i <= steps; ++i) {
    const double b = std::min(bracket.hi, bracket.lo + i * kScanStep);
    if (b <= a) continue;
    const double fb = f(b);
    if ((fa < 0.0 && fb >= 0.0) || (fa > 0.0 && fb <= 0.0)) {
      ++out.sign_changes;
      if (!found) {
        found = true;
        root_lo = a;
        root_hi = b;
      }
    }
    a = b;
    fa = fb;
  }

  if (!found) {
    if (id != CaseId::ConvexExpEq && bracket_has_pole(beta, bracket.lo, bracket.hi)) {
      fail(ErrorCode::PoleInBracket,
           "bracket contains a tan pole and the pole-free form has no sign change");
    }
    return out;
  }

  double lo = root_lo, hi = root_hi;
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo >= kBisectTol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double c = 0.5 * (lo + hi);
  // One Newton polish; kept only if it improves the residual.
  const double d = derivative(id, gamma, beta, c);
  if (d != 0.0 && std::isfinite(d)) {
    const double cn = c - f(c) / d;
    if (cn >= root_lo && cn <= root_hi && std::abs(f(cn)) < std::abs(f(c))) c = cn;
  }
  out.root_c = c;
  out.residual = std::abs(f(c)) / residual_scale(id, gamma, c);
  return out;
}

ArcMode wedge_lowest_arc_mode(const CylinderConfig& config) {
  config.validate();
  if (config.scenario != Scenario::RightWedge) {
    fail(ErrorCode::InvalidConfig, "wedge_lowest_arc_mode needs a wedge config");
  }
  const double g = config.gamma;
  const double b = config.beta;
  ArcMode m;

  if (config.convexity == Convexity::Concave) {
    const auto tc = solve_transcendental(CaseId::ConcaveTanEq, g, b, {pi / (2 * b), pi / b});
    if (!tc.root_c) fail(ErrorCode::ConvergenceFailure, "concave arc root not found");
    m.c = *tc.root_c;
    m.mu = m.c * m.c;
    m.case_id = CaseId::ConcaveTanEq;
    return m;
  }

  if (is_right_angle(g)) {
    m.c = pi / (2.0 * b);
    m.mu = m.c * m.c;
    m.case_id = CaseId::NeumannEq;
    return m;
  }

  if (g < pi / 2) {
    const double tg = std::tan(g);
    if (std::abs(b - tg) <= 1e-12 * std::max(1.0, b)) {
      m.mu = 0.0;
      m.c = 0.0;
      m.branch = ArcBranch::Linear;
      m.case_id = CaseId::ConvexLinearEq;
      return m;
    }
    if (b > tg) {
      const auto tc = solve_transcendental(CaseId::ConvexExpEq, g, b, {0.0, 1.0 / tg});
      if (!tc.root_c) fail(ErrorCode::ConvergenceFailure, "exponential arc root not found");
      m.c = *tc.root_c;
      m.mu = -m.c * m.c;
      m.branch = ArcBranch::Exponential;
      m.case_id = CaseId::ConvexExpEq;
      return m;
    }
    const auto tc = solve_transcendental(CaseId::ConvexTanEq, g, b, {0.0, pi / (2 * b)});
    if (!tc.root_c) fail(ErrorCode::ConvergenceFailure, "tangent arc root not found");
    m.c = *tc.root_c;
    m.mu = m.c * m.c;
    m.case_id = CaseId::ConvexTanEq;
    return m;
  }

  const auto tc = solve_transcendental(CaseId::ConvexTanEq, g, b, {pi / (2 * b), pi / b});
  if (!tc.root_c) fail(ErrorCode::ConvergenceFailure, "tangent arc root not found");
  m.c = *tc.root_c;
  m.mu = m.c * m.c;
  m.case_id = CaseId::ConvexTanEq;
  return m;
}

StabilityVerdict wedge_stability(const CylinderConfig& config, double h) {
  if (!(h > 0.0)) fail(ErrorCode::InvalidConfig, "wedge_stability: h must be positive");
  const ArcMode mode = wedge_lowest_arc_mode(config);
  const double r2 = config.r * config.r;
  const double arc = (mode.mu - 1.0) / r2;
  const double axial = pi * pi / (h * h);
  // lambda increases with n, so n = 1 carries the most negative value.
  const SpectrumEntry first{1, 1, arc + axial, mode.c, mode.branch};

  StabilityVerdict v;
  v.lambda_min = first.lambda;
  if (config.convexity == Convexity::Concave) return v;
  if (std::abs(first.lambda) <= kMarginalTol * std::max(std::abs(arc), axial)) {
    v.classification = Stability::MarginallyStable;
  } else if (first.lambda < 0.0) {
    v.classification = Stability::Unstable;
    v.witness = first;
  }
  return v;
}

WedgePeriod wedge_bifurcation_period(const CylinderConfig& config) {
  config.validate();
  if (config.scenario != Scenario::RightWedge) {
    fail(ErrorCode::InvalidConfig, "wedge_bifurcation_period needs a wedge config");
  }
  if (config.convexity == Convexity::Concave) {
    fail(ErrorCode::NoBifurcation, "concave wedge cylinders are stable");
  }
  const double r = config.r;
  const double b = config.beta;
  WedgePeriod p;
  if (is_right_angle(config.gamma)) {
    if (!(b > pi / 2)) fail(ErrorCode::NoBifurcation, "gamma = pi/2 needs beta > pi/2");
    p.T = 4.0 * pi * r * b / std::sqrt(4.0 * b * b - pi * pi);
    p.theorem = WedgeTheorem::RightAngle;
    p.case_id = CaseId::NeumannEq;
    p.c = pi / (2.0 * b);
    return p;
  }
  const ArcMode mode = wedge_lowest_arc_mode(config);
  if (!(mode.mu < 1.0)) {
    fail(ErrorCode::NoBifurcation,
         "lowest arc eigenvalue " + std::to_string(mode.mu) + " >= 1: no unstable mode");
  }
  p.c = mode.c;
  p.case_id = mode.case_id;
  switch (mode.case_id) {
    case CaseId::ConvexExpEq:
      p.theorem = WedgeTheorem::ExponentialRoot;
      p.T = 2.0 * pi * r / std::sqrt(1.0 + mode.c * mode.c);
      break;
    case CaseId::ConvexLinearEq:
      p.theorem = WedgeTheorem::LinearCase;
      p.T = 2.0 * pi * r;
      break;
    default:
      p.theorem = WedgeTheorem::TangentRoot;
      p.T = 2.0 * pi * r / std::sqrt(1.0 - mode.c * mode.c);
      break;
  }
  return p;
}

double lowest_arc_eigenvalue(const CylinderConfig& config) {
  config.validate();
  if (config.scenario == Scenario::PlanarStrip) {
    const double c = pi / (2.0 * config.gamma);
    return c * c;
  }
  return wedge_lowest_arc_mode(config).mu;
}

double bifurcation_period(const CylinderConfig& config) {
  config.validate();
  if (config.scenario == Scenario::PlanarStrip) {
    return planar_bifurcation_period(config.r, config.gamma);
  }
  return wedge_bifurcation_period(config).T;
}

}  // namespace cmc
