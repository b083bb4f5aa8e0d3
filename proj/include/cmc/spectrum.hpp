#pragma once

#include <optional>
#include <vector>

#include "cmc/geometry.hpp"

namespace cmc {

// Sign of the separation constant C = mu: c^2 > 0, 0, or -c^2.
enum class ArcBranch { Oscillatory, Linear, Exponential };
const char* to_string(ArcBranch b) noexcept;

struct SpectrumEntry {
  int k = 1;  // arc mode, 1-based
  int n = 1;  // axial mode
  double lambda = 0.0;
  double c = 0.0;
  ArcBranch branch = ArcBranch::Oscillatory;
};

// Ascending lambda, ties by (k, n).
bool spectrum_order(const SpectrumEntry& a, const SpectrumEntry& b);

enum class Stability { Stable, MarginallyStable, Unstable };
const char* to_string(Stability s) noexcept;

struct StabilityVerdict {
  Stability classification = Stability::Stable;
  double lambda_min = 0.0;
  std::optional<SpectrumEntry> witness;  // set when unstable
};

// --- planar strip ----------------------------------------------------------

double planar_eigenvalue(double r, double gamma, double h, int k, int n);

// m smallest lambda_{k,n} on a truncation of length h.
std::vector<SpectrumEntry> planar_spectrum(double r, double gamma, double h, int m);

// h0 = 2 pi r gamma / sqrt(4 gamma^2 - pi^2). NoCriticalLength for gamma <= pi/2.
double planar_critical_length(double r, double gamma);

// T = 2 h0. NoBifurcation for gamma <= pi/2.
double planar_bifurcation_period(double r, double gamma);

StabilityVerdict planar_stability(double r, double gamma, double h);

// --- transcendental conditions of the wedge --------------------------------

enum class CaseId { ConvexExpEq, ConvexLinearEq, ConvexTanEq, ConcaveTanEq, NeumannEq };
const char* to_string(CaseId c) noexcept;

struct Bracket {
  double lo = 0.0;
  double hi = 50.0;
};

struct TranscendentalCase {
  CaseId case_id = CaseId::NeumannEq;
  std::optional<double> root_c;  // smallest root in the bracket
  double residual = 0.0;         // NaN when there is no root
  int sign_changes = 0;          // sign changes seen by the scan over the bracket
};

// Scaled equations, all free of tan poles:
//   ConvexExpEq   tanh(c beta) - c tan(gamma)             (same roots as e^{2c beta} = (1+c tan)/(1-c tan))
//   ConvexTanEq   c cos(c beta) - cot(gamma) sin(c beta)  (c tan(gamma) = tan(c beta))
//   ConcaveTanEq  c cos(c beta) + cot(gamma) sin(c beta)  (c tan(gamma) + tan(c beta) = 0)
//   NeumannEq     cos(c beta), closed form c = (pi/2 + k pi)/beta with k picked by the bracket
//   ConvexLinearEq has no root; residual = (beta - tan(gamma))/max(1, beta)
double transcendental_function(CaseId id, double gamma, double beta, double c);

TranscendentalCase solve_transcendental(CaseId id, double gamma, double beta, Bracket bracket = {});

// --- right wedge -----------------------------------------------------------

// Lowest eigenvalue mu_1 of -g'' = mu g on [0, beta], g(0) = 0,
// g'(beta) = rho g(beta), from the closed-form case analysis.
struct ArcMode {
  double mu = 0.0;
  double c = 0.0;
  ArcBranch branch = ArcBranch::Oscillatory;
  CaseId case_id = CaseId::NeumannEq;
};
ArcMode wedge_lowest_arc_mode(const CylinderConfig& config);

StabilityVerdict wedge_stability(const CylinderConfig& config, double h);

enum class WedgeTheorem { RightAngle, ExponentialRoot, LinearCase, TangentRoot };
const char* to_string(WedgeTheorem t) noexcept;

struct WedgePeriod {
  double T = 0.0;
  WedgeTheorem theorem = WedgeTheorem::RightAngle;
  CaseId case_id = CaseId::NeumannEq;
  double c = 0.0;
};

// NoBifurcation when no convex hypothesis holds.
WedgePeriod wedge_bifurcation_period(const CylinderConfig& config);

// --- either scenario -------------------------------------------------------

// Lowest arc eigenvalue mu_1 ((pi/(2 gamma))^2 for the planar strip).
double lowest_arc_eigenvalue(const CylinderConfig& config);

// Bifurcation period of the trivial branch; throws NoBifurcation.
double bifurcation_period(const CylinderConfig& config);

}  // namespace cmc
