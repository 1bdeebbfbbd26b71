#pragma once

#include <string>
#include <vector>

#include "pxlap/domain.hpp"
#include "pxlap/vexp.hpp"

namespace pxlap {

/// Terms of E(u) = int |grad u|^p/p - int a|u|^q/q - lambda int b (u+)^{1-delta}/(1-delta).
struct EnergyBreakdown {
  double gradient_term = 0.0;
  double q_term = 0.0;
  double singular_term = 0.0;
  double total = 0.0;
};

EnergyBreakdown energy(const GridFunction& u, const ProblemData& data);

/// <E'(u), u> = int |grad u|^p - int a|u|^q - lambda int b (u+)^{1-delta}.
/// Requires u >= 0 and u != 0.
double nehari_residual(const GridFunction& u, const ProblemData& data);

/// 1e-8 times the mean positive nodal value of u.
double default_floor(const GridFunction& u, double factor = 1e-8);

/// Discrete weak-form residual
///   r_i = int |grad u|^{p-2} grad u . grad phi_i - int a |u|^{q-2} u phi_i - lambda int b u^{-delta} phi_i
/// for every interior hat function phi_i (zero on boundary vertices). This is the
/// exact gradient of the discrete energy. Throws BelowFloor if an interior value is
/// below `floor`.
GridFunction weak_gradient(const GridFunction& u, const ProblemData& data, double floor);

struct WeakResidual {
  GridFunction residual;
  double max_abs = 0.0;  // largest |r_i|
  double scale = 0.0;    // largest per-vertex sum of absolute term contributions
  std::size_t worst_vertex = 0;

  double relative() const { return scale > 0.0 ? max_abs / scale : max_abs; }
};

WeakResidual weak_residual(const GridFunction& u, const ProblemData& data, double floor);

/// Classification of a fiber-map critical point (or of a point relative to the manifold).
enum class FiberClass { n_plus, n_minus, n_zero, off_manifold };

std::string to_string(FiberClass c);

/// Relative dead-band around zero used to call a curvature degenerate.
inline constexpr double kCurvatureDeadBand = 1e-9;

/// t -> E(t u) for a fixed direction u, stored as sums of power laws in t so the
/// quadrature is done once per direction. The exponent dependence on x stays
/// inside the sums: each element contributes its own power of t.
class FiberMap {
 public:
  struct PowerTerm {
    double coefficient;
    double exponent;
  };

  FiberMap(const GridFunction& u, const ProblemData& data);

  double lambda() const noexcept { return lambda_; }
  FiberMap with_lambda(double lambda) const;

  double value(double t) const;      // Phi(t)
  double slope(double t) const;      // Phi'(t)
  double curvature(double t) const;  // Phi''(t)

  /// Sum of the absolute values of the three terms of Phi'(t) / Phi''(t).
  double slope_scale(double t) const;
  double curvature_scale(double t) const;

  double gradient_modular() const;  // int |grad u|^p
  double q_integral() const;        // int a |u|^q
  double singular_integral() const; // int b (u+)^{1-delta}

 private:
  std::vector<PowerTerm> gradient_;  // m |grad u|^p, exponent p
  std::vector<PowerTerm> q_;         // m a |u|^q, exponent q
  std::vector<PowerTerm> singular_;  // m b (u+)^{1-delta}, exponent 1-delta
  double lambda_ = 0.0;
};

struct CriticalPoint {
  double t = 0.0;
  double slope = 0.0;
  double curvature = 0.0;
  FiberClass kind = FiberClass::n_zero;
};

struct RootOptions {
  double relative_width = 1e-10;
  int max_steps = 200;
};

/// Sign changes of Phi' on a log-uniform grid of `samples` points in [t_min, t_max],
/// each refined by bisection and classified by the sign of Phi''.
std::vector<CriticalPoint> find_critical_points(const FiberMap& fiber, double t_min, double t_max, int samples,
                                                const RootOptions& options = {});

struct FiberProfile {
  GridFunction direction;
  std::vector<double> t_samples;
  std::vector<double> phi, dphi, ddphi;
  std::vector<CriticalPoint> critical_points;
  bool bracket_found = false;  // false: Phi' keeps one sign on the sampled range
};

/// Samples Phi, Phi', Phi'' and locates the critical points. Requires u >= 0, u != 0,
/// 0 < t_min < t_max and n_samples >= 16. A profile without sign change is returned
/// with `bracket_found == false` rather than thrown.
FiberProfile fiber_profile(const GridFunction& u, const ProblemData& data, double t_min, double t_max,
                           int n_samples);

/// E(u) - <E'(u), u> / q^-: coincides with E on the Nehari manifold and is bounded
/// below there by the coercivity estimate.
double nehari_reduced_energy(const GridFunction& u, const ProblemData& data);

/// Lower bound for the reduced energy at s*u, where ||u|| = 1 (Sobolev norm) and
/// grad_norm = |grad u|_p. Valid for s >= 1 and s * grad_norm >= 1:
///   (1/p^+ - 1/q^-) (s grad_norm)^{p^-} - lambda c_d_minus (1/(1-delta^+) - 1/q^-) s^{1-delta^-}.
double coercivity_lower_bound(double s, double grad_norm, const ProblemData& data, const EmbeddingConstants& c);

/// Smallest s in the validity range beyond which the lower bound exceeds `level`
/// for every larger scale.
double coercivity_radius(double grad_norm, const ProblemData& data, const EmbeddingConstants& c, double level = 0.0);

}  // namespace pxlap
