#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "pxlap/domain.hpp"

namespace pxlap {

/// Piecewise-linear function in W_0^{1,p(x)}: one value per mesh vertex, with
/// every boundary value forced to zero on construction.
class GridFunction {
 public:
  GridFunction(std::shared_ptr<const Mesh> mesh, std::vector<double> values);

  static GridFunction zero(std::shared_ptr<const Mesh> mesh);
  static GridFunction interpolate(std::shared_ptr<const Mesh> mesh, const std::function<double(const Point&)>& f);

  const Mesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

  GridFunction scaled(double s) const;
  GridFunction positive_part() const;

  bool is_zero() const noexcept;
  bool is_nonnegative() const noexcept;
  double sup_norm() const noexcept;
  /// Mean of the strictly positive nodal values (0 if there are none).
  double mean_positive() const noexcept;

  /// Value at each element centroid (mean of the element's nodal values).
  std::vector<double> centroid_values() const;
  /// Elementwise-constant gradient.
  Point element_gradient(std::size_t e) const;
  /// |grad u| per element.
  std::vector<double> gradient_magnitudes() const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<double> values_;
};

GridFunction operator-(const GridFunction& u, const GridFunction& v);

/// sum_e |K_e| * |w_e|^{exponent_e} with w the centroid value (or |grad u| when
/// `use_gradient`). Exponents must exceed 1.
double modular(const GridFunction& u, const FieldSpec& exponent, bool use_gradient);
double modular(const GridFunction& u, std::span<const double> exponent_at, bool use_gradient);

struct LuxemburgOptions {
  double relative_tolerance = 1e-10;
  int max_bisection_steps = 200;
};

/// Luxemburg norm inf{s > 0 : modular(u / s) <= 1}.
double luxemburg_norm(const GridFunction& u, const FieldSpec& exponent, bool use_gradient,
                      const LuxemburgOptions& options = {});
double luxemburg_norm(const GridFunction& u, std::span<const double> exponent_at, bool use_gradient,
                      const LuxemburgOptions& options = {});

/// Luxemburg norm of arbitrary elementwise magnitudes against the element measures.
double luxemburg_norm_of_samples(std::span<const double> measures, std::span<const double> magnitudes,
                                 std::span<const double> exponent_at, const LuxemburgOptions& options = {});

/// |u|_{p} + |grad u|_{p}.
double sobolev_norm(const GridFunction& u, const FieldSpec& p);
double sobolev_norm(const GridFunction& u, std::span<const double> p_at);

enum class ModularClause { norm_above_one, norm_below_one, norm_equals_one };

struct ModularRelationReport {
  ModularClause clause = ModularClause::norm_equals_one;
  double norm = 0.0;
  double modular = 0.0;
  double exponent_min = 0.0;
  double exponent_max = 0.0;
  double lower = 0.0;  // lower bound the modular must respect under the applied clause
  double upper = 0.0;
  bool holds = false;
};

/// Checks the two-sided power bounds between the modular and the Luxemburg norm of u
/// (function values, not gradient). Requires u != 0.
ModularRelationReport check_modular_relations(const GridFunction& u, const FieldSpec& p);

struct HolderReport {
  double lhs = 0.0;  // |int u v|
  double rhs = 0.0;  // (1/p^- + 1/p'^-) |u|_p |v|_p'
  bool holds = false;
};

/// Hoelder-type inequality with the pointwise conjugate exponent p' = p / (p - 1).
HolderReport holder_check(const GridFunction& u, const GridFunction& v, std::span<const double> p_at);

/// Empirical constants for the weighted embeddings of W_0^{1,p(x)}:
///   int a|u|^{q(x)}       <= c_q_plus  ||u||^{q^+}        for ||u|| > 1
///   int a|u|^{q(x)}       <= c_q_minus ||u||^{q^-}        for ||u|| < 1
///   int b|u|^{1-delta(x)} <= c_d_minus ||u||^{1-delta^-}  for ||u|| > 1
///   int b|u|^{1-delta(x)} <= c_d_plus  ||u||^{1-delta^+}  for ||u|| < 1
/// with ||.|| the Sobolev norm. The `_plus`/`_minus` suffix names the extremum
/// in the exponent of ||u||.
struct EmbeddingConstants {
  double c_q_plus = 0.0;
  double c_q_minus = 0.0;
  double c_d_plus = 0.0;
  double c_d_minus = 0.0;
  int sample_count = 0;
};

inline constexpr double kEmbeddingSafetyFactor = 1.1;

/// int a |u|^{q(x)} by centroid quadrature.
double weighted_q_integral(const GridFunction& u, const ProblemData& data);
/// int b |u|^{1-delta(x)} by centroid quadrature.
double weighted_singular_integral(const GridFunction& u, const ProblemData& data);

/// Number of sine modes spanning the random directions: 6 in 1D, 3 x 3 in 2D.
std::size_t mode_count(int dimension);

/// Interpolated combination of the sine modes with the given coefficients
/// (row-major k, l in 2D).
GridFunction mode_direction(std::shared_ptr<const Mesh> mesh, std::span<const double> coefficients);

/// Random direction built from low sine modes (product modes in 2D) with
/// decaying Gaussian amplitudes; `nonnegative` takes the absolute value.
GridFunction random_direction(std::shared_ptr<const Mesh> mesh, std::mt19937_64& rng, bool nonnegative);

/// Interpolated product of coordinate sines (first Dirichlet eigenfunction of the box).
GridFunction eigen_surrogate(std::shared_ptr<const Mesh> mesh);

/// Raw (uninflated) sampled maxima of the four ratios for one direction, at the
/// scales used by estimate_embedding_constants.
EmbeddingConstants embedding_ratios(const GridFunction& direction, const ProblemData& data);

/// Sampled maxima over `samples` seeded random directions, each pushed to a local
/// maximum over the mode coefficients, times kEmbeddingSafetyFactor.
EmbeddingConstants estimate_embedding_constants(const ProblemData& data, int samples, std::uint64_t seed);

/// True if every inequality holds for `u` under `constants` at all tested scales.
bool certifies(const EmbeddingConstants& constants, const GridFunction& u, const ProblemData& data);

}  // namespace pxlap
