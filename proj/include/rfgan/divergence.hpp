#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rfgan/ext_real.hpp"
#include "rfgan/fgen.hpp"
#include "rfgan/space.hpp"

namespace rfgan {

/// Discriminator values are searched within [-kDiscriminatorCap, kDiscriminatorCap];
/// a supremum still increasing at the cap is reported as +inf.
inline constexpr double kDiscriminatorCap = 1e3;

struct DivergenceValue {
  ExtReal value;
  /// Maximizing discriminator, when computed variationally.
  std::optional<FunctionOnSpace> attained_h;
  /// Some coordinate of attained_h was truncated at +-kDiscriminatorCap.
  bool capped = false;
};

/// sum_{q_i > 0} q_i f(p_i / q_i) + f'(inf) * sum_{q_i = 0} p_i, with 0 f(0/0) = 0.
/// For P not dominated by Q the escape term is the sup over h that stay in
/// dom f* on Q-null outcomes as well; df_variational_full uses the same
/// convention. Without that restriction the sup is +inf whenever P escapes.
DivergenceValue df_closed(const FGenerator& g, const Dist& p, const Dist& q);

/// sup_h E_P[h] - E_Q[f*(h)], solved coordinate-wise since the objective
/// separates over outcomes.
DivergenceValue df_variational_full(const FGenerator& g, const Dist& p, const Dist& q);

/// Extended KL divergence, df_closed with the kl generator.
DivergenceValue kl_bar(const Dist& p, const Dist& q);

enum class RMethod {
  Auto,     ///< closed form for kl, numeric otherwise
  Numeric,  ///< always bisect on the derivative in b
};

struct RValue {
  double value = 0.0;
  double b_star = 0.0;
};

/// R(h) = inf_b E_Q[f*(h + b)] - b and its minimizer b*.
///
/// The numeric route brackets the root of b -> E_Q[f*'(h + b)] - 1 and
/// bisects to an interval below 1e-10. For kl, R(h) = ln E_Q[e^h] and
/// b* = 1 - R(h). Throws Unbounded when no bracket exists.
RValue r_functional(const FGenerator& g, const Dist& q, std::span<const double> h, RMethod method = RMethod::Auto);
RValue r_functional(const FGenerator& g, const Dist& q, const FunctionOnSpace& h, RMethod method = RMethod::Auto);

/// Tilted weights q_i f*'(h_i + b*), normalized; the gradient of R at h.
std::vector<double> r_functional_tilt(const FGenerator& g, const Dist& q, std::span<const double> h, double b_star);

/// E_Q[f*(h)] as an extended real (terms with q_i = 0 are dropped).
ExtReal conjugate_expectation(const FGenerator& g, const Dist& q, std::span<const double> h);

}  // namespace rfgan
