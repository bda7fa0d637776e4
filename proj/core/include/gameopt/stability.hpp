#pragma once

#include "gameopt/game.hpp"
#include "gameopt/integrators.hpp"
#include "gameopt/types.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace gameopt {

/// Sign conventions used throughout this module. The continuous dynamics are
/// w' = -v(w). Near a stationary point with field Jacobian H = grad v, the
/// dynamics Jacobian is A = -H: spectrum-based checks (hurwitz_check,
/// gd_eta_bound, rk2_stability_flag, eg_continuous_condition) take Sp(A).
/// Discrete one-step maps act on the field matrix M with v(w) = M w, i.e.
/// M = -A; discrete_stability_map takes M.

/// Record of the advisory per-eigenvalue continuous-time extra-gradient
/// condition a + (eta/2)(a^2 - b^2) < 0. Advisory only: the derivation it
/// comes from uses a sign convention that conflicts with the main dynamics,
/// so the exact discrete map is the authoritative check.
struct EgConditionRecord {
  std::complex<double> eigenvalue;
  double condition_value = 0.0;
  bool satisfied = false;
};

/// Spectrum of a dynamics Jacobian plus the stability verdicts read off it.
struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;  // sorted by real part, descending
  bool hurwitz_stable = false;       // every real part < 0
  std::optional<double> gd_eta_bound;  // closed-form step bound; absent if no
                                       // eigenvalue has |Re| < |Im|, or unstable
  bool rk2_stable_flag = false;      // the O(eta) two-stage condition: all Re < 0
  std::vector<EgConditionRecord> eg_continuous;  // filled on request, see below
};

/// Full complex spectrum of a square real matrix (dense solver; intended for
/// d <= 200) with the asymptotic-stability verdict of w' = (that matrix) w.
/// Also evaluates gd_eta_bound when the spectrum allows it. Throws
/// ConvergenceFailure if the eigensolver fails; never throws on an unstable
/// spectrum.
SpectrumReport hurwitz_check(const Matrix& dynamics_jacobian);

/// Raw eigenvalues sorted by (real desc, imag desc). Shared by every check.
std::vector<std::complex<double>> dense_spectrum(const Matrix& m);

/// Step-size bound for plain gradient descent from the spectrum of the
/// dynamics Jacobian A: min over eigenvalues a+ib with a < 0 and |a| < |b| of
/// -2a / (b^2 - a^2). Returns nullopt when no eigenvalue has |a| < |b| (the
/// bound does not bind). Throws NotHurwitz if any a >= 0.
std::optional<double> gd_eta_bound(const std::vector<std::complex<double>>& spectrum);

/// True iff every eigenvalue has real part strictly below zero: the two-stage
/// family's first-order continuous dynamics impose no step bound beyond this.
bool rk2_stability_flag(const std::vector<std::complex<double>>& spectrum);

/// Advisory continuous-time extra-gradient condition per eigenvalue of the
/// dynamics Jacobian: value = a + (eta/2)(a^2 - b^2), satisfied iff < 0.
std::vector<EgConditionRecord> eg_continuous_condition(
    const std::vector<std::complex<double>>& spectrum, double eta);

/// Exact one-step linear map of a method on the linear field v(w) = M w.
/// Euler: I - eta M; RK2 (whole family): I - eta M + (eta^2/2) M^2;
/// RK4: sum_{k=0..4} (-eta M)^k / k!; extra-gradient: I - eta M + eta^2 M^2;
/// consensus: I - eta M - gamma M^T M; Nesterov: 2d x 2d companion matrix of
/// the (point, buffer) recurrence. Adam is nonlinear in its state and has no
/// such map: UnsupportedMethod.
struct DiscreteStabilityResult {
  Matrix amplification;      // d x d, or 2d x 2d for the momentum lifting
  double spectral_radius = 0.0;
  bool stable = false;       // spectral_radius < 1
};
DiscreteStabilityResult discrete_stability_map(const Matrix& field_matrix, Method method,
                                               double eta, const StepParams& params = {});

/// Largest stable step size located by bracketing + bisection on the exact
/// discrete map's spectral radius. Requires the continuous dynamics -M to be
/// Hurwitz stable (throws NotHurwitz otherwise). Search capped at eta_max;
/// returns eta_max if still stable there.
double exact_stability_threshold(const Matrix& field_matrix, Method method,
                                 const StepParams& params = {}, double eta_max = 10.0);

/// Closed-form exact Euler threshold from the dynamics spectrum: min over
/// eigenvalues a+ib (all a < 0 required) of -2a / (a^2 + b^2).
double euler_exact_threshold(const std::vector<std::complex<double>>& spectrum);

/// The modified continuous dynamics a discrete rule follows to higher order.
/// Euler: w' = -v - (eta/2) (grad v) v, valid to O(eta^2).
/// RK2:   w' = -v, valid to O(eta^2). RK4: w' = -v, valid to O(eta^4).
struct HighResODE {
  std::function<Vector(const Vector&)> field;
  double correction_coefficient = 0.0;  // weight on the (grad v) v drag term
  int order_of_validity = 0;
};
HighResODE high_res_ode(Method method, const GameDefinition& game, double eta);

/// One evaluation of the high-resolution field at a point. UnsupportedMethod
/// for rules without a stated modified equation here (momentum, Adam,
/// extra-gradient, consensus).
Vector high_res_field(Method method, const GameDefinition& game, const JointParams& point,
                      double eta);

}  // namespace gameopt
