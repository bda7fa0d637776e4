#include "gameopt/stability.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace gameopt {

std::vector<std::complex<double>> dense_spectrum(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("dense_spectrum: matrix must be square");
  }
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("dense_spectrum: eigenvalue iteration failed");
  }
  std::vector<std::complex<double>> eigs(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) {
    eigs[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
  }
  std::sort(eigs.begin(), eigs.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return eigs;
}

std::optional<double> gd_eta_bound(const std::vector<std::complex<double>>& spectrum) {
  bool any = false;
  double bound = std::numeric_limits<double>::infinity();
  for (const auto& lambda : spectrum) {
    const double a = lambda.real();
    const double b = lambda.imag();
    if (a >= 0.0) {
      throw NotHurwitz("gd_eta_bound: spectrum has an eigenvalue with nonnegative real part");
    }
    if (std::abs(a) < std::abs(b)) {
      any = true;
      bound = std::min(bound, -2.0 * a / (b * b - a * a));
    }
  }
  if (!any) return std::nullopt;
  return bound;
}

bool rk2_stability_flag(const std::vector<std::complex<double>>& spectrum) {
  return std::all_of(spectrum.begin(), spectrum.end(),
                     [](const auto& lambda) { return lambda.real() < 0.0; });
}

std::vector<EgConditionRecord> eg_continuous_condition(
    const std::vector<std::complex<double>>& spectrum, double eta) {
  if (!(eta > 0.0)) {
    throw std::invalid_argument("eg_continuous_condition: eta must be > 0");
  }
  std::vector<EgConditionRecord> out;
  out.reserve(spectrum.size());
  for (const auto& lambda : spectrum) {
    const double a = lambda.real();
    const double b = lambda.imag();
    EgConditionRecord rec;
    rec.eigenvalue = lambda;
    rec.condition_value = a + 0.5 * eta * (a * a - b * b);
    rec.satisfied = rec.condition_value < 0.0;
    out.push_back(rec);
  }
  return out;
}

SpectrumReport hurwitz_check(const Matrix& dynamics_jacobian) {
  SpectrumReport report;
  report.eigenvalues = dense_spectrum(dynamics_jacobian);
  report.hurwitz_stable = std::all_of(report.eigenvalues.begin(), report.eigenvalues.end(),
                                      [](const auto& l) { return l.real() < 0.0; });
  report.rk2_stable_flag = rk2_stability_flag(report.eigenvalues);
  if (report.hurwitz_stable) {
    report.gd_eta_bound = gd_eta_bound(report.eigenvalues);
  }
  return report;
}

double euler_exact_threshold(const std::vector<std::complex<double>>& spectrum) {
  if (spectrum.empty()) {
    throw std::invalid_argument("euler_exact_threshold: empty spectrum");
  }
  double bound = std::numeric_limits<double>::infinity();
  for (const auto& lambda : spectrum) {
    const double a = lambda.real();
    const double b = lambda.imag();
    if (a >= 0.0) {
      throw NotHurwitz(
          "euler_exact_threshold: spectrum has an eigenvalue with nonnegative real part");
    }
    bound = std::min(bound, -2.0 * a / (a * a + b * b));
  }
  return bound;
}

DiscreteStabilityResult discrete_stability_map(const Matrix& field_matrix, Method method,
                                               double eta, const StepParams& params) {
  if (field_matrix.rows() != field_matrix.cols()) {
    throw std::invalid_argument("discrete_stability_map: matrix must be square");
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("discrete_stability_map: eta must be positive and finite");
  }
  const Index d = field_matrix.rows();
  const Matrix& M = field_matrix;
  const Matrix id = Matrix::Identity(d, d);

  DiscreteStabilityResult result;
  switch (method) {
    case Method::Euler:
      result.amplification = id - eta * M;
      break;
    case Method::RK2: {
      // Every two-stage second-order scheme shares this polynomial on a
      // linear field, independent of rk_alpha.
      const Matrix M2 = M * M;
      result.amplification = id - eta * M + 0.5 * eta * eta * M2;
      break;
    }
    case Method::RK4: {
      const Matrix M2 = M * M;
      const Matrix M3 = M2 * M;
      const Matrix M4 = M3 * M;
      result.amplification = id - eta * M + (eta * eta / 2.0) * M2 -
                             (eta * eta * eta / 6.0) * M3 +
                             (eta * eta * eta * eta / 24.0) * M4;
      break;
    }
    case Method::ExtraGradient:
      result.amplification = id - eta * M + eta * eta * (M * M);
      break;
    case Method::Consensus:
      result.amplification = id - eta * M - params.gamma * (M.transpose() * M);
      break;
    case Method::Nesterov: {
      // Companion form on the stacked state (w, buffer) with buffer_0 = 0.
      const Matrix B = id - eta * M;
      Matrix T(2 * d, 2 * d);
      T.topLeftCorner(d, d) = B;
      T.topRightCorner(d, d) = params.mu * B;
      T.bottomLeftCorner(d, d) = -eta * M;
      T.bottomRightCorner(d, d) = params.mu * B;
      result.amplification = T;
      break;
    }
    case Method::Adam:
      throw UnsupportedMethod(
          "discrete_stability_map: adam has no step-independent linear amplification map");
  }

  double rho = 0.0;
  for (const auto& lambda : dense_spectrum(result.amplification)) {
    rho = std::max(rho, std::abs(lambda));
  }
  result.spectral_radius = rho;
  result.stable = rho < 1.0;
  return result;
}

double exact_stability_threshold(const Matrix& field_matrix, Method method,
                                 const StepParams& params, double eta_max) {
  if (!(eta_max > 0.0)) {
    throw std::invalid_argument("exact_stability_threshold: eta_max must be > 0");
  }
  for (const auto& lambda : dense_spectrum(field_matrix)) {
    if (lambda.real() <= 0.0) {
      throw NotHurwitz(
          "exact_stability_threshold: continuous dynamics are not asymptotically stable, "
          "no positive step is contracting");
    }
  }
  const auto rho = [&](double eta) {
    return discrete_stability_map(field_matrix, method, eta, params).spectral_radius;
  };
  if (rho(eta_max) < 1.0) return eta_max;

  // rho(eta) -> 1 from below as eta -> 0+ for a positively stable field, so
  // bisect the stable/unstable boundary starting from a tiny stable step.
  double lo = eta_max;
  for (int i = 0; i < 60; ++i) {
    lo /= 2.0;
    if (rho(lo) < 1.0) break;
  }
  if (rho(lo) >= 1.0) {
    throw ConvergenceFailure(
        "exact_stability_threshold: no stable step found above eta_max * 2^-60");
  }
  double hi = lo * 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (rho(mid) < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

HighResODE high_res_ode(Method method, const GameDefinition& game, double eta) {
  if (!(eta > 0.0)) {
    throw std::invalid_argument("high_res_ode: eta must be > 0");
  }
  HighResODE ode;
  switch (method) {
    case Method::Euler: {
      // Euler's O(eta) bias shows up as a -(eta/2) (grad v) v drift term.
      ode.correction_coefficient = 0.5 * eta;
      ode.order_of_validity = 2;
      const double c = 0.5 * eta;
      ode.field = [g = game, c](const Vector& w) -> Vector {
        const Vector v = pseudo_gradient(g, JointParams(w, g.partition())).value;
        const Matrix H = game_hessian(g, JointParams(w, g.partition())).matrix;
        return -v - c * (H * v);
      };
      break;
    }
    case Method::RK2:
      ode.correction_coefficient = 0.0;
      ode.order_of_validity = 2;
      ode.field = [g = game](const Vector& w) -> Vector {
        return -pseudo_gradient(g, JointParams(w, g.partition())).value;
      };
      break;
    case Method::RK4:
      ode.correction_coefficient = 0.0;
      ode.order_of_validity = 4;
      ode.field = [g = game](const Vector& w) -> Vector {
        return -pseudo_gradient(g, JointParams(w, g.partition())).value;
      };
      break;
    default:
      throw UnsupportedMethod(
          "high_res_ode: modified-equation form available for euler, rk2, rk4 only");
  }
  return ode;
}

Vector high_res_field(Method method, const GameDefinition& game, const JointParams& point,
                      double eta) {
  if (point.partition() != game.partition()) {
    throw std::invalid_argument("high_res_field: point partition does not match game");
  }
  return high_res_ode(method, game, eta).field(point.values());
}

}  // namespace gameopt
