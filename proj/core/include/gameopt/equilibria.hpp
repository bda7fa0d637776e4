#pragma once

#include "gameopt/game.hpp"
#include "gameopt/quadratic.hpp"
#include "gameopt/types.hpp"

#include <vector>

namespace gameopt {

/// Local-equilibrium certificate at a candidate point. Three nested
/// second-order conditions, kept distinct because the gaps between them are
/// real (a point can pass the per-player sufficient test yet fail the
/// symmetrized strict test):
///   necessary:  ||v||_inf <= tol and every per-player own-block Hessian has
///               lambda_min >= -tol;
///   sufficient: same residual test and every own-block lambda_min > tol;
///   strict:     same residual test and lambda_min(H + H^T) > tol.
struct NECertificate {
  double residual_inf = 0.0;  // ||v(w)||_inf
  bool stationary = false;    // residual_inf <= tol
  bool necessary_holds = false;
  bool sufficient_holds = false;
  bool strict_holds = false;
  std::vector<double> min_block_eigenvalues;  // per player, own-block Hessian
  double min_symmetrized_eigenvalue = 0.0;    // lambda_min(H + H^T)
  double tolerance = 0.0;
};

/// Full certificate: residual, per-player block spectra, symmetrized
/// spectrum, and all three verdicts. The named checks below all return the
/// same complete certificate; they exist so call sites say which condition
/// they are about.
NECertificate certify(const GameDefinition& game, const JointParams& point, double tol);

NECertificate check_necessary(const GameDefinition& game, const JointParams& point, double tol);
NECertificate check_sufficient(const GameDefinition& game, const JointParams& point, double tol);
NECertificate check_strict_local_ne(const GameDefinition& game, const JointParams& point,
                                    double tol);

/// Stacked exact best responses for a quadratic game: block i solves player
/// i's own linear first-order system with the other blocks frozen at w.
/// Requires every per-player own-block matrix to be positive definite;
/// throws SingularBlock otherwise.
Vector best_response(const QuadraticGame& game, const JointParams& point);

/// True iff ||BR(w) - w||_inf <= tol.
bool br_fixed_point_check(const QuadraticGame& game, const JointParams& point, double tol);

/// Classification of a stationary point of a potential game by the spectrum
/// of its (symmetric) Hessian. Throws AsymmetricInput when the input is not
/// symmetric within tol.
enum class StationaryType {
  StrictLocalMin,  // lambda_min > tol
  StrictSaddle,    // lambda_min < -tol and every other eigenvalue > tol
  Degenerate,      // anything else (some eigenvalue within [-tol, tol], or
                   // several negative directions)
};
StationaryType classify_stationary_point(const Matrix& symmetric_hessian, double tol);
const char* to_string(StationaryType t);

}  // namespace gameopt
