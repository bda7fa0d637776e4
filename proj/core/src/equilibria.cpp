#include "gameopt/equilibria.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace gameopt {

namespace {

double min_eig_symmetric(const Matrix& s, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure(std::string(what) + ": symmetric eigensolve failed");
  }
  return solver.eigenvalues().minCoeff();
}

}  // namespace

NECertificate certify(const GameDefinition& game, const JointParams& point, double tol) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("certify: tolerance must be > 0");
  }
  NECertificate cert;
  cert.tolerance = tol;

  const Vector v = pseudo_gradient(game, point).value;
  cert.residual_inf = v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  cert.stationary = cert.residual_inf <= tol;

  const Matrix H = game_hessian(game, point).matrix;
  const Partition& partition = game.partition();
  cert.min_block_eigenvalues.resize(static_cast<std::size_t>(partition.n_players()));
  bool blocks_psd = true;
  bool blocks_pd = true;
  for (int i = 0; i < partition.n_players(); ++i) {
    const Block b = partition.block(i);
    const Matrix raw = H.block(b.offset, b.offset, b.length, b.length);
    // The (i,i) block is an own-cost Hessian, symmetric up to gradient noise.
    const Matrix sym = 0.5 * (raw + raw.transpose());
    const double lam = min_eig_symmetric(sym, "certify (own block)");
    cert.min_block_eigenvalues[static_cast<std::size_t>(i)] = lam;
    blocks_psd = blocks_psd && lam >= -tol;
    blocks_pd = blocks_pd && lam > tol;
  }
  cert.min_symmetrized_eigenvalue = min_eig_symmetric(H + H.transpose(), "certify (H + H^T)");

  cert.necessary_holds = cert.stationary && blocks_psd;
  cert.sufficient_holds = cert.stationary && blocks_pd;
  cert.strict_holds = cert.stationary && cert.min_symmetrized_eigenvalue > tol;
  return cert;
}

NECertificate check_necessary(const GameDefinition& game, const JointParams& point,
                              double tol) {
  return certify(game, point, tol);
}

NECertificate check_sufficient(const GameDefinition& game, const JointParams& point,
                               double tol) {
  return certify(game, point, tol);
}

NECertificate check_strict_local_ne(const GameDefinition& game, const JointParams& point,
                                    double tol) {
  return certify(game, point, tol);
}

Vector best_response(const QuadraticGame& quad, const JointParams& point) {
  if (point.partition() != quad.partition()) {
    throw std::invalid_argument("best_response: point partition does not match game");
  }
  const Partition& partition = quad.partition();
  const Vector& w = point.values();
  Vector out = w;
  for (int i = 0; i < partition.n_players(); ++i) {
    const Block b = partition.block(i);
    const Matrix& Q = quad.cost_matrix(i);
    const Matrix own = Q.block(b.offset, b.offset, b.length, b.length);
    Eigen::LLT<Matrix> llt(own);
    if (llt.info() != Eigen::Success) {
      throw SingularBlock("best_response: player " + std::to_string(i + 1) +
                          " own-block matrix is not positive definite");
    }
    // Newton step is exact on a quadratic: BR_i = w_i - A_ii^{-1} grad_i.
    const Vector grad_full = Q * w + quad.cost_offset(i);
    const Vector grad_i = grad_full.segment(b.offset, b.length);
    out.segment(b.offset, b.length) = w.segment(b.offset, b.length) - llt.solve(grad_i);
  }
  return out;
}

bool br_fixed_point_check(const QuadraticGame& quad, const JointParams& point, double tol) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("br_fixed_point_check: tolerance must be > 0");
  }
  const Vector br = best_response(quad, point);
  const Vector diff = br - point.values();
  const double gap = diff.size() == 0 ? 0.0 : diff.cwiseAbs().maxCoeff();
  return gap <= tol;
}

const char* to_string(StationaryType t) {
  switch (t) {
    case StationaryType::StrictLocalMin: return "StrictLocalMin";
    case StationaryType::StrictSaddle: return "StrictSaddle";
    case StationaryType::Degenerate: return "Degenerate";
  }
  return "unknown";
}

StationaryType classify_stationary_point(const Matrix& symmetric_hessian, double tol) {
  if (symmetric_hessian.rows() != symmetric_hessian.cols()) {
    throw std::invalid_argument("classify_stationary_point: matrix must be square");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("classify_stationary_point: tolerance must be > 0");
  }
  const Matrix diff = symmetric_hessian - symmetric_hessian.transpose();
  const double asym = diff.size() == 0 ? 0.0 : diff.cwiseAbs().maxCoeff();
  if (asym > tol) {
    throw AsymmetricInput("classify_stationary_point: input matrix is not symmetric");
  }
  const Matrix sym = 0.5 * (symmetric_hessian + symmetric_hessian.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("classify_stationary_point: eigensolve failed");
  }
  const Vector evs = solver.eigenvalues();  // ascending
  const Index d = evs.size();
  if (evs[0] > tol) return StationaryType::StrictLocalMin;
  const bool rest_positive = d == 1 || evs[1] > tol;
  if (evs[0] < -tol && rest_positive) return StationaryType::StrictSaddle;
  return StationaryType::Degenerate;
}

}  // namespace gameopt
