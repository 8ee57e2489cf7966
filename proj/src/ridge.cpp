#include "roman/ridge.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roman/errors.hpp"

namespace roman {

namespace {

constexpr double kConstantTolerance = 1e-10;

}  // namespace

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int k = -6; k <= 6; ++k) grid.push_back(std::pow(10.0, 0.5 * k));
  return grid;
}

GramSpectrum::GramSpectrum(const FeatureMatrix& centered) {
  const Eigen::Index n = centered.rows();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(centered);
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::degenerate_features, "eigendecomposition of the Gram matrix failed");
  }
  vectors_ = solver.eigenvectors();
  values_ = solver.eigenvalues().cwiseMax(0.0);
}

Eigen::MatrixXd GramSpectrum::loo_residuals(const Eigen::MatrixXd& centered_targets,
                                            double lambda) const {
  const Eigen::Index n = vectors_.rows();
  const Eigen::VectorXd shrink = values_.array() / (values_.array() + lambda);
  // H = 11^T / n + Q diag(shrink) Q^T; only its diagonal and H Y are needed.
  const Eigen::VectorXd diag =
      (vectors_.array().square().rowwise() * shrink.transpose().array()).rowwise().sum() +
      1.0 / static_cast<double>(n);
  const Eigen::MatrixXd fitted = vectors_ * (shrink.asDiagonal() * (vectors_.transpose() * centered_targets));
  Eigen::MatrixXd residuals = centered_targets - fitted;
  for (Eigen::Index i = 0; i < n; ++i) residuals.row(i) /= (1.0 - diag(i));
  return residuals;
}

Eigen::MatrixXd GramSpectrum::dual_coefficients(const Eigen::MatrixXd& centered_targets,
                                                double lambda) const {
  const Eigen::VectorXd inverse = (values_.array() + lambda).inverse();
  return vectors_ * (inverse.asDiagonal() * (vectors_.transpose() * centered_targets));
}

Eigen::MatrixXd one_vs_rest_targets(std::span<const int> labels, int classes) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(labels.size()), classes, -1.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) {
      throw Error(ErrorKind::invalid_argument, "label " + std::to_string(labels[i]) + " out of range");
    }
    y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return y;
}

RidgeModel fit_ridge(FeatureMatrix features, std::span<const int> labels, int classes,
                     std::span<const double> lambda_grid) {
  const Eigen::Index n = features.rows();
  if (n == 0 || static_cast<std::size_t>(n) != labels.size()) {
    throw Error(ErrorKind::invalid_argument, "feature rows and labels disagree");
  }
  if (classes < 2) throw Error(ErrorKind::invalid_argument, "ridge head needs at least two classes");
  if (lambda_grid.empty()) throw Error(ErrorKind::invalid_argument, "empty lambda grid");

  RidgeModel model;
  const Eigen::RowVectorXd magnitude = features.cwiseAbs().colwise().maxCoeff();
  model.feature_mean = features.colwise().mean().transpose();
  FeatureMatrix& centered = features;
  centered.rowwise() -= model.feature_mean.transpose();
  model.feature_scale = (centered.colwise().squaredNorm() / static_cast<double>(n)).cwiseSqrt().transpose();
  bool informative = false;
  for (Eigen::Index j = 0; j < model.feature_scale.size(); ++j) {
    // Spread at rounding level (e.g. background samples of z-normalised
    // series) is treated as constant; standardising it would amplify noise.
    if (model.feature_scale(j) > kConstantTolerance * magnitude(j)) {
      informative = true;
    } else {
      model.feature_scale(j) = 1.0;
      centered.col(j).setZero();
    }
  }
  if (!informative) {
    throw Error(ErrorKind::degenerate_features, "every feature is constant over the training set");
  }
  centered.array().rowwise() /= model.feature_scale.transpose().array();

  const Eigen::MatrixXd targets = one_vs_rest_targets(labels, classes);
  const Eigen::RowVectorXd target_mean = targets.colwise().mean();
  const Eigen::MatrixXd centered_targets = targets.rowwise() - target_mean;

  const GramSpectrum spectrum(centered);
  std::size_t best = 0;
  for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
    const double error = spectrum.loo_residuals(centered_targets, lambda_grid[k]).squaredNorm();
    model.loo_errors.push_back(error);
    if (error < model.loo_errors[best]) best = k;
  }
  model.lambda = lambda_grid[best];
  const Eigen::MatrixXd dual = spectrum.dual_coefficients(centered_targets, model.lambda);
  model.weights = centered.transpose() * dual;
  model.intercept = target_mean.transpose();
  return model;
}

Eigen::MatrixXd decision_function(const RidgeModel& model, const FeatureMatrix& features) {
  if (features.cols() != model.features()) {
    throw Error(ErrorKind::shape_mismatch,
                "model expects " + std::to_string(model.features()) + " features, got " +
                    std::to_string(features.cols()));
  }
  // Standardise in blocks of rows to bound the temporary.
  constexpr Eigen::Index kBlock = 64;
  Eigen::MatrixXd scores(features.rows(), model.classes());
  const Eigen::RowVectorXd mean = model.feature_mean.transpose();
  const Eigen::RowVectorXd inv_scale = model.feature_scale.cwiseInverse().transpose();
  for (Eigen::Index r = 0; r < features.rows(); r += kBlock) {
    const Eigen::Index rows = std::min(kBlock, features.rows() - r);
    const Eigen::MatrixXd z =
        (features.middleRows(r, rows).rowwise() - mean).array().rowwise() * inv_scale.array();
    scores.middleRows(r, rows) = z * model.weights;
  }
  scores.rowwise() += model.intercept.transpose();
  return scores;
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < scores.cols(); ++k) {
      if (scores(i, k) > scores(i, best)) best = k;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

}  // namespace roman
