#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace roman {

/// Row-major so that one sample's features are contiguous.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// 13 values, half-decade spaced from 1e-3 to 1e3.
std::vector<double> default_lambda_grid();

/// One-vs-rest ridge classifier on standardised features with an
/// unpenalised intercept. Targets are +1 for the class and -1 otherwise.
/// Features whose spread is below 1e-10 of their magnitude count as constant
/// and get zero weight.
struct RidgeModel {
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;  // 1 where a feature is constant
  Eigen::MatrixXd weights;        // features x classes, on standardised features
  Eigen::VectorXd intercept;      // classes
  double lambda = 0.0;
  std::vector<double> loo_errors;  // one per grid value

  int classes() const noexcept { return static_cast<int>(intercept.size()); }
  Eigen::Index features() const noexcept { return feature_mean.size(); }
};

/// Eigendecomposition of the centred Gram matrix, reused across the whole
/// lambda grid.
class GramSpectrum {
 public:
  /// `centered` must have zero column means.
  explicit GramSpectrum(const FeatureMatrix& centered);

  /// Closed-form leave-one-out residuals of the intercept + ridge fit, one
  /// column per target.
  Eigen::MatrixXd loo_residuals(const Eigen::MatrixXd& centered_targets, double lambda) const;

  /// (K + lambda I)^{-1} Y for the centred Gram matrix K.
  Eigen::MatrixXd dual_coefficients(const Eigen::MatrixXd& centered_targets,
                                    double lambda) const;

 private:
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd values_;
};

/// ±1 one-vs-rest target matrix.
Eigen::MatrixXd one_vs_rest_targets(std::span<const int> labels, int classes);

/// Selects lambda by minimum summed squared LOO residual (first minimum wins)
/// and solves the regularised normal equations in dual form. The feature
/// matrix is consumed to avoid a second copy of large flattened inputs.
/// Throws degenerate_features when every feature is constant and
/// invalid_argument on label/shape problems.
RidgeModel fit_ridge(FeatureMatrix features, std::span<const int> labels,
                     int classes, std::span<const double> lambda_grid);

Eigen::MatrixXd decision_function(const RidgeModel& model, const FeatureMatrix& features);

/// Argmax over the class scores; ties go to the lowest class index.
std::vector<int> argmax_rows(const Eigen::MatrixXd& scores);

}  // namespace roman
