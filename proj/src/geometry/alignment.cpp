#include "kpslam/geometry/alignment.h"

#include <Eigen/Dense>

#include "kpslam/common/error.h"

namespace kpslam::geometry {

Sim3Transform umeyama_align(const std::vector<Vector3>& est, const std::vector<Vector3>& gt,
                            bool with_scale) {
  if (est.size() != gt.size()) {
    throw Error(ErrorCode::kDegenerateAlignment, "umeyama_align: trajectories differ in length");
  }
  if (est.size() < 3) {
    throw Error(ErrorCode::kDegenerateAlignment, "umeyama_align: need at least 3 point pairs");
  }
  const double n = static_cast<double>(est.size());
  Vector3 mean_est = Vector3::Zero();
  Vector3 mean_gt = Vector3::Zero();
  for (size_t i = 0; i < est.size(); ++i) {
    mean_est += est[i];
    mean_gt += gt[i];
  }
  mean_est /= n;
  mean_gt /= n;

  Matrix3 cov = Matrix3::Zero();
  Matrix3 scatter_est = Matrix3::Zero();
  double var_est = 0.0;
  for (size_t i = 0; i < est.size(); ++i) {
    const Vector3 de = est[i] - mean_est;
    const Vector3 dg = gt[i] - mean_gt;
    cov += dg * de.transpose();
    scatter_est += de * de.transpose();
    var_est += de.squaredNorm();
  }
  cov /= n;
  var_est /= n;

  // Collinear (or coincident) estimate points leave the rotation undetermined.
  Eigen::SelfAdjointEigenSolver<Matrix3> eig(scatter_est / n);
  const Vector3 ev = eig.eigenvalues();  // ascending
  if (!(ev(2) > 0.0) || ev(1) <= 1e-12 * ev(2)) {
    throw Error(ErrorCode::kDegenerateAlignment, "umeyama_align: points are collinear");
  }

  Eigen::JacobiSVD<Matrix3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3 S = Matrix3::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    S(2, 2) = -1.0;
  }
  const Matrix3 R = svd.matrixU() * S * svd.matrixV().transpose();
  const double scale =
      with_scale ? (svd.singularValues().asDiagonal() * S).trace() / var_est : 1.0;
  const Vector3 t = mean_gt - scale * R * mean_est;
  return Sim3Transform(scale, Eigen::Quaterniond(R), t);
}

}  // namespace kpslam::geometry
