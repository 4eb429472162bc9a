#pragma once

#include <Eigen/Core>
#include <vector>

#include "kpslam/geometry/se3.h"
#include "kpslam/geometry/sim3.h"

namespace kpslam::optim {

enum class ManifoldKind { kEuclidean, kSE3, kSim3 };

using ParamId = int;

/// Owns the optimization variables. Each block is stored in its ambient
/// representation and updated through a retraction on its tangent space:
///   Euclidean(n): x + d                 (ambient n, tangent n)
///   SE3:  exp(d) * T, d = [rho, phi]    (ambient [qx qy qz qw tx ty tz], tangent 6)
///   Sim3: exp(d) * S, d = [rho, w, s]   (ambient [qx qy qz qw tx ty tz scale], tangent 7)
class ParameterStore {
 public:
  ParamId add_euclidean(const Eigen::VectorXd& x);
  ParamId add_point(const geometry::Vector3& x) { return add_euclidean(x); }
  ParamId add_se3(const geometry::SE3Pose& pose);
  ParamId add_sim3(const geometry::Sim3Transform& sim);

  void set_fixed(ParamId id, bool fixed = true) { blocks_.at(id).fixed = fixed; }
  bool is_fixed(ParamId id) const { return blocks_.at(id).fixed; }
  bool contains(ParamId id) const { return id >= 0 && id < static_cast<ParamId>(blocks_.size()); }
  size_t size() const { return blocks_.size(); }

  ManifoldKind kind(ParamId id) const { return blocks_.at(id).kind; }
  int ambient_dim(ParamId id) const { return static_cast<int>(blocks_.at(id).values.size()); }
  int tangent_dim(ParamId id) const;

  const double* data(ParamId id) const { return blocks_.at(id).values.data(); }
  double* data(ParamId id) { return blocks_.at(id).values.data(); }
  const Eigen::VectorXd& values(ParamId id) const { return blocks_.at(id).values; }
  void set_values(ParamId id, const Eigen::VectorXd& v);

  geometry::Vector3 point(ParamId id) const;
  geometry::SE3Pose se3(ParamId id) const { return se3_from_data(data(id)); }
  geometry::Sim3Transform sim3(ParamId id) const { return sim3_from_data(data(id)); }

  /// out = retract(in, delta) for the manifold of block `id`.
  void retract(ParamId id, const double* in, const double* delta, double* out) const;

  static geometry::SE3Pose se3_from_data(const double* d);
  static geometry::Sim3Transform sim3_from_data(const double* d);
  static void se3_to_data(const geometry::SE3Pose& pose, double* d);
  static void sim3_to_data(const geometry::Sim3Transform& sim, double* d);

 private:
  struct Block {
    ManifoldKind kind;
    Eigen::VectorXd values;
    bool fixed = false;
  };
  std::vector<Block> blocks_;
};

}  // namespace kpslam::optim
