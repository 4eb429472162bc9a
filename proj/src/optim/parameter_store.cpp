#include "kpslam/optim/parameter_store.h"

#include "kpslam/common/error.h"

namespace kpslam::optim {

using geometry::SE3Pose;
using geometry::Sim3Transform;

ParamId ParameterStore::add_euclidean(const Eigen::VectorXd& x) {
  blocks_.push_back(Block{ManifoldKind::kEuclidean, x, false});
  return static_cast<ParamId>(blocks_.size() - 1);
}

ParamId ParameterStore::add_se3(const SE3Pose& pose) {
  Eigen::VectorXd v(7);
  se3_to_data(pose, v.data());
  blocks_.push_back(Block{ManifoldKind::kSE3, v, false});
  return static_cast<ParamId>(blocks_.size() - 1);
}

ParamId ParameterStore::add_sim3(const Sim3Transform& sim) {
  Eigen::VectorXd v(8);
  sim3_to_data(sim, v.data());
  blocks_.push_back(Block{ManifoldKind::kSim3, v, false});
  return static_cast<ParamId>(blocks_.size() - 1);
}

int ParameterStore::tangent_dim(ParamId id) const {
  const Block& b = blocks_.at(id);
  switch (b.kind) {
    case ManifoldKind::kEuclidean: return static_cast<int>(b.values.size());
    case ManifoldKind::kSE3: return 6;
    case ManifoldKind::kSim3: return 7;
  }
  return 0;
}

void ParameterStore::set_values(ParamId id, const Eigen::VectorXd& v) {
  Block& b = blocks_.at(id);
  if (v.size() != b.values.size()) {
    throw Error(ErrorCode::kInvalidArgument, "ParameterStore: dimension mismatch");
  }
  b.values = v;
}

geometry::Vector3 ParameterStore::point(ParamId id) const {
  const Block& b = blocks_.at(id);
  if (b.kind != ManifoldKind::kEuclidean || b.values.size() != 3) {
    throw Error(ErrorCode::kInvalidArgument, "ParameterStore: block is not a 3D point");
  }
  return b.values.head<3>();
}

void ParameterStore::retract(ParamId id, const double* in, const double* delta,
                             double* out) const {
  const Block& b = blocks_.at(id);
  switch (b.kind) {
    case ManifoldKind::kEuclidean:
      for (Eigen::Index i = 0; i < b.values.size(); ++i) out[i] = in[i] + delta[i];
      break;
    case ManifoldKind::kSE3: {
      const geometry::Vector6 d = Eigen::Map<const geometry::Vector6>(delta);
      se3_to_data(geometry::se3_exp(d) * se3_from_data(in), out);
      break;
    }
    case ManifoldKind::kSim3: {
      const geometry::Vector7 d = Eigen::Map<const geometry::Vector7>(delta);
      sim3_to_data(geometry::sim3_exp(d) * sim3_from_data(in), out);
      break;
    }
  }
}

SE3Pose ParameterStore::se3_from_data(const double* d) {
  return SE3Pose(Eigen::Quaterniond(d[3], d[0], d[1], d[2]), geometry::Vector3(d[4], d[5], d[6]));
}

Sim3Transform ParameterStore::sim3_from_data(const double* d) {
  return Sim3Transform(d[7], Eigen::Quaterniond(d[3], d[0], d[1], d[2]),
                       geometry::Vector3(d[4], d[5], d[6]));
}

void ParameterStore::se3_to_data(const SE3Pose& pose, double* d) {
  const auto& q = pose.rotation();
  d[0] = q.x();
  d[1] = q.y();
  d[2] = q.z();
  d[3] = q.w();
  d[4] = pose.translation().x();
  d[5] = pose.translation().y();
  d[6] = pose.translation().z();
}

void ParameterStore::sim3_to_data(const Sim3Transform& sim, double* d) {
  const auto& q = sim.rotation();
  d[0] = q.x();
  d[1] = q.y();
  d[2] = q.z();
  d[3] = q.w();
  d[4] = sim.translation().x();
  d[5] = sim.translation().y();
  d[6] = sim.translation().z();
  d[7] = sim.scale();
}

}  // namespace kpslam::optim
