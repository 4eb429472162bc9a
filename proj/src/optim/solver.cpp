#include "kpslam/optim/solver.h"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "kpslam/common/error.h"

namespace kpslam::optim {

namespace {

constexpr double kMaxDamping = 1e16;
constexpr int kDenseLimit = 256;

struct Linearization {
  double cost = 0.0;
  Eigen::SparseMatrix<double> H;
  Eigen::VectorXd g;
};

std::vector<const double*> block_pointers(const ResidualBlock& block,
                                          const ParameterStore& store) {
  std::vector<const double*> ptrs;
  ptrs.reserve(block.params.size());
  for (ParamId id : block.params) ptrs.push_back(store.data(id));
  return ptrs;
}

Linearization linearize(std::span<const ResidualBlock> blocks, const ParameterStore& store,
                        const std::vector<int>& offsets, int n) {
  Linearization lin;
  lin.g = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd r;
  Jacobians J;
  for (const ResidualBlock& block : blocks) {
    evaluate_block(block, store, r, &J);
    lin.cost += 0.5 * block_robust_cost(block, r);
    Eigen::VectorXd w = Eigen::VectorXd::Ones(r.size());
    if (block.huber_delta && block.robust_per_component) {
      for (Eigen::Index i = 0; i < r.size(); ++i) w[i] = huber_weight(std::abs(r[i]), *block.huber_delta);
    } else if (block.huber_delta) {
      w.setConstant(huber_weight(r.norm(), *block.huber_delta));
    }
    for (size_t a = 0; a < block.params.size(); ++a) {
      const int oa = offsets[block.params[a]];
      if (oa < 0) continue;
      const Eigen::MatrixXd WJa = w.asDiagonal() * J[a];
      lin.g.segment(oa, J[a].cols()) += WJa.transpose() * r;
      for (size_t b = 0; b < block.params.size(); ++b) {
        const int ob = offsets[block.params[b]];
        if (ob < 0) continue;
        const Eigen::MatrixXd Hab = WJa.transpose() * J[b];
        for (Eigen::Index i = 0; i < Hab.rows(); ++i) {
          for (Eigen::Index j = 0; j < Hab.cols(); ++j) {
            triplets.emplace_back(oa + static_cast<int>(i), ob + static_cast<int>(j), Hab(i, j));
          }
        }
      }
    }
  }
  lin.H.resize(n, n);
  lin.H.setFromTriplets(triplets.begin(), triplets.end());
  return lin;
}

}  // namespace

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::kConverged: return "converged";
    case Termination::kMaxIterations: return "max-iter";
    case Termination::kStalled: return "stalled";
  }
  return "unknown";
}

double huber_weight(double residual_norm, double delta) {
  if (!(delta > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "huber_weight: delta must be positive");
  }
  return residual_norm <= delta ? 1.0 : delta / residual_norm;
}

double robust_squared_norm(double squared_norm, std::optional<double> huber_delta) {
  if (!huber_delta) return squared_norm;
  const double d = *huber_delta;
  if (squared_norm <= d * d) return squared_norm;
  return 2.0 * d * std::sqrt(squared_norm) - d * d;
}

double block_robust_cost(const ResidualBlock& block, const Eigen::VectorXd& residual) {
  if (block.huber_delta && block.robust_per_component) {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < residual.size(); ++i) {
      cost += robust_squared_norm(residual[i] * residual[i], block.huber_delta);
    }
    return cost;
  }
  return robust_squared_norm(residual.squaredNorm(), block.huber_delta);
}

Jacobians numeric_jacobians(const ResidualBlock& block, const ParameterStore& store,
                            double step) {
  Jacobians jac(block.params.size());
  std::vector<const double*> ptrs = block_pointers(block, store);
  Eigen::VectorXd r_plus(block.dim);
  Eigen::VectorXd r_minus(block.dim);
  for (size_t a = 0; a < block.params.size(); ++a) {
    const ParamId id = block.params[a];
    const int td = store.tangent_dim(id);
    const int ad = store.ambient_dim(id);
    jac[a].resize(block.dim, td);
    std::vector<double> perturbed(ad);
    std::vector<double> delta(td, 0.0);
    const double* original = ptrs[a];
    for (int k = 0; k < td; ++k) {
      double h = step;
      if (store.kind(id) == ManifoldKind::kEuclidean) h *= std::max(1.0, std::abs(original[k]));
      delta[k] = h;
      store.retract(id, original, delta.data(), perturbed.data());
      ptrs[a] = perturbed.data();
      block.fn(ptrs, r_plus, nullptr);
      delta[k] = -h;
      store.retract(id, original, delta.data(), perturbed.data());
      block.fn(ptrs, r_minus, nullptr);
      delta[k] = 0.0;
      ptrs[a] = original;
      jac[a].col(k) = (r_plus - r_minus) / (2.0 * h);
    }
  }
  return jac;
}

void evaluate_block(const ResidualBlock& block, const ParameterStore& store,
                    Eigen::VectorXd& residual, Jacobians* jacobians) {
  const std::vector<const double*> ptrs = block_pointers(block, store);
  residual.resize(block.dim);
  if (jacobians == nullptr) {
    block.fn(ptrs, residual, nullptr);
    return;
  }
  if (block.analytic_jacobian) {
    jacobians->assign(block.params.size(), Eigen::MatrixXd());
    block.fn(ptrs, residual, jacobians);
  } else {
    block.fn(ptrs, residual, nullptr);
    *jacobians = numeric_jacobians(block, store);
  }
}

double total_cost(std::span<const ResidualBlock> blocks, const ParameterStore& store) {
  double cost = 0.0;
  Eigen::VectorXd r;
  for (const ResidualBlock& block : blocks) {
    evaluate_block(block, store, r, nullptr);
    cost += 0.5 * block_robust_cost(block, r);
  }
  return cost;
}

namespace {

double damping_for(const Eigen::SparseMatrix<double>& H, double lambda) {
  const Eigen::Index n = H.rows();
  double mu = H.diagonal().sum() / static_cast<double>(std::max<Eigen::Index>(n, 1));
  if (!(mu > 0.0)) mu = 1.0;
  return lambda * mu;
}

Eigen::VectorXd checked(Eigen::VectorXd delta) {
  if (!delta.allFinite()) {
    throw Error(ErrorCode::kIllPosedProblem, "damped_step: non-finite step");
  }
  return delta;
}

Eigen::SparseMatrix<double> add_to_diagonal(Eigen::SparseMatrix<double> A, double d) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) A.coeffRef(i, i) += d;
  return A;
}

// Sparse steps of one solve share the sparsity pattern, so the symbolic
// factorization is done once.
class StepSolver {
 public:
  Eigen::VectorXd step(const Eigen::SparseMatrix<double>& H, const Eigen::VectorXd& g, double lambda) {
    if (H.rows() <= kDenseLimit) return damped_step(H, g, lambda);
    const Eigen::SparseMatrix<double> A = add_to_diagonal(H, damping_for(H, lambda));
    if (!analyzed_) {
      ldlt_.analyzePattern(A);
      analyzed_ = true;
    }
    ldlt_.factorize(A);
    if (ldlt_.info() != Eigen::Success) {
      throw Error(ErrorCode::kIllPosedProblem, "damped_step: factorization failed");
    }
    return checked(ldlt_.solve(-g));
  }

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  bool analyzed_ = false;
};

}  // namespace

Eigen::VectorXd damped_step(const Eigen::SparseMatrix<double>& H, const Eigen::VectorXd& g,
                            double lambda) {
  const double damping = damping_for(H, lambda);
  if (H.rows() <= kDenseLimit) {
    Eigen::MatrixXd A = Eigen::MatrixXd(H);
    A.diagonal().array() += damping;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw Error(ErrorCode::kIllPosedProblem, "damped_step: factorization failed");
    }
    return checked(ldlt.solve(-g));
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(add_to_diagonal(H, damping));
  if (ldlt.info() != Eigen::Success) {
    throw Error(ErrorCode::kIllPosedProblem, "damped_step: factorization failed");
  }
  return checked(ldlt.solve(-g));
}

SolveReport solve(std::span<const ResidualBlock> blocks, ParameterStore& store,
                  const SolverOptions& options) {
  SolveReport report;
  if (blocks.empty()) return report;

  std::vector<int> offsets(store.size(), -1);
  std::vector<ParamId> free_params;
  int n = 0;
  for (const ResidualBlock& block : blocks) {
    if (static_cast<int>(block.params.size()) == 0 || !block.fn || block.dim <= 0) {
      throw Error(ErrorCode::kInvalidArgument, "solve: malformed residual block");
    }
    for (ParamId id : block.params) {
      if (!store.contains(id)) {
        throw Error(ErrorCode::kInvalidArgument, "solve: residual references unknown parameter");
      }
      if (store.is_fixed(id) || offsets[id] >= 0) continue;
      offsets[id] = n;
      n += store.tangent_dim(id);
      free_params.push_back(id);
    }
  }

  Linearization lin = linearize(blocks, store, offsets, n);
  if (!std::isfinite(lin.cost)) {
    throw Error(ErrorCode::kIllPosedProblem, "solve: initial cost is not finite");
  }
  report.initial_cost = lin.cost;
  report.final_cost = lin.cost;
  if (n == 0) return report;

  std::vector<Eigen::VectorXd> backup(free_params.size());
  StepSolver steps;
  double lambda = options.initial_damping;
  report.termination = Termination::kMaxIterations;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (lin.g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
      report.termination = Termination::kConverged;
      break;
    }
    double x_norm = 0.0;
    for (ParamId id : free_params) x_norm += store.values(id).squaredNorm();
    x_norm = std::sqrt(x_norm);

    bool accepted = false;
    bool finished = false;
    while (!accepted) {
      if (lambda > kMaxDamping) {
        report.termination = Termination::kStalled;
        finished = true;
        break;
      }
      Eigen::VectorXd delta;
      try {
        delta = steps.step(lin.H, lin.g, lambda);
      } catch (const Error&) {
        lambda *= 10.0;
        if (lambda > kMaxDamping) {
          throw Error(ErrorCode::kIllPosedProblem, "solve: normal equations singular");
        }
        continue;
      }
      if (delta.norm() <= options.step_tolerance * (x_norm + options.step_tolerance)) {
        report.termination = Termination::kConverged;
        finished = true;
        break;
      }
      for (size_t k = 0; k < free_params.size(); ++k) {
        const ParamId id = free_params[k];
        backup[k] = store.values(id);
        Eigen::VectorXd out(backup[k].size());
        store.retract(id, backup[k].data(), delta.data() + offsets[id], out.data());
        store.set_values(id, out);
      }
      const double new_cost = total_cost(blocks, store);
      if (std::isfinite(new_cost) && new_cost < lin.cost) {
        const double decrease = lin.cost - new_cost;
        accepted = true;
        lambda = std::max(lambda / 10.0, 1e-15);
        report.accepted_costs.push_back(new_cost);
        lin = linearize(blocks, store, offsets, n);
        if (decrease <= options.function_tolerance * new_cost) {
          report.termination = Termination::kConverged;
          finished = true;
        }
      } else {
        for (size_t k = 0; k < free_params.size(); ++k) store.set_values(free_params[k], backup[k]);
        lambda *= 10.0;
      }
    }
    report.iterations = iter + 1;
    report.final_cost = lin.cost;
    if (finished) break;
  }
  report.final_cost = lin.cost;
  if (report.termination == Termination::kMaxIterations &&
      lin.g.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
    report.termination = Termination::kConverged;
  }
  return report;
}

}  // namespace kpslam::optim
