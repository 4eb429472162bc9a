#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kpslam/optim/parameter_store.h"

namespace kpslam::optim {

using Jacobians = std::vector<Eigen::MatrixXd>;

/// Computes the residual for the given parameter blocks (ambient storage, in
/// the order of ResidualBlock::params). When `jacobians` is non-null, fills
/// one (dim x tangent_dim) matrix per block w.r.t. the block's retraction.
using ResidualFunction = std::function<void(std::span<const double* const> params,
                                            Eigen::VectorXd& residual, Jacobians* jacobians)>;

struct ResidualBlock {
  int dim = 0;
  std::vector<ParamId> params;
  ResidualFunction fn;
  bool analytic_jacobian = false;  // otherwise central differences in tangent space
  std::optional<double> huber_delta;
  bool robust_per_component = false;  // apply Huber to each residual entry, not the block norm
};

enum class Termination { kConverged, kMaxIterations, kStalled };

const char* termination_name(Termination t);

struct SolveReport {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  Termination termination = Termination::kConverged;
  std::vector<double> accepted_costs;  // cost after each accepted step
};

struct SolverOptions {
  int max_iterations = 20;
  double gradient_tolerance = 1e-8;
  double step_tolerance = 1e-12;
  double function_tolerance = 1e-14;
  double initial_damping = 1e-4;
};

/// Huber IRLS weight: 1 inside the threshold, delta / norm outside.
double huber_weight(double residual_norm, double delta);

/// Robustified squared norm rho(|r|^2); the objective is 0.5 * sum rho.
double robust_squared_norm(double squared_norm, std::optional<double> huber_delta);

/// rho summed as the block's robust kernel prescribes.
double block_robust_cost(const ResidualBlock& block, const Eigen::VectorXd& residual);

/// Residual (and Jacobians, numeric if the block has none) of one block at the
/// store's current values.
void evaluate_block(const ResidualBlock& block, const ParameterStore& store,
                    Eigen::VectorXd& residual, Jacobians* jacobians);

/// Central-difference Jacobians of a block in tangent space.
Jacobians numeric_jacobians(const ResidualBlock& block, const ParameterStore& store,
                            double step = 1e-6);

/// Total robustified cost 0.5 * sum rho(|r_i|^2) at the store's current values.
double total_cost(std::span<const ResidualBlock> blocks, const ParameterStore& store);

/// Solves (H + lambda * mean(diag H) * I) delta = -g. Throws kIllPosedProblem
/// if the factorization fails.
Eigen::VectorXd damped_step(const Eigen::SparseMatrix<double>& H, const Eigen::VectorXd& g,
                            double lambda);

/// Levenberg-Marquardt with multiplicative damping (x10 on reject, /10 on
/// accept). Parameters are updated in place; fixed blocks are held constant.
/// Throws kIllPosedProblem when the initial cost is not finite or the normal
/// equations stay singular under damping.
SolveReport solve(std::span<const ResidualBlock> blocks, ParameterStore& store,
                  const SolverOptions& options = {});

}  // namespace kpslam::optim
