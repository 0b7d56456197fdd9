#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "recon/grid.hpp"
#include "recon/pocs_serial.hpp"
#include "recon/samplers.hpp"

namespace recon {

/// Gram matrix SS* (or normalized) of an orthogonal kernel family.
struct GramMatrix {
  Eigen::MatrixXd entries;
  bool normalized = false;
  Eigen::VectorXd diag_norms2;  // ||h_k||^2 (the diagonal matrix H^2)
};

/// The sampling operator pair of an orthogonal kernel family restricted
/// to the reconstruction subspace: S u = (<u, h_k>), S* c = sum c_k h~_k,
/// and the normalized variants with h_k / ||h_k||.
class SamplingOperator {
 public:
  SamplingOperator(KernelFamily family, SubspaceProjector proj);

  const KernelFamily& family() const { return family_; }
  const SubspaceProjector& projector() const { return proj_; }
  int size() const { return family_.size(); }
  const MultiSignal& projected_kernel(int k) const;
  double projected_norm2(int k) const;

  Eigen::VectorXd apply_S(const MultiSignal& u, bool normalized = true) const;
  MultiSignal apply_S_star(const Eigen::VectorXd& c, bool normalized = true) const;

  GramMatrix gram(bool normalized = true) const;

 private:
  KernelFamily family_;
  SubspaceProjector proj_;
  std::vector<MultiSignal> projected_;
  std::vector<double> projected_norm2_;
};

/// One full parallel POCS update u + S^*(s^ - S^ u) (normalized operators).
MultiSignal papcs_step(const MultiSignal& u, const SamplingOperator& op,
                       const Eigen::VectorXd& s_hat);

/// Vector state of the discrete-time iteration.
struct DiscreteState {
  Eigen::VectorXd c;
  Eigen::VectorXd r;
  Eigen::VectorXd b;
  long n = 0;
};

/// Largest signed power of two not exceeding |r|, with the sign of r;
/// rho(0) = 0. Exponent extraction only, no multiplication.
double rho(double r);

/// v * sign * 2^exp2 through the exponent-shift path (no general multiply).
double shift_scale(double v, int exp2, int sign);

/// One multiplierless update: b_k = rho(r_k)/rho(||h_k||^2) (a signed power
/// of two), r <- r - SS*b through the add/shift path, c <- c + b.
DiscreteState multiplierless_update(const DiscreteState& state,
                                    const Eigen::MatrixXd& gram_unnormalized,
                                    const Eigen::VectorXd& diag_rho_norms);

enum class DiscreteMode { kPlain, kRelaxed, kMultiplierless };

struct DiscreteRunOptions {
  long n_iter = 0;
  DiscreteMode mode = DiscreteMode::kPlain;
  double lambda = 1.0;              // relaxed mode constant coefficient
  std::optional<MultiSignal> truth; // enables the rel-MSE trace column
  bool debug_check_invariant = false;
  bool debug_synthesize_trace = false;  // per-iteration signal synthesis
  /// Optional projector for the error metric when it differs from the
  /// iteration projector (the no-cross-channel-redundancy arm).
  const SamplingOperator* error_operator = nullptr;
  std::optional<double> residual_tol;  // stop when ||r||_2 <= tol * ||s^||_2
  int divergence_watchdog = 50;        // abort after this many rising cycles
};

/// Pure vector iteration of the (relaxed, unnormalized) discrete system
/// b = Lambda H^-2 r; r <- r - SS*b; c <- c + b, with signal synthesis
/// only at the end. Plain mode is Lambda = I; multiplierless mode uses the
/// rho quantization. Rel-MSE per iteration is computed algebraically in
/// coefficient space (no synthesis) unless debug_synthesize_trace is set.
struct DiscreteRunResult {
  MultiSignal estimate;
  IterationTrace trace;
  DiscreteState state;
};
DiscreteRunResult run_discrete(const SamplingOperator& op,
                               const SampleRecord& record,
                               const MultiSignal& u0,
                               const DiscreteRunOptions& options);

/// Dense-SVD Moore-Penrose oracle: minimum-norm least-squares solution of
/// S^ v = s^ over the subspace basis, with singular values below
/// threshold * sigma_max treated as zero. Never used inside iterations.
class PinvSolver {
 public:
  explicit PinvSolver(const SamplingOperator& op, double sv_threshold = 1e-10);

  MultiSignal solve(const Eigen::VectorXd& s_hat) const;
  /// u0 + S^dagger (s^ - S^ u0).
  MultiSignal solve_from(const Eigen::VectorXd& s_hat, const MultiSignal& u0) const;
  /// Orthogonal projection of a sequence onto ran(S^).
  Eigen::VectorXd project_onto_range(const Eigen::VectorXd& s_hat) const;
  int rank() const { return rank_; }
  /// Largest singular value of S^ (operator norm).
  double operator_norm() const;
  /// ||S^dagger||: inverse of the smallest retained singular value.
  double pinv_norm() const;

 private:
  const SamplingOperator* op_;
  Eigen::MatrixXd s_matrix_;  // K x dim(A)
  Eigen::MatrixXd u_, v_;
  Eigen::VectorXd sv_;
  int rank_ = 0;
  GridSpec spec_;
  int channels_ = 0;
  Eigen::MatrixXd range_basis_;  // orthonormal basis of ran(A) in R^M
  std::vector<MultiSignal> basis_;  // orthonormal subspace basis signals
  MultiSignal from_basis_coeffs(const Eigen::VectorXd& coeffs) const;
};

/// Gram matrices persist to a portable text format (header
/// "gram,normalized,n", then row-major 17-digit decimals).
std::string gram_to_text(const GramMatrix& gram);
GramMatrix gram_from_text(const std::string& text);

}  // namespace recon
