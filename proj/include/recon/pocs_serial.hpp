#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recon/grid.hpp"
#include "recon/samplers.hpp"

namespace recon {

/// Order in which the serial iteration visits the hyperplane indices.
struct ControlSequence {
  enum class Kind { kCyclic, kAlmostCyclic, kRandom, kGreedy };
  Kind kind = Kind::kCyclic;
  std::vector<int> pattern;     // almost-cyclic block; must cover every index
  std::uint64_t seed = 0;       // random control

  static ControlSequence cyclic();
  static ControlSequence almost_cyclic(std::vector<int> pattern);
  static ControlSequence random(std::uint64_t seed);
  static ControlSequence greedy();
};

/// Relaxation coefficients per iteration step.
struct RelaxationSchedule {
  enum class Kind { kConstant, kAlternating, kPerIndex };
  Kind kind = Kind::kConstant;
  double lambda_even = 1.0;
  double lambda_odd = 1.0;
  std::vector<double> per_index;
  double epsilon_guard = 1e-6;
  bool unguarded = false;  // allows the lambda = 0 and lambda = 2 arms

  static RelaxationSchedule constant(double lambda);
  static RelaxationSchedule alternating(double even, double odd, bool unguarded = false);
  static RelaxationSchedule per_index_schedule(std::vector<double> lambdas);

  double at(long step, int index) const;
  /// Throws unless every emitted value is in [eps, 2-eps] or unguarded.
  void validate() const;
};

struct TraceRow {
  long iter = 0;          // step or cycle number, per logging mode
  double rel_mse = -1.0;  // -1 when no ground truth was supplied
  double max_residual = 0.0;
  int k = -1;
  double lambda = 0.0;
};

struct IterationTrace {
  std::vector<TraceRow> rows;
  MultiSignal final_estimate;
  bool per_cycle_logging = true;
  long skipped_degenerate = 0;
  std::vector<std::string> config_echo;
};

/// Trace CSV: comment header echoing the config, then
/// "iter,rel_mse,max_residual,k,lambda" rows.
std::string trace_to_csv(const IterationTrace& trace);

/// Cached projected kernels for hyperplane projections inside the
/// subspace: h~_k and ||h~_k||^2.
class HyperplaneSet {
 public:
  HyperplaneSet(const KernelFamily& family, const SubspaceProjector& proj);

  const KernelFamily& family() const { return *family_; }
  const SubspaceProjector& projector() const { return proj_; }
  const MultiSignal& projected_kernel(int k) const;
  double projected_norm2(int k) const { return norm2_[static_cast<size_t>(k)]; }
  int size() const { return static_cast<int>(norm2_.size()); }
  bool degenerate(int k) const { return norm2_[static_cast<size_t>(k)] <= 1e-24; }

 private:
  const KernelFamily* family_;
  SubspaceProjector proj_;
  std::vector<MultiSignal> projected_;
  std::vector<double> norm2_;
};

/// Orthogonal projection of u onto the single consistent hyperplane
/// {v in A : <v, h_k> = s_k}.
MultiSignal project_k(const MultiSignal& u, const HyperplaneSet& hyp, int k,
                      double s_k);

/// u + lambda (P_u - u).
MultiSignal relax(const MultiSignal& p_u, const MultiSignal& u, double lambda);

/// Parallel convex combination u + sum_k mu_k (P_k u - u) over K.
MultiSignal parallel_step(const MultiSignal& u, const HyperplaneSet& hyp,
                          const Eigen::VectorXd& samples,
                          const std::vector<int>& subset,
                          const std::vector<double>& mu,
                          bool guarded = true, double epsilon_guard = 1e-6);

/// Index of the most remote hyperplane: argmax |s_k - <u,h_k>| / ||h~_k||,
/// ties broken by lowest index.
int greedy_index(const MultiSignal& u, const HyperplaneSet& hyp,
                 const Eigen::VectorXd& samples);

struct SerialRunOptions {
  long n_iter = 0;                 // total steps
  ControlSequence control;
  RelaxationSchedule schedule;
  bool per_cycle_logging = true;   // log when n is a multiple of card(Z)
  std::optional<MultiSignal> truth;
};

/// The serial POCS driver u <- relax(project_k(u)), with per-cycle (or
/// per-step) error instrumentation. Degenerate hyperplanes are skipped
/// with a logged warning.
IterationTrace run_serial(const MultiSignal& x0, const HyperplaneSet& hyp,
                          const Eigen::VectorXd& samples,
                          const SerialRunOptions& options);

/// Initial estimate of the extrema experiment: bandlimited version of the
/// periodic linear interpolation through (tau_i, a_i).
GridSignal bandlimited_linear_interpolation(const std::vector<double>& times,
                                            const std::vector<double>& values,
                                            GridSpec spec);

}  // namespace recon
