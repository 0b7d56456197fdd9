#include "recon/pocs_serial.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace recon {

namespace {
std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

ControlSequence ControlSequence::cyclic() { return {Kind::kCyclic, {}, 0}; }

ControlSequence ControlSequence::almost_cyclic(std::vector<int> pattern) {
  return {Kind::kAlmostCyclic, std::move(pattern), 0};
}

ControlSequence ControlSequence::random(std::uint64_t seed) {
  return {Kind::kRandom, {}, seed};
}

ControlSequence ControlSequence::greedy() { return {Kind::kGreedy, {}, 0}; }

RelaxationSchedule RelaxationSchedule::constant(double lambda) {
  RelaxationSchedule s;
  s.kind = Kind::kConstant;
  s.lambda_even = s.lambda_odd = lambda;
  return s;
}

RelaxationSchedule RelaxationSchedule::alternating(double even, double odd,
                                                   bool unguarded) {
  RelaxationSchedule s;
  s.kind = Kind::kAlternating;
  s.lambda_even = even;
  s.lambda_odd = odd;
  s.unguarded = unguarded;
  return s;
}

RelaxationSchedule RelaxationSchedule::per_index_schedule(std::vector<double> lambdas) {
  RelaxationSchedule s;
  s.kind = Kind::kPerIndex;
  s.per_index = std::move(lambdas);
  return s;
}

double RelaxationSchedule::at(long step, int index) const {
  switch (kind) {
    case Kind::kConstant:
      return lambda_even;
    case Kind::kAlternating:
      return step % 2 == 0 ? lambda_even : lambda_odd;
    case Kind::kPerIndex:
      return per_index.at(static_cast<size_t>(index));
  }
  return 1.0;
}

void RelaxationSchedule::validate() const {
  if (unguarded) return;
  const double lo = epsilon_guard;
  const double hi = 2.0 - epsilon_guard;
  auto check = [&](double l) {
    if (l < lo || l > hi) {
      throw std::domain_error("relaxation coefficient outside [eps, 2-eps]");
    }
  };
  if (kind == Kind::kPerIndex) {
    for (double l : per_index) check(l);
  } else {
    check(lambda_even);
    check(lambda_odd);
  }
}

std::string trace_to_csv(const IterationTrace& trace) {
  std::ostringstream os;
  for (const auto& line : trace.config_echo) os << "# " << line << "\n";
  os << "iter,rel_mse,max_residual,k,lambda\n";
  for (const auto& row : trace.rows) {
    os << row.iter << "," << format17(row.rel_mse) << ","
       << format17(row.max_residual) << "," << row.k << ","
       << format17(row.lambda) << "\n";
  }
  return os.str();
}

HyperplaneSet::HyperplaneSet(const KernelFamily& family,
                             const SubspaceProjector& proj)
    : family_(&family), proj_(proj) {
  if (family.channel_count() != proj.channels()) {
    throw std::invalid_argument("HyperplaneSet: channel count mismatch");
  }
  projected_.reserve(static_cast<size_t>(family.size()));
  norm2_.reserve(static_cast<size_t>(family.size()));
  for (const auto& h : family.kernels) {
    MultiSignal ht = proj.apply(h);
    norm2_.push_back(inner_product(ht, ht));
    projected_.push_back(std::move(ht));
  }
}

const MultiSignal& HyperplaneSet::projected_kernel(int k) const {
  return projected_.at(static_cast<size_t>(k));
}

MultiSignal project_k(const MultiSignal& u, const HyperplaneSet& hyp, int k,
                      double s_k) {
  if (hyp.degenerate(k)) {
    throw std::runtime_error(
        "project_k: degenerate hyperplane (kernel orthogonal to subspace)");
  }
  MultiSignal ut = hyp.projector().apply(u);
  const double r = s_k - inner_product(ut, hyp.family().kernels[static_cast<size_t>(k)]);
  ut.axpy(r / hyp.projected_norm2(k), hyp.projected_kernel(k));
  return ut;
}

MultiSignal relax(const MultiSignal& p_u, const MultiSignal& u, double lambda) {
  MultiSignal out = u;
  MultiSignal diff = p_u;
  diff -= u;
  out.axpy(lambda, diff);
  return out;
}

MultiSignal parallel_step(const MultiSignal& u, const HyperplaneSet& hyp,
                          const Eigen::VectorXd& samples,
                          const std::vector<int>& subset,
                          const std::vector<double>& mu, bool guarded,
                          double epsilon_guard) {
  if (subset.empty()) throw std::invalid_argument("parallel_step: empty index set");
  if (subset.size() != mu.size()) {
    throw std::invalid_argument("parallel_step: subset/mu length mismatch");
  }
  if (guarded) {
    double total = 0;
    for (double m : mu) {
      if (m <= 0) throw std::domain_error("parallel_step: mu_k must be positive");
      total += m;
    }
    if (total > 2.0 - epsilon_guard) {
      throw std::domain_error("parallel_step: sum(mu) exceeds 2 - eps");
    }
  }
  const MultiSignal ut = hyp.projector().apply(u);
  MultiSignal out = u;
  MultiSignal base_shift = ut;
  base_shift -= u;
  for (size_t idx = 0; idx < subset.size(); ++idx) {
    const int k = subset[idx];
    if (hyp.degenerate(k)) {
      throw std::runtime_error("parallel_step: degenerate hyperplane");
    }
    const double r =
        samples[k] - inner_product(ut, hyp.family().kernels[static_cast<size_t>(k)]);
    // P_k u - u = (ut - u) + (r / ||h~||^2) h~
    out.axpy(mu[idx], base_shift);
    out.axpy(mu[idx] * r / hyp.projected_norm2(k), hyp.projected_kernel(k));
  }
  return out;
}

int greedy_index(const MultiSignal& u, const HyperplaneSet& hyp,
                 const Eigen::VectorXd& samples) {
  int best = 0;
  double best_disp = -1.0;
  for (int k = 0; k < hyp.size(); ++k) {
    if (hyp.degenerate(k)) continue;
    const double r =
        samples[k] - inner_product(u, hyp.family().kernels[static_cast<size_t>(k)]);
    const double disp = std::abs(r) / std::sqrt(hyp.projected_norm2(k));
    if (disp > best_disp) {
      best_disp = disp;
      best = k;
    }
  }
  return best;
}

IterationTrace run_serial(const MultiSignal& x0, const HyperplaneSet& hyp,
                          const Eigen::VectorXd& samples,
                          const SerialRunOptions& options) {
  if (options.n_iter < 1) throw std::invalid_argument("run_serial: n_iter < 1");
  if (samples.size() != hyp.size()) {
    throw std::invalid_argument("run_serial: sample count mismatch");
  }
  options.schedule.validate();

  const int card = hyp.size();
  MultiSignal u = hyp.projector().apply(x0);
  const double truth_norm2 =
      options.truth ? inner_product(*options.truth, *options.truth) : 0.0;
  std::mt19937_64 rng(derive_seed(options.control.seed, 0xc0117801));
  std::uniform_int_distribution<int> pick(0, card - 1);

  if (options.control.kind == ControlSequence::Kind::kAlmostCyclic) {
    std::vector<bool> seen(static_cast<size_t>(card), false);
    for (int k : options.control.pattern) seen.at(static_cast<size_t>(k)) = true;
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw std::invalid_argument("almost-cyclic pattern does not cover every index");
    }
  }

  IterationTrace trace;
  trace.per_cycle_logging = options.per_cycle_logging;
  auto log_state = [&](long iter, int k, double lambda) {
    TraceRow row;
    row.iter = iter;
    row.k = k;
    row.lambda = lambda;
    double max_res = 0;
    for (int j = 0; j < card; ++j) {
      max_res = std::max(
          max_res, std::abs(samples[j] - inner_product(
                                             u, hyp.family().kernels[static_cast<size_t>(j)])));
    }
    row.max_residual = max_res;
    if (options.truth) {
      MultiSignal err = u;
      err -= *options.truth;
      row.rel_mse = inner_product(err, err) / truth_norm2;
    }
    trace.rows.push_back(row);
  };

  if (options.per_cycle_logging) log_state(0, -1, 0.0);
  for (long n = 0; n < options.n_iter; ++n) {
    int k;
    switch (options.control.kind) {
      case ControlSequence::Kind::kCyclic:
        k = static_cast<int>(n % card);
        break;
      case ControlSequence::Kind::kAlmostCyclic:
        k = options.control.pattern[static_cast<size_t>(
            n % static_cast<long>(options.control.pattern.size()))];
        break;
      case ControlSequence::Kind::kRandom:
        k = pick(rng);
        break;
      case ControlSequence::Kind::kGreedy:
        k = greedy_index(u, hyp, samples);
        break;
      default:
        throw std::logic_error("run_serial: unknown control kind");
    }
    if (hyp.degenerate(k)) {
      ++trace.skipped_degenerate;
      continue;
    }
    const double lambda = options.schedule.at(n, k);
    // iterates stay in the subspace: the update direction h~_k is in A
    const double r =
        samples[k] - inner_product(u, hyp.family().kernels[static_cast<size_t>(k)]);
    u.axpy(lambda * r / hyp.projected_norm2(k), hyp.projected_kernel(k));
    if (options.per_cycle_logging) {
      if ((n + 1) % card == 0) log_state((n + 1) / card, k, lambda);
    } else {
      log_state(n + 1, k, lambda);
    }
  }
  trace.final_estimate = std::move(u);
  return trace;
}

GridSignal bandlimited_linear_interpolation(const std::vector<double>& times,
                                            const std::vector<double>& values,
                                            GridSpec spec) {
  if (times.size() != values.size() || times.size() < 2) {
    throw std::invalid_argument("bandlimited_linear_interpolation: need >= 2 nodes");
  }
  const double T = spec.period;
  const int n = spec.grid_len();
  Eigen::VectorXd vals(n);
  const size_t m = times.size();
  for (int i = 0; i < n; ++i) {
    const double t = i * spec.dt();
    // find the surrounding node pair with periodic wrap
    size_t j = 0;
    while (j < m && times[j] <= t) ++j;
    double t0, t1, v0, v1;
    if (j == 0) {
      t0 = times[m - 1] - T;
      v0 = values[m - 1];
      t1 = times[0];
      v1 = values[0];
    } else if (j == m) {
      t0 = times[m - 1];
      v0 = values[m - 1];
      t1 = times[0] + T;
      v1 = values[0];
    } else {
      t0 = times[j - 1];
      v0 = values[j - 1];
      t1 = times[j];
      v1 = values[j];
    }
    vals[i] = v0 + (v1 - v0) * (t - t0) / (t1 - t0);
  }
  return project_B(GridSignal(spec, std::move(vals), false));
}

}  // namespace recon
