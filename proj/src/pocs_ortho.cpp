#include "recon/pocs_ortho.hpp"

#include <algorithm>
#include <cmath>
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

SamplingOperator::SamplingOperator(KernelFamily family, SubspaceProjector proj)
    : family_(std::move(family)), proj_(std::move(proj)) {
  if (!family_.orthogonal) {
    throw std::invalid_argument(
        "SamplingOperator: requires an orthogonal kernel family");
  }
  if (family_.channel_count() != proj_.channels()) {
    throw std::invalid_argument("SamplingOperator: channel count mismatch");
  }
  projected_.reserve(static_cast<size_t>(family_.size()));
  projected_norm2_.reserve(static_cast<size_t>(family_.size()));
  for (const auto& h : family_.kernels) {
    MultiSignal ht = proj_.apply(h);
    projected_norm2_.push_back(inner_product(ht, ht));
    projected_.push_back(std::move(ht));
  }
}

const MultiSignal& SamplingOperator::projected_kernel(int k) const {
  return projected_.at(static_cast<size_t>(k));
}

double SamplingOperator::projected_norm2(int k) const {
  return projected_norm2_.at(static_cast<size_t>(k));
}

Eigen::VectorXd SamplingOperator::apply_S(const MultiSignal& u,
                                          bool normalized) const {
  if (u.channel_count() != family_.channel_count() ||
      !(u.spec() == family_.spec())) {
    throw std::invalid_argument("apply_S: dimension mismatch");
  }
  Eigen::VectorXd out(size());
  for (int k = 0; k < size(); ++k) {
    out[k] = inner_product(u, family_.kernels[static_cast<size_t>(k)]);
    if (normalized) out[k] /= family_.norms[k];
  }
  return out;
}

MultiSignal SamplingOperator::apply_S_star(const Eigen::VectorXd& c,
                                           bool normalized) const {
  if (c.size() != size()) {
    throw std::invalid_argument("apply_S_star: coefficient length mismatch");
  }
  MultiSignal out =
      MultiSignal::zero(family_.spec(), family_.channel_count());
  for (int k = 0; k < size(); ++k) {
    const double w = normalized ? c[k] / family_.norms[k] : c[k];
    out.axpy(w, projected_[static_cast<size_t>(k)]);
  }
  return out;
}

GramMatrix SamplingOperator::gram(bool normalized) const {
  const int n = size();
  GramMatrix g;
  g.normalized = normalized;
  g.entries.resize(n, n);
  g.diag_norms2 = family_.norms.array().square();
  for (int k = 0; k < n; ++k) {
    for (int kp = k; kp < n; ++kp) {
      // <h~_{k'}, h_k> = <h~_{k'}, h~_k> since h~ is in the subspace
      double v = inner_product(projected_[static_cast<size_t>(kp)],
                               projected_[static_cast<size_t>(k)]);
      if (normalized) v /= family_.norms[k] * family_.norms[kp];
      g.entries(k, kp) = v;
      g.entries(kp, k) = v;
    }
  }
  return g;
}

MultiSignal papcs_step(const MultiSignal& u, const SamplingOperator& op,
                       const Eigen::VectorXd& s_hat) {
  const Eigen::VectorXd res = s_hat - op.apply_S(u, true);
  MultiSignal out = u;
  out += op.apply_S_star(res, true);
  return out;
}

double rho(double r) {
  if (std::isnan(r)) throw std::invalid_argument("rho: NaN input");
  if (r == 0.0) return 0.0;
  int e = 0;
  std::frexp(std::abs(r), &e);  // |r| = m * 2^e with m in [0.5, 1)
  return std::copysign(std::ldexp(1.0, e - 1), r);
}

double shift_scale(double v, int exp2, int sign) {
  const double shifted = std::ldexp(v, exp2);
  return sign < 0 ? -shifted : shifted;
}

DiscreteState multiplierless_update(const DiscreteState& state,
                                    const Eigen::MatrixXd& gram_unnormalized,
                                    const Eigen::VectorXd& diag_rho_norms) {
  const Eigen::Index n = state.r.size();
  if (diag_rho_norms.size() != n || gram_unnormalized.rows() != n) {
    throw std::invalid_argument("multiplierless_update: dimension mismatch");
  }
  DiscreteState next;
  next.c = state.c;
  next.r = state.r;
  next.b = Eigen::VectorXd::Zero(n);
  next.n = state.n + 1;

  std::vector<int> shift(static_cast<size_t>(n), 0);
  std::vector<int> sign(static_cast<size_t>(n), 0);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double r_k = state.r[k];
    if (r_k == 0.0) continue;
    int er = 0, en = 0;
    const double mn = std::frexp(diag_rho_norms[k], &en);
    if (mn != 0.5) {
      throw std::invalid_argument(
          "multiplierless_update: diag_rho_norms must hold rho(||h_k||^2)");
    }
    std::frexp(std::abs(r_k), &er);
    // b_k = rho(r_k)/rho(||h_k||^2) = sign(r_k) * 2^{(er-1)-(en-1)}
    shift[static_cast<size_t>(k)] = er - en;
    sign[static_cast<size_t>(k)] = r_k > 0 ? 1 : -1;
    next.b[k] = shift_scale(1.0, er - en, sign[static_cast<size_t>(k)]);
  }
  // r <- r - SS*b via the add/shift path: each column is scaled by a
  // signed power of two only.
  for (Eigen::Index k = 0; k < n; ++k) {
    if (sign[static_cast<size_t>(k)] == 0) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      next.r[j] -= shift_scale(gram_unnormalized(j, k),
                               shift[static_cast<size_t>(k)],
                               sign[static_cast<size_t>(k)]);
    }
  }
  next.c += next.b;
  return next;
}

DiscreteRunResult run_discrete(const SamplingOperator& op,
                               const SampleRecord& record,
                               const MultiSignal& u0,
                               const DiscreteRunOptions& options) {
  const int n = op.size();
  if (record.raw.size() != n) {
    throw std::invalid_argument("run_discrete: sample count mismatch");
  }
  if (options.n_iter < 0) throw std::invalid_argument("run_discrete: n_iter < 0");

  const Eigen::MatrixXd gram = op.gram(false).entries;
  const Eigen::VectorXd norms2 = op.family().norms.array().square();
  Eigen::VectorXd rho_norms2(n);
  for (int k = 0; k < n; ++k) rho_norms2[k] = rho(norms2[k]);

  const Eigen::VectorXd s_u0 = op.apply_S(u0, false);
  const Eigen::VectorXd r0 = record.raw - s_u0;

  // Error instrumentation in coefficient space: with d0 = P u0 - x in the
  // subspace, ||u(n) - x||^2 = ||d0||^2 + 2 c.g0 + c.G c.
  const SamplingOperator& errop =
      options.error_operator ? *options.error_operator : op;
  Eigen::VectorXd g0;
  Eigen::MatrixXd err_gram;
  double d0_norm2 = 0, truth_norm2 = 0;
  if (options.truth) {
    MultiSignal d0 = errop.projector().apply(u0);
    d0 -= *options.truth;
    d0_norm2 = inner_product(d0, d0);
    truth_norm2 = inner_product(*options.truth, *options.truth);
    g0.resize(n);
    for (int k = 0; k < n; ++k) g0[k] = inner_product(d0, errop.projected_kernel(k));
    err_gram = options.error_operator ? errop.gram(false).entries : gram;
  }

  DiscreteState state;
  state.c = Eigen::VectorXd::Zero(n);
  state.r = r0;
  state.b = Eigen::VectorXd::Zero(n);
  state.n = 0;

  IterationTrace trace;
  trace.per_cycle_logging = false;
  if (options.debug_synthesize_trace) {
    trace.config_echo.push_back("trace_mode=debug_synthesized");
  }
  auto rel_mse = [&](const Eigen::VectorXd& c) {
    if (options.debug_synthesize_trace) {
      MultiSignal u = errop.projector().apply(u0 + op.apply_S_star(c, false));
      u -= *options.truth;
      return inner_product(u, u) / truth_norm2;
    }
    // roundoff can push the quadratic form a hair below zero at convergence
    const double e2 = std::max(0.0, d0_norm2 + 2.0 * c.dot(g0) + c.dot(err_gram * c));
    return e2 / truth_norm2;
  };
  auto log_state = [&](long iter, double lambda) {
    TraceRow row;
    row.iter = iter;
    row.lambda = lambda;
    row.max_residual = state.r.cwiseAbs().maxCoeff();
    if (options.truth) row.rel_mse = rel_mse(state.c);
    trace.rows.push_back(row);
  };

  const double s_hat_norm = record.normalized.norm();
  int rising = 0;
  double prev_mse = -1;
  log_state(0, 0.0);
  for (long it = 0; it < options.n_iter; ++it) {
    double lambda = 1.0;
    switch (options.mode) {
      case DiscreteMode::kPlain:
        state.b = state.r.cwiseQuotient(norms2);
        state.r -= gram * state.b;
        state.c += state.b;
        ++state.n;
        break;
      case DiscreteMode::kRelaxed:
        lambda = options.lambda;
        state.b = lambda * state.r.cwiseQuotient(norms2);
        state.r -= gram * state.b;
        state.c += state.b;
        ++state.n;
        break;
      case DiscreteMode::kMultiplierless:
        state = multiplierless_update(state, gram, rho_norms2);
        break;
    }
    if (!state.r.allFinite() || !state.c.allFinite()) {
      throw std::runtime_error(
          "run_discrete: NaN/overflow in iteration vectors (badly scaled Gram)");
    }
    if (options.debug_check_invariant) {
      const Eigen::VectorXd expect = r0 - gram * state.c;
      const double scale = std::max(1.0, r0.norm());
      if ((state.r - expect).norm() > 1e-9 * scale) {
        throw std::runtime_error("run_discrete: iterate identity violated");
      }
    }
    log_state(it + 1, lambda);
    if (options.mode == DiscreteMode::kMultiplierless && options.truth) {
      const double mse = trace.rows.back().rel_mse;
      rising = (prev_mse >= 0 && mse > prev_mse) ? rising + 1 : 0;
      prev_mse = mse;
      if (options.divergence_watchdog > 0 && rising >= options.divergence_watchdog) {
        throw std::runtime_error("run_discrete: multiplierless iteration diverging");
      }
    }
    if (options.residual_tol &&
        state.r.cwiseQuotient(op.family().norms).norm() <=
            *options.residual_tol * s_hat_norm) {
      break;
    }
  }

  DiscreteRunResult out;
  out.estimate = u0 + op.apply_S_star(state.c, false);
  out.state = std::move(state);
  out.trace = std::move(trace);
  return out;
}

PinvSolver::PinvSolver(const SamplingOperator& op, double sv_threshold)
    : op_(&op), spec_(op.family().spec()), channels_(op.family().channel_count()) {
  // Orthonormal basis of the channel range
  if (op.projector().has_matrix()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.projector().matrix());
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      if (es.eigenvalues()[i] > 0.5) keep.push_back(i);
    }
    range_basis_.resize(channels_, static_cast<Eigen::Index>(keep.size()));
    for (size_t j = 0; j < keep.size(); ++j) {
      range_basis_.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]);
    }
  } else {
    range_basis_ = Eigen::MatrixXd::Identity(channels_, channels_);
  }

  const int T = spec_.period;
  const int mmax = spec_.max_harmonic();
  const int ngrid = spec_.grid_len();
  const int nsub = static_cast<int>(range_basis_.cols());

  // Orthonormal scalar harmonic basis of the bandlimited space
  std::vector<Eigen::VectorXd> scalar;
  scalar.emplace_back(Eigen::VectorXd::Constant(ngrid, 1.0 / std::sqrt(double(T))));
  for (int m = 1; m <= mmax; ++m) {
    Eigen::VectorXd c(ngrid), s(ngrid);
    for (int i = 0; i < ngrid; ++i) {
      const double ang = 2.0 * M_PI * m * i / ngrid;
      c[i] = std::sqrt(2.0 / T) * std::cos(ang);
      s[i] = std::sqrt(2.0 / T) * std::sin(ang);
    }
    scalar.push_back(c);
    scalar.push_back(s);
  }

  basis_.reserve(scalar.size() * static_cast<size_t>(nsub));
  for (int q = 0; q < nsub; ++q) {
    for (const auto& sb : scalar) {
      std::vector<GridSignal> chans;
      chans.reserve(static_cast<size_t>(channels_));
      for (int i = 0; i < channels_; ++i) {
        chans.emplace_back(spec_, range_basis_(i, q) * sb, true);
      }
      basis_.emplace_back(std::move(chans));
    }
  }

  const int dim = static_cast<int>(basis_.size());
  s_matrix_.resize(op.size(), dim);
  for (int idx = 0; idx < dim; ++idx) {
    const Eigen::VectorXd col = op.apply_S(basis_[static_cast<size_t>(idx)], true);
    s_matrix_.col(idx) = col;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      s_matrix_, Eigen::ComputeThinU | Eigen::ComputeThinV);
  u_ = svd.matrixU();
  v_ = svd.matrixV();
  sv_ = svd.singularValues();
  const double cutoff = sv_.size() > 0 ? sv_threshold * sv_[0] : 0.0;
  rank_ = 0;
  for (Eigen::Index i = 0; i < sv_.size(); ++i) {
    if (sv_[i] > cutoff) ++rank_;
  }
  if (rank_ < 1) {
    throw std::runtime_error("PinvSolver: rank collapse (degenerate sampling)");
  }
}

MultiSignal PinvSolver::from_basis_coeffs(const Eigen::VectorXd& coeffs) const {
  MultiSignal out = MultiSignal::zero(spec_, channels_);
  for (Eigen::Index idx = 0; idx < coeffs.size(); ++idx) {
    if (coeffs[idx] != 0.0) out.axpy(coeffs[idx], basis_[static_cast<size_t>(idx)]);
  }
  return out;
}

MultiSignal PinvSolver::solve(const Eigen::VectorXd& s_hat) const {
  if (s_hat.size() != s_matrix_.rows()) {
    throw std::invalid_argument("PinvSolver::solve: length mismatch");
  }
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(s_matrix_.cols());
  for (int i = 0; i < rank_; ++i) {
    coeffs += (u_.col(i).dot(s_hat) / sv_[i]) * v_.col(i);
  }
  return from_basis_coeffs(coeffs);
}

MultiSignal PinvSolver::solve_from(const Eigen::VectorXd& s_hat,
                                   const MultiSignal& u0) const {
  const Eigen::VectorXd res = s_hat - op_->apply_S(u0, true);
  MultiSignal out = u0;
  out += solve(res);
  return out;
}

Eigen::VectorXd PinvSolver::project_onto_range(const Eigen::VectorXd& s_hat) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(s_hat.size());
  for (int i = 0; i < rank_; ++i) {
    out += u_.col(i).dot(s_hat) * u_.col(i);
  }
  return out;
}

double PinvSolver::operator_norm() const { return sv_.size() ? sv_[0] : 0.0; }

double PinvSolver::pinv_norm() const { return 1.0 / sv_[rank_ - 1]; }

std::string gram_to_text(const GramMatrix& gram) {
  std::ostringstream os;
  const Eigen::Index n = gram.entries.rows();
  os << "gram," << (gram.normalized ? 1 : 0) << "," << n << "\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      os << format17(gram.entries(i, j)) << (j + 1 == n ? "\n" : ",");
    }
  }
  for (Eigen::Index i = 0; i < gram.diag_norms2.size(); ++i) {
    os << format17(gram.diag_norms2[i]) << (i + 1 == gram.diag_norms2.size() ? "\n" : ",");
  }
  return os.str();
}

GramMatrix gram_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("gram_from_text: empty");
  std::istringstream hs(line);
  std::string tag, normflag, count;
  std::getline(hs, tag, ',');
  std::getline(hs, normflag, ',');
  std::getline(hs, count, ',');
  if (tag != "gram") throw std::invalid_argument("gram_from_text: bad header");
  const Eigen::Index n = std::stol(count);
  GramMatrix g;
  g.normalized = normflag == "1";
  g.entries.resize(n, n);
  auto parse_row = [&](Eigen::Index expected, auto&& sink) {
    if (!std::getline(is, line)) throw std::invalid_argument("gram_from_text: truncated");
    std::istringstream rs(line);
    std::string cell;
    for (Eigen::Index j = 0; j < expected; ++j) {
      if (!std::getline(rs, cell, ',')) {
        throw std::invalid_argument("gram_from_text: short row");
      }
      sink(j, std::stod(cell));
    }
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    parse_row(n, [&](Eigen::Index j, double v) { g.entries(i, j) = v; });
  }
  g.diag_norms2.resize(n);
  parse_row(n, [&](Eigen::Index j, double v) { g.diag_norms2[j] = v; });
  return g;
}

}  // namespace recon
