// Acceptance gate: one pass/fail line per criterion, nonzero exit when
// any criterion fails. Each check is self-contained and runs at the
// default desk-scale parameters.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "recon/experiments.hpp"
#include "recon/grid.hpp"
#include "recon/io.hpp"
#include "recon/multichannel.hpp"
#include "recon/pocs_ortho.hpp"
#include "recon/pocs_serial.hpp"
#include "recon/samplers.hpp"
#include "recon/sinc_table.hpp"

using namespace recon;

namespace {

int failures = 0;

void verdict(int criterion, bool pass, const std::string& what) {
  std::printf("criterion %2d: %s  %s\n", criterion, pass ? "PASS" : "FAIL",
              what.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct IfInstance {
  GridSpec spec;
  GridSignal x;
  KernelFamily family;
  SamplingOperator op;
  SampleRecord rec;

  explicit IfInstance(std::uint64_t seed, int T = 11, int intervals = 13)
      : spec(make_grid(T, 16)),
        x(random_bandlimited(spec, SpectrumProfile::kFlat, seed)),
        family(build(x, intervals)),
        op(family, SubspaceProjector::bandlimited(1)),
        rec(sample(x, family)) {}

  static KernelFamily build(const GridSignal& x, int intervals) {
    const double bias = 1.25 * x.values().cwiseAbs().maxCoeff();
    const SpikeTrain tr = encode_if(x, bias, bias * x.spec().period / intervals);
    return if_kernels(tr.times, 0.0, x.spec());
  }
};

KeyValueConfig config_for(const std::string& experiment) {
  KeyValueConfig cfg = KeyValueConfig::parse("");
  cfg.set("experiment", experiment);
  if (experiment == "fig3") {
    cfg.set("T", "41");
    cfg.set("R", "16");
    cfg.set("trials", "50");
    cfg.set("n_cycles", "300");
    cfg.set("seed", "7");
    cfg.set("extrema_target", "36");
    cfg.set("lambda_arms", "0, 1, 1.5, 2");
  } else if (experiment == "fig5") {
    cfg.set("T", "61");
    cfg.set("R", "16");
    cfg.set("M", "3");
    cfg.set("N", "2");
    cfg.set("trials", "20");
    cfg.set("n_cycles", "300");
    cfg.set("seed", "7");
    cfg.set("lambda_relaxed", "1.3");
    cfg.set("osr_arms", "1.49, 1.56");
  } else if (experiment == "theorem1") {
    cfg.set("T", "11");
    cfg.set("R", "16");
    cfg.set("seed", "3003");
    cfg.set("sigma", "0.05");
    cfg.set("intervals", "12");
    cfg.set("n_final", "5000");
    cfg.set("tol", "1e-6");
  } else if (experiment == "noise_sweep") {
    cfg.set("T", "11");
    cfg.set("R", "16");
    cfg.set("trials", "100");
    cfg.set("seed", "4004");
    cfg.set("sigmas", "0.01, 0.05, 0.1");
    cfg.set("intervals", "12");
  } else if (experiment == "prop4_check") {
    cfg.set("T", "61");
    cfg.set("pairs", "1000");
    cfg.set("seed", "5005");
    cfg.set("tol", "1e-6");
  }
  return cfg;
}

// 1: iteration limit vs dense pseudo-inverse, consistent and noisy, both
// initial estimates, gap <= 1e-6 at n = 5000, <= 10 s per instance.
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult res = run_theorem1(config_for("theorem1"));
  const double elapsed = seconds_since(t0);
  const bool pass = res.exit_code == 0 && elapsed <= 4 * 10.0;
  verdict(1, pass,
          "pseudo-inverse equivalence at n = 5000 (4 instances, " +
              format_g17(elapsed) + " s)");
}

// 2: discrete vector iteration vs direct signal-space iteration, 50 steps.
void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  IfInstance inst(2001);
  const MultiSignal u0{
      random_bandlimited(inst.spec, SpectrumProfile::kFlat, 2002)};
  DiscreteRunOptions opt;
  opt.n_iter = 50;
  const DiscreteRunResult res = run_discrete(inst.op, inst.rec, u0, opt);
  MultiSignal u = inst.op.projector().apply(u0);
  for (int n = 0; n < 50; ++n) u = papcs_step(u, inst.op, inst.rec.normalized);
  MultiSignal diff = res.estimate;
  diff -= u;
  const double rel = norm(diff) / norm(u);
  const bool pass = rel <= 1e-9 && seconds_since(t0) <= 1.0;
  verdict(2, pass, "discrete-time equivalence, relative gap " + format_g17(rel));
}

// 3: monotone rel-MSE for every guarded run with the truth in the
// consistent set; serial and discrete drivers, zero violations.
void criterion_3() {
  long violations = 0, rows = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    IfInstance inst(3000 + s);
    const MultiSignal u0{
        random_bandlimited(inst.spec, SpectrumProfile::kFlat, 3100 + s)};

    SerialRunOptions sopt;
    sopt.n_iter = 100L * inst.family.size();
    sopt.truth = MultiSignal(inst.x);
    sopt.schedule = RelaxationSchedule::alternating(1.0, 1.5);
    const IterationTrace st = run_serial(u0, HyperplaneSet(inst.family, inst.op.projector()),
                                         inst.rec.raw, sopt);
    for (size_t i = 1; i < st.rows.size(); ++i, ++rows) {
      if (st.rows[i].rel_mse > st.rows[i - 1].rel_mse + 1e-12) ++violations;
    }

    for (DiscreteMode mode : {DiscreteMode::kPlain, DiscreteMode::kRelaxed}) {
      DiscreteRunOptions dopt;
      dopt.n_iter = 200;
      dopt.mode = mode;
      dopt.lambda = 1.3;
      dopt.truth = MultiSignal(inst.x);
      const DiscreteRunResult dr = run_discrete(inst.op, inst.rec, u0, dopt);
      for (size_t i = 1; i < dr.trace.rows.size(); ++i, ++rows) {
        if (dr.trace.rows[i].rel_mse > dr.trace.rows[i - 1].rel_mse + 1e-12) {
          ++violations;
        }
      }
    }
  }
  verdict(3, violations == 0,
          "monotone error over " + std::to_string(rows) + " logged rows, " +
              std::to_string(violations) + " violations");
}

// 4: serial extrema experiment ordering and plateau, <= 5 min.
void criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult res = run_fig3(config_for("fig3"));
  const double elapsed = seconds_since(t0);
  verdict(4, res.exit_code == 0 && elapsed <= 300.0,
          "relaxation-arm ordering, 50 trials (" + format_g17(elapsed) + " s)");
}

// 5: multi-channel experiment arms, <= 15 min.
void criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult res = run_fig5(config_for("fig5"));
  const double elapsed = seconds_since(t0);
  verdict(5, res.exit_code == 0 && elapsed <= 900.0,
          "multi-channel arm ordering, 20 trials (" + format_g17(elapsed) + " s)");
}

// 6: table-based Gram entries vs quadrature, table build <= 5 s.
void criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  const LookupTable table(2.0 * 61);
  const double build = seconds_since(t0);
  const ExperimentResult res = run_prop4_check(config_for("prop4_check"));
  verdict(6, res.exit_code == 0 && build <= 5.0,
          "lookup-table accuracy, 1000 pairs (build " + format_g17(build) + " s)");
}

// 7: adjointness on 1000 pairs and the Bessel bound on every family.
void criterion_7() {
  double worst_adj = 0;
  double worst_sv = 0;
  std::mt19937_64 rng(7001);
  std::normal_distribution<double> g;
  for (std::uint64_t f = 0; f < 5; ++f) {
    IfInstance inst(7100 + f, f % 2 == 0 ? 11 : 41, 13 + static_cast<int>(f));
    for (int p = 0; p < 200; ++p) {
      const MultiSignal u{random_bandlimited(
          inst.spec, SpectrumProfile::kFlat, 7200 + f * 1000 + static_cast<std::uint64_t>(p))};
      Eigen::VectorXd c(inst.family.size());
      for (int k = 0; k < c.size(); ++k) c[k] = g(rng);
      const double a = inst.op.apply_S(u).dot(c);
      const double b = inner_product(u, inst.op.apply_S_star(c));
      worst_adj = std::max(worst_adj,
                           std::abs(a - b) / (std::abs(a) + std::abs(b) + 1.0));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inst.op.gram(true).entries);
    worst_sv = std::max(worst_sv, es.eigenvalues().maxCoeff());
  }
  const bool pass = worst_adj <= 1e-10 && worst_sv <= 1.0 + 1e-9;
  verdict(7, pass,
          "adjointness " + format_g17(worst_adj) + ", top Gram eigenvalue " +
              format_g17(worst_sv));
}

// 8: multiplierless update emits only signed powers of two with implied
// relaxation in (1/2, 2).
void criterion_8() {
  IfInstance inst(8001);
  const GramMatrix gu = inst.op.gram(false);
  Eigen::VectorXd diag_rho(inst.family.size());
  for (int k = 0; k < inst.family.size(); ++k) diag_rho[k] = rho(gu.diag_norms2[k]);

  std::mt19937_64 rng(8002);
  std::normal_distribution<double> g;
  long violations = 0, checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    DiscreteState st;
    st.c = Eigen::VectorXd::Zero(inst.family.size());
    st.r.resize(inst.family.size());
    for (int k = 0; k < st.r.size(); ++k) {
      st.r[k] = g(rng) * std::exp2(static_cast<int>(g(rng) * 4.0));
    }
    const DiscreteState out = multiplierless_update(st, gu.entries, diag_rho);
    for (int k = 0; k < out.b.size(); ++k) {
      if (out.b[k] == 0.0) continue;
      ++checked;
      int e = 0;
      if (std::frexp(std::abs(out.b[k]), &e) != 0.5) ++violations;
      const double lambda =
          (rho(st.r[k]) / st.r[k]) * (gu.diag_norms2[k] / diag_rho[k]);
      if (!(lambda > 0.5 && lambda < 2.0)) ++violations;
    }
  }
  verdict(8, violations == 0 && checked >= 10000,
          "multiplierless contract over " + std::to_string(checked) +
              " components, " + std::to_string(violations) + " violations");
}

// 9: pseudo-inverse noise filtering bound, 100 trials, zero violations.
void criterion_9() {
  const ExperimentResult res = run_noise_sweep(config_for("noise_sweep"));
  verdict(9, res.exit_code == 0, "noise filtering bound, 100 trials x 3 levels");
}

// 10: byte-identical CSVs across two consecutive runs.
void criterion_10() {
  const ExperimentResult a1 = run_theorem1(config_for("theorem1"));
  const ExperimentResult a2 = run_theorem1(config_for("theorem1"));
  const ExperimentResult b1 = run_fig3(config_for("fig3"));
  const ExperimentResult b2 = run_fig3(config_for("fig3"));
  const bool pass = a1.csv == a2.csv && b1.csv == b2.csv;
  verdict(10, pass, "bit-identical CSV across repeated runs");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  std::printf("%s: %d of 10 criteria failed\n",
              failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL", failures);
  return failures == 0 ? 0 : 1;
}
