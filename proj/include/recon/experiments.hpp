#pragma once

#include <string>

#include "recon/io.hpp"

namespace recon {

/// Outcome of a batch experiment: the main CSV, a human-readable report,
/// and the process exit code (0 pass, 2 acceptance failure, 3 calibration
/// failure).
struct ExperimentResult {
  std::string csv;
  std::string report;
  int exit_code = 0;
};

/// Serial POCS on extrema samples, T = 41, relaxation arms
/// lambda_odd in {0, 1, 1.5, 2} (a-d), inputs drawn until they carry
/// exactly 36 extrema. CSV schema arm,osr,cycle,mean_rel_mse,stderr.
ExperimentResult run_fig3(const KeyValueConfig& cfg, bool full = false);

/// Multi-channel TEM, T = 61, M = 3, N = 2, arms (a) bandlimited-only
/// projector in the iteration, (b) plain, (c) lambda = 1.3,
/// (d) multiplierless, per system OSR in {1.49, 1.56}.
ExperimentResult run_fig5(const KeyValueConfig& cfg, bool full = false);

/// Iteration limit vs SVD pseudo-inverse on a small instance, consistent
/// and noisy samples, zero and random initial estimates.
ExperimentResult run_theorem1(const KeyValueConfig& cfg);

/// Noise-filtering bound of the pseudo-inverse reconstruction.
ExperimentResult run_noise_sweep(const KeyValueConfig& cfg);

/// Table-based Gram entries against a nested-quadrature oracle.
ExperimentResult run_prop4_check(const KeyValueConfig& cfg);

/// Dispatch on cfg key "experiment".
ExperimentResult run_experiment(const KeyValueConfig& cfg, bool full = false);

}  // namespace recon
