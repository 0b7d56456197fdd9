#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "recon/grid.hpp"

namespace recon {

enum class SchemeTag { kPoint, kDerivative, kExtrema, kIntegrateFire, kMultichannelTem };

std::string scheme_name(SchemeTag tag);

/// Index label of a kernel: plain k, or (channel, interval) for
/// multi-channel families.
struct KernelLabel {
  int k = 0;
  int channel = -1;  // -1 for single-channel schemes
};

/// A family of sampling kernels (h_k) with cached norms.
struct KernelFamily {
  std::vector<MultiSignal> kernels;
  Eigen::VectorXd norms;  // ||h_k||
  bool orthogonal = false;
  std::vector<KernelLabel> index_map;
  SchemeTag scheme_tag = SchemeTag::kPoint;

  int size() const { return static_cast<int>(kernels.size()); }
  const GridSpec& spec() const { return kernels.at(0).spec(); }
  int channel_count() const { return kernels.at(0).channel_count(); }
};

/// Recomputes norms and validates the family invariants (norm cache,
/// orthogonality flag vs numerical Gram, no zero-norm kernel).
void validate_family(const KernelFamily& family, double tol = 1e-10);

/// Raw samples s_k = <x, h_k> and their normalized version s_k/||h_k||.
struct SampleRecord {
  Eigen::VectorXd raw;
  Eigen::VectorXd normalized;
  std::optional<Eigen::VectorXd> noise;
  std::string family_ref;
};

/// Interval boundaries t_0 < t_1 < ... < t_K in [0, T] plus the K
/// per-interval samples s_j over [t_{j-1}, t_j].
struct SpikeTrain {
  std::vector<double> times;    // boundaries, size K+1
  std::vector<double> samples;  // size K

  int interval_count() const { return static_cast<int>(samples.size()); }
};

/// Point-sampling kernels: kernel k = D(. - t_k).
KernelFamily point_kernels(const std::vector<double>& times, GridSpec spec);

/// Derivative-sampling kernels: (-1)^{n_k} d^{n_k} D / dt^{n_k} (. - t_k).
KernelFamily derivative_kernels(const std::vector<double>& times,
                                const std::vector<int>& orders, GridSpec spec);

/// Extrema of a bandlimited signal: grid sign-change detection on x',
/// Newton refinement with spectral derivatives.
struct ExtremaResult {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<int> degenerate;  // indices with |x''| below threshold
};
ExtremaResult find_extrema(const GridSignal& x);

/// The extrema sampling family: even index (order 0, value a_i),
/// odd index (order 1, value 0) at each extremum location.
KernelFamily extrema_kernels(const std::vector<double>& extrema_times, GridSpec spec);

/// Integrate-and-fire kernels over the partition intervals, with leak
/// factor exp(-alpha (t_k - t)). Boundary grid cells carry fractional
/// weights so the quadrature error is O(dt^2).
KernelFamily if_kernels(const std::vector<double>& partition, double alpha,
                        GridSpec spec);

/// Biased integrate-and-fire encoding: spike when the running integral
/// of x + bias reaches threshold. Requires bias > max|x|.
SpikeTrain encode_if(const GridSignal& x, double bias, double threshold);

SampleRecord sample(const MultiSignal& x, const KernelFamily& family);
SampleRecord sample(const GridSignal& x, const KernelFamily& family);

SampleRecord add_noise(const SampleRecord& record, const KernelFamily& family,
                       double sigma, std::uint64_t seed);

/// Line-oriented text serialization: header "scheme,T,R,count", then one
/// "t_k,s_k" pair per line (17 significant digits).
std::string spike_train_to_text(const SpikeTrain& train, SchemeTag scheme,
                                GridSpec spec);
SpikeTrain spike_train_from_text(const std::string& text);

}  // namespace recon
