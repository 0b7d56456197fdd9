#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace recon {

/// Uniform grid over one period of length T (in Nyquist periods), with
/// rate R points per Nyquist period. The bandlimited space on this grid
/// has the T harmonics |m| <= (T-1)/2.
struct GridSpec {
  int period = 0;  // T, odd
  int rate = 0;    // R >= 8

  int grid_len() const { return period * rate; }
  double dt() const { return 1.0 / rate; }
  int max_harmonic() const { return (period - 1) / 2; }
  bool operator==(const GridSpec&) const = default;
};

/// Validates T odd and R >= 8.
GridSpec make_grid(int period, int rate);

/// A T-periodic real signal sampled at t_i = i/R, i = 0..T*R-1.
/// Immutable after construction.
class GridSignal {
 public:
  GridSignal() = default;
  GridSignal(GridSpec spec, Eigen::VectorXd values, bool bandlimited = false);

  static GridSignal zero(GridSpec spec);

  const GridSpec& spec() const { return spec_; }
  const Eigen::VectorXd& values() const { return values_; }
  bool bandlimited() const { return bandlimited_; }
  int size() const { return static_cast<int>(values_.size()); }

  GridSignal& operator+=(const GridSignal& o);
  GridSignal& operator-=(const GridSignal& o);
  GridSignal& operator*=(double a);
  /// this += a * o.
  void axpy(double a, const GridSignal& o);

 private:
  GridSpec spec_{};
  Eigen::VectorXd values_;
  bool bandlimited_ = false;
};

GridSignal operator+(GridSignal a, const GridSignal& b);
GridSignal operator-(GridSignal a, const GridSignal& b);
GridSignal operator*(double a, GridSignal u);

/// M-tuple of grid signals sharing one GridSpec.
class MultiSignal {
 public:
  MultiSignal() = default;
  explicit MultiSignal(std::vector<GridSignal> channels);
  explicit MultiSignal(GridSignal single);

  static MultiSignal zero(GridSpec spec, int channels);

  int channel_count() const { return static_cast<int>(channels_.size()); }
  const GridSignal& channel(int i) const { return channels_[static_cast<size_t>(i)]; }
  const std::vector<GridSignal>& channels() const { return channels_; }
  const GridSpec& spec() const;

  MultiSignal& operator+=(const MultiSignal& o);
  MultiSignal& operator-=(const MultiSignal& o);
  MultiSignal& operator*=(double a);
  /// this += a * o, without temporaries.
  void axpy(double a, const MultiSignal& o);

 private:
  std::vector<GridSignal> channels_;
};

MultiSignal operator+(MultiSignal a, const MultiSignal& b);
MultiSignal operator-(MultiSignal a, const MultiSignal& b);
MultiSignal operator*(double a, MultiSignal u);

/// L2 inner product dt * sum(u v), summed over channels.
double inner_product(const GridSignal& u, const GridSignal& v);
double inner_product(const MultiSignal& u, const MultiSignal& v);
double norm(const GridSignal& u);
double norm(const MultiSignal& u);

/// Harmonic coefficients c_m, m = -M..M (index m+M), of the bandlimited
/// part of u: c_m = (1/N) sum_i u_i exp(-2 pi i m i / N).
Eigen::VectorXcd band_spectrum(const GridSignal& u);

/// Resynthesizes a (real, bandlimited) grid signal from band coefficients.
GridSignal signal_from_spectrum(GridSpec spec, const Eigen::VectorXcd& coeffs);

/// Orthogonal projection onto the bandlimited space (harmonic mask).
GridSignal project_B(const GridSignal& u);
MultiSignal project_B(const MultiSignal& u);

/// Periodic reproducing kernel D(t - t0), D(t) = sin(pi t)/(T sin(pi t/T)).
GridSignal dirichlet_kernel(double t0, GridSpec spec);

/// Exact derivative of a bandlimited signal via harmonic multiplication.
GridSignal spectral_derivative(const GridSignal& u, int order);

/// Orthogonal projection onto the reconstruction subspace: bandlimiting
/// per channel, optionally composed with a per-grid-point channel-mixing
/// projector (the two commute).
class SubspaceProjector {
 public:
  /// Bandlimited-only subspace for the given channel count.
  static SubspaceProjector bandlimited(int channels);
  /// Bandlimiting plus a symmetric idempotent M x M point projector.
  static SubspaceProjector with_matrix(Eigen::MatrixXd point_projector);

  MultiSignal apply(const MultiSignal& u) const;
  int channels() const { return channels_; }
  bool has_matrix() const { return matrix_.size() > 0; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

 private:
  int channels_ = 1;
  Eigen::MatrixXd matrix_;  // empty for identity
};

enum class SpectrumProfile { kFlat, kLinearIncreasing };

/// Random unit-norm bandlimited signal; harmonic coefficients are iid
/// standard normal scaled by the profile weight (flat: 1, linear: m).
/// dc_weight scales the DC coefficient (default 0, no DC).
GridSignal random_bandlimited(GridSpec spec, SpectrumProfile profile,
                              std::uint64_t seed, double dc_weight = 0.0);

/// Trigonometric-series view of a bandlimited signal for off-grid
/// evaluation of the signal and its derivatives.
class FourierSeries {
 public:
  explicit FourierSeries(const GridSignal& x);
  double eval(double t, int deriv_order = 0) const;
  int period() const { return period_; }

 private:
  int period_ = 0;
  Eigen::VectorXcd coeffs_;  // m = -M..M
};

/// Deterministic per-trial RNG stream derived from (master seed, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace recon
