#pragma once

#include <string>
#include <vector>

#include "recon/grid.hpp"
#include "recon/pocs_ortho.hpp"
#include "recon/samplers.hpp"

namespace recon {

/// Full-rank M x N channel mixing with its pseudo-inverse and the range
/// projector P = A A^+.
struct MixingMatrix {
  Eigen::MatrixXd A;       // M x N
  Eigen::MatrixXd A_pinv;  // N x M
  Eigen::MatrixXd P;       // M x M

  int channels() const { return static_cast<int>(A.rows()); }
  int sources() const { return static_cast<int>(A.cols()); }

  /// P combined with bandlimiting, for the reconstruction subspace.
  SubspaceProjector projector() const;

  static MixingMatrix from_matrix(Eigen::MatrixXd a);
};

/// Harmonic tight frame of unit rows: A^T A = (M/N) I. M = N gives the
/// identity. N = 2 rows sit at angles 2 pi i / M.
MixingMatrix tight_frame(int M, int N);

/// Projection onto the subspace {v bandlimited, v(t) in range(A)}.
MultiSignal project_A_multichannel(const MultiSignal& u, const MixingMatrix& mix);

/// One spike train per channel; the flattened index set is channel-major:
/// (i, j) -> offset(i) + j with channels in increasing i.
struct ChannelSpikeSet {
  std::vector<SpikeTrain> channels;

  int channel_count() const { return static_cast<int>(channels.size()); }
  int total_count() const;
  int flat_index(int i, int j) const;
};

/// Kernels h_{i,j}(t) = h^i_j(t) e_i: per-channel integrate-and-fire
/// indicator kernels placed in channel i, zero elsewhere. Orthogonal.
KernelFamily mc_kernels(const ChannelSpikeSet& spikes, GridSpec spec, int M);

/// Normalized Gram entry via the factorization
/// <h~^_{i'j'}, h^_{ij}> = (<h~^{i'}_{j'}, h^i_j> / (||h^{i'}_{j'}|| ||h^i_j||)) p_{i i'}
/// with scalar (single-channel bandlimited) projected kernels.
double mc_gram_entry(int i, int j, int ip, int jp, const ChannelSpikeSet& spikes,
                     const MixingMatrix& mix, GridSpec spec);

/// Full Gram assembled from one scalar cross-Gram per channel pair,
/// scaled by the P factor. Matches SamplingOperator::gram on mc_kernels.
GramMatrix mc_gram(const ChannelSpikeSet& spikes, const MixingMatrix& mix,
                   GridSpec spec, bool normalized = true);

/// From normalized coefficients c (channel-major), builds the per-channel
/// piecewise-constant functions, bandlimits them, and combines with the
/// columns of P (x_hat, M channels) and A^+ (y_hat, N channels).
struct SynthesisResult {
  MultiSignal x_hat;
  MultiSignal y_hat;
};
SynthesisResult synthesize_output(const Eigen::VectorXd& c,
                                  const ChannelSpikeSet& spikes,
                                  const MixingMatrix& mix, GridSpec spec);

std::string mixing_to_text(const MixingMatrix& mix);
MixingMatrix mixing_from_text(const std::string& text);

/// Spike line format with a leading channel column:
/// header "scheme,T,R,count", then "i,t,s" lines (channel-major).
std::string channel_spikes_to_text(const ChannelSpikeSet& spikes, GridSpec spec);
ChannelSpikeSet channel_spikes_from_text(const std::string& text);

}  // namespace recon
