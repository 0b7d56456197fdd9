#include "recon/multichannel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "recon/io.hpp"

namespace recon {

namespace {

// Scalar (single-channel) integrate-and-fire kernels of one spike train.
KernelFamily scalar_kernels(const SpikeTrain& train, GridSpec spec) {
  return if_kernels(train.times, 0.0, spec);
}

}  // namespace

SubspaceProjector MixingMatrix::projector() const {
  return SubspaceProjector::with_matrix(P);
}

MixingMatrix MixingMatrix::from_matrix(Eigen::MatrixXd a) {
  if (a.rows() < a.cols() || a.cols() < 1) {
    throw std::invalid_argument("MixingMatrix: need M >= N >= 1");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv[sv.size() - 1] <= 1e-12 * sv[0]) {
    throw std::invalid_argument("MixingMatrix: rank deficient");
  }
  MixingMatrix mix;
  mix.A = std::move(a);
  mix.A_pinv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  mix.P = mix.A * mix.A_pinv;
  return mix;
}

MixingMatrix tight_frame(int M, int N) {
  if (M < N || N < 1) throw std::invalid_argument("tight_frame: need M >= N >= 1");
  if (M == N) return MixingMatrix::from_matrix(Eigen::MatrixXd::Identity(M, N));
  Eigen::MatrixXd a(M, N);
  for (int i = 0; i < M; ++i) {
    const double th = 2.0 * M_PI * i / M;
    int col = 0;
    if (N % 2 == 1) a(i, col++) = 1.0 / std::sqrt(double(N));
    for (int k = 1; col < N; ++k) {
      a(i, col++) = std::sqrt(2.0 / N) * std::cos(k * th);
      a(i, col++) = std::sqrt(2.0 / N) * std::sin(k * th);
    }
  }
  return MixingMatrix::from_matrix(std::move(a));
}

MultiSignal project_A_multichannel(const MultiSignal& u, const MixingMatrix& mix) {
  if (u.channel_count() != mix.channels()) {
    throw std::invalid_argument("project_A_multichannel: channel mismatch");
  }
  return mix.projector().apply(u);
}

int ChannelSpikeSet::total_count() const {
  int n = 0;
  for (const auto& c : channels) n += c.interval_count();
  return n;
}

int ChannelSpikeSet::flat_index(int i, int j) const {
  if (i < 0 || i >= channel_count()) throw std::out_of_range("flat_index: channel");
  const auto& tr = channels[static_cast<size_t>(i)];
  if (j < 0 || j >= tr.interval_count()) throw std::out_of_range("flat_index: interval");
  int off = 0;
  for (int m = 0; m < i; ++m) off += channels[static_cast<size_t>(m)].interval_count();
  return off + j;
}

KernelFamily mc_kernels(const ChannelSpikeSet& spikes, GridSpec spec, int M) {
  if (spikes.channel_count() != M) {
    throw std::invalid_argument("mc_kernels: channel count mismatch");
  }
  KernelFamily fam;
  fam.scheme_tag = SchemeTag::kMultichannelTem;
  fam.orthogonal = true;
  std::vector<double> norms;
  for (int i = 0; i < M; ++i) {
    const KernelFamily scalar = scalar_kernels(spikes.channels[static_cast<size_t>(i)], spec);
    for (int j = 0; j < scalar.size(); ++j) {
      std::vector<GridSignal> chans;
      chans.reserve(static_cast<size_t>(M));
      for (int m = 0; m < M; ++m) {
        if (m == i) {
          chans.push_back(scalar.kernels[static_cast<size_t>(j)].channel(0));
        } else {
          chans.push_back(GridSignal::zero(spec));
        }
      }
      fam.kernels.emplace_back(std::move(chans));
      fam.index_map.push_back({j, i});
      norms.push_back(scalar.norms[j]);
    }
  }
  fam.norms = Eigen::Map<Eigen::VectorXd>(norms.data(), static_cast<Eigen::Index>(norms.size()));
  return fam;
}

double mc_gram_entry(int i, int j, int ip, int jp, const ChannelSpikeSet& spikes,
                     const MixingMatrix& mix, GridSpec spec) {
  const KernelFamily si = scalar_kernels(spikes.channels.at(static_cast<size_t>(i)), spec);
  const KernelFamily sp =
      i == ip ? si : scalar_kernels(spikes.channels.at(static_cast<size_t>(ip)), spec);
  const MultiSignal& h = si.kernels.at(static_cast<size_t>(j));
  const MultiSignal hp_t = project_B(sp.kernels.at(static_cast<size_t>(jp)));
  const double scalar = inner_product(hp_t, h) / (si.norms[j] * sp.norms[jp]);
  return scalar * mix.P(i, ip);
}

GramMatrix mc_gram(const ChannelSpikeSet& spikes, const MixingMatrix& mix,
                   GridSpec spec, bool normalized) {
  const int M = spikes.channel_count();
  std::vector<KernelFamily> scalar(static_cast<size_t>(M));
  std::vector<std::vector<MultiSignal>> proj(static_cast<size_t>(M));
  std::vector<int> offset(static_cast<size_t>(M), 0);
  int total = 0;
  for (int i = 0; i < M; ++i) {
    scalar[static_cast<size_t>(i)] = scalar_kernels(spikes.channels[static_cast<size_t>(i)], spec);
    offset[static_cast<size_t>(i)] = total;
    total += scalar[static_cast<size_t>(i)].size();
    proj[static_cast<size_t>(i)].reserve(static_cast<size_t>(scalar[static_cast<size_t>(i)].size()));
    for (const auto& h : scalar[static_cast<size_t>(i)].kernels) {
      proj[static_cast<size_t>(i)].push_back(project_B(h));
    }
  }
  GramMatrix g;
  g.normalized = normalized;
  g.entries.resize(total, total);
  g.diag_norms2.resize(total);
  for (int i = 0; i < M; ++i) {
    const auto& fi = scalar[static_cast<size_t>(i)];
    for (int j = 0; j < fi.size(); ++j) {
      g.diag_norms2[offset[static_cast<size_t>(i)] + j] = fi.norms[j] * fi.norms[j];
    }
    for (int ip = i; ip < M; ++ip) {
      const auto& fp = scalar[static_cast<size_t>(ip)];
      const double p = mix.P(i, ip);
      for (int j = 0; j < fi.size(); ++j) {
        for (int jp = 0; jp < fp.size(); ++jp) {
          // one scalar cross-correlation per channel pair, reused via the
          // P factor
          double v = inner_product(proj[static_cast<size_t>(i)][static_cast<size_t>(j)],
                                   proj[static_cast<size_t>(ip)][static_cast<size_t>(jp)]);
          if (normalized) v /= fi.norms[j] * fp.norms[jp];
          v *= p;
          g.entries(offset[static_cast<size_t>(i)] + j, offset[static_cast<size_t>(ip)] + jp) = v;
          g.entries(offset[static_cast<size_t>(ip)] + jp, offset[static_cast<size_t>(i)] + j) = v;
        }
      }
    }
  }
  return g;
}

SynthesisResult synthesize_output(const Eigen::VectorXd& c,
                                  const ChannelSpikeSet& spikes,
                                  const MixingMatrix& mix, GridSpec spec) {
  const int M = spikes.channel_count();
  if (M != mix.channels()) {
    throw std::invalid_argument("synthesize_output: channel mismatch");
  }
  if (c.size() != spikes.total_count()) {
    throw std::invalid_argument("synthesize_output: coefficient length mismatch");
  }
  const int N = mix.sources();
  const int n = spec.grid_len();
  // bandlimited per-channel piecewise-constant coefficient functions
  std::vector<GridSignal> cbl;
  cbl.reserve(static_cast<size_t>(M));
  int flat = 0;
  for (int i = 0; i < M; ++i) {
    const KernelFamily scalar = scalar_kernels(spikes.channels[static_cast<size_t>(i)], spec);
    Eigen::VectorXd vals = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < scalar.size(); ++j, ++flat) {
      vals += (c[flat] / scalar.norms[j]) *
              scalar.kernels[static_cast<size_t>(j)].channel(0).values();
    }
    cbl.push_back(project_B(GridSignal(spec, std::move(vals), false)));
  }
  std::vector<GridSignal> xch, ych;
  for (int m = 0; m < M; ++m) {
    GridSignal acc = GridSignal::zero(spec);
    for (int i = 0; i < M; ++i) acc.axpy(mix.P(m, i), cbl[static_cast<size_t>(i)]);
    xch.push_back(std::move(acc));
  }
  for (int q = 0; q < N; ++q) {
    GridSignal acc = GridSignal::zero(spec);
    for (int i = 0; i < M; ++i) acc.axpy(mix.A_pinv(q, i), cbl[static_cast<size_t>(i)]);
    ych.push_back(std::move(acc));
  }
  return {MultiSignal(std::move(xch)), MultiSignal(std::move(ych))};
}

std::string mixing_to_text(const MixingMatrix& mix) { return matrix_to_text(mix.A); }

MixingMatrix mixing_from_text(const std::string& text) {
  return MixingMatrix::from_matrix(matrix_from_text(text));
}

std::string channel_spikes_to_text(const ChannelSpikeSet& spikes, GridSpec spec) {
  std::ostringstream os;
  int count = 0;
  for (const auto& c : spikes.channels) count += static_cast<int>(c.times.size());
  os << scheme_name(SchemeTag::kMultichannelTem) << "," << spec.period << ","
     << spec.rate << "," << count << "\n";
  for (int i = 0; i < spikes.channel_count(); ++i) {
    const auto& tr = spikes.channels[static_cast<size_t>(i)];
    for (size_t j = 0; j < tr.times.size(); ++j) {
      const double s = j == 0 ? 0.0 : tr.samples[j - 1];
      os << i << "," << format_g17(tr.times[j]) << "," << format_g17(s) << "\n";
    }
  }
  return os.str();
}

ChannelSpikeSet channel_spikes_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) {
    throw std::invalid_argument("channel_spikes_from_text: empty");
  }
  ChannelSpikeSet out;
  int prev_channel = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string ci, ti, si;
    if (!std::getline(ls, ci, ',') || !std::getline(ls, ti, ',') ||
        !std::getline(ls, si, ',')) {
      throw std::invalid_argument("channel_spikes_from_text: bad line");
    }
    const int ch = std::stoi(ci);
    if (ch != prev_channel) {
      if (ch != prev_channel + 1) {
        throw std::invalid_argument("channel_spikes_from_text: channels out of order");
      }
      out.channels.emplace_back();
      prev_channel = ch;
    }
    auto& tr = out.channels.back();
    tr.times.push_back(std::stod(ti));
    if (tr.times.size() > 1) tr.samples.push_back(std::stod(si));
  }
  return out;
}

}  // namespace recon
