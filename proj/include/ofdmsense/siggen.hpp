#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "config.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace ofdmsense {

/// 16-QAM with unit average energy: (a + ib)/sqrt(10), a,b in {-3,-1,1,3}.
/// Mean |s|^2 over the 16 points is (2/16)*4*(1+9)/10 = 1.
inline const std::array<Complex, 16>& qam16_alphabet() {
  static const std::array<Complex, 16> pts = [] {
    std::array<Complex, 16> a{};
    const double levels[4] = {-3.0, -1.0, 1.0, 3.0};
    const double s = 1.0 / std::sqrt(10.0);
    int idx = 0;
    for (int i = 0; i < 4; ++i)
      for (int q = 0; q < 4; ++q) a[idx++] = Complex(levels[i] * s, levels[q] * s);
    return a;
  }();
  return pts;
}

/// Uniformly random k-subset of the n_sub subcarriers.
inline SupportSet draw_support(const OfdmConfig& cfg, Rng& rng) {
  if (cfg.k > cfg.n_sub)
    throw std::invalid_argument("draw_support: more active subcarriers than subcarriers");
  return SupportSet(rng.sample_indices(cfg.n_sub, cfg.k));
}

/// n_blocks + 1 consecutive sparse frequency-domain symbols s[0..N_b],
/// all on one support. s[0] is the symbol preceding the capture window;
/// only its tail ever reaches the measurements.
struct SymbolStream {
  SupportSet support;
  std::vector<Vec> symbols;
};

inline SymbolStream draw_symbols(const OfdmConfig& cfg, const SupportSet& support, Rng& rng) {
  for (int j : support.indices)
    if (j < 0 || j >= cfg.n_sub) throw std::invalid_argument("draw_symbols: support index out of range");
  const auto& alphabet = qam16_alphabet();
  SymbolStream stream;
  stream.support = support;
  stream.symbols.reserve(cfg.n_blocks + 1);
  for (int n = 0; n <= cfg.n_blocks; ++n) {
    Vec s = Vec::Zero(cfg.n_sub);
    for (int j : support.indices) s(j) = alphabet[rng.uniform_int(16)];
    stream.symbols.push_back(std::move(s));
  }
  return stream;
}

/// Nyquist-rate capture windows x[1..N_b], each of length N: the last d
/// samples of the previous symbol followed by the first N-d samples of
/// the current one. Noiseless; noise is a separate stage.
inline std::vector<Vec> synthesize_frames(const SymbolStream& stream, const PartitionedIdft& p) {
  const int n_blocks = static_cast<int>(stream.symbols.size()) - 1;
  if (n_blocks < 1) throw std::invalid_argument("synthesize_frames: need at least two symbols");
  if (p.full.cols() != stream.symbols[0].size())
    throw std::invalid_argument("synthesize_frames: symbol length and IDFT width disagree");
  const Eigen::Index n = p.full.rows();
  const int d = p.d;
  std::vector<Vec> frames;
  frames.reserve(n_blocks);
  for (int i = 1; i <= n_blocks; ++i) {
    Vec x(n);
    x.head(d) = p.bottom * stream.symbols[i - 1];
    x.tail(n - d) = p.top * stream.symbols[i];
    frames.push_back(std::move(x));
  }
  return frames;
}

/// Sentinel for a noiseless run.
inline constexpr double kNoiselessSnr = std::numeric_limits<double>::infinity();

/// Adds circularly-symmetric complex Gaussian noise per Nyquist sample and
/// returns its variance. SNR is defined against the average noiseless
/// per-sample power K/N_o (K unit-energy subcarriers through rows of
/// modulus 1/sqrt(N_o)), so sigma^2 = (K/N_o) / 10^(snr_db/10).
/// snr_db = +infinity leaves the frames untouched.
inline double add_noise(std::vector<Vec>& frames, const OfdmConfig& cfg, double snr_db, Rng& rng) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  if (!std::isfinite(snr_db)) throw std::invalid_argument("add_noise: snr_db must be finite or +inf");
  const double p_sig = static_cast<double>(cfg.k) / cfg.n_sub;
  const double sigma_sq = p_sig / std::pow(10.0, snr_db / 10.0);
  const double s = std::sqrt(sigma_sq / 2.0);
  for (Vec& x : frames)
    for (Eigen::Index i = 0; i < x.size(); ++i)
      x(i) += Complex(s * rng.normal(), s * rng.normal());
  return sigma_sq;
}

/// Sub-Nyquist measurements with their ground truth carried alongside.
struct CompressedStream {
  std::vector<Vec> frames;   // z[1..N_b], each of length M
  Vec stacked;               // frames concatenated in order
  double noise_power = 0.0;  // per-Nyquist-sample variance
  int true_d = 0;
  SupportSet true_support;
};

inline CompressedStream compress(const MeasurementMatrix& a, const std::vector<Vec>& frames,
                                 double noise_power, int true_d, const SupportSet& true_support) {
  if (frames.empty()) throw std::invalid_argument("compress: no frames");
  if (frames[0].size() != a.cols())
    throw std::invalid_argument("compress: frame length and measurement matrix width disagree");
  const Eigen::Index m = a.rows();
  Mat ac = a.complex();
  CompressedStream out;
  out.frames.reserve(frames.size());
  out.stacked.resize(m * static_cast<Eigen::Index>(frames.size()));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    Vec z = ac * frames[i];
    out.stacked.segment(i * m, m) = z;
    out.frames.push_back(std::move(z));
  }
  out.noise_power = noise_power;
  out.true_d = true_d;
  out.true_support = true_support;
  return out;
}

}  // namespace ofdmsense
