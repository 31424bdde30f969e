#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace ofdmsense {

/// Scalar dimensions of one sensing setup.
///
/// n_sub     subcarrier count (IFFT size)
/// n_cp      cyclic prefix length in samples
/// n_total   Nyquist samples per OFDM symbol, n_sub + n_cp
/// k         number of active subcarriers
/// m         compressive measurements per symbol
/// n_blocks  number of captured OFDM symbols
struct OfdmConfig {
  int n_sub = 0;
  int n_cp = 0;
  int n_total = 0;
  int k = 0;
  int m = 0;
  int n_blocks = 0;

  OfdmConfig() = default;

  OfdmConfig(int n_sub_, int n_cp_, int k_, int m_, int n_blocks_)
      : n_sub(n_sub_), n_cp(n_cp_), n_total(n_sub_ + n_cp_), k(k_), m(m_), n_blocks(n_blocks_) {
    if (n_sub < 1) throw std::invalid_argument("OfdmConfig: n_sub must be >= 1");
    if (n_cp < 0) throw std::invalid_argument("OfdmConfig: n_cp must be >= 0");
    if (k < 1) throw std::invalid_argument("OfdmConfig: k must be >= 1");
    if (n_blocks < 1) throw std::invalid_argument("OfdmConfig: n_blocks must be >= 1");
    if (k > m)
      throw std::invalid_argument("OfdmConfig: need k <= m (sparsity cannot exceed measurement count)");
    if (m > n_total)
      throw std::invalid_argument("OfdmConfig: need m <= n_total");
  }

  /// m large enough for the restricted dictionary to be full column rank
  /// at admissible offsets: m >= (n_blocks+1)*k / n_blocks.
  bool meets_rank_guarantee() const {
    return static_cast<long>(m) * n_blocks >= static_cast<long>(n_blocks + 1) * k;
  }
};

/// Set of active subcarrier indices. Stored 0-based and strictly
/// increasing; rendered 1-based wherever sets are printed or serialized.
struct SupportSet {
  std::vector<int> indices;

  SupportSet() = default;

  explicit SupportSet(std::vector<int> idx) : indices(std::move(idx)) {
    std::sort(indices.begin(), indices.end());
    for (std::size_t i = 0; i + 1 < indices.size(); ++i)
      if (indices[i] == indices[i + 1])
        throw std::invalid_argument("SupportSet: duplicate index");
    if (!indices.empty() && indices.front() < 0)
      throw std::invalid_argument("SupportSet: negative index");
  }

  int size() const { return static_cast<int>(indices.size()); }
  bool empty() const { return indices.empty(); }

  bool contains(int j) const {
    return std::binary_search(indices.begin(), indices.end(), j);
  }

  bool operator==(const SupportSet& o) const { return indices == o.indices; }
  bool operator!=(const SupportSet& o) const { return indices != o.indices; }

  int overlap(const SupportSet& o) const {
    int n = 0;
    for (int j : indices) n += o.contains(j) ? 1 : 0;
    return n;
  }

  /// Full set {0, .., n-1}.
  static SupportSet all(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    return SupportSet(std::move(idx));
  }

  /// 1-based rendering, e.g. "3;17;29". Empty set renders as "-".
  std::string to_string() const {
    if (indices.empty()) return "-";
    std::string s;
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (i) s += ';';
      s += std::to_string(indices[i] + 1);
    }
    return s;
  }
};

}  // namespace ofdmsense
