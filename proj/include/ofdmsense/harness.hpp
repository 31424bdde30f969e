#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "recovery.hpp"
#include "rng.hpp"
#include "siggen.hpp"

namespace ofdmsense {

enum class Mode { known_offset, unknown_offset };

inline const char* mode_name(Mode m) {
  return m == Mode::known_offset ? "known_offset" : "unknown_offset";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "known_offset" || s == "known") return Mode::known_offset;
  if (s == "unknown_offset" || s == "unknown") return Mode::unknown_offset;
  throw std::invalid_argument("mode must be known_offset or unknown_offset, got '" + s + "'");
}

/// Experiment grid: the cross product of compression ratios, sparsity
/// levels, block counts, and SNR points, each cell run `trials` times.
struct SweepConfig {
  int n_sub = 32;
  int n_cp = 8;
  std::vector<double> compression_ratios;  // M = round(ratio * N), ratio in (0, 1]
  std::vector<int> k_values;
  std::vector<int> n_blocks_values;
  std::vector<double> snr_grid_db;
  int trials = 1000;
  std::uint64_t seed = 0;
  Mode mode = Mode::unknown_offset;
  int max_sweeps = 3;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  int true_d = 0;
  int d_est = 0;
  SupportSet true_support;
  SupportSet support_est;
  int hits = 0;  // |true ∩ estimated|
  bool offset_exact = false;
};

struct MetricsRow {
  double snr_db = 0.0;
  int k = 0;
  int n_blocks = 0;
  int m = 0;
  long trials = 0;
  double p_offset = 0.0;
  double p_active = 0.0;
  double ci95_offset = 0.0;
  double ci95_active = 0.0;
};

/// One fully seeded trial: fresh measurement matrix, uniform offset,
/// random support/symbols/noise, then recovery in the requested mode.
/// The draw order is part of the reproducibility contract.
inline TrialRecord run_trial(const OfdmConfig& cfg, double snr_db, Mode mode,
                             std::uint64_t trial_seed, int max_sweeps = 3) {
  Rng rng(trial_seed);
  MeasurementMatrix a = sample_measurement_matrix(cfg, rng);
  const int d = rng.uniform_int(cfg.n_total);
  SupportSet support = draw_support(cfg, rng);
  SymbolStream stream = draw_symbols(cfg, support, rng);
  PartitionedIdft part = partition_idft(extended_idft(cfg), d);
  std::vector<Vec> frames = synthesize_frames(stream, part);
  double noise_power = add_noise(frames, cfg, snr_db, rng);
  CompressedStream z = compress(a, frames, noise_power, d, support);

  RecoveryResult rr = mode == Mode::known_offset
                          ? recover_known_offset(z, a, d, cfg)
                          : estimate_offset_and_support(z, a, cfg, max_sweeps);
  TrialRecord tr;
  tr.seed = trial_seed;
  tr.true_d = d;
  tr.d_est = rr.d_est.value_or(d);  // a given offset counts as exact
  tr.true_support = support;
  tr.support_est = rr.support_est;
  tr.hits = support.overlap(rr.support_est);
  tr.offset_exact = tr.d_est == d;
  return tr;
}

namespace detail {

struct SweepCell {
  OfdmConfig cfg;
  double snr_db = 0.0;
  std::uint64_t index = 0;  // position in sorted row order, seeds derive from it
};

inline std::vector<SweepCell> plan_cells(const SweepConfig& sc) {
  if (sc.trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
  if (sc.max_sweeps < 1) throw std::invalid_argument("sweep: max_sweeps must be >= 1");
  if (sc.compression_ratios.empty() || sc.k_values.empty() || sc.n_blocks_values.empty() ||
      sc.snr_grid_db.empty())
    throw std::invalid_argument("sweep: every grid axis needs at least one value");
  std::vector<SweepCell> cells;
  for (double ratio : sc.compression_ratios) {
    if (!(ratio > 0.0) || ratio > 1.0)
      throw std::invalid_argument("sweep: compression ratio must lie in (0, 1]");
    const int m = static_cast<int>(std::lround(ratio * (sc.n_sub + sc.n_cp)));
    for (int k : sc.k_values)
      for (int n_blocks : sc.n_blocks_values)
        for (double snr : sc.snr_grid_db) {
          try {
            cells.push_back({OfdmConfig(sc.n_sub, sc.n_cp, k, m, n_blocks), snr, 0});
          } catch (const std::exception& e) {
            std::ostringstream os;
            os << "sweep: invalid cell (ratio " << ratio << ", k " << k << ", n_blocks "
               << n_blocks << "): " << e.what();
            throw std::invalid_argument(os.str());
          }
        }
  }
  std::stable_sort(cells.begin(), cells.end(), [](const SweepCell& a, const SweepCell& b) {
    return std::tuple(a.cfg.k, a.cfg.n_blocks, a.cfg.m, a.snr_db) <
           std::tuple(b.cfg.k, b.cfg.n_blocks, b.cfg.m, b.snr_db);
  });
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i].index = i;
  return cells;
}

}  // namespace detail

/// Runs the whole grid. Trials are distributed over `workers` threads by
/// index stride and every trial is seeded from (config seed, cell index,
/// trial index), so the aggregate is identical for any worker count.
inline std::vector<MetricsRow> run_sweep(const SweepConfig& sc, int workers = 1) {
  std::vector<detail::SweepCell> cells = detail::plan_cells(sc);
  workers = std::max(1, std::min(workers, sc.trials));
  std::vector<MetricsRow> rows;
  rows.reserve(cells.size());

  for (const auto& cell : cells) {
    std::vector<TrialRecord> recs(sc.trials);
    auto work = [&](int first) {
      for (int t = first; t < sc.trials; t += workers)
        recs[t] = run_trial(cell.cfg, cell.snr_db, sc.mode,
                            derive_seed(sc.seed, cell.index, static_cast<std::uint64_t>(t)),
                            sc.max_sweeps);
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(workers);
      for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
          try {
            work(w);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      for (auto& th : pool) th.join();
      for (auto& err : errors)
        if (err) std::rethrow_exception(err);
    }

    long exact_offsets = 0, total_hits = 0;
    for (const TrialRecord& tr : recs) {
      exact_offsets += tr.offset_exact ? 1 : 0;
      total_hits += tr.hits;
    }
    MetricsRow row;
    row.snr_db = cell.snr_db;
    row.k = cell.cfg.k;
    row.n_blocks = cell.cfg.n_blocks;
    row.m = cell.cfg.m;
    row.trials = sc.trials;
    row.p_offset = static_cast<double>(exact_offsets) / sc.trials;
    row.p_active = static_cast<double>(total_hits) / (static_cast<double>(cell.cfg.k) * sc.trials);
    auto half_width = [](double p, double n) { return 1.96 * std::sqrt(p * (1.0 - p) / n); };
    row.ci95_offset = half_width(row.p_offset, static_cast<double>(sc.trials));
    row.ci95_active = half_width(row.p_active, static_cast<double>(cell.cfg.k) * sc.trials);
    rows.push_back(row);
  }
  return rows;
}

inline constexpr const char* kMetricsCsvHeader =
    "snr_db,k,n_blocks,m,trials,p_offset,ci95_offset,p_active,ci95_active";

namespace detail {

/// Shortest representation that round-trips; locale-independent.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("metrics CSV: bad number '" + s + "'");
  return v;
}

inline long parse_long(const std::string& s) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("metrics CSV: bad integer '" + s + "'");
  return v;
}

}  // namespace detail

inline std::string metrics_csv_string(const std::vector<MetricsRow>& rows) {
  std::string out = kMetricsCsvHeader;
  out += '\n';
  for (const MetricsRow& r : rows) {
    out += detail::format_double(r.snr_db);
    out += ',';
    out += std::to_string(r.k);
    out += ',';
    out += std::to_string(r.n_blocks);
    out += ',';
    out += std::to_string(r.m);
    out += ',';
    out += std::to_string(r.trials);
    out += ',';
    out += detail::format_double(r.p_offset);
    out += ',';
    out += detail::format_double(r.ci95_offset);
    out += ',';
    out += detail::format_double(r.p_active);
    out += ',';
    out += detail::format_double(r.ci95_active);
    out += '\n';
  }
  return out;
}

inline std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsCsvHeader)
    throw std::invalid_argument("metrics CSV: missing or unexpected header");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 9) throw std::invalid_argument("metrics CSV: wrong field count");
    MetricsRow r;
    r.snr_db = detail::parse_double(fields[0]);
    r.k = static_cast<int>(detail::parse_long(fields[1]));
    r.n_blocks = static_cast<int>(detail::parse_long(fields[2]));
    r.m = static_cast<int>(detail::parse_long(fields[3]));
    r.trials = detail::parse_long(fields[4]);
    r.p_offset = detail::parse_double(fields[5]);
    r.ci95_offset = detail::parse_double(fields[6]);
    r.p_active = detail::parse_double(fields[7]);
    r.ci95_active = detail::parse_double(fields[8]);
    rows.push_back(r);
  }
  return rows;
}

inline void emit_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("emit_csv: no rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open '" + path + "'");
  out << metrics_csv_string(rows);
  if (!out) throw std::runtime_error("emit_csv: write failed for '" + path + "'");
}

/// Standalone plotting script with the data embedded: no files to ship
/// alongside, reruns never drift from the sweep that produced it.
inline void emit_plot_script(const std::vector<MetricsRow>& rows, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("emit_plot_script: no rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_plot_script: cannot open '" + path + "'");
  out << "#!/usr/bin/env python3\n"
      << "\"\"\"Detection-probability curves for one sweep; data embedded below.\"\"\"\n"
      << "import csv, io, os, sys\n"
      << "from collections import defaultdict\n\n"
      << "DATA = \"\"\"\\\n"
      << metrics_csv_string(rows) << "\"\"\"\n\n"
      << "def main():\n"
      << "    try:\n"
      << "        import matplotlib\n"
      << "        matplotlib.use(\"Agg\")\n"
      << "        import matplotlib.pyplot as plt\n"
      << "    except ImportError:\n"
      << "        sys.exit(\"matplotlib is required to draw the curves\")\n"
      << "    rows = list(csv.DictReader(io.StringIO(DATA)))\n"
      << "    groups = defaultdict(list)\n"
      << "    for r in rows:\n"
      << "        groups[(int(r[\"k\"]), int(r[\"n_blocks\"]), int(r[\"m\"]))].append(r)\n"
      << "    stem = os.path.splitext(os.path.abspath(__file__))[0]\n"
      << "    for field, ci, title, suffix in [\n"
      << "        (\"p_offset\", \"ci95_offset\", \"timing offset recovered exactly\", \"offset\"),\n"
      << "        (\"p_active\", \"ci95_active\", \"active subcarriers identified\", \"active\"),\n"
      << "    ]:\n"
      << "        fig, ax = plt.subplots(figsize=(7, 4.5))\n"
      << "        for key in sorted(groups):\n"
      << "            pts = sorted(groups[key], key=lambda r: float(r[\"snr_db\"]))\n"
      << "            snr = [float(r[\"snr_db\"]) for r in pts]\n"
      << "            p = [float(r[field]) for r in pts]\n"
      << "            err = [float(r[ci]) for r in pts]\n"
      << "            ax.errorbar(snr, p, yerr=err, marker=\"o\", capsize=3,\n"
      << "                        label=f\"K={key[0]}, Nb={key[1]}, M={key[2]}\")\n"
      << "        ax.set_xlabel(\"SNR (dB)\")\n"
      << "        ax.set_ylabel(\"probability\")\n"
      << "        ax.set_title(title)\n"
      << "        ax.set_ylim(-0.02, 1.02)\n"
      << "        ax.grid(True, alpha=0.3)\n"
      << "        ax.legend()\n"
      << "        fig.tight_layout()\n"
      << "        out = f\"{stem}_{suffix}.png\"\n"
      << "        fig.savefig(out, dpi=150)\n"
      << "        print(\"wrote\", out)\n\n"
      << "if __name__ == \"__main__\":\n"
      << "    main()\n";
  if (!out) throw std::runtime_error("emit_plot_script: write failed for '" + path + "'");
}

inline constexpr const char* kTrialCsvHeader =
    "seed,true_d,d_est,true_support,support_est,hits,offset_exact";

inline std::string trial_csv_line(const TrialRecord& tr) {
  std::string out = std::to_string(tr.seed);
  out += ',';
  out += std::to_string(tr.true_d);
  out += ',';
  out += std::to_string(tr.d_est);
  out += ',';
  out += tr.true_support.to_string();
  out += ',';
  out += tr.support_est.to_string();
  out += ',';
  out += std::to_string(tr.hits);
  out += ',';
  out += tr.offset_exact ? '1' : '0';
  return out;
}

/// Reads a sweep description from JSON mirroring SweepConfig field for
/// field. Unknown keys are rejected rather than ignored: a typo must not
/// silently fall back to a default.
inline SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config: " + std::string(e.what()));
  }
  if (!j.is_object()) throw std::runtime_error("config: top level must be an object");
  static const char* known[] = {"n_sub",       "n_cp",  "compression_ratios", "k_values",
                                "n_blocks_values", "snr_grid_db", "trials", "seed",
                                "mode",        "max_sweeps"};
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* key : known) ok = ok || item.key() == key;
    if (!ok) throw std::runtime_error("config: unknown key '" + item.key() + "'");
  }
  SweepConfig sc;
  try {
    sc.n_sub = j.at("n_sub").get<int>();
    sc.n_cp = j.at("n_cp").get<int>();
    sc.compression_ratios = j.at("compression_ratios").get<std::vector<double>>();
    sc.k_values = j.at("k_values").get<std::vector<int>>();
    sc.n_blocks_values = j.at("n_blocks_values").get<std::vector<int>>();
    sc.snr_grid_db = j.at("snr_grid_db").get<std::vector<double>>();
    sc.trials = j.at("trials").get<int>();
    sc.seed = j.at("seed").get<std::uint64_t>();
    sc.mode = parse_mode(j.at("mode").get<std::string>());
    sc.max_sweeps = j.at("max_sweeps").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config: " + std::string(e.what()));
  }
  return sc;
}

}  // namespace ofdmsense
