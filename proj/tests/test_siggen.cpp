#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "ofdmsense/siggen.hpp"

using namespace ofdmsense;

TEST_CASE("constellation has unit mean energy") {
  const auto& pts = qam16_alphabet();
  double mean = 0.0, min_sq = 1e9;
  std::set<std::pair<double, double>> distinct;
  for (const Complex& s : pts) {
    double e = std::norm(s);
    mean += e;
    min_sq = std::min(min_sq, e);
    distinct.insert({s.real(), s.imag()});
  }
  mean /= 16.0;
  CHECK(mean == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(min_sq == Catch::Approx(0.2).epsilon(1e-14));
  CHECK(distinct.size() == 16);
}

TEST_CASE("support draws are uniform over subcarriers") {
  OfdmConfig full(8, 2, 8, 10, 2);
  Rng rng(1);
  CHECK(draw_support(full, rng) == SupportSet::all(8));

  OfdmConfig one(32, 8, 1, 20, 2);
  int counts[32] = {0};
  Rng rng2(2);
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    SupportSet s = draw_support(one, rng2);
    REQUIRE(s.size() == 1);
    ++counts[s.indices[0]];
  }
  // expected 312.5 per bin, 5 sigma of a binomial ~ 87
  for (int c : counts) CHECK(std::abs(c - 312) < 90);

  OfdmConfig three(32, 8, 3, 20, 2);
  Rng rng3(3);
  for (int t = 0; t < 100; ++t) {
    SupportSet s = draw_support(three, rng3);
    REQUIRE(s.size() == 3);
    REQUIRE(s.indices.back() < 32);
  }
}

TEST_CASE("symbol streams live on the declared support") {
  OfdmConfig cfg(32, 8, 3, 20, 10);
  SupportSet sup({2, 17, 30});
  Rng rng(5);
  SymbolStream st = draw_symbols(cfg, sup, rng);
  REQUIRE(st.symbols.size() == 11);
  const auto& alphabet = qam16_alphabet();
  for (const Vec& s : st.symbols) {
    REQUIRE(s.size() == 32);
    for (int j = 0; j < 32; ++j) {
      if (sup.contains(j)) {
        bool member = false;
        for (const Complex& a : alphabet)
          if (std::abs(s(j) - a) < 1e-15) member = true;
        REQUIRE(member);
      } else {
        REQUIRE(s(j) == Complex(0, 0));
      }
    }
  }

  // second moment of the active entries converges to 1
  double acc = 0.0;
  long n = 0;
  Rng rng2(6);
  for (int t = 0; t < 3000; ++t) {
    SymbolStream str = draw_symbols(cfg, sup, rng2);
    for (const Vec& s : str.symbols)
      for (int j : sup.indices) {
        acc += std::norm(s(j));
        ++n;
      }
  }
  CHECK(acc / n == Catch::Approx(1.0).margin(0.02));

  CHECK_THROWS_AS(draw_symbols(cfg, SupportSet({31, 32}), rng), std::invalid_argument);
}

TEST_CASE("zero offset frames are plain extended-idft images") {
  OfdmConfig cfg(16, 4, 2, 10, 3);
  Mat ft = extended_idft(cfg);
  Rng rng(7);
  SymbolStream st = draw_symbols(cfg, draw_support(cfg, rng), rng);
  auto frames = synthesize_frames(st, partition_idft(ft, 0));
  REQUIRE(frames.size() == 3);
  for (int i = 1; i <= 3; ++i)
    CHECK((frames[i - 1] - ft * st.symbols[i]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("frames slide over the concatenated nyquist stream") {
  // oracle: run the transmitter at the nyquist rate, then cut windows d
  // samples early
  OfdmConfig cfg(16, 4, 3, 10, 4);
  const int n = cfg.n_total;
  Mat ft = extended_idft(cfg);
  Rng rng(11);
  SymbolStream st = draw_symbols(cfg, draw_support(cfg, rng), rng);
  Vec y(static_cast<Eigen::Index>(n) * (cfg.n_blocks + 1));
  for (int i = 0; i <= cfg.n_blocks; ++i) y.segment(i * n, n) = ft * st.symbols[i];
  for (int d : {1, 5, 11, n - 1}) {
    auto frames = synthesize_frames(st, partition_idft(ft, d));
    for (int i = 1; i <= cfg.n_blocks; ++i) {
      Vec window = y.segment(static_cast<Eigen::Index>(i) * n - d, n);
      REQUIRE((frames[i - 1] - window).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("frame energy concentrates at k scaled by the prefix overhead") {
  OfdmConfig cfg(32, 8, 3, 20, 1);
  Mat ft = extended_idft(cfg);
  PartitionedIdft part = partition_idft(ft, 13);
  Rng rng(13);
  double acc = 0.0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    SymbolStream st = draw_symbols(cfg, draw_support(cfg, rng), rng);
    auto frames = synthesize_frames(st, part);
    acc += frames[0].squaredNorm();
  }
  double expect = cfg.k * static_cast<double>(cfg.n_total) / cfg.n_sub;
  CHECK(acc / trials == Catch::Approx(expect).epsilon(0.03));
}

TEST_CASE("synthesis rejects malformed streams") {
  OfdmConfig cfg(16, 4, 2, 10, 3);
  Mat ft = extended_idft(cfg);
  SymbolStream single;
  single.symbols.push_back(Vec::Zero(16));
  CHECK_THROWS_AS(synthesize_frames(single, partition_idft(ft, 3)), std::invalid_argument);
  SymbolStream wrong;
  wrong.symbols.push_back(Vec::Zero(8));
  wrong.symbols.push_back(Vec::Zero(8));
  CHECK_THROWS_AS(synthesize_frames(wrong, partition_idft(ft, 3)), std::invalid_argument);
}

TEST_CASE("infinite snr is a strict no-op") {
  OfdmConfig cfg(16, 4, 2, 10, 3);
  std::vector<Vec> frames;
  Rng fill(17);
  for (int i = 0; i < 3; ++i) {
    Vec v(20);
    for (int t = 0; t < 20; ++t) v(t) = Complex(fill.normal(), fill.normal());
    frames.push_back(v);
  }
  auto copy = frames;
  Rng rng(19), twin(19);
  CHECK(add_noise(frames, cfg, kNoiselessSnr, rng) == 0.0);
  for (int i = 0; i < 3; ++i) CHECK((frames[i] - copy[i]).cwiseAbs().maxCoeff() == 0.0);
  // the rng must not have been consumed
  CHECK(rng.next() == twin.next());

  CHECK_THROWS_AS(add_noise(frames, cfg, -kNoiselessSnr, rng), std::invalid_argument);
  CHECK_THROWS_AS(add_noise(frames, cfg, std::nan(""), rng), std::invalid_argument);
}

TEST_CASE("noise variance tracks the snr definition") {
  // all subcarriers active: signal power 1 per sample, so 0 dB means
  // unit noise variance
  OfdmConfig cfg(8, 2, 8, 10, 2);
  std::vector<Vec> frames(5000, Vec::Zero(10));
  Rng rng(23);
  double sigma_sq = add_noise(frames, cfg, 0.0, rng);
  CHECK(sigma_sq == Catch::Approx(1.0).epsilon(1e-14));
  double acc = 0.0;
  for (const Vec& f : frames) acc += f.squaredNorm();
  acc /= 5000.0 * 10.0;
  CHECK(acc == Catch::Approx(1.0).margin(0.03));

  OfdmConfig sparse(32, 8, 3, 20, 2);
  std::vector<Vec> frames2(5000, Vec::Zero(40));
  Rng rng2(29);
  double s2 = add_noise(frames2, sparse, 5.0, rng2);
  CHECK(s2 == Catch::Approx((3.0 / 32.0) * std::pow(10.0, -0.5)).epsilon(1e-12));
  double acc2 = 0.0;
  for (const Vec& f : frames2) acc2 += f.squaredNorm();
  acc2 /= 5000.0 * 40.0;
  double snr_hat = 10.0 * std::log10((3.0 / 32.0) / acc2);
  CHECK(snr_hat == Catch::Approx(5.0).margin(0.2));
}

TEST_CASE("compression matches the two-factor model") {
  OfdmConfig cfg(32, 8, 3, 20, 10);
  Rng rng(31);
  MeasurementMatrix a = sample_measurement_matrix(cfg, rng);
  Mat ft = extended_idft(cfg);
  const int d = 17;
  PartitionedIdft part = partition_idft(ft, d);
  SupportSet sup = draw_support(cfg, rng);
  SymbolStream st = draw_symbols(cfg, sup, rng);
  auto frames = synthesize_frames(st, part);
  CompressedStream z = compress(a, frames, 0.0, d, sup);

  REQUIRE(z.frames.size() == 10);
  REQUIRE(z.stacked.size() == 200);
  CHECK(z.true_d == d);
  CHECK(z.true_support == sup);
  for (int i = 0; i < 10; ++i)
    CHECK((z.stacked.segment(i * 20, 20) - z.frames[i]).cwiseAbs().maxCoeff() == 0.0);

  BlockDictionary dict = dictionary_pair(a, part);
  for (int n = 1; n <= 10; ++n) {
    Vec want = dict.b1 * st.symbols[n - 1] + dict.b2 * st.symbols[n];
    CHECK((z.frames[n - 1] - want).cwiseAbs().maxCoeff() < 1e-10);
  }

  std::vector<Vec> zero(3, Vec::Zero(40));
  CompressedStream znull = compress(a, zero, 0.0, 0, sup);
  CHECK(znull.stacked.cwiseAbs().maxCoeff() == 0.0);

  std::vector<Vec> empty;
  CHECK_THROWS_AS(compress(a, empty, 0.0, 0, sup), std::invalid_argument);
  std::vector<Vec> short_frames(2, Vec::Zero(39));
  CHECK_THROWS_AS(compress(a, short_frames, 0.0, 0, sup), std::invalid_argument);
}

TEST_CASE("pipeline is reproducible from the seed") {
  OfdmConfig cfg(32, 8, 3, 20, 10);
  auto run = [&](std::uint64_t seed) {
    Rng rng(seed);
    MeasurementMatrix a = sample_measurement_matrix(cfg, rng);
    int d = rng.uniform_int(cfg.n_total);
    PartitionedIdft part = partition_idft(extended_idft(cfg), d);
    SupportSet sup = draw_support(cfg, rng);
    SymbolStream st = draw_symbols(cfg, sup, rng);
    auto frames = synthesize_frames(st, part);
    double np = add_noise(frames, cfg, -5.0, rng);
    return compress(a, frames, np, d, sup);
  };
  CompressedStream z1 = run(424242), z2 = run(424242), z3 = run(424243);
  CHECK((z1.stacked - z2.stacked).cwiseAbs().maxCoeff() == 0.0);
  CHECK(z1.true_d == z2.true_d);
  CHECK(z1.true_support == z2.true_support);
  CHECK((z1.stacked - z3.stacked).cwiseAbs().maxCoeff() > 0.0);
}
