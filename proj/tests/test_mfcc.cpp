#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "voiceaudit/error.hpp"
#include "voiceaudit/mfcc.hpp"
#include "voiceaudit/rng.hpp"

using namespace voiceaudit;

namespace {

AudioSignal sine(double hz, int rate, std::size_t n, double amplitude = 0.5) {
  AudioSignal s;
  s.sample_rate_hz = rate;
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate);
  }
  return s;
}

AudioSignal noise(Rng& rng, int rate, std::size_t n) {
  AudioSignal s;
  s.sample_rate_hz = rate;
  s.samples.resize(n);
  for (auto& x : s.samples) x = rng.uniform(-0.5, 0.5);
  return s;
}

MfccConfig config_for(int rate) {
  MfccConfig c;
  c.fft_size = std::bit_ceil(frame_samples(c, rate));
  if (c.fft_size < 512) c.fft_size = 512;
  return c;
}

}  // namespace

TEST_CASE("fft matches a naive DFT") {
  Rng rng(1);
  for (std::size_t n : {1u, 2u, 8u, 64u, 512u}) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const auto expected = oracle::dft(x);
    auto got = x;
    dsp::fft(got);
    double scale = 0.0;
    for (const auto& v : expected) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(got[k] - expected[k]) <= 1e-6 * scale);
  }
  std::vector<std::complex<double>> bad(12);
  CHECK_THROWS_AS(dsp::fft(bad), Error);
}

TEST_CASE("power_spectrum zero-pads and keeps the non-negative bins") {
  Rng rng(2);
  std::vector<double> frame(400);
  for (auto& v : frame) v = rng.normal();
  const auto p = dsp::power_spectrum(frame, 512);
  REQUIRE(p.size() == 257);
  std::vector<std::complex<double>> padded(512);
  for (std::size_t i = 0; i < frame.size(); ++i) padded[i] = frame[i];
  const auto expected = oracle::dft(padded);
  for (std::size_t k = 0; k < p.size(); ++k) {
    CHECK(p[k] == doctest::Approx(std::norm(expected[k])).epsilon(1e-6));
  }
}

TEST_CASE("dct matrix is orthonormal") {
  for (std::size_t n : {1u, 13u, 26u, 40u}) {
    const auto m = dsp::dct_matrix(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double dot = 0.0;
        for (std::size_t k = 0; k < n; ++k) dot += m[i][k] * m[j][k];
        CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("mel scale round-trips and filters are ordered") {
  for (double hz : {0.0, 100.0, 1000.0, 4000.0, 8000.0}) {
    CHECK(dsp::mel_to_hz(dsp::hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-9));
  }
  CHECK(dsp::hz_to_mel(1000.0) == doctest::Approx(999.9855).epsilon(1e-6));
  const auto centers = dsp::mel_centers({}, 16000);
  REQUIRE(centers.size() == 26);
  CHECK(std::is_sorted(centers.begin(), centers.end()));
  CHECK(centers.back() < 8000.0);
  const auto bank = dsp::mel_filterbank({}, 16000);
  for (const auto& row : bank) {
    for (double w : row) CHECK((w >= 0.0 && w <= 1.0));
  }
}

TEST_CASE("mfcc output shape follows the framing law") {
  Rng rng(3);
  const int rates[] = {8000, 11025, 16000, 22050, 44100, 48000};
  for (int t = 0; t < 20; ++t) {
    const int rate = rates[rng.below(std::size(rates))];
    const auto cfg = config_for(rate);
    const auto frame = frame_samples(cfg, rate);
    const auto hop = hop_samples(cfg, rate);
    const std::size_t n = frame + rng.below(static_cast<std::uint64_t>(rate));
    const auto m = mfcc(noise(rng, rate, n), cfg);
    CHECK(m.size() == (n - frame) / hop + 1);
    for (const auto& row : m) CHECK(row.size() == 13);
  }
}

TEST_CASE("mfcc rejects short signals and low rates") {
  CHECK_THROWS_AS(mfcc(sine(440, 16000, 399)), Error);
  CHECK_NOTHROW(mfcc(sine(440, 16000, 400)));
  CHECK_THROWS_AS(mfcc(sine(440, 4000, 4000)), Error);
  MfccConfig too_many;
  too_many.coefficients = 30;
  CHECK_THROWS_AS(mfcc(sine(440, 16000, 1600), too_many), Error);
}

TEST_CASE("zero signal gives floored, identical frames") {
  AudioSignal s;
  s.sample_rate_hz = 16000;
  s.samples.assign(16000, 0.0);
  const auto m = mfcc(s);
  REQUIRE(m.size() == 98);
  for (const auto& row : m) CHECK(row == m.front());
  // All log energies equal log(floor): only the DC coefficient is non-zero.
  CHECK(m[0][0] == doctest::Approx(std::log(1e-10) * std::sqrt(26.0)).epsilon(1e-12));
  for (std::size_t c = 1; c < 13; ++c) CHECK(std::abs(m[0][c]) < 1e-9);
}

TEST_CASE("1 kHz tone peaks in the filter nearest 1 kHz") {
  const int rate = 16000;
  const auto s = sine(1000.0, rate, 4000);
  const MfccConfig cfg;
  const auto energies = filterbank_energies(s, cfg);

  // Oracle: pre-emphasis, window and a naive DFT on frame 3, then the bank.
  const auto frame_len = frame_samples(cfg, rate);
  const auto hop = hop_samples(cfg, rate);
  const auto window = dsp::hamming(frame_len);
  std::vector<std::complex<double>> buf(cfg.fft_size);
  const std::size_t start = 3 * hop;
  for (std::size_t i = 0; i < frame_len; ++i) {
    const auto n = start + i;
    buf[i] = (s.samples[n] - cfg.pre_emphasis * s.samples[n - 1]) * window[i];
  }
  const auto spectrum = oracle::dft(buf);
  const auto bank = dsp::mel_filterbank(cfg, rate);
  std::vector<double> expected(cfg.mel_filters, 0.0);
  for (std::size_t m = 0; m < cfg.mel_filters; ++m) {
    for (std::size_t k = 0; k <= cfg.fft_size / 2; ++k) expected[m] += bank[m][k] * std::norm(spectrum[k]);
  }
  for (std::size_t m = 0; m < cfg.mel_filters; ++m) {
    CHECK(energies[3][m] == doctest::Approx(expected[m]).epsilon(1e-6));
  }

  const auto centers = dsp::mel_centers(cfg, rate);
  std::size_t nearest = 0;
  for (std::size_t m = 1; m < centers.size(); ++m) {
    if (std::abs(centers[m] - 1000.0) < std::abs(centers[nearest] - 1000.0)) nearest = m;
  }
  const auto oracle_peak = std::max_element(expected.begin(), expected.end()) - expected.begin();
  CHECK(static_cast<std::size_t>(oracle_peak) == nearest);
  for (const auto& row : energies) {
    CHECK(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()) ==
          nearest);
  }
}

TEST_CASE("scaling the signal scales filterbank energies by alpha squared") {
  Rng rng(8);
  const auto base = noise(rng, 16000, 8000);
  for (double alpha : {0.1, 0.5, 1.7}) {
    auto scaled = base;
    for (auto& x : scaled.samples) x *= alpha;
    const auto e0 = filterbank_energies(base, {});
    const auto e1 = filterbank_energies(scaled, {});
    for (std::size_t t = 0; t < e0.size(); ++t) {
      for (std::size_t m = 0; m < e0[t].size(); ++m) {
        CHECK(e1[t][m] == doctest::Approx(alpha * alpha * e0[t][m]).epsilon(1e-6));
      }
    }
    // Above the log floor only coefficient 0 moves, by sqrt(26) * log(alpha^2).
    const auto c0 = mfcc(base);
    const auto c1 = mfcc(scaled);
    CHECK(c1[5][0] - c0[5][0] == doctest::Approx(std::sqrt(26.0) * std::log(alpha * alpha)).epsilon(1e-6));
    for (std::size_t c = 1; c < 13; ++c) CHECK(c1[5][c] == doctest::Approx(c0[5][c]).epsilon(1e-6));
  }
}

TEST_CASE("user_mfcc_means") {
  const Matrix one = {{1, 2, 3}};
  CHECK(user_mfcc_means(std::vector<Matrix>{one}) == std::vector<double>{1, 2, 3});
  CHECK(user_mfcc_means(std::vector<Matrix>{one, one}) == std::vector<double>{1, 2, 3});
  const Matrix two = {{1, 2, 3}, {3, 6, -3}};
  CHECK(user_mfcc_means(std::vector<Matrix>{two}) == std::vector<double>{2, 4, 0});
  // Frames are pooled, so a longer record weighs more.
  CHECK(user_mfcc_means(std::vector<Matrix>{one, two}) ==
        std::vector<double>{5.0 / 3.0, 10.0 / 3.0, 1.0});
  CHECK_THROWS_AS(user_mfcc_means(std::vector<Matrix>{}), Error);
}
