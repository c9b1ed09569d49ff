#include "voiceaudit/mfcc.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "voiceaudit/error.hpp"

namespace voiceaudit {

namespace dsp {

void fft(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  if (n == 0 || !std::has_single_bit(n)) throw Error("fft size must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> step(std::cos(angle), std::sin(angle));
    for (std::size_t start = 0; start < n; start += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto even = data[start + k];
        const auto odd = data[start + k + len / 2] * w;
        data[start + k] = even + odd;
        data[start + k + len / 2] = even - odd;
        w *= step;
      }
    }
  }
}

std::vector<double> power_spectrum(std::span<const double> frame, std::size_t fft_size) {
  if (frame.size() > fft_size) throw Error("frame longer than fft_size");
  std::vector<std::complex<double>> buf(fft_size);
  for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i];
  fft(buf);
  std::vector<double> power(fft_size / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(buf[k]);
  return power;
}

std::vector<double> mel_centers(const MfccConfig& config, int sample_rate_hz) {
  const double top = hz_to_mel(sample_rate_hz / 2.0);
  std::vector<double> centers(config.mel_filters);
  for (std::size_t m = 0; m < config.mel_filters; ++m) {
    centers[m] = mel_to_hz(top * static_cast<double>(m + 1) /
                           static_cast<double>(config.mel_filters + 1));
  }
  return centers;
}

Matrix mel_filterbank(const MfccConfig& config, int sample_rate_hz) {
  const std::size_t bins = config.fft_size / 2 + 1;
  const double top = hz_to_mel(sample_rate_hz / 2.0);
  std::vector<double> edges(config.mel_filters + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(config.mel_filters + 1));
  }
  Matrix bank(config.mel_filters, std::vector<double>(bins, 0.0));
  for (std::size_t m = 0; m < config.mel_filters; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate_hz / static_cast<double>(config.fft_size);
      if (f > lo && f < hi) {
        bank[m][k] = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
      }
    }
  }
  return bank;
}

Matrix dct_matrix(std::size_t size) {
  Matrix m(size, std::vector<double>(size));
  const double n = static_cast<double>(size);
  for (std::size_t k = 0; k < size; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (std::size_t i = 0; i < size; ++i) {
      m[k][i] = scale * std::cos(std::numbers::pi * static_cast<double>(k) *
                                 (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n));
    }
  }
  return m;
}

std::vector<double> hamming(std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (length < 2) return w;
  for (std::size_t i = 0; i < length; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(length - 1));
  }
  return w;
}

}  // namespace dsp

std::size_t frame_samples(const MfccConfig& config, int sample_rate_hz) {
  return static_cast<std::size_t>(std::lround(config.frame_ms * sample_rate_hz / 1000.0));
}

std::size_t hop_samples(const MfccConfig& config, int sample_rate_hz) {
  return static_cast<std::size_t>(std::lround(config.hop_ms * sample_rate_hz / 1000.0));
}

std::size_t frame_count(std::size_t signal_length, const MfccConfig& config, int sample_rate_hz) {
  const auto frame = frame_samples(config, sample_rate_hz);
  const auto hop = hop_samples(config, sample_rate_hz);
  if (signal_length < frame || hop == 0) return 0;
  return (signal_length - frame) / hop + 1;
}

namespace {

void check(const AudioSignal& signal, const MfccConfig& config) {
  if (signal.sample_rate_hz < 8000) throw Error("mfcc: sample rate below 8000 Hz");
  if (config.coefficients == 0 || config.coefficients > config.mel_filters) {
    throw Error("mfcc: coefficients must be in [1, mel_filters]");
  }
  const auto frame = frame_samples(config, signal.sample_rate_hz);
  if (frame == 0 || hop_samples(config, signal.sample_rate_hz) == 0) {
    throw Error("mfcc: frame and hop must span at least one sample");
  }
  if (config.fft_size < frame) throw Error("mfcc: fft_size smaller than a frame");
  if (signal.samples.size() < frame) throw Error("mfcc: signal shorter than one frame");
}

}  // namespace

Matrix filterbank_energies(const AudioSignal& signal, const MfccConfig& config) {
  check(signal, config);
  const int rate = signal.sample_rate_hz;
  const auto frame_len = frame_samples(config, rate);
  const auto hop = hop_samples(config, rate);
  const auto frames = frame_count(signal.samples.size(), config, rate);

  const auto& x = signal.samples;
  std::vector<double> emphasized(x.size());
  emphasized[0] = x[0];
  for (std::size_t n = 1; n < x.size(); ++n) emphasized[n] = x[n] - config.pre_emphasis * x[n - 1];

  const auto window = dsp::hamming(frame_len);
  const auto bank = dsp::mel_filterbank(config, rate);

  Matrix energies(frames, std::vector<double>(config.mel_filters, 0.0));
  std::vector<double> frame(frame_len);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t i = 0; i < frame_len; ++i) frame[i] = emphasized[t * hop + i] * window[i];
    const auto power = dsp::power_spectrum(frame, config.fft_size);
    for (std::size_t m = 0; m < config.mel_filters; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < power.size(); ++k) e += bank[m][k] * power[k];
      energies[t][m] = e;
    }
  }
  return energies;
}

Matrix mfcc(const AudioSignal& signal, const MfccConfig& config) {
  const auto energies = filterbank_energies(signal, config);
  const auto dct = dsp::dct_matrix(config.mel_filters);
  Matrix out(energies.size(), std::vector<double>(config.coefficients, 0.0));
  std::vector<double> logs(config.mel_filters);
  for (std::size_t t = 0; t < energies.size(); ++t) {
    for (std::size_t m = 0; m < config.mel_filters; ++m) {
      logs[m] = std::log(std::max(energies[t][m], config.log_floor));
    }
    for (std::size_t c = 0; c < config.coefficients; ++c) {
      double acc = 0.0;
      for (std::size_t m = 0; m < config.mel_filters; ++m) acc += dct[c][m] * logs[m];
      out[t][c] = acc;
    }
  }
  return out;
}

std::vector<double> user_mfcc_means(std::span<const Matrix> per_record) {
  std::vector<double> sum;
  std::size_t frames = 0;
  for (const auto& m : per_record) {
    for (const auto& row : m) {
      if (sum.empty()) sum.assign(row.size(), 0.0);
      if (row.size() != sum.size()) throw DimensionError("user_mfcc_means: ragged matrices");
      for (std::size_t c = 0; c < row.size(); ++c) sum[c] += row[c];
      ++frames;
    }
  }
  if (frames == 0) throw Error("user_mfcc_means: no frames");
  for (auto& s : sum) s /= static_cast<double>(frames);
  return sum;
}

}  // namespace voiceaudit
