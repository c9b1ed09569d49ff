#pragma once

// MFCC extraction: pre-emphasis, framing, Hamming window, power spectrum,
// triangular mel filterbank, log, orthonormal DCT-II.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "voiceaudit/corpus.hpp"

namespace voiceaudit {

using Matrix = std::vector<std::vector<double>>;

struct MfccConfig {
  double pre_emphasis = 0.97;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  std::size_t fft_size = 512;
  std::size_t mel_filters = 26;
  std::size_t coefficients = 13;
  double log_floor = 1e-10;
};

/// Frame and hop lengths in samples for a given sample rate.
std::size_t frame_samples(const MfccConfig& config, int sample_rate_hz);
std::size_t hop_samples(const MfccConfig& config, int sample_rate_hz);
/// floor((N - frame) / hop) + 1, or 0 if the signal is shorter than a frame.
std::size_t frame_count(std::size_t signal_length, const MfccConfig& config, int sample_rate_hz);

/// Mel filterbank energies (before the log), one row per frame.
Matrix filterbank_energies(const AudioSignal& signal, const MfccConfig& config);

/// num_frames x coefficients. Throws Error if the signal is shorter than one
/// frame, the rate is below 8 kHz, or the configuration is inconsistent.
Matrix mfcc(const AudioSignal& signal, const MfccConfig& config = {});

/// Per-coefficient mean over every frame of every matrix.
std::vector<double> user_mfcc_means(std::span<const Matrix> per_record);

namespace dsp {

/// In-place iterative radix-2 FFT. Size must be a power of two.
void fft(std::vector<std::complex<double>>& data);

/// |X[k]|^2 for k in [0, fft_size/2] of a zero-padded real frame.
std::vector<double> power_spectrum(std::span<const double> frame, std::size_t fft_size);

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Filter centre frequencies in Hz, ascending.
std::vector<double> mel_centers(const MfccConfig& config, int sample_rate_hz);

/// mel_filters x (fft_size/2 + 1) triangular weights spanning 0..Nyquist.
Matrix mel_filterbank(const MfccConfig& config, int sample_rate_hz);

/// Orthonormal DCT-II matrix, size x size.
Matrix dct_matrix(std::size_t size);

std::vector<double> hamming(std::size_t length);

}  // namespace dsp

}  // namespace voiceaudit
