#pragma once

// Stationary Gaussian noise with a prescribed one-sided PSD, and the averaged
// periodogram used to read it back like a spectrum analyzer would.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace homodyne {

using PsdFunction = std::function<double(double f)>;

// Real samples at `sample_rate` whose one-sided PSD is `target` (units^2/Hz): unit
// white noise is shaped in the frequency domain by sqrt(target * fs / 2) and
// transformed back. Deterministic for a given seed. n_samples must be a power of two.
std::vector<double> synthesize_noise(const PsdFunction& target, double sample_rate,
                                     std::size_t n_samples, std::uint64_t seed);

struct Periodogram {
  std::vector<double> freqs;  // bin centres, DC and Nyquist excluded
  std::vector<double> psd;    // one-sided, units^2/Hz
  double bin_width = 0.0;     // fs / segment_length
  std::size_t averages = 0;
};

// Non-overlapping Hann-windowed segments of `segment_length` samples, averaged.
Periodogram averaged_periodogram(std::span<const double> samples, double sample_rate,
                                 std::size_t segment_length);

}  // namespace homodyne
