#include "homodyne/psd.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <random>

#include <fftw3.h>

#include "homodyne/errors.hpp"

namespace homodyne {

namespace {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (!p) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

}  // namespace

std::vector<double> synthesize_noise(const PsdFunction& target, double sample_rate,
                                     std::size_t n_samples, std::uint64_t seed) {
  if (!is_power_of_two(n_samples))
    throw Error(ErrorCode::invalid_argument, "synthesize_noise: n_samples must be a power of two");
  if (!(sample_rate > 0.0)) throw Error(ErrorCode::invalid_argument, "sample_rate must be > 0");

  const std::size_t n_bins = n_samples / 2 + 1;
  auto time = fftw_buffer<double>(n_samples);
  auto freq = fftw_buffer<fftw_complex>(n_bins);
  Plan forward(fftw_plan_dft_r2c_1d(static_cast<int>(n_samples), time.get(), freq.get(), FFTW_ESTIMATE));
  Plan inverse(fftw_plan_dft_c2r_1d(static_cast<int>(n_samples), freq.get(), time.get(), FFTW_ESTIMATE));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < n_samples; ++i) time[i] = normal(rng);

  fftw_execute(forward.get());
  const double df = sample_rate / static_cast<double>(n_samples);
  for (std::size_t k = 0; k < n_bins; ++k) {
    const double s = target(static_cast<double>(k) * df);
    if (!(s >= 0.0) || !std::isfinite(s))
      throw Error(ErrorCode::invalid_argument, "synthesize_noise: target PSD must be finite and >= 0");
    const double gain = std::sqrt(s * sample_rate / 2.0) / static_cast<double>(n_samples);
    freq[k][0] *= gain;
    freq[k][1] *= gain;
  }
  fftw_execute(inverse.get());
  return std::vector<double>(time.get(), time.get() + n_samples);
}

Periodogram averaged_periodogram(std::span<const double> samples, double sample_rate,
                                 std::size_t segment_length) {
  if (!is_power_of_two(segment_length) || segment_length < 4)
    throw Error(ErrorCode::invalid_argument, "segment_length must be a power of two >= 4");
  const std::size_t n_seg = samples.size() / segment_length;
  if (n_seg == 0) throw Error(ErrorCode::invalid_argument, "fewer samples than one segment");

  const std::size_t L = segment_length;
  std::vector<double> window(L);
  double u = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(L)));
    u += window[i] * window[i];
  }

  auto time = fftw_buffer<double>(L);
  auto freq = fftw_buffer<fftw_complex>(L / 2 + 1);
  Plan plan(fftw_plan_dft_r2c_1d(static_cast<int>(L), time.get(), freq.get(), FFTW_ESTIMATE));

  Periodogram out;
  out.bin_width = sample_rate / static_cast<double>(L);
  out.averages = n_seg;
  out.psd.assign(L / 2 - 1, 0.0);
  for (std::size_t k = 1; k < L / 2; ++k) out.freqs.push_back(static_cast<double>(k) * out.bin_width);

  const double norm = 2.0 / (sample_rate * u * static_cast<double>(n_seg));
  for (std::size_t s = 0; s < n_seg; ++s) {
    for (std::size_t i = 0; i < L; ++i) time[i] = samples[s * L + i] * window[i];
    fftw_execute(plan.get());
    for (std::size_t k = 1; k < L / 2; ++k)
      out.psd[k - 1] += norm * (freq[k][0] * freq[k][0] + freq[k][1] * freq[k][1]);
  }
  return out;
}

}  // namespace homodyne
