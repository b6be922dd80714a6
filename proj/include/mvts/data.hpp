#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mvts/random.hpp"
#include "mvts/tensor.hpp"

namespace mvts {

// Fixed-length multichannel windows, stored [window][channel][time] in f32.
struct WindowedDataset {
  std::size_t num_windows = 0;
  std::size_t num_channels = 0;
  std::size_t window_length = 0;
  std::vector<float> windows;
  bool has_labels = false;
  std::vector<std::uint8_t> labels;  // num_windows entries when has_labels
  std::size_t num_classes = 0;
  std::vector<std::string> channel_names;
  std::uint32_t sample_rate_mhz = 100000;

  double sample_rate_hz() const { return sample_rate_mhz / 1000.0; }
  double window_seconds() const { return double(window_length) / sample_rate_hz(); }
  std::span<const float> window(std::size_t i) const;
  std::vector<std::size_t> label_vector() const;
  void validate() const;

  bool operator==(const WindowedDataset&) const = default;
};

struct SynthConfig {
  std::size_t num_channels = 6;
  std::size_t num_classes = 5;
  std::size_t windows_per_class = 100;
  double sample_rate_hz = 100.0;
  double window_seconds = 3.0;
  std::size_t num_latent_sources = 3;
  double noise_std = 0.5;
  // Per-channel sinusoids that are independent across channels.
  std::size_t interferers_per_channel = 2;
  double interference_std = 0.0;
  std::uint64_t seed = 0;
  // [low, high] Hz per class; empty selects 3 Hz wide bands starting at 1 Hz.
  std::vector<std::array<double, 2>> class_bands;
  // Latent-to-channel mixing: explicit [C][K] matrix, or Gaussian from mixing_seed.
  std::vector<std::vector<double>> mixing;
  std::uint64_t mixing_seed = 1;
  std::vector<std::string> channel_names;
  std::array<double, 3> split_ratios{0.6, 0.2, 0.2};
  bool standardize = true;

  std::size_t window_length() const;
  std::vector<std::array<double, 2>> resolved_bands() const;
  std::vector<std::vector<double>> resolved_mixing() const;
  void validate() const;
};

// Window i (class i / windows_per_class) depends only on (seed, i).
WindowedDataset generate_synthetic(const SynthConfig& config);

// Per channel: (x - mean) / (std + eps), population std. window is [C][T].
std::vector<double> standardize_window(std::span<const double> window, std::size_t channels, double eps = 1e-8);
void standardize_in_place(WindowedDataset& ds, double eps = 1e-8);

WindowedDataset subset(const WindowedDataset& ds, std::span<const std::size_t> indices);

// Keeps `channels` in the given order.
WindowedDataset select_channels(const WindowedDataset& ds, std::span<const std::size_t> channels);
// n_per_class distinct windows of every class, uniformly without replacement.
std::vector<std::size_t> balanced_indices(const WindowedDataset& ds, std::size_t n_per_class, Rng& rng);
WindowedDataset sample_balanced(const WindowedDataset& ds, std::size_t n_per_class, Rng& rng);

// Shuffled disjoint train/val/test split by ratio; the last split takes the remainder.
std::array<WindowedDataset, 3> split_dataset(const WindowedDataset& ds, std::array<double, 3> ratios, Rng& rng);

// Windows `indices` as a float64 [B, C, T] tensor.
Tensor batch_tensor(const WindowedDataset& ds, std::span<const std::size_t> indices);

// CTS container, little-endian:
//   "CTS1" | u32 version | u32 N | u32 C | u32 T | u32 sample_rate_mHz |
//   u8 has_labels | u8 num_classes | C x (u8 len, name bytes) |
//   f32[N*C*T] | u8[N] labels (if has_labels)
inline constexpr std::uint32_t kCtsVersion = 1;
std::vector<std::uint8_t> encode_cts(const WindowedDataset& ds);
WindowedDataset decode_cts(std::span<const std::uint8_t> bytes);
void write_cts(const WindowedDataset& ds, const std::filesystem::path& path);
WindowedDataset read_cts(const std::filesystem::path& path);

}  // namespace mvts
