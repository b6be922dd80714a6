#include "mvts/data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "binary_io.hpp"
#include "mvts/error.hpp"

namespace mvts {

std::span<const float> WindowedDataset::window(std::size_t i) const {
  const std::size_t stride = num_channels * window_length;
  return std::span<const float>(windows).subspan(i * stride, stride);
}

std::vector<std::size_t> WindowedDataset::label_vector() const {
  if (!has_labels) throw DataError("dataset has no labels");
  return std::vector<std::size_t>(labels.begin(), labels.end());
}

void WindowedDataset::validate() const {
  if (windows.size() != num_windows * num_channels * window_length)
    throw DataError("dataset buffer holds " + std::to_string(windows.size()) + " values, expected " +
                    std::to_string(num_windows * num_channels * window_length));
  if (channel_names.size() != num_channels) throw DataError("dataset channel name count does not match channels");
  if (has_labels) {
    if (labels.size() != num_windows) throw DataError("dataset label count does not match window count");
    for (auto l : labels)
      if (l >= num_classes) throw DataError("label " + std::to_string(l) + " outside [0, num_classes)");
  } else if (!labels.empty()) {
    throw DataError("unlabeled dataset carries labels");
  }
}

std::size_t SynthConfig::window_length() const {
  return std::size_t(std::llround(sample_rate_hz * window_seconds));
}

std::vector<std::array<double, 2>> SynthConfig::resolved_bands() const {
  if (!class_bands.empty()) return class_bands;
  std::vector<std::array<double, 2>> bands;
  for (std::size_t c = 0; c < num_classes; ++c) bands.push_back({1.0 + 3.0 * double(c), 3.0 + 3.0 * double(c)});
  return bands;
}

std::vector<std::vector<double>> SynthConfig::resolved_mixing() const {
  if (!mixing.empty()) return mixing;
  Rng rng(derive_seed(mixing_seed, 0x6d6978));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::vector<double>> a(num_channels, std::vector<double>(num_latent_sources));
  for (auto& row : a)
    for (auto& v : row) v = normal(rng);
  return a;
}

void SynthConfig::validate() const {
  if (num_channels == 0) throw ConfigError("synth: num_channels must be >= 1");
  if (num_classes < 2 || num_classes > 255) throw ConfigError("synth: num_classes must lie in [2, 255]");
  if (num_latent_sources == 0) throw ConfigError("synth: num_latent_sources must be >= 1");
  if (noise_std < 0.0 || interference_std < 0.0) throw ConfigError("synth: noise levels must be non-negative");
  if (!(sample_rate_hz > 0.0) || !(window_seconds > 0.0)) throw ConfigError("synth: rate and window must be positive");
  if (window_length() == 0) throw ConfigError("synth: window has no samples");
  if (std::abs(sample_rate_hz * 1000.0 - std::round(sample_rate_hz * 1000.0)) > 1e-6)
    throw ConfigError("synth: sample rate must be a whole number of millihertz");
  if (!class_bands.empty() && class_bands.size() != num_classes)
    throw ConfigError("synth: class_bands needs one [low, high] pair per class");
  for (const auto& b : resolved_bands())
    if (!(b[0] > 0.0) || b[1] < b[0] || b[1] >= sample_rate_hz / 2)
      throw ConfigError("synth: class band must satisfy 0 < low <= high < Nyquist");
  if (!mixing.empty()) {
    if (mixing.size() != num_channels) throw ConfigError("synth: mixing needs one row per channel");
    for (const auto& row : mixing)
      if (row.size() != num_latent_sources) throw ConfigError("synth: mixing rows need one entry per latent source");
  }
  if (!channel_names.empty() && channel_names.size() != num_channels)
    throw ConfigError("synth: channel_names needs one name per channel");
  for (const auto& n : channel_names)
    if (n.size() > 255) throw ConfigError("synth: channel names are limited to 255 bytes");
  for (double r : split_ratios)
    if (r < 0.0) throw ConfigError("synth: split ratios must be non-negative");
  if (std::abs(split_ratios[0] + split_ratios[1] + split_ratios[2] - 1.0) > 1e-9)
    throw ConfigError("synth: split ratios must sum to 1");
}

WindowedDataset generate_synthetic(const SynthConfig& config) {
  config.validate();
  const std::size_t t_len = config.window_length();
  const std::size_t c_count = config.num_channels;
  const auto bands = config.resolved_bands();
  const auto mixing = config.resolved_mixing();
  const double fs = config.sample_rate_hz;
  const double lowest = std::min_element(bands.begin(), bands.end())->at(0);
  double highest = 0.0;
  for (const auto& b : bands) highest = std::max(highest, b[1]);
  constexpr double two_pi = 2.0 * std::numbers::pi;

  WindowedDataset ds;
  ds.num_windows = config.num_classes * config.windows_per_class;
  ds.num_channels = c_count;
  ds.window_length = t_len;
  ds.windows.resize(ds.num_windows * c_count * t_len);
  ds.has_labels = true;
  ds.labels.resize(ds.num_windows);
  ds.num_classes = config.num_classes;
  ds.sample_rate_mhz = std::uint32_t(std::llround(fs * 1000.0));
  for (std::size_t c = 0; c < c_count; ++c)
    ds.channel_names.push_back(config.channel_names.empty() ? "ch" + std::to_string(c) : config.channel_names[c]);

  std::vector<double> sources(config.num_latent_sources * t_len);
  std::vector<double> window(c_count * t_len);
  for (std::size_t w = 0; w < ds.num_windows; ++w) {
    const std::size_t label = w / config.windows_per_class;
    ds.labels[w] = std::uint8_t(label);
    Rng rng(derive_seed(config.seed, w));
    std::normal_distribution<double> normal(0.0, 1.0);

    for (std::size_t k = 0; k < config.num_latent_sources; ++k) {
      const double f = uniform(rng, bands[label][0], bands[label][1]);
      const double phase = uniform(rng, 0.0, two_pi);
      const double amp = uniform(rng, 0.5, 1.5);
      for (std::size_t t = 0; t < t_len; ++t)
        sources[k * t_len + t] = amp * std::sin(two_pi * f * double(t) / fs + phase);
    }
    for (std::size_t c = 0; c < c_count; ++c) {
      double* x = window.data() + c * t_len;
      for (std::size_t t = 0; t < t_len; ++t) {
        double v = 0.0;
        for (std::size_t k = 0; k < config.num_latent_sources; ++k) v += mixing[c][k] * sources[k * t_len + t];
        x[t] = v;
      }
      for (std::size_t j = 0; j < config.interferers_per_channel; ++j) {
        const double f = uniform(rng, lowest, highest);
        const double phase = uniform(rng, 0.0, two_pi);
        for (std::size_t t = 0; t < t_len; ++t)
          x[t] += config.interference_std * std::sin(two_pi * f * double(t) / fs + phase);
      }
      for (std::size_t t = 0; t < t_len; ++t) x[t] += config.noise_std * normal(rng);
    }
    const std::vector<double> out = config.standardize ? standardize_window(window, c_count) : window;
    std::transform(out.begin(), out.end(), ds.windows.begin() + std::ptrdiff_t(w * c_count * t_len),
                   [](double v) { return float(v); });
  }
  return ds;
}

std::vector<double> standardize_window(std::span<const double> window, std::size_t channels, double eps) {
  if (channels == 0 || window.size() % channels != 0)
    throw DimensionError("standardize_window: buffer does not split into " + std::to_string(channels) + " channels");
  const std::size_t t_len = window.size() / channels;
  std::vector<double> out(window.size());
  for (std::size_t c = 0; c < channels; ++c) {
    const double* x = window.data() + c * t_len;
    double mu = 0.0;
    for (std::size_t t = 0; t < t_len; ++t) mu += x[t];
    mu /= double(t_len);
    double var = 0.0;
    for (std::size_t t = 0; t < t_len; ++t) var += (x[t] - mu) * (x[t] - mu);
    const double sd = std::sqrt(var / double(t_len));
    for (std::size_t t = 0; t < t_len; ++t) out[c * t_len + t] = (x[t] - mu) / (sd + eps);
  }
  return out;
}

void standardize_in_place(WindowedDataset& ds, double eps) {
  const std::size_t stride = ds.num_channels * ds.window_length;
  std::vector<double> buf(stride);
  for (std::size_t w = 0; w < ds.num_windows; ++w) {
    auto win = ds.window(w);
    std::copy(win.begin(), win.end(), buf.begin());
    const auto out = standardize_window(buf, ds.num_channels, eps);
    std::transform(out.begin(), out.end(), ds.windows.begin() + std::ptrdiff_t(w * stride),
                   [](double v) { return float(v); });
  }
}

WindowedDataset subset(const WindowedDataset& ds, std::span<const std::size_t> indices) {
  WindowedDataset out = ds;
  out.num_windows = indices.size();
  out.windows.clear();
  out.labels.clear();
  const std::size_t stride = ds.num_channels * ds.window_length;
  out.windows.reserve(indices.size() * stride);
  for (auto i : indices) {
    if (i >= ds.num_windows) throw DataError("window index " + std::to_string(i) + " out of range");
    auto w = ds.window(i);
    out.windows.insert(out.windows.end(), w.begin(), w.end());
    if (ds.has_labels) out.labels.push_back(ds.labels[i]);
  }
  return out;
}

WindowedDataset select_channels(const WindowedDataset& ds, std::span<const std::size_t> channels) {
  if (channels.empty()) throw ConfigError("channel selection is empty");
  WindowedDataset out = ds;
  out.num_channels = channels.size();
  out.channel_names.clear();
  for (auto c : channels) {
    if (c >= ds.num_channels) throw DataError("channel index " + std::to_string(c) + " out of range");
    out.channel_names.push_back(ds.channel_names[c]);
  }
  out.windows.clear();
  out.windows.reserve(ds.num_windows * channels.size() * ds.window_length);
  for (std::size_t i = 0; i < ds.num_windows; ++i) {
    auto w = ds.window(i);
    for (auto c : channels)
      out.windows.insert(out.windows.end(), w.begin() + c * ds.window_length, w.begin() + (c + 1) * ds.window_length);
  }
  return out;
}

std::vector<std::size_t> balanced_indices(const WindowedDataset& ds, std::size_t n_per_class, Rng& rng) {
  if (!ds.has_labels) throw DataError("balanced sampling needs a labeled dataset");
  if (n_per_class == 0) throw ConfigError("samples per class must be >= 1");
  std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
  for (std::size_t i = 0; i < ds.num_windows; ++i) by_class[ds.labels[i]].push_back(i);
  std::vector<std::size_t> chosen;
  chosen.reserve(n_per_class * ds.num_classes);
  for (std::size_t c = 0; c < ds.num_classes; ++c) {
    auto& pool = by_class[c];
    if (pool.size() < n_per_class)
      throw DataError("class " + std::to_string(c) + " has " + std::to_string(pool.size()) + " windows, " +
                      std::to_string(n_per_class) + " requested");
    for (std::size_t i = 0; i < n_per_class; ++i) {
      const std::size_t j = std::uniform_int_distribution<std::size_t>(i, pool.size() - 1)(rng);
      std::swap(pool[i], pool[j]);
      chosen.push_back(pool[i]);
    }
  }
  return chosen;
}

WindowedDataset sample_balanced(const WindowedDataset& ds, std::size_t n_per_class, Rng& rng) {
  const auto idx = balanced_indices(ds, n_per_class, rng);
  return subset(ds, idx);
}

std::array<WindowedDataset, 3> split_dataset(const WindowedDataset& ds, std::array<double, 3> ratios, Rng& rng) {
  std::vector<std::size_t> order(ds.num_windows);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[std::uniform_int_distribution<std::size_t>(0, i - 1)(rng)]);
  const auto n = double(ds.num_windows);
  const auto n_train = std::size_t(std::floor(ratios[0] * n + 1e-9));
  const auto n_val = std::min(ds.num_windows - n_train, std::size_t(std::floor(ratios[1] * n + 1e-9)));
  auto part = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> idx(order.begin() + std::ptrdiff_t(begin), order.begin() + std::ptrdiff_t(end));
    std::sort(idx.begin(), idx.end());
    return subset(ds, idx);
  };
  return {part(0, n_train), part(n_train, n_train + n_val), part(n_train + n_val, ds.num_windows)};
}

Tensor batch_tensor(const WindowedDataset& ds, std::span<const std::size_t> indices) {
  const std::size_t stride = ds.num_channels * ds.window_length;
  std::vector<double> data;
  data.reserve(indices.size() * stride);
  for (auto i : indices) {
    if (i >= ds.num_windows) throw DataError("window index " + std::to_string(i) + " out of range");
    auto w = ds.window(i);
    data.insert(data.end(), w.begin(), w.end());
  }
  return Tensor::from_data({indices.size(), ds.num_channels, ds.window_length}, std::move(data));
}

std::vector<std::uint8_t> encode_cts(const WindowedDataset& ds) {
  ds.validate();
  auto fits_u32 = [](std::size_t v) { return v <= 0xFFFFFFFFu; };
  if (!fits_u32(ds.num_windows) || !fits_u32(ds.num_channels) || !fits_u32(ds.window_length))
    throw DataError("dataset extents exceed the CTS u32 fields");
  if (ds.num_classes > 255) throw DataError("CTS stores at most 255 classes");
  detail::ByteWriter w;
  w.raw("CTS1");
  w.u32(kCtsVersion);
  w.u32(std::uint32_t(ds.num_windows));
  w.u32(std::uint32_t(ds.num_channels));
  w.u32(std::uint32_t(ds.window_length));
  w.u32(ds.sample_rate_mhz);
  w.u8(ds.has_labels ? 1 : 0);
  w.u8(std::uint8_t(ds.num_classes));
  for (const auto& name : ds.channel_names) {
    if (name.size() > 255) throw DataError("channel name longer than 255 bytes: " + name);
    w.u8(std::uint8_t(name.size()));
    w.raw(name);
  }
  for (float v : ds.windows) w.f32(v);
  if (ds.has_labels)
    for (auto l : ds.labels) w.u8(l);
  return w.take();
}

WindowedDataset decode_cts(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "CTS");
  if (r.remaining() < 4 || r.raw(4) != "CTS1") r.fail("bad magic, not a CTS file", 0);
  const std::size_t version_at = r.offset();
  const auto version = r.u32();
  if (version != kCtsVersion) r.fail("unsupported version " + std::to_string(version), version_at);
  WindowedDataset ds;
  ds.num_windows = r.u32();
  ds.num_channels = r.u32();
  ds.window_length = r.u32();
  ds.sample_rate_mhz = r.u32();
  const std::size_t flag_at = r.offset();
  const auto has_labels = r.u8();
  if (has_labels > 1) r.fail("has_labels flag must be 0 or 1", flag_at);
  ds.has_labels = has_labels == 1;
  ds.num_classes = r.u8();
  for (std::size_t c = 0; c < ds.num_channels; ++c) ds.channel_names.push_back(r.raw(r.u8()));
  const std::size_t count = ds.num_windows * ds.num_channels * ds.window_length;
  r.need(count * 4);
  ds.windows.resize(count);
  for (auto& v : ds.windows) v = r.f32();
  if (ds.has_labels) {
    r.need(ds.num_windows);
    ds.labels.resize(ds.num_windows);
    for (std::size_t i = 0; i < ds.num_windows; ++i) {
      const std::size_t at = r.offset();
      ds.labels[i] = r.u8();
      if (ds.labels[i] >= ds.num_classes) r.fail("label outside [0, num_classes)", at);
    }
  }
  r.expect_end();
  return ds;
}

void write_cts(const WindowedDataset& ds, const std::filesystem::path& path) {
  detail::write_file(path, encode_cts(ds));
}

WindowedDataset read_cts(const std::filesystem::path& path) { return decode_cts(detail::read_file(path)); }

}  // namespace mvts
