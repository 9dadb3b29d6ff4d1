#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sensegen {

// Min/max of the raw channel; maps raw units onto [0,1] and back.
struct NormRecord {
  double min = 0.0;
  double max = 1.0;

  double normalize(double x) const { return (x - min) / (max - min); }
  double denormalize(double v) const { return min + v * (max - min); }
};

// A set of equal-length windows plus the channel metadata they came from.
struct SeriesBatch {
  std::vector<std::vector<double>> windows;
  std::string channel;
  double sample_rate_hz = 0.0;
  NormRecord norm;
};

// Whitespace-separated rows, one window per row of exactly samples_per_row
// values (the HAR inertial-signal layout uses 128).
std::vector<std::vector<double>> load_windowed_text(const std::filesystem::path& path,
                                                    std::size_t samples_per_row);

// One value per line.
std::vector<double> load_column(const std::filesystem::path& path);

// Write in the column format load_column reads.
void save_column(const std::filesystem::path& path, const std::vector<double>& series);

std::pair<std::vector<double>, NormRecord> normalize(const std::vector<double>& series);
std::pair<std::vector<std::vector<double>>, NormRecord> normalize(
    const std::vector<std::vector<double>>& windows);
std::vector<double> normalize_with(const std::vector<double>& series,
                                   const NormRecord& rec);
std::vector<double> denormalize(const std::vector<double>& series, const NormRecord& rec);

// Overlapping windows at the given stride;
// count = floor((len - window_len) / stride) + 1.
std::vector<std::vector<double>> window_series(const std::vector<double>& series,
                                               std::size_t window_len, std::size_t stride);

enum class SynthKind { sine, ar1, bimodal };

SynthKind parse_synth_kind(const std::string& name);
std::string synth_kind_name(SynthKind kind);

struct SynthParams {
  double amplitude = 1.0;
  double frequency = 0.05;  // cycles per step (sine)
  double noise = 0.05;      // additive noise sigma
  double ar_phi = 0.8;      // AR(1) coefficient
};

// Desk-scale stand-ins for sensor traces:
//   sine:    a*sin(2*pi*f*t) + noise
//   ar1:     x_{t+1} = phi*x_t + eps_t
//   bimodal: x_{t+1} = +-1 (equal probability) + noise
std::vector<double> synthetic_dataset(SynthKind kind, std::size_t length,
                                      std::uint64_t seed, SynthParams params = {});

}  // namespace sensegen
