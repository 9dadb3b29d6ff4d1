#include "sensegen/data.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sensegen/errors.hpp"
#include "sensegen/rng.hpp"

namespace sensegen {

namespace {

double parse_token(const std::string& token, std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || errno == ERANGE || token.empty()) {
    throw ParseError("line " + std::to_string(line_no) + ": token '" + token +
                     "' is not a number");
  }
  return v;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

std::vector<std::vector<double>> load_windowed_text(const std::filesystem::path& path,
                                                    std::size_t samples_per_row) {
  if (samples_per_row == 0) throw ConfigError("samples_per_row must be positive");
  std::ifstream in = open_or_throw(path);
  std::vector<std::vector<double>> windows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream row(line);
    std::vector<double> window;
    std::string token;
    while (row >> token) window.push_back(parse_token(token, line_no));
    if (window.empty()) continue;  // blank line
    if (window.size() != samples_per_row) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(samples_per_row) + " values, found " +
                       std::to_string(window.size()));
    }
    windows.push_back(std::move(window));
  }
  if (windows.empty()) throw ParseError("'" + path.string() + "' holds no data rows");
  return windows;
}

std::vector<double> load_column(const std::filesystem::path& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<double> series;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream row(line);
    std::string token;
    if (!(row >> token)) continue;  // blank line
    double v = parse_token(token, line_no);
    std::string extra;
    if (row >> extra) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected one value per line, found '" + extra + "'");
    }
    series.push_back(v);
  }
  if (series.empty()) throw ParseError("'" + path.string() + "' holds no values");
  return series;
}

void save_column(const std::filesystem::path& path, const std::vector<double>& series) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  char buf[40];
  for (double v : series) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    out << buf;
  }
}

std::pair<std::vector<double>, NormRecord> normalize(const std::vector<double>& series) {
  if (series.empty()) throw ContractError("normalize: empty series");
  auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  NormRecord rec{*lo, *hi};
  if (!(rec.max > rec.min)) {
    throw ContractError("normalize: degenerate range, min == max == " +
                        std::to_string(rec.min));
  }
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = rec.normalize(series[i]);
  return {std::move(out), rec};
}

std::pair<std::vector<std::vector<double>>, NormRecord> normalize(
    const std::vector<std::vector<double>>& windows) {
  if (windows.empty()) throw ContractError("normalize: empty window set");
  double lo = windows[0][0], hi = windows[0][0];
  for (const auto& w : windows) {
    for (double v : w) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  NormRecord rec{lo, hi};
  if (!(rec.max > rec.min)) {
    throw ContractError("normalize: degenerate range, min == max == " +
                        std::to_string(rec.min));
  }
  std::vector<std::vector<double>> out(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    out[i].resize(windows[i].size());
    for (std::size_t j = 0; j < windows[i].size(); ++j) {
      out[i][j] = rec.normalize(windows[i][j]);
    }
  }
  return {std::move(out), rec};
}

std::vector<double> normalize_with(const std::vector<double>& series,
                                   const NormRecord& rec) {
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = rec.normalize(series[i]);
  return out;
}

std::vector<double> denormalize(const std::vector<double>& series, const NormRecord& rec) {
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = rec.denormalize(series[i]);
  return out;
}

std::vector<std::vector<double>> window_series(const std::vector<double>& series,
                                               std::size_t window_len, std::size_t stride) {
  if (window_len == 0 || stride == 0) {
    throw ContractError("window_series: window_len and stride must be positive");
  }
  if (window_len > series.size()) {
    throw ContractError("window_series: window of " + std::to_string(window_len) +
                        " exceeds series length " + std::to_string(series.size()));
  }
  std::size_t count = (series.size() - window_len) / stride + 1;
  std::vector<std::vector<double>> windows;
  windows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto begin = series.begin() + static_cast<std::ptrdiff_t>(i * stride);
    windows.emplace_back(begin, begin + static_cast<std::ptrdiff_t>(window_len));
  }
  return windows;
}

SynthKind parse_synth_kind(const std::string& name) {
  if (name == "sine") return SynthKind::sine;
  if (name == "ar1") return SynthKind::ar1;
  if (name == "bimodal") return SynthKind::bimodal;
  throw ConfigError("unknown synthetic kind '" + name + "' (sine|ar1|bimodal)");
}

std::string synth_kind_name(SynthKind kind) {
  switch (kind) {
    case SynthKind::sine: return "sine";
    case SynthKind::ar1: return "ar1";
    case SynthKind::bimodal: return "bimodal";
  }
  return "?";
}

std::vector<double> synthetic_dataset(SynthKind kind, std::size_t length,
                                      std::uint64_t seed, SynthParams params) {
  if (length == 0) throw ConfigError("synthetic_dataset: length must be positive");
  Rng rng = Rng(seed).fork("synthetic-" + synth_kind_name(kind));
  std::vector<double> series(length);
  switch (kind) {
    case SynthKind::sine: {
      for (std::size_t t = 0; t < length; ++t) {
        double base = params.amplitude *
                      std::sin(2.0 * std::numbers::pi * params.frequency *
                               static_cast<double>(t));
        series[t] = base + params.noise * rng.normal();
      }
      break;
    }
    case SynthKind::ar1: {
      double x = 0.0;
      for (std::size_t t = 0; t < length; ++t) {
        series[t] = x;
        x = params.ar_phi * x + params.noise * rng.normal();
      }
      break;
    }
    case SynthKind::bimodal: {
      for (std::size_t t = 0; t < length; ++t) {
        double mode = rng.uniform() < 0.5 ? -1.0 : 1.0;
        series[t] = mode * params.amplitude + params.noise * rng.normal();
      }
      break;
    }
  }
  return series;
}

}  // namespace sensegen
