#include "holobench/plots.hpp"

#include <numbers>

#include "holobench/formats.hpp"

namespace holobench::io {

namespace {

constexpr std::array<Rgb, 7> kHueStops{{{255, 0, 0}, {255, 255, 0}, {0, 255, 0}, {0, 255, 255},
                                         {0, 0, 255}, {255, 0, 255}, {255, 0, 0}}};

constexpr std::array<Rgb, 5> kHeatStops{{{0, 0, 0}, {87, 16, 110}, {188, 55, 84}, {249, 142, 9}, {252, 255, 164}}};

template <std::size_t N>
Rgb interpolate(const std::array<Rgb, N>& stops, double t) {
  t = std::clamp(t, 0.0, 1.0) * double(N - 1);
  const std::size_t i = std::min<std::size_t>(std::size_t(t), N - 2);
  const double f = t - double(i);
  Rgb out;
  for (int c = 0; c < 3; ++c)
    out[std::size_t(c)] = std::uint8_t(std::lround((1 - f) * stops[i][std::size_t(c)] + f * stops[i + 1][std::size_t(c)]));
  return out;
}

}  // namespace

Rgb cyclic_phase_color(double phase) {
  const double t = (std::remainder(phase, 2 * std::numbers::pi) + std::numbers::pi) / (2 * std::numbers::pi);
  return interpolate(kHueStops, t);
}

Rgb heat_color(double t) { return interpolate(kHeatStops, t); }

void write_amplitude_ppm(const std::filesystem::path& path, const ComplexFieldd& field) {
  const auto& s = field.samples();
  const double peak = s.cwiseAbs().maxCoeff();
  std::vector<std::uint8_t> rgb;
  rgb.reserve(std::size_t(s.size()) * 3);
  for (Index iy = 0; iy < s.rows(); ++iy)
    for (Index ix = 0; ix < s.cols(); ++ix) {
      const auto v = std::uint8_t(peak > 0 ? std::lround(255 * std::abs(s(iy, ix)) / peak) : 0);
      rgb.insert(rgb.end(), {v, v, v});
    }
  write_atomic(path, encode_ppm(int(s.cols()), int(s.rows()), rgb));
}

void write_phase_ppm(const std::filesystem::path& path, const ComplexFieldd& field) {
  const auto& s = field.samples();
  std::vector<std::uint8_t> rgb;
  rgb.reserve(std::size_t(s.size()) * 3);
  for (Index iy = 0; iy < s.rows(); ++iy)
    for (Index ix = 0; ix < s.cols(); ++ix) {
      const auto c = cyclic_phase_color(std::arg(s(iy, ix)));
      rgb.insert(rgb.end(), c.begin(), c.end());
    }
  write_atomic(path, encode_ppm(int(s.cols()), int(s.rows()), rgb));
}

void write_power_heatmap(const std::filesystem::path& path, const PowerMatrixd& power, int cell, double floor_db) {
  const auto& p = power.entries;
  const double peak = p.maxCoeff();
  const int w = int(p.cols()) * cell, h = int(p.rows()) * cell;
  std::vector<std::uint8_t> rgb(std::size_t(w) * std::size_t(h) * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = p(y / cell, x / cell);
      const double db = peak > 0 && v > 0 ? 10 * std::log10(v / peak) : floor_db;
      const auto c = heat_color(1 - std::max(db, floor_db) / floor_db);
      std::copy(c.begin(), c.end(), rgb.begin() + (std::ptrdiff_t(y) * w + x) * 3);
    }
  write_atomic(path, encode_ppm(w, h, rgb));
}

}  // namespace holobench::io
