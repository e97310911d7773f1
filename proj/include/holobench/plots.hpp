#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "holobench/analysis.hpp"

namespace holobench::io {

using Rgb = std::array<std::uint8_t, 3>;

/// Cyclic hue wheel: phase -pi maps to red, then yellow, green, cyan, blue, magenta and back
/// to red at +pi, linear between the six stops.
Rgb cyclic_phase_color(double phase);

/// Sequential map for the power heatmap: black, purple, red, orange, pale yellow.
Rgb heat_color(double t);

/// Linear gray amplitude image, scaled to the field's peak magnitude.
void write_amplitude_ppm(const std::filesystem::path& path, const ComplexFieldd& field);
void write_phase_ppm(const std::filesystem::path& path, const ComplexFieldd& field);

/// Port x mode power matrix in dB relative to its largest entry, clipped at `floor_db`.
void write_power_heatmap(const std::filesystem::path& path, const PowerMatrixd& power, int cell = 48,
                         double floor_db = -30);

}  // namespace holobench::io
