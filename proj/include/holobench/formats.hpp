#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "holobench/synth.hpp"

namespace holobench::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const fs::path& path, std::string_view bytes);
std::string read_file(const fs::path& path);

using Codes = CameraFramed::Codes;

/// 16-bit big-endian binary PGM (P5, maxval 65535).
std::string encode_pgm(const Codes& codes);
Codes decode_pgm(std::string_view bytes);
void write_pgm(const fs::path& path, const Codes& codes);
Codes read_pgm(const fs::path& path);

/// "CFLD" complex field: magic, u16 version, u32 nx, u32 ny, f64 pitch_x, f64 pitch_y, then
/// nx*ny interleaved (re, im) f64 row-major. Everything little-endian.
inline constexpr std::uint16_t kFieldFileVersion = 1;
std::string encode_field(const ComplexFieldd& field);
ComplexFieldd decode_field(std::string_view bytes);
void write_field(const fs::path& path, const ComplexFieldd& field);
ComplexFieldd read_field(const fs::path& path);

/// Binary PPM (P6, maxval 255). `rgb` holds width*height*3 bytes, row-major.
std::string encode_ppm(int width, int height, const std::vector<std::uint8_t>& rgb);
std::vector<std::uint8_t> decode_ppm(std::string_view bytes, int& width, int& height);

/// Complex matrix as {"rows", "cols", "re": [[...]], "im": [[...]]}.
json matrix_to_json(const ComplexMatrix<double>& m);
ComplexMatrix<double> matrix_from_json(const json& j);

/// JSON number, or the strings "inf" / "-inf" for infinities.
json number_or_inf(double v);
double number_from_json(const json& j);

std::string frame_file_name(int port, Pol in_pol);
std::string field_file_name(int port, Pol in_pol, Pol out_pol);

}  // namespace holobench::io
