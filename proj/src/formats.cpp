#include "holobench/formats.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace holobench::io {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put_le(std::string& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::string_view in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error(Errc::Format, "unexpected end of data");
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  pos += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

// Netpbm header: magic, then whitespace-separated integers with '#' comments, then exactly
// one whitespace byte before the raster.
struct NetpbmHeader {
  int width = 0, height = 0, maxval = 0;
  std::size_t data_offset = 0;
};

NetpbmHeader parse_netpbm(std::string_view bytes, std::string_view magic) {
  if (bytes.substr(0, 2) != magic) throw Error(Errc::Format, "expected " + std::string(magic) + " header");
  std::size_t pos = 2;
  auto next_int = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    long value = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos])))
      value = value * 10 + (bytes[pos++] - '0');
    if (pos == start || value > 1'000'000) throw Error(Errc::Format, "malformed header field");
    return int(value);
  };
  NetpbmHeader h;
  h.width = next_int();
  h.height = next_int();
  h.maxval = next_int();
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw Error(Errc::Format, "missing whitespace after header");
  h.data_offset = pos + 1;
  if (h.width <= 0 || h.height <= 0 || h.maxval <= 0 || h.maxval > 65535)
    throw Error(Errc::Format, "header values out of range");
  return h;
}

}  // namespace

void write_atomic(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    out.flush();
    if (!out) throw Error(Errc::Io, "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::Io, "cannot rename onto " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string encode_pgm(const Codes& codes) {
  std::string out = "P5\n" + std::to_string(codes.cols()) + " " + std::to_string(codes.rows()) + "\n65535\n";
  out.reserve(out.size() + std::size_t(codes.size()) * 2);
  for (Index iy = 0; iy < codes.rows(); ++iy)
    for (Index ix = 0; ix < codes.cols(); ++ix) {
      const std::uint16_t v = codes(iy, ix);
      out.push_back(char(v >> 8));
      out.push_back(char(v & 0xff));
    }
  return out;
}

Codes decode_pgm(std::string_view bytes) {
  const auto h = parse_netpbm(bytes, "P5");
  const std::size_t bpp = h.maxval > 255 ? 2 : 1;
  if (bytes.size() < h.data_offset + std::size_t(h.width) * std::size_t(h.height) * bpp)
    throw Error(Errc::Format, "PGM raster is truncated");
  Codes codes(h.height, h.width);
  std::size_t pos = h.data_offset;
  for (int iy = 0; iy < h.height; ++iy)
    for (int ix = 0; ix < h.width; ++ix) {
      std::uint16_t v = static_cast<unsigned char>(bytes[pos++]);
      if (bpp == 2) v = std::uint16_t((v << 8) | static_cast<unsigned char>(bytes[pos++]));
      codes(iy, ix) = v;
    }
  return codes;
}

void write_pgm(const fs::path& path, const Codes& codes) { write_atomic(path, encode_pgm(codes)); }

Codes read_pgm(const fs::path& path) { return decode_pgm(read_file(path)); }

std::string encode_field(const ComplexFieldd& field) {
  const auto& g = field.grid();
  std::string out = "CFLD";
  out.reserve(4 + 2 + 8 + 16 + std::size_t(g.size()) * 16);
  put_le<std::uint16_t>(out, kFieldFileVersion);
  put_le<std::uint32_t>(out, std::uint32_t(g.nx()));
  put_le<std::uint32_t>(out, std::uint32_t(g.ny()));
  put_le<double>(out, g.pitch_x());
  put_le<double>(out, g.pitch_y());
  for (Index iy = 0; iy < g.ny(); ++iy)
    for (Index ix = 0; ix < g.nx(); ++ix) {
      put_le<double>(out, field(iy, ix).real());
      put_le<double>(out, field(iy, ix).imag());
    }
  return out;
}

ComplexFieldd decode_field(std::string_view bytes) {
  if (bytes.substr(0, 4) != "CFLD") throw Error(Errc::Format, "not a CFLD field file");
  std::size_t pos = 4;
  const auto version = get_le<std::uint16_t>(bytes, pos);
  if (version != kFieldFileVersion) throw Error(Errc::Format, "unsupported CFLD version " + std::to_string(version));
  const auto nx = get_le<std::uint32_t>(bytes, pos);
  const auto ny = get_le<std::uint32_t>(bytes, pos);
  const auto px = get_le<double>(bytes, pos);
  const auto py = get_le<double>(bytes, pos);
  const Grid2Dd grid(nx, ny, px, py);
  if (bytes.size() != pos + std::size_t(nx) * ny * 16) throw Error(Errc::Format, "CFLD payload size mismatch");
  ComplexMatrix<double> s(ny, nx);
  for (Index iy = 0; iy < Index(ny); ++iy)
    for (Index ix = 0; ix < Index(nx); ++ix) {
      const double re = get_le<double>(bytes, pos);
      const double im = get_le<double>(bytes, pos);
      s(iy, ix) = {re, im};
    }
  return ComplexFieldd(grid, std::move(s));
}

void write_field(const fs::path& path, const ComplexFieldd& field) { write_atomic(path, encode_field(field)); }

ComplexFieldd read_field(const fs::path& path) { return decode_field(read_file(path)); }

std::string encode_ppm(int width, int height, const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != std::size_t(width) * std::size_t(height) * 3) throw Error(Errc::InvalidArgument, "PPM size mismatch");
  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(rgb.data()), rgb.size());
  return out;
}

std::vector<std::uint8_t> decode_ppm(std::string_view bytes, int& width, int& height) {
  const auto h = parse_netpbm(bytes, "P6");
  if (h.maxval > 255) throw Error(Errc::Format, "only 8-bit PPM is supported");
  const std::size_t n = std::size_t(h.width) * std::size_t(h.height) * 3;
  if (bytes.size() < h.data_offset + n) throw Error(Errc::Format, "PPM raster is truncated");
  width = h.width;
  height = h.height;
  const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data() + h.data_offset);
  return {p, p + n};
}

json matrix_to_json(const ComplexMatrix<double>& m) {
  json re = json::array(), im = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json rr = json::array(), ii = json::array();
    for (Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ii.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ii));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

ComplexMatrix<double> matrix_from_json(const json& j) {
  try {
    const Index rows = j.at("rows").get<Index>(), cols = j.at("cols").get<Index>();
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (rows <= 0 || cols <= 0 || Index(re.size()) != rows || Index(im.size()) != rows)
      throw Error(Errc::Format, "matrix row count mismatch");
    ComplexMatrix<double> m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      if (Index(re[std::size_t(r)].size()) != cols || Index(im[std::size_t(r)].size()) != cols)
        throw Error(Errc::Format, "matrix column count mismatch in row " + std::to_string(r));
      for (Index c = 0; c < cols; ++c)
        m(r, c) = {re[std::size_t(r)][std::size_t(c)].get<double>(), im[std::size_t(r)][std::size_t(c)].get<double>()};
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::Format, std::string("malformed matrix: ") + e.what());
  }
}

json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(Errc::Format, "expected a number, got \"" + s + "\"");
  }
  return j.get<double>();
}

std::string frame_file_name(int port, Pol in_pol) {
  return "frame_p" + std::to_string(port) + "_" + pol_name(in_pol) + ".pgm";
}

std::string field_file_name(int port, Pol in_pol, Pol out_pol) {
  return "field_p" + std::to_string(port) + "_" + pol_name(in_pol) + "_" + pol_name(out_pol) + ".cfld";
}

}  // namespace holobench::io
