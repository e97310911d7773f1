#pragma once

#include <filesystem>
#include <numbers>
#include <random>

#include "holobench/field.hpp"

namespace hbtest {

using namespace holobench;

inline ComplexFieldd random_field(const Grid2Dd& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 1);
  ComplexMatrix<double> s(g.ny(), g.nx());
  for (Index i = 0; i < s.size(); ++i) s(i) = {n(rng), n(rng)};
  return ComplexFieldd(g, s);
}

/// Centered unitary DFT by direct summation; indices measured from the middle sample.
inline ComplexMatrix<double> direct_dft(const ComplexMatrix<double>& x, int sign = -1) {
  const Index ny = x.rows(), nx = x.cols();
  ComplexMatrix<double> out = ComplexMatrix<double>::Zero(ny, nx);
  const double tau = 2 * std::numbers::pi;
  for (Index ky = 0; ky < ny; ++ky)
    for (Index kx = 0; kx < nx; ++kx) {
      std::complex<double> acc = 0;
      for (Index iy = 0; iy < ny; ++iy)
        for (Index ix = 0; ix < nx; ++ix) {
          const double ph = sign * tau *
                            (double((kx - nx / 2) * (ix - nx / 2)) / double(nx) +
                             double((ky - ny / 2) * (iy - ny / 2)) / double(ny));
          acc += x(iy, ix) * std::polar(1.0, ph);
        }
      out(ky, kx) = acc / std::sqrt(double(nx * ny));
    }
  return out;
}

inline double sum_sq(const ComplexMatrix<double>& m) {
  double acc = 0;
  for (Index i = 0; i < m.size(); ++i) acc += std::norm(m(i));
  return acc;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("holobench_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace hbtest
