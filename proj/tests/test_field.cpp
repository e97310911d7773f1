#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace holobench;
using hbtest::random_field;

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid2Dd(255, 256, 1e-5), Error);
  CHECK_THROWS_AS(Grid2Dd(4, 4, 1e-5), Error);
  CHECK_THROWS_AS(Grid2Dd(16, 16, 0.0), Error);
  CHECK_THROWS_AS(Grid2Dd(16, 16, std::numeric_limits<double>::quiet_NaN()), Error);
  const Grid2Dd g(16, 8, 2e-6);
  CHECK(g.x(8) == 0.0);
  CHECK(g.y(0) == doctest::Approx(-8e-6));
  CHECK(g.dfx() == doctest::Approx(1 / (16 * 2e-6)));
}

TEST_CASE("fields reject bad samples") {
  const Grid2Dd g(8, 8, 1.0);
  CHECK_THROWS_AS(ComplexFieldd(g, ComplexMatrix<double>::Zero(8, 10)), Error);
  ComplexMatrix<double> s = ComplexMatrix<double>::Zero(8, 8);
  s(3, 3) = {std::numeric_limits<double>::infinity(), 0};
  CHECK_THROWS_AS(ComplexFieldd(g, s), Error);
}

TEST_CASE("plane wave values") {
  const Grid2Dd g(32, 16, 5e-6);
  const auto flat = plane_wave(g, 1.0, SpatialFrequencyd{0, 0});
  CHECK((flat.samples().array() - Complex<double>(1)).abs().maxCoeff() < 1e-15);

  // One cycle across the aperture: +1 at the center, -1 half an aperture away.
  const auto one = plane_wave(g, 1.0, SpatialFrequencyd{1 / (32 * 5e-6), 0});
  CHECK(std::abs(one(8, 16) - Complex<double>(1)) < 1e-12);
  CHECK(std::abs(one(8, 0) - Complex<double>(-1)) < 1e-12);

  const SpatialFrequencyd f{3.3e3, -7.1e3};
  const auto w = plane_wave(g, 2.5, f, 0.4);
  double worst = 0;
  for (Index iy = 0; iy < g.ny(); ++iy)
    for (Index ix = 0; ix < g.nx(); ++ix) {
      const auto expect = 2.5 * std::exp(Complex<double>(0, 2 * std::numbers::pi * (f.fx * g.x(ix) + f.fy * g.y(iy)) + 0.4));
      worst = std::max(worst, std::abs(w(iy, ix) - expect));
    }
  CHECK(worst < 1e-12);
  CHECK((w.samples().cwiseAbs().array() - 2.5).abs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(plane_wave(g, 1.0, SpatialFrequencyd{g.nyquist_x(), 0}), Error);
  try {
    plane_wave(g, 1.0, SpatialFrequencyd{0, -g.nyquist_y()});
    FAIL("expected AliasedCarrier");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::AliasedCarrier);
  }
}

TEST_CASE("distinct integer carriers are orthogonal") {
  const Grid2Dd g(32, 32, 1e-5);
  const auto a = plane_wave(g, 1.0, SpatialFrequencyd::from_bins(g, 3, -2));
  const auto b = plane_wave(g, 1.0, SpatialFrequencyd::from_bins(g, 5, 1));
  CHECK(std::abs(inner_product(a, b)) < 1e-12 * std::abs(inner_product(a, a)));
}

TEST_CASE("fft2 matches the direct centered DFT") {
  const Grid2Dd g(16, 8, 1e-5);
  const auto f = random_field(g, 11);
  const auto fast = fft2(f).bins();
  const auto slow = hbtest::direct_dft(f.samples());
  CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-12);
  const auto back = ifft2(fft2(f)).samples();
  CHECK((back - hbtest::direct_dft(slow, +1)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constant field and integer plane wave give single bins") {
  const Grid2Dd g(64, 32, 1e-5);
  const auto dc = fft2(ComplexFieldd(g, ComplexMatrix<double>::Constant(32, 64, 1.0)));
  CHECK(std::abs(dc(16, 32)) == doctest::Approx(std::sqrt(64.0 * 32.0)));
  CHECK(std::sqrt(dc.power() - std::norm(dc(16, 32))) < 1e-9);

  const auto s = fft2(plane_wave(g, 1.0, SpatialFrequencyd::from_bins(g, 5, -3)));
  CHECK(std::abs(s(16 - 3, 32 + 5)) == doctest::Approx(std::sqrt(64.0 * 32.0)));
  CHECK(std::sqrt(s.power() - std::norm(s(13, 37))) < 1e-9);
}

TEST_CASE("Parseval against direct sums") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Grid2Dd g(128, 64, 3e-6);
    const auto f = random_field(g, seed);
    const double a = hbtest::sum_sq(f.samples());
    const double b = hbtest::sum_sq(fft2(f).bins());
    CHECK(std::abs(a - b) / a < 1e-10);
  }
}

TEST_CASE("round trips") {
  const Grid2Dd g(256, 256, 2e-5);
  const auto f = random_field(g, 7);
  CHECK((ifft2(fft2(f)).samples() - f.samples()).cwiseAbs().maxCoeff() < 1e-12);

  const auto G = AngularSpectrumd::from_bins(g, random_field(g, 8).samples());
  CHECK((fft2(ifft2(G)).bins() - G.bins()).cwiseAbs().maxCoeff() < 1e-12);

  ComplexMatrix<double> delta = ComplexMatrix<double>::Zero(256, 256);
  delta(128, 128) = 1;
  const auto c = ifft2(AngularSpectrumd::from_bins(g, delta)).samples();
  CHECK((c.array() - Complex<double>(1.0 / 256)).abs().maxCoeff() < 1e-15);
}

TEST_CASE("spectrum of a real field is conjugate symmetric") {
  const Grid2Dd g(32, 16, 1e-5);
  const auto f = ComplexFieldd::from_real(g, random_field(g, 3).samples().real());
  const auto s = fft2(f);
  double worst = 0;
  for (Index ky = 1; ky < g.ny(); ++ky)
    for (Index kx = 1; kx < g.nx(); ++kx)
      worst = std::max(worst, std::abs(s(ky, kx) - std::conj(s(g.ny() - ky, g.nx() - kx))));
  CHECK(worst < 1e-12);
}

TEST_CASE("crop_recenter of a plane wave returns its amplitude") {
  const Grid2Dd g(64, 64, 1e-5);
  const auto carrier = SpatialFrequencyd::from_bins(g, 9, -6);
  const auto w = plane_wave(g, 0.7, carrier, 0.3);
  for (double r : {1.0, 2.5, 6.0}) {
    Diagnostics d;
    const auto crop = crop_recenter(fft2(w), carrier, r * g.dfx(), &d);
    CHECK(crop.shift_x == 9);
    CHECK(crop.shift_y == -6);
    const auto back = ifft2(crop.spectrum).samples();
    CHECK((back.array() - std::polar(0.7, 0.3)).abs().maxCoeff() < 1e-12);
    CHECK(d.items.empty());
  }
}

TEST_CASE("crop_recenter equals demodulate-then-low-pass") {
  const Grid2Dd g(64, 32, 1e-5);
  const auto carrier = SpatialFrequencyd::from_bins(g, -12, 7);
  const double radius = 5.3 * g.dfx();
  // Smooth envelope on the carrier plus clutter elsewhere.
  ComplexMatrix<double> env(g.ny(), g.nx());
  for (Index iy = 0; iy < g.ny(); ++iy)
    for (Index ix = 0; ix < g.nx(); ++ix) {
      const double x = g.x(ix) / 1e-4, y = g.y(iy) / 1e-4;
      env(iy, ix) = Complex<double>(std::exp(-x * x - y * y), 0.3 * x * std::exp(-x * x - y * y));
    }
  const ComplexFieldd signal(g, env);
  const auto field = ComplexFieldd(g, (signal.samples().array() * plane_wave(g, 1.0, carrier).samples().array()).matrix()) +
                     plane_wave(g, 0.2, SpatialFrequencyd::from_bins(g, 10, 0));
  const auto got = ifft2(crop_recenter(fft2(field), carrier, radius).spectrum).samples();

  // Oracle: multiply by the conjugate carrier, keep bins within the radius of DC.
  ComplexMatrix<double> base = demodulate(field, carrier).samples();
  ComplexMatrix<double> spec = hbtest::direct_dft(base);
  for (Index ky = 0; ky < g.ny(); ++ky)
    for (Index kx = 0; kx < g.nx(); ++kx) {
      const double dx = double(kx - g.nx() / 2) * g.dfx(), dy = double(ky - g.ny() / 2) * g.dfy();
      if (dx * dx + dy * dy > radius * radius) spec(ky, kx) = 0;
    }
  const auto expect = hbtest::direct_dft(spec, +1);
  CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("crop_recenter corner cases") {
  const Grid2Dd g(32, 32, 1e-5);
  const auto flat = fft2(ComplexFieldd(g, ComplexMatrix<double>::Constant(32, 32, Complex<double>(2, -1))));
  const auto id = crop_recenter(flat, SpatialFrequencyd{0, 0}, 3 * g.dfx());
  CHECK((id.spectrum.bins() - flat.bins()).cwiseAbs().maxCoeff() < 1e-12);

  const auto empty = crop_recenter(flat, SpatialFrequencyd::from_bins(g, 8, 8), 1 * g.dfx());
  CHECK(empty.spectrum.bins().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(ifft2(empty.spectrum).samples().cwiseAbs().maxCoeff() < 1e-12);

  try {
    crop_recenter(flat, SpatialFrequencyd::from_bins(g, 13, 0), 4 * g.dfx());
    FAIL("expected CropOutOfBounds");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CropOutOfBounds);
  }
  CHECK_THROWS_AS(crop_recenter(flat, SpatialFrequencyd{0, 0}, 0.0), Error);

  Diagnostics d;
  crop_recenter(flat, SpatialFrequencyd::from_bins(g, 3, 0), 4 * g.dfx(), &d);
  CHECK(d.has(Warn::DcContamination));

  // Sub-bin center: nearest-bin shift plus the reported residual.
  const auto sub = crop_recenter(flat, SpatialFrequencyd::from_bins(g, 5.3, -2.6), 2 * g.dfx());
  CHECK(sub.shift_x == 5);
  CHECK(sub.shift_y == -3);
  CHECK(sub.residual.fx / g.dfx() == doctest::Approx(0.3));
  CHECK(sub.residual.fy / g.dfy() == doctest::Approx(0.4));
}

TEST_CASE("crop_recenter is linear") {
  const Grid2Dd g(32, 32, 1e-5);
  const auto a = fft2(random_field(g, 1));
  const auto b = fft2(random_field(g, 2));
  const Complex<double> alpha(0.3, -1.2), beta(2.0, 0.5);
  const auto mix = AngularSpectrumd::from_bins(g, alpha * a.bins() + beta * b.bins());
  const auto c = SpatialFrequencyd::from_bins(g, 6.4, -3.2);
  const double r = 4.5 * g.dfx();
  const auto lhs = crop_recenter(mix, c, r).spectrum.bins();
  const ComplexMatrix<double> rhs = alpha * crop_recenter(a, c, r).spectrum.bins() + beta * crop_recenter(b, c, r).spectrum.bins();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("inner product properties") {
  const Grid2Dd g(32, 32, 1e-5);
  const auto a = random_field(g, 4);
  const auto b = random_field(g, 5);
  const auto aa = inner_product(a, a);
  CHECK(aa.real() > 0);
  CHECK(std::abs(aa.imag()) < 1e-12 * aa.real());
  CHECK(std::abs(inner_product(a, b) - std::conj(inner_product(b, a))) < 1e-12 * aa.real());
  CHECK(aa.real() == doctest::Approx(a.energy()));
  CHECK_THROWS_AS(inner_product(a, random_field(Grid2Dd(32, 32, 2e-5), 1)), Error);
}

TEST_CASE("displaced Gaussian overlap") {
  // Unit-power Gaussians exp(-r^2/w^2) displaced by d overlap as exp(-d^2 / (2 w^2)).
  const double w = 1e-4;
  const Grid2Dd g(256, 256, w / 20);
  auto gauss = [&](double x0) {
    ComplexMatrix<double> s(g.ny(), g.nx());
    for (Index iy = 0; iy < g.ny(); ++iy)
      for (Index ix = 0; ix < g.nx(); ++ix) {
        const double dx = g.x(ix) - x0, y = g.y(iy);
        s(iy, ix) = std::exp(-(dx * dx + y * y) / (w * w));
      }
    ComplexFieldd f(g, s);
    return Complex<double>(1 / std::sqrt(f.energy())) * f;
  };
  for (double d : {0.0, 0.25 * w, 0.5 * w, 1.3 * w}) {
    const auto c = inner_product(gauss(d / 2), gauss(-d / 2));
    CHECK(std::abs(c - std::exp(-d * d / (2 * w * w))) < 1e-6);
  }
}
