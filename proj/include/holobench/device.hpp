#pragma once

#include <random>

#include <Eigen/Eigenvalues>

#include "holobench/analysis.hpp"

namespace holobench {

template <typename Scalar = double>
struct DeviceTarget {
  int ports = 3;  // equal to the mode count
  Scalar mdl_db = Scalar(1.5);
  Scalar xt_db = Scalar(-14);
  std::uint64_t seed = 1;
};

template <typename Scalar = double>
struct GeneratedDevice {
  ComplexMatrix<Scalar> truth;
  Scalar mdl_db = 0;  // exact by construction
  Scalar xt_db = 0;   // reached by bisection on the mixing strength
  Scalar mixing = 0;
};

/// Haar-distributed random unitary (QR of a complex Gaussian matrix with the phase fix).
template <typename Scalar, typename Rng>
ComplexMatrix<Scalar> random_unitary(Index n, Rng& rng) {
  std::normal_distribution<Scalar> g(0, 1);
  ComplexMatrix<Scalar> z(n, n);
  for (Index i = 0; i < z.size(); ++i) z(i) = Complex<Scalar>(g(rng), g(rng));
  Eigen::HouseholderQR<ComplexMatrix<Scalar>> qr(z);
  ComplexMatrix<Scalar> q = qr.householderQ() * ComplexMatrix<Scalar>::Identity(n, n);
  const ComplexMatrix<Scalar> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Index k = 0; k < n; ++k) {
    const Complex<Scalar> d = r(k, k);
    q.col(k) *= std::abs(d) > 0 ? d / std::abs(d) : Complex<Scalar>(1);
  }
  return q;
}

/// Lossy, weakly mixing device with a prescribed MDL and mode-group crosstalk:
/// T = exp(i t H) * S * Pi, where Pi routes input (port p, pol q) to output (mode p, pol q),
/// S holds singular values spanning exactly `mdl_db`, and t is tuned until the crosstalk under
/// `groups` equals `xt_db`. Unitary factors leave the singular values, hence the MDL, untouched.
template <typename Scalar>
GeneratedDevice<Scalar> generate_device(const DeviceTarget<Scalar>& target,
                                        const ModeGroupMap& groups = ModeGroupMap::lp_default()) {
  const int m = target.ports;
  if (m != groups.mode_count()) throw Error(Errc::Config, "generated devices need as many ports as modes");
  if (!(target.mdl_db >= 0)) throw Error(Errc::Config, "target MDL must be non-negative");
  const Index n = 2 * m;
  std::mt19937_64 rng(target.seed);
  std::uniform_real_distribution<Scalar> uni(0, 1);
  std::normal_distribution<Scalar> gauss(0, 1);

  std::vector<Scalar> spread(static_cast<std::size_t>(n));
  spread[0] = 0;
  spread[1] = 1;
  for (std::size_t k = 2; k < spread.size(); ++k) spread[k] = uni(rng);
  std::shuffle(spread.begin(), spread.end(), rng);

  ComplexMatrix<Scalar> routed = ComplexMatrix<Scalar>::Zero(n, n);
  for (int port = 0; port < m; ++port)
    for (int q = 0; q < 2; ++q) {
      const Index col = 2 * port + q;
      routed(q * m + port, col) = std::pow(Scalar(10), -target.mdl_db / 20 * spread[std::size_t(col)]);
    }

  ComplexMatrix<Scalar> z(n, n);
  for (Index i = 0; i < z.size(); ++i) z(i) = Complex<Scalar>(gauss(rng), gauss(rng));
  const ComplexMatrix<Scalar> h = (z + z.adjoint()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<Scalar>> eig(h);
  const auto& lambda = eig.eigenvalues();
  const ComplexMatrix<Scalar>& v = eig.eigenvectors();
  const Scalar scale = lambda.cwiseAbs().maxCoeff();

  auto device_at = [&](Scalar t) {
    Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1> phases(n);
    for (Index k = 0; k < n; ++k) phases(k) = std::polar(Scalar(1), t * lambda(k) / scale);
    const ComplexMatrix<Scalar> u = v * phases.asDiagonal() * v.adjoint();
    return ComplexMatrix<Scalar>(u * routed);
  };
  auto xt_at = [&](Scalar t) {
    TransferMatrix<Scalar> tm;
    tm.modes = m;
    tm.ports = m;
    tm.entries = device_at(t);
    return crosstalk_db(power_condense(tm), groups).xt_db;
  };

  Scalar lo = 0, hi = Scalar(0.05);
  while (xt_at(hi) < target.xt_db) {
    lo = hi;
    hi *= 2;
    if (hi > Scalar(8)) throw Error(Errc::Config, "target crosstalk is not reachable");
  }
  for (int it = 0; it < 200 && hi - lo > Scalar(1e-14); ++it) {
    const Scalar mid = (lo + hi) / 2;
    (xt_at(mid) < target.xt_db ? lo : hi) = mid;
  }
  GeneratedDevice<Scalar> out;
  out.mixing = (lo + hi) / 2;
  out.truth = device_at(out.mixing);
  out.mdl_db = target.mdl_db;
  out.xt_db = xt_at(out.mixing);
  return out;
}

}  // namespace holobench
