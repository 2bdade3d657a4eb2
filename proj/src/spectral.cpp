#include "velavg/spectral.hpp"

#include <unsupported/Eigen/FFT>
#include <vector>

namespace velavg {
namespace {

Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> fft = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::Unscaled);
    return f;
  }();
  return fft;
}

// In-place transform along every axis; `inverse` selects the sign of the exponent.
void transform(const SpaceGrid& grid, Eigen::ArrayXcd& data, bool inverse) {
  auto& fft = engine();
  const int n = grid.points();
  std::vector<Complex> in(n), out(n);
  auto run = [&] {
    if (inverse) {
      fft.inv(out, in);
    } else {
      fft.fwd(out, in);
    }
  };
  if (grid.dim() == 1) {
    for (int i = 0; i < n; ++i) in[i] = data[i];
    run();
    for (int i = 0; i < n; ++i) data[i] = out[i];
    return;
  }
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) in[c] = data[grid.flat(r, c)];
    run();
    for (int c = 0; c < n; ++c) data[grid.flat(r, c)] = out[c];
  }
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) in[r] = data[grid.flat(r, c)];
    run();
    for (int r = 0; r < n; ++r) data[grid.flat(r, c)] = out[r];
  }
}

}  // namespace

SpectralField forward_spectrum(const ComplexField& u) {
  Eigen::ArrayXcd data = u.values();
  transform(u.grid(), data, false);
  data *= u.grid().cell_volume();
  return {u.grid(), std::move(data)};
}

SpectralField forward_spectrum(const RealField& u) {
  return forward_spectrum(ComplexField(u.grid(), u.values().cast<Complex>()));
}

ComplexField inverse_spectrum(const SpectralField& s) {
  Eigen::ArrayXcd data = s.coefficients;
  transform(s.grid, data, true);
  data /= s.grid.volume();
  return ComplexField(s.grid, std::move(data));
}

RealField real_part_checked(const ComplexField& u, double tolerance) {
  const double scale = u.values().abs().maxCoeff();
  const double residue = u.values().imag().abs().maxCoeff();
  if (residue > tolerance * std::max(scale, 1e-300) && residue > 0.0) {
    throw EvaluationError("imaginary residue " + std::to_string(residue) +
                          " exceeds tolerance for a real result");
  }
  return RealField(u.grid(), u.values().real());
}

double spectral_energy(const SpectralField& s) {
  return s.coefficients.abs2().sum() / s.grid.volume();
}

}  // namespace velavg
