#pragma once

#include "velavg/grid.hpp"

namespace velavg {

// Discrete approximation of the transform  u^(xi) = \int e^{-2 pi i <xi, x>} u(x) dx
// on the periodic box, with phases measured from the first grid point.
// Parseval reads  \int |u|^2 dx = L^{-d} sum_k |u^_k|^2.

SpectralField forward_spectrum(const ComplexField& u);
SpectralField forward_spectrum(const RealField& u);
ComplexField inverse_spectrum(const SpectralField& s);

/// Real part of a field whose imaginary part is roundoff; throws EvaluationError
/// if the imaginary residue exceeds `tolerance` relative to the largest modulus.
RealField real_part_checked(const ComplexField& u, double tolerance = 1e-12);

/// Sum of |c_k|^2 / L^d, the spectral side of Parseval.
double spectral_energy(const SpectralField& s);

}  // namespace velavg
