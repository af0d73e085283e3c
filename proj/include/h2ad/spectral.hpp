#pragma once

#include "h2ad/signal_sim.hpp"

namespace h2ad {

struct CovarianceMatrix {
  CMatrix data;
  int snapshot_count = 0;
  int group = 0;

  int dim() const { return static_cast<int>(data.rows()); }
};

/// Eigenvalues in descending order, eigenvectors as matching columns.
struct EigenSpectrum {
  RVector eigenvalues;
  CMatrix eigenvectors;
};

/// Largest matrix order accepted by the Jacobi solver.
inline constexpr int kMaxEigenDim = 256;

/// R = Y Y^H / T_s, symmetrized to (R + R^H) / 2.
CovarianceMatrix sample_covariance(const SnapshotMatrix& y);

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// Equal eigenvalues keep their original diagonal order. Each eigenvector is
/// rotated so that its largest-magnitude component is real and positive.
EigenSpectrum hermitian_eig(const CMatrix& r);
EigenSpectrum hermitian_eig(const CovarianceMatrix& r);

/// Eigenvalues only (descending); skips eigenvector accumulation.
RVector hermitian_eigenvalues(const CMatrix& r);

}  // namespace h2ad
