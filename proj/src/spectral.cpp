#include "h2ad/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace h2ad {

namespace {

constexpr int kMaxSweeps = 60;

void check_input(const CMatrix& r) {
  if (r.rows() != r.cols()) throw InputError("eigendecomposition needs a square matrix");
  if (r.rows() == 0) throw InputError("eigendecomposition of an empty matrix");
  if (r.rows() > kMaxEigenDim) throw InputError("matrix order exceeds the Jacobi solver cap of 256");
  if (!r.allFinite()) throw NumericError("non-finite entry in Hermitian matrix");
}

// Rotates (p, q) of the Hermitian working matrix `a` to zero a(p, q), and
// applies the same rotation to the columns of `v` when provided.
void rotate(CMatrix& a, CMatrix* v, Eigen::Index p, Eigen::Index q) {
  const cdouble apq = a(p, q);
  const double mag = std::abs(apq);
  const cdouble phase = apq / mag;  // e^{i phi}
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double theta = (aqq - app) / (2.0 * mag);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const cdouble sc = s * std::conj(phase);  // s e^{-i phi}
  const cdouble cc = c * std::conj(phase);  // c e^{-i phi}

  // A <- A J
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    const cdouble akp = a(k, p);
    const cdouble akq = a(k, q);
    a(k, p) = c * akp - sc * akq;
    a(k, q) = s * akp + cc * akq;
  }
  // A <- J^H A
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    const cdouble apk = a(p, k);
    const cdouble aqk = a(q, k);
    a(p, k) = c * apk - std::conj(sc) * aqk;
    a(q, k) = s * apk + std::conj(cc) * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = a(p, p).real();
  a(q, q) = a(q, q).real();

  if (v != nullptr) {
    CMatrix& vm = *v;
    for (Eigen::Index k = 0; k < vm.rows(); ++k) {
      const cdouble vkp = vm(k, p);
      const cdouble vkq = vm(k, q);
      vm(k, p) = c * vkp - sc * vkq;
      vm(k, q) = s * vkp + cc * vkq;
    }
  }
}

double off_diagonal_norm2(const CMatrix& a) {
  double off = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j) off += std::norm(a(i, j));
  return off;
}

void jacobi(CMatrix& a, CMatrix* v) {
  const Eigen::Index n = a.rows();
  const double scale2 = a.squaredNorm();
  if (scale2 == 0.0) return;
  const double tol2 = 1e-30 * scale2;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm2(a) <= tol2) return;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag == 0.0) continue;
        // Negligible against both diagonal entries: drop it.
        const double dp = std::abs(a(p, p).real());
        const double dq = std::abs(a(q, q).real());
        if (sweep > 3 && dp + 1e4 * mag == dp && dq + 1e4 * mag == dq) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        rotate(a, v, p, q);
      }
    }
  }
  if (off_diagonal_norm2(a) > 1e-20 * scale2) throw NumericError("Jacobi eigensolver did not converge");
}

std::vector<Eigen::Index> descending_order(const RVector& values) {
  std::vector<Eigen::Index> order(static_cast<size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return values[x] > values[y]; });
  return order;
}

CMatrix hermitian_part(const CMatrix& r) { return (r + r.adjoint()) * 0.5; }

}  // namespace

CovarianceMatrix sample_covariance(const SnapshotMatrix& y) {
  if (y.data.rows() == 0 || y.data.cols() == 0) throw InputError("sample covariance of an empty snapshot matrix");
  CovarianceMatrix r;
  r.data = CMatrix::Zero(y.data.rows(), y.data.rows());
  r.data.selfadjointView<Eigen::Lower>().rankUpdate(y.data, 1.0 / static_cast<double>(y.data.cols()));
  r.data = r.data.selfadjointView<Eigen::Lower>();
  r.data = hermitian_part(r.data);
  r.snapshot_count = y.snapshots();
  r.group = y.group;
  return r;
}

EigenSpectrum hermitian_eig(const CMatrix& r) {
  check_input(r);
  CMatrix a = hermitian_part(r);
  CMatrix v = CMatrix::Identity(a.rows(), a.cols());
  jacobi(a, &v);

  const RVector diag = a.diagonal().real();
  const auto order = descending_order(diag);
  EigenSpectrum out{RVector(diag.size()), CMatrix(v.rows(), v.cols())};
  for (size_t k = 0; k < order.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    out.eigenvalues[col] = diag[order[k]];
    CVector u = v.col(order[k]);
    Eigen::Index peak = 0;
    for (Eigen::Index i = 1; i < u.size(); ++i)
      if (std::abs(u[i]) > std::abs(u[peak]) * (1.0 + 1e-12)) peak = i;
    const double mag = std::abs(u[peak]);
    if (mag > 0.0) u *= std::conj(u[peak]) / mag;
    u[peak] = std::abs(u[peak]);
    out.eigenvectors.col(col) = u;
  }
  return out;
}

EigenSpectrum hermitian_eig(const CovarianceMatrix& r) { return hermitian_eig(r.data); }

RVector hermitian_eigenvalues(const CMatrix& r) {
  check_input(r);
  CMatrix a = hermitian_part(r);
  jacobi(a, nullptr);
  const RVector diag = a.diagonal().real();
  const auto order = descending_order(diag);
  RVector out(diag.size());
  for (size_t k = 0; k < order.size(); ++k) out[static_cast<Eigen::Index>(k)] = diag[order[k]];
  return out;
}

}  // namespace h2ad
