#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstdint>
#include <vector>

namespace lgtsim {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using SparseCMatrix = Eigen::SparseMatrix<cplx>;
using Index = Eigen::Index;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr cplx kI{0.0, 1.0};

// External frequencies are ordinary GHz or MHz; internally everything is rad/ns.
constexpr double ghz(double f) { return kTwoPi * f; }
constexpr double mhz(double f) { return kTwoPi * f * 1e-3; }
constexpr double to_ghz(double w) { return w / kTwoPi; }
constexpr double to_mhz(double w) { return w / kTwoPi * 1e3; }

// Complex matrix with either dense or compressed sparse storage.
class LinearOperator {
 public:
  static constexpr Index kDenseThreshold = 64;

  LinearOperator() = default;
  explicit LinearOperator(CMatrix dense);
  explicit LinearOperator(SparseCMatrix sparse);

  Index rows() const;
  Index cols() const;
  bool is_sparse() const { return sparse_storage_; }

  CVector apply(const CVector& v) const;
  CMatrix to_dense() const;
  const CMatrix& dense() const { return dense_; }
  const SparseCMatrix& sparse() const { return sparse_; }
  cplx coeff(Index r, Index c) const;

  double max_abs() const;
  bool is_hermitian(double rel_tol = 1e-12) const;

 private:
  bool sparse_storage_ = false;
  CMatrix dense_;
  SparseCMatrix sparse_;
};

// Coordinate-list accumulator; duplicate entries are summed on finalize.
class CooBuilder {
 public:
  CooBuilder(Index rows, Index cols);
  void add(Index r, Index c, cplx v);
  // Dense below LinearOperator::kDenseThreshold unless force_sparse is set.
  LinearOperator finalize(bool force_sparse = false) const;

 private:
  Index rows_, cols_;
  std::vector<Eigen::Triplet<cplx>> entries_;
};

CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix kron_all(const std::vector<CMatrix>& factors);

double hermiticity_defect(const CMatrix& h);
void require_hermitian(const CMatrix& h, const char* where);

struct EigenSystem {
  RVector values;   // ascending
  CMatrix vectors;  // columns are eigenvectors
};

EigenSystem eigh(const CMatrix& h);
EigenSystem eigh(const LinearOperator& h);

CMatrix expm_unitary(const CMatrix& h, double t);

// Stores one spectral decomposition and applies exp(-i h t) for many t.
class SpectralPropagator {
 public:
  explicit SpectralPropagator(const CMatrix& h);
  explicit SpectralPropagator(EigenSystem es);

  CVector apply(const CVector& psi0, double t) const;
  CMatrix unitary(double t) const;
  const EigenSystem& eigensystem() const { return es_; }

 private:
  EigenSystem es_;
  CMatrix vectors_adj_;
};

// Nearest unitary in Frobenius norm (polar factor).
CMatrix nearest_unitary(const CMatrix& u);

}  // namespace lgtsim
