#include "lgtsim/numkit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lgtsim {

LinearOperator::LinearOperator(CMatrix dense) : sparse_storage_(false), dense_(std::move(dense)) {
  if (dense_.rows() == 0 || dense_.cols() == 0) {
    throw std::invalid_argument("LinearOperator: empty matrix");
  }
}

LinearOperator::LinearOperator(SparseCMatrix sparse) : sparse_storage_(true), sparse_(std::move(sparse)) {
  if (sparse_.rows() == 0 || sparse_.cols() == 0) {
    throw std::invalid_argument("LinearOperator: empty matrix");
  }
  sparse_.prune(cplx(0.0, 0.0), 0.0);
  sparse_.makeCompressed();
}

Index LinearOperator::rows() const { return sparse_storage_ ? sparse_.rows() : dense_.rows(); }
Index LinearOperator::cols() const { return sparse_storage_ ? sparse_.cols() : dense_.cols(); }

CVector LinearOperator::apply(const CVector& v) const {
  if (v.size() != cols()) {
    throw std::invalid_argument("LinearOperator::apply: dimension mismatch");
  }
  if (sparse_storage_) return sparse_ * v;
  return dense_ * v;
}

CMatrix LinearOperator::to_dense() const {
  if (sparse_storage_) return CMatrix(sparse_);
  return dense_;
}

cplx LinearOperator::coeff(Index r, Index c) const {
  if (sparse_storage_) return sparse_.coeff(r, c);
  return dense_(r, c);
}

double LinearOperator::max_abs() const {
  if (sparse_storage_) {
    double m = 0.0;
    for (Index k = 0; k < sparse_.outerSize(); ++k) {
      for (SparseCMatrix::InnerIterator it(sparse_, k); it; ++it) m = std::max(m, std::abs(it.value()));
    }
    return m;
  }
  return dense_.cwiseAbs().maxCoeff();
}

bool LinearOperator::is_hermitian(double rel_tol) const {
  if (rows() != cols()) return false;
  const double scale = max_abs();
  if (sparse_storage_) {
    SparseCMatrix diff = sparse_ - SparseCMatrix(sparse_.adjoint());
    double m = 0.0;
    for (Index k = 0; k < diff.outerSize(); ++k) {
      for (SparseCMatrix::InnerIterator it(diff, k); it; ++it) m = std::max(m, std::abs(it.value()));
    }
    return m <= rel_tol * scale;
  }
  return hermiticity_defect(dense_) <= rel_tol * scale;
}

CooBuilder::CooBuilder(Index rows, Index cols) : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("CooBuilder: dimensions must be positive");
}

void CooBuilder::add(Index r, Index c, cplx v) {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_) {
    throw std::out_of_range("CooBuilder::add: index out of range");
  }
  entries_.emplace_back(r, c, v);
}

LinearOperator CooBuilder::finalize(bool force_sparse) const {
  SparseCMatrix s(rows_, cols_);
  s.setFromTriplets(entries_.begin(), entries_.end());
  if (!force_sparse && std::max(rows_, cols_) < LinearOperator::kDenseThreshold) {
    return LinearOperator(CMatrix(s));
  }
  return LinearOperator(std::move(s));
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix kron_all(const std::vector<CMatrix>& factors) {
  if (factors.empty()) throw std::invalid_argument("kron_all: no factors");
  CMatrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = kron(out, factors[k]);
  return out;
}

double hermiticity_defect(const CMatrix& h) {
  if (h.rows() != h.cols()) return std::numeric_limits<double>::infinity();
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

void require_hermitian(const CMatrix& h, const char* where) {
  if (h.rows() == 0 || h.rows() != h.cols()) {
    throw std::invalid_argument(std::string(where) + ": matrix must be square and non-empty");
  }
  const double scale = h.cwiseAbs().maxCoeff();
  if (hermiticity_defect(h) > 1e-12 * scale) {
    throw std::invalid_argument(std::string(where) + ": matrix is not Hermitian");
  }
}

EigenSystem eigh(const CMatrix& h) {
  require_hermitian(h, "eigh");
  // Symmetrize so round-off in the input cannot leak into the spectrum.
  const CMatrix hs = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hs);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigh: decomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

EigenSystem eigh(const LinearOperator& h) { return eigh(h.to_dense()); }

CMatrix expm_unitary(const CMatrix& h, double t) {
  if (t == 0.0) {
    require_hermitian(h, "expm_unitary");
    return CMatrix::Identity(h.rows(), h.cols());
  }
  return SpectralPropagator(h).unitary(t);
}

SpectralPropagator::SpectralPropagator(const CMatrix& h) : SpectralPropagator(eigh(h)) {}

SpectralPropagator::SpectralPropagator(EigenSystem es)
    : es_(std::move(es)), vectors_adj_(es_.vectors.adjoint()) {}

CVector SpectralPropagator::apply(const CVector& psi0, double t) const {
  if (psi0.size() != es_.values.size()) {
    throw std::invalid_argument("SpectralPropagator::apply: dimension mismatch");
  }
  CVector c = vectors_adj_ * psi0;
  for (Index k = 0; k < c.size(); ++k) c[k] *= std::exp(-kI * es_.values[k] * t);
  return es_.vectors * c;
}

CMatrix SpectralPropagator::unitary(double t) const {
  CVector phases(es_.values.size());
  for (Index k = 0; k < phases.size(); ++k) phases[k] = std::exp(-kI * es_.values[k] * t);
  return es_.vectors * phases.asDiagonal() * vectors_adj_;
}

CMatrix nearest_unitary(const CMatrix& u) {
  Eigen::JacobiSVD<CMatrix> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace lgtsim
