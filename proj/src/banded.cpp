#include "kdv5/banded.hpp"

#include <string>

#include "kdv5/errors.hpp"

extern "C" void dgbsv_(const int* n, const int* kl, const int* ku, const int* nrhs, double* ab,
                       const int* ldab, int* ipiv, double* b, const int* ldb, int* info);

namespace kdv5 {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1), ab_(static_cast<std::size_t>(ldab_) * n, 0.0) {
  if (n <= 0 || kl < 0 || ku < 0) throw ValidationError("bad banded matrix shape");
}

double& BandedMatrix::operator()(int row, int col) {
  if (!in_band(row, col)) throw ValidationError("banded matrix access outside the band");
  return ab_[static_cast<std::size_t>(col) * ldab_ + (kl_ + ku_ + row - col)];
}

double BandedMatrix::operator()(int row, int col) const {
  if (!in_band(row, col)) return 0.0;
  return ab_[static_cast<std::size_t>(col) * ldab_ + (kl_ + ku_ + row - col)];
}

void BandedMatrix::solve_in_place(std::span<double> rhs) {
  if (static_cast<int>(rhs.size()) != n_) throw ValidationError("rhs length does not match matrix");
  std::vector<int> ipiv(n_);
  const int nrhs = 1;
  int info = 0;
  dgbsv_(&n_, &kl_, &ku_, &nrhs, ab_.data(), &ldab_, ipiv.data(), rhs.data(), &n_, &info);
  if (info > 0) throw IllConditioned("banded LU: zero pivot at row " + std::to_string(info));
  if (info < 0) throw ValidationError("dgbsv: bad argument " + std::to_string(-info));
}

}  // namespace kdv5
