#pragma once

#include <span>
#include <vector>

namespace kdv5 {

/// Square banded matrix with kl sub- and ku super-diagonals, stored in the
/// LAPACK general-band layout with room for the LU fill-in.
class BandedMatrix {
 public:
  BandedMatrix(int n, int kl, int ku);

  int size() const { return n_; }
  double& operator()(int row, int col);
  double operator()(int row, int col) const;
  void add(int row, int col, double value) { (*this)(row, col) += value; }
  bool in_band(int row, int col) const { return col - row <= ku_ && row - col <= kl_; }

  /// Solves A x = rhs in place (A is overwritten by its LU factors).
  /// Throws IllConditioned on an exactly singular pivot.
  void solve_in_place(std::span<double> rhs);

 private:
  int n_, kl_, ku_, ldab_;
  std::vector<double> ab_;
};

}  // namespace kdv5
