#pragma once

#include <vector>

#include "mesofcs/common.hpp"

namespace mesofcs {

/// Hermitian matrix with a dense leading L x L block, a real diagonal
/// trailing block and real couplings linking every trailing mode k to one
/// leading mode site(k):
///
///   H = [ h_S    K ]      K(site(k), k) = kappa_k
///       [ K^T  diag(eps) ]
///
/// Products with a dense n x n matrix cost O(n^2) instead of O(n^3).
struct ArrowheadHamiltonian {
  struct Block {
    Index site = 0;
    Index offset = 0;  // first trailing index, counted in the full space
    Index size = 0;
  };

  CMatrix system;           // L x L
  RVector lead_energy;      // n - L
  RVector lead_coupling;    // n - L
  std::vector<Index> lead_site;  // n - L, leading-block index of each coupling
  std::vector<Block> blocks;     // contiguous runs sharing one site

  Index system_size() const { return system.rows(); }
  Index dimension() const { return system.rows() + lead_energy.size(); }

  CMatrix dense() const;

  /// H * M.
  CMatrix multiply(const CMatrix& m) const;
  /// M * H.
  CMatrix multiply_right(const CMatrix& m) const;
  /// H M - M H for arbitrary M.
  CMatrix commutator(const CMatrix& m) const;

  /// Leading L rows of H M (L x n) and leading L columns of M H (n x L);
  /// together with the local lead-lead rule these give any entry of [H, M].
  void system_stripes(const CMatrix& m, CMatrix& hm_rows, CMatrix& mh_cols) const;
};

}  // namespace mesofcs
