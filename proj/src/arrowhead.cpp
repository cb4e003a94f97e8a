#include "mesofcs/arrowhead.hpp"

namespace mesofcs {

CMatrix ArrowheadHamiltonian::dense() const {
  const Index l = system_size();
  const Index n = dimension();
  CMatrix h = CMatrix::Zero(n, n);
  h.topLeftCorner(l, l) = system;
  for (Index k = 0; k < lead_energy.size(); ++k) {
    h(l + k, l + k) = lead_energy(k);
    h(lead_site[k], l + k) = lead_coupling(k);
    h(l + k, lead_site[k]) = lead_coupling(k);
  }
  return h;
}

CMatrix ArrowheadHamiltonian::multiply(const CMatrix& m) const {
  const Index l = system_size();
  const Index n = dimension();
  CMatrix out(n, m.cols());
  out.topRows(l).noalias() = system * m.topRows(l);
  for (const Block& b : blocks) {
    const auto kappa = lead_coupling.segment(b.offset - l, b.size).cast<Complex>();
    out.row(b.site).noalias() += kappa.transpose() * m.middleRows(b.offset, b.size);
    out.middleRows(b.offset, b.size) =
        lead_energy.segment(b.offset - l, b.size).cast<Complex>().asDiagonal() *
            m.middleRows(b.offset, b.size) +
        kappa * m.row(b.site);
  }
  return out;
}

CMatrix ArrowheadHamiltonian::multiply_right(const CMatrix& m) const {
  return multiply(m.adjoint()).adjoint();
}

void ArrowheadHamiltonian::system_stripes(const CMatrix& m, CMatrix& hm_rows,
                                          CMatrix& mh_cols) const {
  const Index l = system_size();
  hm_rows.noalias() = system * m.topRows(l);
  mh_cols.noalias() = m.leftCols(l) * system;
  for (const Block& b : blocks) {
    const auto kappa = lead_coupling.segment(b.offset - l, b.size).cast<Complex>();
    hm_rows.row(b.site).noalias() += kappa.transpose() * m.middleRows(b.offset, b.size);
    mh_cols.col(b.site).noalias() += m.middleCols(b.offset, b.size) * kappa;
  }
}

CMatrix ArrowheadHamiltonian::commutator(const CMatrix& m) const {
  const Index l = system_size();
  const Index n = dimension();
  CMatrix hm_rows(l, n);
  CMatrix mh_cols(n, l);
  system_stripes(m, hm_rows, mh_cols);

  CMatrix out(n, n);
  for (Index j = 0; j < n; ++j) {
    if (j < l) {
      for (Index i = 0; i < l; ++i) out(i, j) = hm_rows(i, j) - mh_cols(i, j);
      for (Index i = l; i < n; ++i) {
        const Index k = i - l;
        out(i, j) = lead_energy(k) * m(i, j) + lead_coupling(k) * m(lead_site[k], j) -
                    mh_cols(i, j);
      }
      continue;
    }
    const Index kj = j - l;
    const double eps_j = lead_energy(kj);
    const double kappa_j = lead_coupling(kj);
    const Index site_j = lead_site[kj];
    for (Index i = 0; i < l; ++i) {
      out(i, j) = hm_rows(i, j) - (m(i, j) * eps_j + m(i, site_j) * kappa_j);
    }
    for (Index i = l; i < n; ++i) {
      const Index k = i - l;
      out(i, j) = (lead_energy(k) - eps_j) * m(i, j) +
                  lead_coupling(k) * m(lead_site[k], j) - kappa_j * m(i, site_j);
    }
  }
  return out;
}

}  // namespace mesofcs
