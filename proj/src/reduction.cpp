#include "cbrc/reduction.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace cbrc {

ArtificialProblem build_artificial(std::shared_ptr<const CbrcProblem> problem) {
  if (!problem) throw DomainError("build_artificial: null problem");
  ArtificialProblem ap;
  ap.base_ = problem;
  const std::size_t s = problem->s();
  const std::size_t d = problem->space()->size();
  const Eigen::Index p = problem->p();
  const Matrix& f = problem->f().rows();

  for (std::size_t j = 0; j < s; ++j) {
    const CbrcTerm& term = problem->terms()[j];
    Matrix k;
    try {
      k = cholesky(term.h);
    } catch (const SingularError&) {
      throw DomainError("H_" + std::to_string(j + 1) + " is not positive definite");
    }
    // C = K^{-1} B K^{-T}
    const Matrix kb = lower_solve(k, term.b.mat());
    const SymMatrix c = SymMatrix::symmetrized(lower_solve(k, kb.transpose()));
    const SymEig eig = sym_eig(c);
    const double thr = rank_threshold(eig.values, p);
    std::size_t r = 0;
    if (eig.values(0) > 0.0) {
      while (r < static_cast<std::size_t>(p) && eig.values(static_cast<Eigen::Index>(r)) >= thr) ++r;
    }
    Matrix u(p, static_cast<Eigen::Index>(r));
    for (std::size_t q = 0; q < r; ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      u.col(qi) = std::sqrt(eig.values(qi)) * eig.vectors.col(qi);
    }
    ap.factors_.push_back(std::move(k));
    ap.aux_.push_back(std::move(u));
    ap.ranks_.push_back(r);
  }

  std::size_t total_aux = 0;
  for (std::size_t r : ap.ranks_) total_aux += r;
  const std::size_t n_ext = s * d + total_aux;
  const Eigen::Index sp = static_cast<Eigen::Index>(s) * p;
  ap.f_tilde_ = Matrix::Zero(static_cast<Eigen::Index>(n_ext), sp);
  ap.points_.reserve(n_ext);

  std::vector<DesignPoint> ext_pts;
  ext_pts.reserve(n_ext);
  for (std::size_t j = 0; j < s; ++j) {
    // rows K_j^{-1} f(x) for every x at once
    const Matrix ft = lower_solve(ap.factors_[j], f.transpose()).transpose();
    for (std::size_t x = 0; x < d; ++x) {
      const std::size_t row = j * d + x;
      ap.f_tilde_.row(static_cast<Eigen::Index>(row)).segment(static_cast<Eigen::Index>(j) * p, p) =
          ft.row(static_cast<Eigen::Index>(x));
      const DesignPoint& base_pt = problem->space()->point(x);
      std::string label = "(" + std::to_string(j + 1) + "," + base_pt.label + ")";
      ap.points_.push_back({ExtendedPoint::Kind::Copy, j, x, label});
      ext_pts.push_back({std::move(label), base_pt.coordinate});
    }
  }
  std::size_t offset = s * d;
  for (std::size_t j = 0; j < s; ++j) {
    ap.aux_offset_.push_back(offset);
    for (std::size_t k = 0; k < ap.ranks_[j]; ++k) {
      ap.f_tilde_.row(static_cast<Eigen::Index>(offset + k)).segment(static_cast<Eigen::Index>(j) * p, p) =
          ap.aux_[j].col(static_cast<Eigen::Index>(k)).transpose();
      std::string label = "y" + std::to_string(j + 1) + "_" + std::to_string(k + 1);
      ap.points_.push_back({ExtendedPoint::Kind::Auxiliary, j, k, label});
      ext_pts.push_back({std::move(label), {}});
    }
    offset += ap.ranks_[j];
  }
  ap.extended_space_ = std::make_shared<const DesignSpace>(std::move(ext_pts));

  const LinearConstraintSet& base_c = problem->constraints();
  LinearConstraintSet lifted(n_ext);
  for (std::size_t j = 1; j < s; ++j) {
    for (std::size_t x = 0; x < d; ++x) {
      std::vector<double> coef(n_ext, 0.0);
      coef[ap.copy_index(j, x)] = 1.0;
      coef[ap.copy_index(0, x)] = -1.0;
      lifted.add_row({std::move(coef), Relation::Equal, 0.0,
                      "coupling(" + std::to_string(j + 1) + "," + problem->space()->point(x).label + ")"});
    }
  }
  ap.num_coupling_ = lifted.rows().size();
  for (const auto& row : base_c.rows()) {
    std::vector<double> coef(n_ext, 0.0);
    std::copy(row.coefficients.begin(), row.coefficients.end(), coef.begin());
    lifted.add_row({std::move(coef), row.relation, row.rhs, row.name});
  }
  if (base_c.total_trials()) {
    std::vector<double> coef(n_ext, 0.0);
    std::fill(coef.begin(), coef.begin() + static_cast<std::ptrdiff_t>(d), 1.0);
    lifted.add_row({std::move(coef), base_c.total_trials()->relation, base_c.total_trials()->value, "total_trials"});
  }
  for (std::size_t x = 0; x < d; ++x) lifted.set_bounds(x, base_c.lower()[x], base_c.upper()[x]);
  for (std::size_t i = s * d; i < n_ext; ++i) lifted.set_bounds(i, 1.0, 1.0);
  lifted.set_integrality(false);
  ap.constraints_ = std::move(lifted);
  return ap;
}

ArtificialProblem build_artificial(const CbrcProblem& problem) {
  return build_artificial(std::make_shared<const CbrcProblem>(problem));
}

SymMatrix information_matrix_artificial(const ArtificialProblem& ap, const std::vector<double>& xi_tilde) {
  const Matrix& ft = ap.f_tilde();
  if (static_cast<Eigen::Index>(xi_tilde.size()) != ft.rows()) {
    throw DomainError("extended design has wrong length");
  }
  Matrix m = Matrix::Zero(ft.cols(), ft.cols());
  for (Eigen::Index i = 0; i < ft.rows(); ++i) {
    const double w = xi_tilde[static_cast<std::size_t>(i)];
    if (w != 0.0) m.noalias() += w * ft.row(i).transpose() * ft.row(i);
  }
  return SymMatrix::symmetrized(m);
}

CriterionValue a_criterion(const ArtificialProblem& ap, const std::vector<double>& xi_tilde) {
  const Matrix m = information_matrix_artificial(ap, xi_tilde).mat();
  const auto n = static_cast<std::size_t>(m.rows());
  const auto at = [&m](std::size_t i, std::size_t j) { return m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); };
  // M~ is block diagonal up to exact zeros; the trace of the inverse is the sum
  // over connected blocks, each judged for rank on its own scale.
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto root = [&parent](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (at(i, j) != 0.0) parent[root(i)] = root(j);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (root(r) != r) continue;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (root(i) == r) idx.push_back(i);
    const auto k = static_cast<Eigen::Index>(idx.size());
    Matrix block(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b) block(a, b) = at(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    try {
      total += trace_of_inverse_product(SymMatrix::symmetrized(block), SymMatrix::identity(k));
    } catch (const SingularError&) {
      return CriterionValue::infinite();
    }
  }
  return CriterionValue::finite(total);
}

std::vector<double> lift_design(const ArtificialProblem& ap, const Design& xi) {
  const std::size_t d = ap.num_original();
  if (xi.size() != d) throw DomainError("lift_design: design is over a different space");
  std::vector<double> out(ap.extended_points().size(), 0.0);
  for (std::size_t j = 0; j < ap.s(); ++j) {
    for (std::size_t x = 0; x < d; ++x) out[ap.copy_index(j, x)] = xi[x];
  }
  for (std::size_t i = ap.s() * d; i < out.size(); ++i) out[i] = 1.0;
  return out;
}

Design recover_design(const ArtificialProblem& ap, const std::vector<double>& xi_tilde, double tol) {
  const std::size_t d = ap.num_original();
  if (xi_tilde.size() != ap.extended_points().size()) throw DomainError("recover_design: wrong extended length");
  std::ostringstream bad;
  std::size_t nbad = 0;
  for (std::size_t j = 1; j < ap.s(); ++j) {
    for (std::size_t x = 0; x < d; ++x) {
      if (std::abs(xi_tilde[ap.copy_index(j, x)] - xi_tilde[ap.copy_index(0, x)]) > tol && nbad++ < 5) {
        bad << " coupling(" << j + 1 << "," << ap.base().space()->point(x).label << ")";
      }
    }
  }
  for (std::size_t i = ap.s() * d; i < xi_tilde.size(); ++i) {
    if (std::abs(xi_tilde[i] - 1.0) > tol && nbad++ < 5) bad << " fixed(" << ap.extended_points()[i].label << ")";
  }
  if (nbad > 0) {
    throw InfeasibleError("extended design violates " + std::to_string(nbad) + " reduction constraint(s):" + bad.str());
  }
  std::vector<double> w(xi_tilde.begin(), xi_tilde.begin() + static_cast<std::ptrdiff_t>(d));
  for (double& v : w) v = std::max(v, 0.0);
  return Design(ap.base().space(), std::move(w));
}

}  // namespace cbrc
