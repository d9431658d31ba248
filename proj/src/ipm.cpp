#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "cbrc/conic.hpp"
#include "cbrc/detail/cones.hpp"

namespace cbrc {

std::string to_string(ConicStatus s) {
  switch (s) {
    case ConicStatus::Optimal: return "optimal";
    case ConicStatus::Infeasible: return "infeasible";
    case ConicStatus::Unbounded: return "unbounded";
    case ConicStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

using detail::ConeSet;
using detail::NtScaling;
using Triplet = Eigen::Triplet<double>;

// Regularized quasi-definite KKT system
//   [ d I   A^T      G^T      ] [x]   [rx]
//   [ A    -d I      0        ] [y] = [ry]
//   [ G     0    -(W^2 + d I) ] [z]   [rz]
// factored by sparse LDL^T; solves are refined against the unregularized matrix.
class KktSolver {
 public:
  KktSolver(const ConicProgram& cp, const ConeSet& cones)
      : cp_(cp), cones_(cones), n_(cp.c.size()), meq_(cp.a.rows()), mg_(cp.g.rows()) {
    // Static part of the lower triangle.
    for (Eigen::Index k = 0; k < cp.a.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(cp.a, k); it; ++it) base_.emplace_back(n_ + it.row(), it.col(), it.value());
    }
    for (Eigen::Index k = 0; k < cp.g.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(cp.g, k); it; ++it) {
        base_.emplace_back(n_ + meq_ + it.row(), it.col(), it.value());
      }
    }
  }

  bool factor(const NtScaling& w, double reg) {
    reg_ = reg;
    w_ = &w;
    std::vector<Triplet> t = base_;
    const Eigen::Index dim = n_ + meq_ + mg_;
    t.reserve(t.size() + static_cast<std::size_t>(dim) + 6 * cones_.dims().soc.size());
    for (Eigen::Index i = 0; i < n_; ++i) t.emplace_back(i, i, reg);
    for (Eigen::Index i = 0; i < meq_; ++i) t.emplace_back(n_ + i, n_ + i, -reg);
    const Eigen::Index z0 = n_ + meq_;
    const Eigen::Index l = cones_.dims().nonneg;
    for (Eigen::Index i = 0; i < l; ++i) t.emplace_back(z0 + i, z0 + i, -w.nonneg_w2()(i) - reg);
    for (std::size_t c = 0; c < cones_.dims().soc.size(); ++c) {
      const Eigen::Index off = z0 + cones_.soc_offsets()[c];
      const Matrix& w2 = w.soc_w2(c);
      for (Eigen::Index col = 0; col < w2.cols(); ++col) {
        for (Eigen::Index row = col; row < w2.rows(); ++row) {
          t.emplace_back(off + row, off + col, -w2(row, col) - (row == col ? reg : 0.0));
        }
      }
    }
    SparseMatrix k(dim, dim);
    k.setFromTriplets(t.begin(), t.end());
    if (!analyzed_) {
      ldlt_.analyzePattern(k);
      analyzed_ = true;
    }
    ldlt_.factorize(k);
    return ldlt_.info() == Eigen::Success;
  }

  /// Solves the unregularized system for rhs (rx, ry, rz).
  void solve(const Vector& rx, const Vector& ry, const Vector& rz, Vector& x, Vector& y, Vector& z) const {
    const Eigen::Index dim = n_ + meq_ + mg_;
    Vector rhs(dim);
    rhs << rx, ry, rz;
    Vector sol = ldlt_.solve(rhs);
    const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < 10; ++it) {
      const Vector r = rhs - multiply(sol);
      const double err = r.lpNorm<Eigen::Infinity>();
      if (err <= 1e-14 * scale) break;
      sol += ldlt_.solve(r);
    }
    x = sol.head(n_);
    y = sol.segment(n_, meq_);
    z = sol.tail(mg_);
  }

 private:
  Vector multiply(const Vector& v) const {
    const auto vx = v.head(n_);
    const auto vy = v.segment(n_, meq_);
    const Vector vz = v.tail(mg_);
    Vector out(v.size());
    out.head(n_) = cp_.a.transpose() * vy + cp_.g.transpose() * vz;
    out.segment(n_, meq_) = cp_.a * vx;
    out.tail(mg_) = cp_.g * vx - w_->apply_w2(vz);
    return out;
  }

  const ConicProgram& cp_;
  const ConeSet& cones_;
  Eigen::Index n_, meq_, mg_;
  std::vector<Triplet> base_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt_;
  bool analyzed_ = false;
  double reg_ = 0.0;
  const NtScaling* w_ = nullptr;
};

double safe_norm(const Vector& v) { return v.size() ? v.norm() : 0.0; }

}  // namespace

ConicSolution solve(const ConicProgram& cp, double tol) {
  ConicOptions o;
  o.tol = tol;
  return solve(cp, o);
}

ConicSolution solve(const ConicProgram& cp, const ConicOptions& options) {
  if (!(options.tol > 0.0)) throw DomainError("solver tolerance must be > 0");
  const Eigen::Index n = cp.c.size();
  const Eigen::Index meq = cp.a.rows();
  const Eigen::Index mg = cp.g.rows();
  if (cp.a.cols() != n || cp.g.cols() != n || cp.b.size() != meq || cp.h.size() != mg || cp.cones.size() != mg) {
    throw DomainError("conic program has inconsistent dimensions");
  }
  const ConeSet cones(cp.cones);
  const double degree = static_cast<double>(cones.degree());
  const double feastol = options.tol;
  const double abstol = options.tol;
  const double reltol = options.tol;
  const double b_norm = std::max(1.0, safe_norm(cp.b));
  const double h_norm = std::max(1.0, safe_norm(cp.h));
  const double c_norm = std::max(1.0, safe_norm(cp.c));

  KktSolver kkt(cp, cones);
  NtScaling w;
  ConicSolution out;

  // Initial point: least-norm primal and dual starts with identity scaling.
  Vector x, y, z, s;
  {
    NtScaling ident;
    ident.compute(cones, cones.identity(), cones.identity());
    double reg = 1e-10;
    while (!kkt.factor(ident, reg)) {
      reg *= 100.0;
      if (reg > 1e-2) return out;
    }
    Vector xp, yp, zp;
    kkt.solve(Vector::Zero(n), cp.b, cp.h, xp, yp, zp);
    s = -zp;
    x = xp;
    Vector xd, yd, zd;
    kkt.solve(-cp.c, Vector::Zero(meq), Vector::Zero(mg), xd, yd, zd);
    y = yd;
    z = zd;
    const Vector e = cones.identity();
    const double ap = cones.interior_margin(s);
    if (ap >= 0.0) s += (1.0 + ap) * e;
    const double ad = cones.interior_margin(z);
    if (ad >= 0.0) z += (1.0 + ad) * e;
  }
  double tau = 1.0;
  double kappa = 1.0;
  const Vector e = cones.identity();

  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    const Vector rx = cp.a.transpose() * y + cp.g.transpose() * z + tau * cp.c;
    const Vector ry = cp.a * x - tau * cp.b;
    const Vector rz = cp.g * x + s - tau * cp.h;
    const double cx = cp.c.dot(x);
    const double by_hz = cp.b.dot(y) + cp.h.dot(z);
    const double rt = cx + by_hz + kappa;
    const double sz = s.dot(z);
    const double mu = (sz + tau * kappa) / (degree + 1.0);

    const double pcost = cx / tau;
    const double dcost = -by_hz / tau;
    // Residuals relative to the size of the terms they balance.
    const Vector ax = cp.a * x;
    const Vector gx = cp.g * x;
    const double py_scale = std::max(b_norm, safe_norm(ax) / tau);
    const double pz_scale = std::max({h_norm, safe_norm(gx) / tau, safe_norm(s) / tau});
    const double d_scale = std::max({c_norm, safe_norm(Vector(cp.a.transpose() * y)) / tau,
                                     safe_norm(Vector(cp.g.transpose() * z)) / tau});
    const double pres = std::max(safe_norm(ry) / py_scale, safe_norm(rz) / pz_scale) / tau;
    const double dres = safe_norm(rx) / d_scale / tau;
    const double gap = sz / (tau * tau);
    double relgap = std::numeric_limits<double>::infinity();
    if (pcost < 0.0) relgap = gap / -pcost;
    else if (dcost > 0.0) relgap = gap / dcost;

    out.iterations = iter;
    if (options.verbose) {
      std::fprintf(stderr, "ipm %3d pcost % .10e dcost % .10e gap %.2e pres %.2e dres %.2e tau %.2e kap %.2e\n", iter,
                   pcost, dcost, gap, pres, dres, tau, kappa);
    }

    if (pres <= feastol && dres <= feastol && (gap <= abstol || relgap <= reltol)) {
      out.status = ConicStatus::Optimal;
      out.x = x / tau;
      out.y = y / tau;
      out.z = z / tau;
      out.s = s / tau;
      out.primal_objective = pcost;
      out.dual_objective = dcost;
      out.gap = gap;
      out.relative_gap = gap / std::max({std::abs(pcost), std::abs(dcost), 1e-300});
      out.primal_residual = pres;
      out.dual_residual = dres;
      return out;
    }
    // Infeasibility certificates.
    if (by_hz < 0.0) {
      const double pinf = safe_norm(Vector(cp.a.transpose() * y + cp.g.transpose() * z)) / c_norm;
      if (pinf <= feastol * -by_hz) {
        out.status = ConicStatus::Infeasible;
        out.y = y / -by_hz;
        out.z = z / -by_hz;
        return out;
      }
    }
    if (cx < 0.0) {
      const double dinf = std::max(safe_norm(Vector(cp.a * x)) / b_norm, safe_norm(Vector(cp.g * x + s)) / h_norm);
      if (dinf <= feastol * -cx) {
        out.status = ConicStatus::Unbounded;
        out.x = x / -cx;
        out.s = s / -cx;
        return out;
      }
    }
    if (iter == options.max_iterations) break;

    if (!w.compute(cones, s, z)) break;
    double reg = 1e-10;
    while (!kkt.factor(w, reg)) {
      reg *= 100.0;
      if (reg > 1e-2) {
        out.status = ConicStatus::NumericalFailure;
        return out;
      }
    }
    const Vector& lambda = w.lambda();

    // Direction multiplying d tau.
    Vector x1, y1, z1;
    kkt.solve(-cp.c, cp.b, cp.h, x1, y1, z1);
    const double denom = cp.c.dot(x1) + cp.b.dot(y1) + cp.h.dot(z1) - kappa / tau;

    struct Step {
      Vector dx, dy, dz, ds;
      double dtau, dkappa;
    };
    auto direction = [&](double sigma, const Vector& ds_target, double dkappa_target) {
      const double f = 1.0 - sigma;
      const Vector shat = cones.divide(lambda, ds_target);
      Vector x2, y2, z2;
      kkt.solve(-f * rx, -f * ry, Vector(-f * rz - w.apply(shat)), x2, y2, z2);
      const double dtau_rhs = -f * rt;
      const double dtau =
          (dtau_rhs - dkappa_target / tau - (cp.c.dot(x2) + cp.b.dot(y2) + cp.h.dot(z2))) / denom;
      Step st;
      st.dx = x2 + dtau * x1;
      st.dy = y2 + dtau * y1;
      st.dz = z2 + dtau * z1;
      st.ds = w.apply(Vector(shat - w.apply(st.dz)));
      st.dtau = dtau;
      st.dkappa = (dkappa_target - kappa * dtau) / tau;
      return st;
    };
    auto step_length = [&](const Step& st) {
      double a = std::min(cones.max_step(s, st.ds), cones.max_step(z, st.dz));
      if (st.dtau < 0.0) a = std::min(a, -tau / st.dtau);
      if (st.dkappa < 0.0) a = std::min(a, -kappa / st.dkappa);
      return a;
    };

    // Predictor.
    const Vector ll = cones.product(lambda, lambda);
    const Step aff = direction(0.0, -ll, -tau * kappa);
    const double alpha_aff = std::min(1.0, step_length(aff));
    double sigma = std::pow(1.0 - alpha_aff, 3);
    sigma = std::clamp(sigma, 1e-8, 1.0);

    // Corrector.
    const Vector corr = cones.product(w.apply_inverse(aff.ds), w.apply(aff.dz));
    const Vector ds_target = -ll - corr + sigma * mu * e;
    const double dk_target = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
    const Step st = direction(sigma, ds_target, dk_target);
    double alpha = std::min(1.0, 0.99 * step_length(st));
    if (!(alpha > 1e-14)) break;

    x += alpha * st.dx;
    y += alpha * st.dy;
    z += alpha * st.dz;
    s += alpha * st.ds;
    tau += alpha * st.dtau;
    kappa += alpha * st.dkappa;
    if (!cones.interior(s) || !cones.interior(z) || !(tau > 0.0) || !(kappa > 0.0)) break;
  }

  out.status = ConicStatus::NumericalFailure;
  out.x = x / tau;
  out.y = y / tau;
  out.z = z / tau;
  out.s = s / tau;
  out.primal_objective = cp.c.dot(x) / tau;
  out.dual_objective = -(cp.b.dot(y) + cp.h.dot(z)) / tau;
  out.gap = s.dot(z) / (tau * tau);
  out.relative_gap = out.gap / std::max({std::abs(out.primal_objective), std::abs(out.dual_objective), 1e-300});
  return out;
}

}  // namespace cbrc
