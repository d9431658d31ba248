#include "cbrc/detail/cones.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cbrc {

Eigen::Index ConeDims::size() const {
  Eigen::Index n = nonneg;
  for (Eigen::Index q : soc) n += q;
  return n;
}

}  // namespace cbrc

namespace cbrc::detail {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double soc_residual(const Eigen::Ref<const Vector>& x) { return x(0) * x(0) - x.tail(x.size() - 1).squaredNorm(); }

// Smallest positive root of a t^2 + 2 b t + c with c > 0, or +inf.
double first_positive_root(double a, double b, double c) {
  if (a == 0.0) return b < 0.0 ? -c / (2.0 * b) : kInf;
  const double disc = b * b - a * c;
  if (disc < 0.0) return kInf;
  const double sq = std::sqrt(disc);
  // stable pair of roots
  const double qq = -(b + std::copysign(sq, b));
  double r1 = qq / a;
  double r2 = qq != 0.0 ? c / qq : kInf;
  double best = kInf;
  if (r1 > 0.0) best = std::min(best, r1);
  if (r2 > 0.0) best = std::min(best, r2);
  return best;
}
}  // namespace

ConeSet::ConeSet(const ConeDims& dims) : dims_(dims), size_(dims.size()) {
  Eigen::Index off = dims.nonneg;
  for (Eigen::Index q : dims.soc) {
    offsets_.push_back(off);
    off += q;
  }
}

Vector ConeSet::identity() const {
  Vector e = Vector::Zero(size_);
  e.head(dims_.nonneg).setOnes();
  for (Eigen::Index off : offsets_) e(off) = 1.0;
  return e;
}

double ConeSet::interior_margin(const Vector& x) const {
  double m = -kInf;
  for (Eigen::Index i = 0; i < dims_.nonneg; ++i) m = std::max(m, -x(i));
  for (std::size_t c = 0; c < offsets_.size(); ++c) {
    const auto seg = x.segment(offsets_[c], dims_.soc[c]);
    m = std::max(m, seg.tail(seg.size() - 1).norm() - seg(0));
  }
  return m;
}

bool ConeSet::interior(const Vector& x) const {
  for (Eigen::Index i = 0; i < dims_.nonneg; ++i) {
    if (!(x(i) > 0.0)) return false;
  }
  for (std::size_t c = 0; c < offsets_.size(); ++c) {
    const auto seg = x.segment(offsets_[c], dims_.soc[c]);
    if (!(seg(0) > 0.0) || !(soc_residual(seg) > 0.0)) return false;
  }
  return true;
}

double ConeSet::max_step(const Vector& x, const Vector& dx) const {
  double alpha = kInf;
  for (Eigen::Index i = 0; i < dims_.nonneg; ++i) {
    if (dx(i) < 0.0) alpha = std::min(alpha, -x(i) / dx(i));
  }
  for (std::size_t c = 0; c < offsets_.size(); ++c) {
    const Eigen::Index q = dims_.soc[c];
    const auto xs = x.segment(offsets_[c], q);
    const auto ds = dx.segment(offsets_[c], q);
    const double a = ds(0) * ds(0) - ds.tail(q - 1).squaredNorm();
    const double b = xs(0) * ds(0) - xs.tail(q - 1).dot(ds.tail(q - 1));
    const double cc = soc_residual(xs);
    double step = first_positive_root(a, b, std::max(cc, 0.0));
    if (ds(0) < 0.0) step = std::min(step, -xs(0) / ds(0));
    alpha = std::min(alpha, step);
  }
  return alpha;
}

Vector ConeSet::product(const Vector& u, const Vector& v) const {
  Vector out(size_);
  const Eigen::Index l = dims_.nonneg;
  out.head(l) = u.head(l).cwiseProduct(v.head(l));
  for (std::size_t c = 0; c < offsets_.size(); ++c) {
    const Eigen::Index off = offsets_[c];
    const Eigen::Index q = dims_.soc[c];
    out(off) = u.segment(off, q).dot(v.segment(off, q));
    out.segment(off + 1, q - 1) = u(off) * v.segment(off + 1, q - 1) + v(off) * u.segment(off + 1, q - 1);
  }
  return out;
}

Vector ConeSet::divide(const Vector& lambda, const Vector& v) const {
  Vector out(size_);
  const Eigen::Index l = dims_.nonneg;
  out.head(l) = v.head(l).cwiseQuotient(lambda.head(l));
  for (std::size_t c = 0; c < offsets_.size(); ++c) {
    const Eigen::Index off = offsets_[c];
    const Eigen::Index q = dims_.soc[c];
    const double l0 = lambda(off);
    const auto l1 = lambda.segment(off + 1, q - 1);
    const auto v1 = v.segment(off + 1, q - 1);
    const double det = l0 * l0 - l1.squaredNorm();
    const double x0 = (l0 * v(off) - l1.dot(v1)) / det;
    out(off) = x0;
    out.segment(off + 1, q - 1) = (v1 - x0 * l1) / l0;
  }
  return out;
}

bool NtScaling::compute(const ConeSet& cones, const Vector& s, const Vector& z) {
  cones_ = &cones;
  const ConeDims& dims = cones.dims();
  const Eigen::Index l = dims.nonneg;
  lambda_.resize(cones.size());
  if ((s.head(l).array() <= 0.0).any() || (z.head(l).array() <= 0.0).any()) return false;
  nonneg_w2_ = s.head(l).cwiseQuotient(z.head(l));
  nonneg_w_ = nonneg_w2_.cwiseSqrt();
  lambda_.head(l) = s.head(l).cwiseProduct(z.head(l)).cwiseSqrt();

  const std::size_t ncones = dims.soc.size();
  eta_.resize(ncones);
  wbar_.resize(ncones);
  soc_w2_.resize(ncones);
  for (std::size_t c = 0; c < ncones; ++c) {
    const Eigen::Index off = cones.soc_offsets()[c];
    const Eigen::Index q = dims.soc[c];
    const auto sc = s.segment(off, q);
    const auto zc = z.segment(off, q);
    const double sres = soc_residual(sc);
    const double zres = soc_residual(zc);
    if (!(sc(0) > 0.0) || !(zc(0) > 0.0) || !(sres > 0.0) || !(zres > 0.0)) return false;
    const Vector sbar = sc / std::sqrt(sres);
    const Vector zbar = zc / std::sqrt(zres);
    const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
    Vector wb(q);
    wb(0) = (sbar(0) + zbar(0)) / (2.0 * gamma);
    wb.tail(q - 1) = (sbar.tail(q - 1) - zbar.tail(q - 1)) / (2.0 * gamma);
    const double eta = std::pow(sres / zres, 0.25);
    eta_[c] = eta;

    Matrix wm(q, q);
    wm(0, 0) = wb(0);
    wm.block(0, 1, 1, q - 1) = wb.tail(q - 1).transpose();
    wm.block(1, 0, q - 1, 1) = wb.tail(q - 1);
    wm.block(1, 1, q - 1, q - 1) = Matrix::Identity(q - 1, q - 1) +
                                   wb.tail(q - 1) * wb.tail(q - 1).transpose() / (1.0 + wb(0));
    soc_w2_[c] = eta * eta * (wm * wm);
    wbar_[c] = std::move(wb);
  }
  lambda_.tail(cones.size() - l) = apply(z).tail(cones.size() - l);
  return true;
}

Vector NtScaling::apply(const Vector& v) const {
  const ConeDims& dims = cones_->dims();
  Vector out(v.size());
  const Eigen::Index l = dims.nonneg;
  out.head(l) = v.head(l).cwiseProduct(nonneg_w_);
  for (std::size_t c = 0; c < wbar_.size(); ++c) {
    const Eigen::Index off = cones_->soc_offsets()[c];
    const Eigen::Index q = dims.soc[c];
    const Vector& wb = wbar_[c];
    const auto w1 = wb.tail(q - 1);
    const auto v1 = v.segment(off + 1, q - 1);
    const double w1v1 = w1.dot(v1);
    out(off) = eta_[c] * (wb(0) * v(off) + w1v1);
    out.segment(off + 1, q - 1) = eta_[c] * (v1 + (v(off) + w1v1 / (1.0 + wb(0))) * w1);
  }
  return out;
}

Vector NtScaling::apply_inverse(const Vector& v) const {
  const ConeDims& dims = cones_->dims();
  Vector out(v.size());
  const Eigen::Index l = dims.nonneg;
  out.head(l) = v.head(l).cwiseQuotient(nonneg_w_);
  for (std::size_t c = 0; c < wbar_.size(); ++c) {
    const Eigen::Index off = cones_->soc_offsets()[c];
    const Eigen::Index q = dims.soc[c];
    const Vector& wb = wbar_[c];
    const auto w1 = wb.tail(q - 1);
    const auto v1 = v.segment(off + 1, q - 1);
    const double w1v1 = w1.dot(v1);
    out(off) = (wb(0) * v(off) - w1v1) / eta_[c];
    out.segment(off + 1, q - 1) = (v1 + (-v(off) + w1v1 / (1.0 + wb(0))) * w1) / eta_[c];
  }
  return out;
}

Vector NtScaling::apply_w2(const Vector& v) const {
  const ConeDims& dims = cones_->dims();
  Vector out(v.size());
  const Eigen::Index l = dims.nonneg;
  out.head(l) = v.head(l).cwiseProduct(nonneg_w2_);
  for (std::size_t c = 0; c < soc_w2_.size(); ++c) {
    const Eigen::Index off = cones_->soc_offsets()[c];
    const Eigen::Index q = dims.soc[c];
    out.segment(off, q) = soc_w2_[c] * v.segment(off, q);
  }
  return out;
}

}  // namespace cbrc::detail
