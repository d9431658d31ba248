#include "doctest.h"

#include <limits>

#include "cbrc/detail/cones.hpp"
#include "cbrc/oracle.hpp"

using namespace cbrc;
using namespace cbrc::detail;

namespace {

ConeDims mixed() {
  ConeDims d;
  d.nonneg = 3;
  d.soc = {3, 4};
  return d;
}

Vector random_interior(Rng& rng, const ConeSet& cones) {
  Vector x(cones.size());
  for (Eigen::Index i = 0; i < cones.dims().nonneg; ++i) x(i) = rng.uniform(0.1, 3.0);
  for (std::size_t k = 0; k < cones.dims().soc.size(); ++k) {
    Eigen::Index off = cones.soc_offsets()[k];
    Eigen::Index q = cones.dims().soc[k];
    double norm = 0.0;
    for (Eigen::Index i = 1; i < q; ++i) {
      x(off + i) = rng.uniform(-1.0, 1.0);
      norm += x(off + i) * x(off + i);
    }
    x(off) = std::sqrt(norm) + rng.uniform(0.05, 2.0);
  }
  return x;
}

}  // namespace

TEST_CASE("cone identity and interior test") {
  ConeSet cones(mixed());
  CHECK(cones.size() == 10);
  CHECK(cones.degree() == 5);
  Vector e = cones.identity();
  CHECK(cones.interior(e));
  CHECK(cones.interior_margin(e) == doctest::Approx(-1.0));

  Vector x = e;
  x(4) = 0.0;
  x(3) = 0.5;
  x(5) = 0.6;
  CHECK_FALSE(cones.interior(x));
}

TEST_CASE("jordan product and division are inverse") {
  ConeSet cones(mixed());
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Vector lambda = random_interior(rng, cones);
    Vector v = Vector::NullaryExpr(cones.size(), [&] { return rng.uniform(-1.0, 1.0); });
    Vector x = cones.divide(lambda, v);
    CHECK((cones.product(lambda, x) - v).norm() <= 1e-10 * std::max(1.0, v.norm()));
  }
  Vector e = cones.identity();
  Vector v = Vector::LinSpaced(cones.size(), 1.0, 2.0);
  CHECK((cones.product(e, v) - v).norm() <= 1e-14);
}

TEST_CASE("maximum step to the boundary") {
  ConeDims d;
  d.nonneg = 2;
  ConeSet orth(d);
  Vector x(2), dx(2);
  x << 1, 2;
  dx << -0.5, 1;
  CHECK(orth.max_step(x, dx) == doctest::Approx(2.0));
  dx << 1, 1;
  CHECK(orth.max_step(x, dx) == std::numeric_limits<double>::infinity());

  ConeDims q;
  q.soc = {2};
  ConeSet soc(q);
  Vector y(2), dy(2);
  y << 2, 0;
  dy << -1, 1;  // boundary where 2 - a = a
  CHECK(soc.max_step(y, dy) == doctest::Approx(1.0));

  ConeSet cones(mixed());
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x0 = random_interior(rng, cones);
    Vector dir = Vector::NullaryExpr(cones.size(), [&] { return rng.uniform(-2.0, 2.0); });
    double a = cones.max_step(x0, dir);
    if (!std::isfinite(a)) continue;
    CHECK(cones.interior(x0 + 0.99 * a * dir));
    CHECK_FALSE(cones.interior(x0 + 1.01 * a * dir));
  }
}

TEST_CASE("nesterov-todd scaling maps s and z to the same point") {
  ConeSet cones(mixed());
  Rng rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    Vector s = random_interior(rng, cones);
    Vector z = random_interior(rng, cones);
    NtScaling w;
    REQUIRE(w.compute(cones, s, z));
    Vector wz = w.apply(z);
    Vector winv_s = w.apply_inverse(s);
    CHECK((wz - winv_s).norm() <= 1e-10 * std::max(1.0, wz.norm()));
    CHECK((w.lambda() - wz).norm() <= 1e-10 * std::max(1.0, wz.norm()));
    CHECK((w.apply_inverse(w.apply(s)) - s).norm() <= 1e-10 * s.norm());
    Vector v = Vector::NullaryExpr(cones.size(), [&] { return rng.uniform(-1.0, 1.0); });
    CHECK((w.apply_w2(v) - w.apply(w.apply(v))).norm() <= 1e-10 * std::max(1.0, w.apply_w2(v).norm()));
    CHECK(cones.interior(w.lambda()));
  }
  NtScaling bad;
  Vector s = cones.identity();
  s(0) = -1.0;
  CHECK_FALSE(bad.compute(cones, s, cones.identity()));
}
