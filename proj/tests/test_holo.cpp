#include <cmath>

#include "doctest.h"
#include "heatflat/holo.hpp"

using namespace heatflat;
using namespace heatflat::holo;
using numkit::kPi;

TEST_CASE("constant function has norm approaching the area") {
  CoeffSeq one;
  one.a.push_back(LogScalar::one());
  auto r = bergman_norm_estimate(one, 1.0, OmegaDomain::default_margins());
  for (size_t i = 0; i < r.margins.size(); ++i) {
    double e = r.margins[i];
    CHECK(r.norm2[i] == doctest::Approx(2.0 * (1 - e) * (1 - e)).epsilon(1e-12));
  }
  CHECK(r.verdict == Membership::Convergent);
}

TEST_CASE("zero sequence") {
  CoeffSeq z;
  z.a.assign(50, LogScalar::zero());
  CHECK(z.all_zero());
  auto r = bergman_norm_estimate(z, 1.0, OmegaDomain::default_margins());
  CHECK(r.verdict == Membership::Convergent);
  CHECK(r.norm2.back() == 0.0);
  auto rr = radius_Ra(z);
  CHECK(rr.unbounded);
}

TEST_CASE("geometric sequence sums to a rational function") {
  auto c = seq_geometric(1.0, 4000);
  for (double R : {0.3, 0.5, 0.69}) {
    for (cplx z : {cplx(0.3, 0.1), cplx(-0.2, 0.6), cplx(0.9, 0.05), cplx(0.0, 0.95)}) {
      auto v = eval_series(c, z, R);
      cplx want = 1.0 / (1.0 - 2.0 * R * R * z * z);
      CHECK(std::abs(v.value - want) < 1e-10 * std::abs(want));
    }
  }
  auto r = bergman_norm_estimate(c, 0.5, OmegaDomain::default_margins());
  CHECK(r.verdict == Membership::Convergent);
  for (size_t i = 1; i < r.norm2.size(); ++i) CHECK(r.norm2[i] > r.norm2[i - 1]);
  auto d = bergman_norm_estimate(c, 0.75, OmegaDomain::default_margins());
  CHECK(d.verdict == Membership::Divergent);
  REQUIRE(d.singularity);
  CHECK(std::abs(std::abs(d.singularity->real()) - 1.0 / (0.75 * std::sqrt(2.0))) < 1e-6);
}

TEST_CASE("polylog generator matches the polylogarithm") {
  const double R = std::sqrt(0.5);
  for (double s : {0.5, 2.0}) {
    auto c = seq_polylog(s, 4000);
    for (double rr : {0.2, 0.6, 0.9})
      for (double th : {0.0, 0.7, 2.0}) {
        cplx z = std::polar(rr, th);
        if (!OmegaDomain::contains(z)) continue;
        auto v = eval_series(c, z, R);
        cplx want = numkit::polylog(s, z * z);
        CHECK(std::abs(v.value - want) < 1e-8 * std::max(1.0, std::abs(want)));
      }
  }
}

TEST_CASE("continuation beyond the disc of convergence") {
  // Li_{1/2}(4 i R^2 z^2): radius 1/(2R) < 1/sqrt 2 along the diagonals
  auto c = seq_edge_polylog(4000);
  SeriesEvaluator ev(c, 0.69);
  CHECK(ev.pade_check() < 1e-6);
  cplx z(0.85, 0.05);
  auto v = ev.eval(z);
  CHECK_FALSE(v.direct);
  const cplx want(-0.633808060546706719317698526497, 0.66944129987864649379188824165);
  CHECK(std::abs(v.f - want) < 1e-5);
}

TEST_CASE("robust pade recovers a rational function") {
  std::vector<cplx> c;
  for (int k = 0; k < 21; ++k) c.push_back(std::pow(0.5, k) + std::pow(-0.25, k));
  auto p = robust_pade(c, 10, 10);
  CHECK(p.den.size() == 3);
  auto roots = polynomial_roots(p.den);
  REQUIRE(roots.size() == 2);
  double a = std::abs(roots[0].real()), b = std::abs(roots[1].real());
  CHECK(std::min(a, b) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(std::max(a, b) == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("radius recovery") {
  auto g = radius_Ra(seq_geometric(1.0, 4000));
  CHECK_FALSE(g.unbounded);
  CHECK(g.lo <= std::sqrt(0.5));
  CHECK(g.hi >= std::sqrt(0.5));
  CHECK(g.lo >= std::sqrt(0.5) - 0.02);
  CHECK(g.hi <= std::sqrt(0.5) + 0.02);
}

TEST_CASE("factorial counterexample sequence") {
  auto c = seq_factorial(20);
  double f = 1.0;  // (n-1)! n! 4^n / (2n)!, built incrementally
  for (int n = 1; n <= 15; ++n) {
    f *= 4.0 * n / ((2.0 * n - 1) * 2.0 * n) * (n > 1 ? (n - 1) : 1);
    double got = std::exp(c.a[n].log_mag - numkit::log_gamma(2.0 * n + 1));
    CHECK(got == doctest::Approx(f).epsilon(1e-12));
  }
  auto r = counterexample_factorial(4000);
  CHECK(r.residual_slope > -1.6);
  CHECK(r.residual_slope < -1.4);
  CHECK(r.residual_intercept == doctest::Approx(std::log(std::sqrt(kPi) / 8)).epsilon(0.05));
  CHECK(r.q.back() == doctest::Approx(std::sqrt(kPi)).epsilon(1e-3));
  CHECK(r.q_max == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(r.verdict == Membership::Divergent);
  CHECK(r.derivative_norm.slope > 0.5);
  CHECK(r.function_norm.verdict != Membership::Divergent);
}

TEST_CASE("borel range test") {
  auto c = seq_factorial(4000);
  auto d = borel_range_test(c, 1, Parity::Odd, std::sqrt(0.5));
  CHECK(d.verdict == Membership::Divergent);
  // odd parity uses (2k+1)!: geometric(1) gives atanh(sqrt 2 R z)
  auto g = seq_geometric(1.0, 4000);
  g.parity = Parity::Odd;
  cplx z(0.4, 0.3);
  auto v = eval_series(g, z, 0.5);
  CHECK(std::abs(v.value - std::atanh(std::sqrt(2.0) * 0.5 * z)) < 1e-12);
  auto b = borel_range_test(seq_geometric(1.0, 4000), 0, Parity::Odd, 0.5);
  CHECK(b.verdict == Membership::Convergent);
}

TEST_CASE("loss factors") {
  auto rows = loss_factors({1.5, 2.0, 2.5, 3.0, 4.0, 6.0, 10.0});
  CHECK(rows[1].rho == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(rows[1].rho_mrr == doctest::Approx(0.832).epsilon(1e-3));
  for (auto& r : rows) {
    if (r.s < 3.0 + 1e-12) CHECK(r.sign == 1);
    if (r.s > 4.0 - 1e-12) CHECK(r.sign == -1);
    CHECK(r.bridge_gap < 1e-14);
    CHECK(r.Gamma == doctest::Approx(std::pow(r.rho, -r.s)));
  }
  double x = loss_crossover();
  CHECK(x > 3.0);
  CHECK(x < 4.0);
  CHECK(std::cos(kPi / (2 * x)) == doctest::Approx(std::exp(-1.0 / (std::exp(1.0) * x))).epsilon(1e-9));
  CHECK_THROWS_AS(loss_factors({1.0}), std::domain_error);
}

TEST_CASE("coefficient json round trip and validation") {
  auto c = seq_edge_polylog(10);
  c.parity = Parity::Odd;
  auto back = CoeffSeq::from_json(c.to_json());
  REQUIRE(back.a.size() == c.a.size());
  CHECK(back.parity == Parity::Odd);
  CHECK(back.a[0].is_zero());
  for (size_t k = 1; k < c.a.size(); ++k) {
    CHECK(back.a[k].log_mag == c.a[k].log_mag);
    CHECK(std::abs(back.a[k].phase - c.a[k].phase) < 1e-15);
  }
  CHECK_THROWS(CoeffSeq::from_json(nlohmann::json{{"terms", nlohmann::json::array()}, {"bogus", 1}}));
  CHECK_THROWS(seq_from_name("nope", 10));
  CHECK_THROWS_AS(eval_series(c, cplx(0.8, 0.8), 0.5), std::domain_error);
  CHECK_THROWS(bergman_norm_estimate(c, 0.5, {0.1, 0.2}));
}

TEST_CASE("boundary blow-up of Li_{-1/2} is divergent") {
  auto c = seq_polylog(-0.5, 4000);
  auto r = bergman_norm_estimate(c, std::sqrt(0.5), OmegaDomain::default_margins());
  CHECK(r.verdict == Membership::Divergent);
  CHECK(r.slope > 0.5);
}

TEST_CASE("norms grow with R for nonnegative coefficients") {
  auto c = seq_geometric(1.0, 4000);
  auto m = OmegaDomain::default_margins();
  auto a = bergman_norm_estimate(c, 0.3, m), b = bergman_norm_estimate(c, 0.5, m);
  for (size_t i = 0; i < m.size(); ++i) CHECK(b.norm2[i] >= a.norm2[i]);
}

TEST_CASE("radius bracket endpoints are classified") {
  CoeffSeq c;
  c.parity = Parity::Odd;
  for (int k = 0; k < 4000; ++k) c.a.push_back(LogScalar::from_log(numkit::log_gamma(2.0 * k + 2)));
  // sqrt(2) R z / (1 - 2 R^2 z^2): same corner singularity as the even case
  auto r = radius_Ra(c);
  CHECK(r.lo <= std::sqrt(0.5));
  CHECK(r.hi >= std::sqrt(0.5));
  CHECK(r.hi - r.lo <= 0.02);
  bool lo_ok = false, hi_ok = false;
  for (auto& p : r.probes) {
    if (p.first == r.lo) lo_ok = p.second == Membership::Convergent;
    if (p.first == r.hi) hi_ok = p.second == Membership::Divergent;
  }
  CHECK(lo_ok);
  CHECK(hi_ok);
  CoeffSeq delta;
  delta.a = {LogScalar::one()};
  CHECK(borel_range_test(delta, 0, Parity::Even, 1.0).verdict == Membership::Convergent);
}

TEST_CASE("loss factor monotonicity") {
  std::vector<double> g;
  for (double s = 1.01; s < 50; s *= 1.1) g.push_back(s);
  auto rows = loss_factors(g);
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].Gamma > 1.0);
    CHECK(rows[i].rho < 1.0);
    if (i) CHECK(rows[i].rho > rows[i - 1].rho);
  }
  CHECK(rows.back().rho > 0.999);
}
