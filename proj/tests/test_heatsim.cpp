#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "heatflat/heatsim.hpp"

using namespace heatflat;
using namespace heatflat::heatsim;
using numkit::kPi;

namespace {

gevrey::DerivsFn constant(double c) {
  return [c](double, int K, double* out) {
    out[0] = c;
    for (int k = 1; k <= K; ++k) out[k] = 0.0;
  };
}

gevrey::DerivsFn sine(double w) {
  return [w](double t, int K, double* out) {
    for (int k = 0; k <= K; ++k) out[k] = std::pow(w, k) * std::sin(w * t + k * kPi / 2);
  };
}

double rel(double a, double b) { return std::fabs(a / b - 1.0); }

}  // namespace

TEST_CASE("kernel_k representations") {
  CHECK(rel(kernel_k(0.3, KernelRep::Eigen), 0.8964678333947947513553) < 1e-14);
  CHECK(rel(kernel_k(0.3, KernelRep::Poisson), 0.8964678333947947513553) < 1e-14);
  CHECK(std::fabs(kernel_k(10.0) - 1.0) < 1e-14);
  CHECK(std::fabs(kernel_k(10.0, KernelRep::Poisson) - 1.0) < 1e-14);
  CHECK(kernel_k(0.005) < 1e-20);
  CHECK(rel(kernel_k(0.01), 1.5670866531017335308e-10) < 1e-13);
  CHECK(rel(kernel_k(0.01, KernelRep::Eigen), 1.5670866531017335308e-10) < 1e-13);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    double t = 0.01 * std::pow(1000.0, i / 199.0);
    worst = std::max(worst, rel(kernel_k(t, KernelRep::Eigen), kernel_k(t, KernelRep::Poisson)));
  }
  CHECK(worst < 1e-10);
  CHECK_THROWS_AS(kernel_k(0.0), std::domain_error);
  CHECK_THROWS_AS(kernel_k(-1.0, KernelRep::Poisson), std::domain_error);
  CHECK_THROWS_AS(kernel_k(1e-6, KernelRep::Eigen), std::domain_error);
  CHECK(kernel_k(1e-6) == 0.0);
}

TEST_CASE("transfer closed forms") {
  TransferKind nd(TransferTag::NeuDir);
  CHECK(std::abs(transfer(nd, 1.0) - 1.0 / std::sinh(1.0)) < 1e-15);
  CHECK(std::abs(transfer(nd, 1.0) - 0.85091812823932154513) < 1e-15);
  // Laplace transform of the kernel, 40-digit closed form
  const double s[] = {0.5, 1.0, 2.0, 5.0};
  const double ref[] = {1.842567968605972313, 0.8509181282393215451, 0.3654172419699698603, 0.09669910617734616768};
  for (int i = 0; i < 4; ++i) {
    CHECK(std::fabs(kernel_laplace(s[i]) - ref[i]) < 1e-8);
    CHECK(std::abs(transfer(nd, s[i]) - ref[i]) < 1e-14);
  }
  // bounded on the right half plane
  TransferKind nn(TransferTag::NeuNeu);
  double mx = 0.0;
  for (int a = 1; a <= 10; ++a)
    for (int b = 0; b < 10; ++b) mx = std::max(mx, std::abs(transfer(nn, cplx(5.0 * a, -50.0 + 100.0 * b / 9.0))));
  CHECK(mx <= 1.1);
  // near the origin and far out
  cplx z(1e-10, 0.0);
  CHECK(std::abs(transfer(nd, z) * z - 1.0) < 1e-9);
  CHECK(std::abs(transfer({TransferTag::DirNeu}, z) - 1.0) < 1e-9);
  cplx big(1e6, 1e6);
  CHECK(std::isfinite(std::abs(transfer(nd, big))));
  CHECK(std::isfinite(std::abs(transfer({TransferTag::DirNeu}, big))));
  // relations between kinds
  for (cplx q : {cplx(0.3, 2.0), cplx(4.0, -7.0), cplx(40.0, 1.0)}) {
    CHECK(std::abs(transfer({TransferTag::DirNeu}, q) - q * transfer(nd, q)) < 1e-13 * std::abs(q * transfer(nd, q)));
    CHECK(std::abs(transfer(nn, q) - 1.0 / std::cosh(std::sqrt(q))) < 1e-14);
    CHECK(transfer({TransferTag::DirDir}, q) == transfer(nn, q));
    cplx r = std::sqrt(q);
    cplx direct = std::cosh(r * 0.4) / (r * std::sinh(r));
    CHECK(std::abs(transfer(TransferKind::interior(0.4), q) - direct) < 1e-13 * std::abs(direct));
  }
  CHECK_THROWS_AS(transfer(nd, cplx(0.0, 1.0)), std::domain_error);
  CHECK_THROWS_AS(transfer(nd, cplx(-1.0, 0.0)), std::domain_error);
  CHECK_THROWS_AS(TransferKind::interior(1.0), std::domain_error);
  CHECK(transfer_tag_from_string("DirNeu") == TransferTag::DirNeu);
  CHECK_THROWS_AS(transfer_tag_from_string("Robin"), std::invalid_argument);
}

TEST_CASE("omega_characterization") {
  TransferKind nd(TransferTag::NeuDir);
  CHECK(omega_characterization(0.0, nd) == 1.0);
  CHECK(omega_characterization(3.0, nd) == omega_characterization(-3.0, nd));
  // |sinh(r)/r| at r = sqrt(i xi), in logs
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i <= 300; ++i) {
    double xi = std::pow(10.0, 6.0 * i / 300.0);
    cplx r = std::sqrt(cplx(0.0, xi));
    double lphi = r.real() + std::log(std::abs(1.0 - std::exp(-2.0 * r))) - std::log(2.0) - std::log(std::abs(r));
    double d = lphi - log_omega_characterization(xi, nd);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  CHECK(std::exp(-lo) < 10.0);
  CHECK(std::exp(hi) < 10.0);
  for (double xi : {1.0, 100.0, 1e6}) {
    double e = log_omega_characterization(xi, TransferKind::interior(1e-300)) + std::log1p(std::sqrt(xi));
    CHECK(e == doctest::Approx(std::sqrt(xi / 2)).epsilon(1e-15));
    CHECK(log_omega_characterization(xi, {TransferTag::NeuNeu}) == doctest::Approx(std::sqrt(xi / 2)));
  }
  CHECK(std::isfinite(log_omega_characterization(1e300, nd)));
}

TEST_CASE("simulate trivial and constant input") {
  SimConfig cfg;
  cfg.x_grid = {0.0, 0.5, 1.0};
  auto r0 = simulate(constant(0.0), 2, cfg);
  for (double y : r0.y) CHECK(y == 0.0);
  for (double z : r0.z) CHECK(z == 0.0);
  auto r1 = simulate(constant(1.0), 0, cfg);
  CHECK(r1.t.size() == 1001);
  CHECK(r1.t.back() == 1.0);
  // y = int_0^t k, 40 digits
  const double ts[] = {0.05, 0.1, 0.5, 1.0};
  const double ref[] = {0.00026934212500303737, 0.0078852928952909877511, 0.33479071346626157168,
                        0.83334381464222917957};
  for (int i = 0; i < 4; ++i) {
    long m = std::lround(ts[i] / cfg.dt);
    CHECK(std::fabs(r1.y[m] - ref[i]) < 1e-6);
    CHECK(std::fabs(r1.y[m] - ref[i]) < 1e-12);
    CHECK(r1.z_at(m, 0) == doctest::Approx(r1.y[m]).epsilon(1e-14));
  }
  CHECK(r1.y[0] == 0.0);
  CHECK(r1.hermite_order == 1);
  CHECK_FALSE(r1.tail_flag);
}

TEST_CASE("simulate against the modal closed form") {
  SimConfig cfg;
  cfg.x_grid = {0.5};
  const double y1 = 0.58957561111313161039, z1 = 0.65390373399792314186;
  double prev = 1e300;
  for (int order : {1, 3, 5}) {
    cfg.hermite_order = order;
    auto r = simulate(sine(3.0), 2, cfg);
    CHECK(r.hermite_order == order);
    double err = std::fabs(r.y.back() - y1);
    CHECK(err < prev);
    CHECK(std::fabs(r.z.back() - z1) < 10 * err + 1e-13);
    prev = err;
  }
  CHECK(prev < 1e-12);
  cfg.hermite_order = 1;
  auto r = simulate(sine(3.0), 0, cfg);
  CHECK(std::fabs(r.y.back() - y1) < 1e-5);
  // fewer derivatives than requested lowers the order
  cfg.hermite_order = 5;
  CHECK(simulate(sine(3.0), 1, cfg).hermite_order == 3);
}

TEST_CASE("simulate refinement, linearity, causality") {
  SimConfig cfg;
  cfg.J = 64;
  auto a = simulate(sine(5.0), 0, cfg);
  cfg.J = 128;
  auto b = simulate(sine(5.0), 0, cfg);
  for (size_t m = 50; m < a.y.size(); ++m) CHECK(std::fabs(a.y[m] - b.y[m]) <= 1e-10 * std::fabs(b.y[m]) + 1e-15);

  auto rep = refine_check(sine(5.0), 2, [] { SimConfig c; c.hermite_order = 5; return c; }());
  CHECK(rep.dJ < 1e-12);
  CHECK(rep.ddt < 1e-10);
  CHECK(rep.base_max > 0.1);

  auto u1 = sine(2.0), u2 = constant(0.7);
  auto both = [&](double t, int K, double* out) {
    double x[3], y[3];
    u1(t, K, x);
    u2(t, K, y);
    for (int k = 0; k <= K; ++k) out[k] = x[k] + y[k];
  };
  auto s1 = simulate(u1, 2, cfg), s2 = simulate(u2, 2, cfg), s12 = simulate(both, 2, cfg);
  for (size_t m = 0; m < s1.y.size(); ++m) CHECK(std::fabs(s12.y[m] - s1.y[m] - s2.y[m]) < 1e-10);

  auto bump = gevrey::compact_bump(1.0, 0.4, 0.9, 1.0, -0.1, 1.1, 1201);
  cfg.hermite_order = 5;
  auto c = simulate(bump, cfg);
  double below = 0.0, above = 0.0;
  for (size_t m = 0; m < c.y.size(); ++m) {
    double& side = c.t[m] < 0.4 ? below : above;
    side = std::max(side, std::fabs(c.y[m]));
  }
  CHECK(below < 1e-12);
  CHECK(above > 1e-6);
}

TEST_CASE("simulate steady state and tail diagnostics") {
  SimConfig cfg;
  cfg.T = 10.0;
  auto r = simulate(constant(1.0), 0, cfg);
  long m5 = 5000, m10 = 10000;
  double slope = (r.y[m10] - r.y[m5]) / (r.t[m10] - r.t[m5]);
  CHECK(std::fabs(slope - 1.0) < 1e-6);
  CHECK(r.y[m10] - 10.0 == doctest::Approx(-1.0 / 6.0).epsilon(1e-10));

  SimConfig few;
  few.J = 4;
  few.tail_correction = false;
  auto f = simulate(constant(1.0), 0, few);
  CHECK(f.tail_flag);
  CHECK(f.tail_uncorrected > 1e-3);
  few.tail_correction = true;
  auto g = simulate(constant(1.0), 0, few);
  CHECK(g.tail_estimate < f.tail_estimate);
  CHECK(std::fabs(g.y.back() - 0.83334381464222917957) < 1e-12);
  few.J = 40;
  CHECK_FALSE(simulate(constant(1.0), 0, few).tail_flag);

  SimConfig bad;
  bad.J = 0;
  CHECK_THROWS_AS(simulate(constant(1.0), 0, bad), std::invalid_argument);
  bad = SimConfig{};
  bad.x_grid = {1.5};
  CHECK_THROWS_AS(simulate(constant(1.0), 0, bad), std::invalid_argument);
  bad = SimConfig{};
  bad.hermite_order = 2;
  CHECK_THROWS_AS(simulate(constant(1.0), 0, bad), std::invalid_argument);
  CHECK_THROWS_AS(simulate(gevrey::gaussian(0.1, 0.5, 0.2, 1.0, 101), SimConfig{}), std::invalid_argument);
}

TEST_CASE("simulate csv output") {
  SimConfig cfg;
  cfg.T = 0.002;
  cfg.x_grid = {0.0, 1.0};
  auto r = simulate(constant(1.0), 0, cfg);
  auto y = r.y_csv();
  CHECK(y.rfind("t,y\n0,0\n", 0) == 0);
  CHECK(std::count(y.begin(), y.end(), '\n') == 4);
  auto z = r.z_csv();
  CHECK(z.rfind("t,x,z\n", 0) == 0);
  CHECK(std::count(z.begin(), z.end(), '\n') == 7);
}
