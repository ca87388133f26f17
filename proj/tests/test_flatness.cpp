#include <cmath>

#include "doctest.h"
#include "heatflat/flatness.hpp"

using namespace heatflat;
using namespace heatflat::flatness;

namespace {

gevrey::DerivsFn zero_fn() {
  return [](double, int K, double* out) {
    for (int k = 0; k <= K; ++k) out[k] = 0.0;
  };
}

// y^{(k)} = (2k)! / rho^{2k}
gevrey::DerivsFn critical(double rho) {
  return [rho](double, int K, double* out) {
    for (int k = 0; k <= K; ++k) out[k] = std::exp(numkit::log_gamma(2.0 * k + 1) - 2.0 * k * std::log(rho));
  };
}

heatsim::SimConfig sim_cfg(double dt = 1e-3) {
  heatsim::SimConfig c;
  c.dt = dt;
  return c;
}

}  // namespace

TEST_CASE("flat state") {
  CHECK(flat_state(zero_fn(), 0.3, 0.7).value == 0.0);
  auto y = gevrey::bump_gevrey(1.0);
  for (double t : {0.2, 0.5, 1.3}) {
    auto v = flat_state(y.derivs_fn(), t, 0.0);
    CHECK(v.value == y.deriv(0, t));
    CHECK(v.tail == 0.0);
  }
  // terms (x/rho)^{2k}: geometric partial sum
  const double rho = 1.25, x = 0.8;
  auto v = flat_state(critical(rho), 0.0, x, 30);
  const double q = (x / rho) * (x / rho);
  CHECK(v.value == doctest::Approx((1 - std::pow(q, 31)) / (1 - q)).epsilon(1e-13));
  CHECK(v.tail == doctest::Approx(std::pow(q, 30)).epsilon(1e-12));
  CHECK_FALSE(v.diverging);
  CHECK(flat_state(critical(0.9), 0.0, 1.0, 30).diverging);
  CHECK_THROWS_AS(flat_state(zero_fn(), 0.0, 1.5), std::domain_error);
}

TEST_CASE("flat control") {
  CHECK(flat_control(zero_fn(), 0.4).value == 0.0);
  gevrey::DerivsFn probe = [](double, int K, double* out) {
    for (int k = 0; k <= K; ++k) out[k] = k == 1 ? 1.0 : 0.0;
  };
  CHECK(flat_control(probe, 0.0).value == 1.0);
  auto a = gevrey::bump_gevrey(1.5), b = gevrey::bump_gevrey(2.0);
  auto s = gevrey::sum(gevrey::scale(a, 2.0), gevrey::scale(b, -0.5));
  for (double t : {0.1, 0.4, 0.9}) {
    double lhs = flat_control(s.derivs_fn(), t).value;
    double rhs = 2.0 * flat_control(a.derivs_fn(), t).value - 0.5 * flat_control(b.derivs_fn(), t).value;
    CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::max(1.0, std::fabs(rhs)));
  }
  // provider derivatives agree with the control of y'
  auto u = control_provider(a.derivs_fn(), 20);
  double out[3];
  u(0.6, 2, out);
  CHECK(out[0] == doctest::Approx(flat_control(a.derivs_fn(), 0.6, 20).value).epsilon(1e-14));
  CHECK(out[1] == doctest::Approx(flat_control(gevrey::derivative(a).derivs_fn(), 0.6, 20).value).epsilon(1e-12));
}

TEST_CASE("tracking a Gevrey bump") {
  auto y = gevrey::bump_gevrey(1.5);
  auto r10 = tracking_experiment(y, sim_cfg(), 10);
  auto r25 = tracking_experiment(y, sim_cfg(), 25);
  CHECK(r25.max_error < 1e-4);
  CHECK(r10.max_error >= 10.0 * r25.max_error);
  CHECK_FALSE(r25.diverging);
  CHECK(r25.t.size() == 1001);
  CHECK(r25.to_csv().rfind("t,y_target,y_sim,u\n", 0) == 0);

  auto z = tracking_experiment(gevrey::scale(y, 0.0), sim_cfg(), 25);
  CHECK(z.max_error == 0.0);

  auto b = gevrey::dilate(gevrey::bump_gevrey(2.0), 1.5);
  auto rb = tracking_experiment(b, sim_cfg(), 25);
  auto rs = tracking_experiment(gevrey::sum(y, b), sim_cfg(), 25);
  CHECK(rs.max_error <= r25.max_error + rb.max_error + 1e-10);

  auto steps = tracking_refinement(y, sim_cfg(), 8, 2);
  REQUIRE(steps.size() == 2);
  CHECK(steps[1].K == 16);
  CHECK(steps[1].max_error <= steps[0].max_error);

  CHECK_THROWS_AS(tracking_experiment(gevrey::shift(y, -0.5), sim_cfg(), 25), std::invalid_argument);
}

TEST_CASE("infinite horizon trackability") {
  auto zero = gevrey::scale(gevrey::bump_gevrey(1.5), 0.0);
  auto z = check_trackable_infinite(zero, 20);
  CHECK(z.converged);
  CHECK(z.partial.back() == 0.0);

  auto y = gevrey::bump_gevrey(1.5);
  const int N = 30;
  auto r = check_trackable_infinite(y, N);
  CHECK(r.converged);
  auto l2 = gevrey::derivative_l2_norms(gevrey::derivative(y), N);
  for (int k = 0; k < N; ++k) {
    double m = numkit::log_gamma(2.0 * k + 1) + k * std::log(2.0) + 0.75 * std::log1p(k);
    double want = l2.norm2[k] * std::exp(-2.0 * m);
    CHECK(r.increment[k] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("finite horizon trackability") {
  auto flat = gevrey::scale(gevrey::bump_gevrey(1.5), 0.0);
  auto f = check_trackable_finite(flat, 10, 25);
  CHECK(f.membership == holo::Membership::Convergent);
  CHECK(f.terminal.norm2.back() == 0.0);

  auto cut = gevrey::gevrey_cutoff(0.2, 0.6, 1.5, 0.0, 1.0, 1001);
  gevrey::DerivsFn rise = [cut](double t, int K, double* out) {
    cut.derivs(t, K, out);
    for (int k = 0; k <= K; ++k) out[k] = (k == 0 ? 1.0 : 0.0) - out[k];
  };
  gevrey::Signal step(0.0, 1.0, 1001, rise, false, nlohmann::json::object());
  auto s = check_trackable_finite(step, 10, 25);
  CHECK(s.membership == holo::Membership::Convergent);
  for (size_t i = 0; i < s.terminal.margins.size(); ++i) {
    double e = s.terminal.margins[i];
    CHECK(s.terminal.norm2[i] == doctest::Approx(2.0 * (1 - e) * (1 - e)).epsilon(1e-9));
  }

  auto p = check_terminal_state(holo::seq_factorial(4000));
  CHECK(p.membership == holo::Membership::Divergent);
  auto j = p.to_json();
  CHECK(j["membership"] == "divergent");
}
