#include "heatflat/flatness.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace heatflat::flatness {

using numkit::LogScalar;

namespace {

// sum_{k=k0}^{K} d[k + shift] * exp(lw[k]), in the log domain
SeriesValue log_series(const std::vector<double>& d, int shift, int k0, int K, const std::vector<double>& lw) {
  std::vector<LogScalar> terms;
  terms.reserve(K - k0 + 1);
  double last = 0.0, prev = 0.0;
  for (int k = k0; k <= K; ++k) {
    LogScalar t = LogScalar::from_double(d[k + shift]);
    if (!t.is_zero()) t.log_mag += lw[k];
    terms.push_back(t);
    prev = last;
    last = t.is_zero() ? 0.0 : std::exp(t.log_mag);
  }
  SeriesValue v;
  v.value = numkit::log_sum(terms).to_double();
  v.tail = last;
  v.diverging = K > k0 && last > 0.0 && last >= prev;
  return v;
}

void check_K(int K) {
  if (K < 1 || K > 200) throw std::invalid_argument("flatness: K must lie in [1, 200]");
}

}  // namespace

SeriesValue flat_state(const gevrey::DerivsFn& y, double t, double x, int K) {
  check_K(K);
  if (!(std::fabs(x) <= 1.0)) throw std::domain_error("flat_state: |x| must not exceed 1");
  std::vector<double> d(K + 1);
  y(t, K, d.data());
  std::vector<double> lw(K + 1);
  const double lx = std::log(std::fabs(x));
  for (int k = 0; k <= K; ++k) lw[k] = (k ? 2.0 * k * lx : 0.0) - numkit::log_gamma(2.0 * k + 1);
  return log_series(d, 0, 0, K, lw);
}

SeriesValue flat_control(const gevrey::DerivsFn& y, double t, int K) {
  check_K(K);
  std::vector<double> d(K + 1);
  y(t, K, d.data());
  std::vector<double> lw(K + 1);
  for (int k = 1; k <= K; ++k) lw[k] = -numkit::log_gamma(2.0 * k);
  return log_series(d, 0, 1, K, lw);
}

gevrey::DerivsFn control_provider(const gevrey::DerivsFn& y, int K) {
  check_K(K);
  std::vector<double> lw(K + 1);
  for (int k = 1; k <= K; ++k) lw[k] = -numkit::log_gamma(2.0 * k);
  return [y, K, lw](double t, int M, double* out) {
    if (M > 2) throw std::invalid_argument("control_provider: at most two derivatives");
    std::vector<double> d(K + M + 1);
    y(t, K + M, d.data());
    for (int m = 0; m <= M; ++m) out[m] = log_series(d, m, 1, K, lw).value;
  };
}

std::string TrackingResult::to_csv() const {
  std::ostringstream os;
  os << "t,y_target,y_sim,u\n";
  char buf[128];
  for (size_t i = 0; i < t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", t[i], y_target[i], y_sim[i], u[i]);
    os << buf;
  }
  return os.str();
}

TrackingResult tracking_experiment(const gevrey::Signal& y, const heatsim::SimConfig& cfg, int K) {
  check_K(K);
  cfg.validate();
  if (!y.has_deriv()) throw std::invalid_argument("tracking_experiment: target needs a derivative provider");
  if (y.t0() > 0.0 || y.t1() < cfg.T) throw std::invalid_argument("tracking_experiment: target must cover [0, T]");
  const auto& yd = y.derivs_fn();
  std::vector<double> d0(K + 2);
  yd(0.0, K + 1, d0.data());
  for (int k = 0; k <= K + 1; ++k)
    if (std::fabs(d0[k]) > 1e-12) throw std::invalid_argument("tracking_experiment: target is not flat at t = 0");

  heatsim::SimConfig c = cfg;
  c.hermite_order = 5;
  auto u = control_provider(yd, K);
  auto sim = heatsim::simulate(u, 2, c);

  TrackingResult r;
  r.t = sim.t;
  r.y_sim = sim.y;
  r.sim_tail_flag = sim.tail_flag;
  std::vector<double> d(K + 1);
  std::vector<SeriesValue> uc;
  double umax = 1.0;
  for (double t : sim.t) {
    yd(t, 0, d.data());
    r.y_target.push_back(d[0]);
    uc.push_back(flat_control(yd, t, K));
    r.u.push_back(uc.back().value);
    r.max_tail = std::max(r.max_tail, uc.back().tail);
    umax = std::max(umax, std::fabs(uc.back().value));
  }
  // growing terms far below the control scale (near t = 0) do not matter
  for (auto& v : uc) r.diverging = r.diverging || (v.diverging && v.tail > 1e-12 * umax);
  for (size_t i = 0; i < r.t.size(); ++i) r.max_error = std::max(r.max_error, std::fabs(r.y_sim[i] - r.y_target[i]));
  return r;
}

std::vector<RefinementStep> tracking_refinement(const gevrey::Signal& y, const heatsim::SimConfig& cfg, int K,
                                                int levels) {
  if (levels < 1) throw std::invalid_argument("tracking_refinement: levels must be positive");
  std::vector<RefinementStep> out;
  heatsim::SimConfig c = cfg;
  for (int l = 0; l < levels; ++l) {
    out.push_back({K, c.dt, tracking_experiment(y, c, K).max_error});
    K *= 2;
    c.dt *= 0.5;
  }
  return out;
}

gevrey::NormSeries check_trackable_infinite(const gevrey::Signal& y, int N) {
  return gevrey::gevrey_norm_time(gevrey::derivative(y), gevrey::GevreyParams(2.0, std::sqrt(0.5), -0.5), N);
}

nlohmann::json FiniteReport::to_json() const {
  nlohmann::json j = {{"membership", holo::to_string(membership)},
                      {"terminal", terminal.to_json()},
                      {"terminal_derivative", terminal_deriv.to_json()}};
  if (!regularity.partial.empty())
    j["regularity"] = {{"sum", regularity.partial.back()},
                       {"converged", regularity.converged},
                       {"tail_estimate", regularity.tail_estimate},
                       {"terms", regularity.partial.size()}};
  return j;
}

FiniteReport check_terminal_state(const holo::CoeffSeq& a_in) {
  holo::CoeffSeq a = a_in;
  a.parity = holo::Parity::Even;
  const double R = std::sqrt(0.5);
  const auto margins = holo::OmegaDomain::default_margins();
  FiniteReport r;
  r.terminal = holo::bergman_norm_estimate(a, R, margins);
  holo::CoeffSeq d = a.shifted(1);
  d.parity = holo::Parity::Odd;
  r.terminal_deriv = holo::bergman_norm_estimate(d, R, margins);
  using holo::Membership;
  if (r.terminal.verdict == Membership::Divergent || r.terminal_deriv.verdict == Membership::Divergent)
    r.membership = Membership::Divergent;
  else if (r.terminal.verdict == Membership::Convergent && r.terminal_deriv.verdict == Membership::Convergent)
    r.membership = Membership::Convergent;
  else
    r.membership = Membership::Undecided;
  return r;
}

FiniteReport check_trackable_finite(const gevrey::Signal& y, int N, int K) {
  if (!y.has_deriv()) throw std::invalid_argument("check_trackable_finite: signal needs a derivative provider");
  check_K(K);
  std::vector<double> d(K);
  y.derivs_fn()(y.t1(), K - 1, d.data());
  holo::CoeffSeq a;
  for (double v : d) a.a.push_back(LogScalar::from_double(v));
  FiniteReport r = check_terminal_state(a);
  r.regularity = check_trackable_infinite(y, N);
  return r;
}

}  // namespace heatflat::flatness
