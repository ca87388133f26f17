#include "heatflat/heatsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "heatflat/mp.hpp"
#include "heatflat/quad.hpp"

namespace heatflat::heatsim {

using numkit::kPi;

namespace {

double kernel_eigen_double(double t) {
  double s = 0.0;
  for (int j = 1;; ++j) {
    double e = std::exp(-(j * kPi) * (j * kPi) * t);
    s += (j % 2 ? -2.0 : 2.0) * e;
    if (e < 1e-18) break;
  }
  return 1.0 + s;
}

double kernel_eigen_mp(double t) {
  // the result is about exp(-1/(4t)), so that many digits cancel
  const double lost = 1.0 / (4.0 * t * std::log(10.0));
  const unsigned digits = static_cast<unsigned>(lost) + 25;
  MpPrecision guard(digits);
  const mpreal pi = acos(mpreal(-1));
  const mpreal tt(t);
  const mpreal eps = pow(mpreal(10), -static_cast<int>(digits - 5));
  mpreal s(1);
  for (int j = 1;; ++j) {
    mpreal l = pi * j;
    mpreal e = exp(-l * l * tt);
    if (j % 2) s -= 2 * e; else s += 2 * e;
    if (e < eps) break;
  }
  return static_cast<double>(s);
}

double kernel_poisson(double t) {
  double s = 0.0;
  for (int m = 0;; ++m) {
    double a = m + 0.5;
    double e = std::exp(-a * a / t);
    s += e;
    if (e <= 1e-18 * s) break;
  }
  return 2.0 * s / std::sqrt(kPi * t);
}

// e^z - 1 without cancellation near z = 0
cplx cexpm1(cplx z) {
  double x = z.real(), y = z.imag();
  double sh = std::sin(0.5 * y);
  double re = std::expm1(x) * std::cos(y) - 2.0 * sh * sh;
  double im = std::exp(x) * std::sin(y);
  return {re, im};
}

// I_m(x) = int_0^1 e^{-x(1-s)} s^m ds, m = 0..5
void mode_moments(double x, double* I) {
  if (x == 0.0) {
    for (int m = 0; m < 6; ++m) I[m] = 1.0 / (m + 1);
    return;
  }
  if (x < 2.0) {
    for (int m = 0; m < 6; ++m) {
      // m! sum_i (-x)^i / (m+i+1)!
      double term = 1.0 / (m + 1), s = term;
      for (int i = 1; i < 200; ++i) {
        term *= -x / (m + i + 1);
        s += term;
        if (std::fabs(term) < 1e-18 * std::fabs(s)) break;
      }
      I[m] = s;
    }
    return;
  }
  I[0] = -std::expm1(-x) / x;
  for (int m = 1; m < 6; ++m) I[m] = (1.0 - m * I[m - 1]) / x;
}

double bernoulli_poly(int n, double x) {
  double x2 = x * x;
  switch (n) {
    case 2: return x2 - x + 1.0 / 6.0;
    case 4: return x2 * x2 - 2.0 * x2 * x + x2 - 1.0 / 30.0;
    case 6: return x2 * x2 * x2 - 3.0 * x2 * x2 * x + 2.5 * x2 * x2 - 0.5 * x2 + 1.0 / 42.0;
  }
  throw std::logic_error("bernoulli_poly: unsupported order");
}

// sum_{j >= J} e_j(1) e_j(x) / lambda_j^p, p = 1..3
double mode_tail(double x, int p, int J) {
  const int n2 = 2 * p;
  double fact = 1.0;
  for (int i = 2; i <= n2; ++i) fact *= i;
  double full = (p % 2 ? 1.0 : -1.0) * std::pow(2.0, n2) * bernoulli_poly(n2, 0.5 * (1.0 - x)) / fact;
  double partial = 0.0;
  for (int j = J - 1; j >= 1; --j) partial += 2.0 * std::cos(j * kPi * (1.0 - x)) / std::pow(j * kPi, n2);
  return full - partial;
}

// sum_{j >= J} 2 / lambda_j^p
double mode_tail_abs(int p, int J) {
  double s = 0.0;
  int j = J;
  for (; j < J + 4096; ++j) s += 2.0 / std::pow(j * kPi, 2 * p);
  // integral remainder
  s += 2.0 / (std::pow(kPi, 2 * p) * (2 * p - 1) * std::pow(j - 0.5, 2 * p - 1));
  return s;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

double kernel_k(double t, KernelRep rep) {
  if (!(t > 0.0)) throw std::domain_error("kernel_k: t must be positive");
  if (rep == KernelRep::Auto) rep = t < 1.0 / kPi ? KernelRep::Poisson : KernelRep::Eigen;
  if (rep == KernelRep::Poisson) return kernel_poisson(t);
  if (t >= 0.5) return kernel_eigen_double(t);
  if (t < kEigenMinT) throw std::domain_error("kernel_k: eigen form needs t >= 1e-5, use the Poisson form");
  return kernel_eigen_mp(t);
}

double kernel_laplace(double s, double a, int panels) {
  if (!(s > 0.0)) throw std::domain_error("kernel_laplace: s must be positive");
  auto f = [s](double t) { return t > 0.0 ? std::exp(-s * t) * kernel_k(t) : 0.0; };
  // k is negligible below t = 0.005; grade the panels toward the rise
  double head = quad::composite_gl(f, 0.0, 0.1, panels / 2) + quad::composite_gl(f, 0.1, a, panels);
  double tail = std::exp(-s * a) / s;
  for (int j = 1;; ++j) {
    double l = s + (j * kPi) * (j * kPi);
    double e = std::exp(-l * a) / l;
    tail += (j % 2 ? -2.0 : 2.0) * e;
    if (e < 1e-20) break;
  }
  return head + tail;
}

TransferKind::TransferKind(TransferTag t, double x) : tag(t), x0(x) {
  if (t == TransferTag::InteriorX0 && !(x > 0.0 && x < 1.0))
    throw std::domain_error("TransferKind: x0 must lie in (0, 1)");
}

const char* to_string(TransferTag t) {
  switch (t) {
    case TransferTag::NeuDir: return "NeuDir";
    case TransferTag::NeuNeu: return "NeuNeu";
    case TransferTag::DirNeu: return "DirNeu";
    case TransferTag::DirDir: return "DirDir";
    case TransferTag::InteriorX0: return "InteriorX0";
  }
  return "?";
}

TransferTag transfer_tag_from_string(const std::string& s) {
  for (auto t : {TransferTag::NeuDir, TransferTag::NeuNeu, TransferTag::DirNeu, TransferTag::DirDir,
                 TransferTag::InteriorX0})
    if (s == to_string(t)) return t;
  throw std::invalid_argument("unknown transfer kind: " + s);
}

cplx transfer(const TransferKind& kind, cplx s) {
  if (!(s.real() > 0.0)) throw std::domain_error("transfer: requires Re s > 0");
  const cplx r = std::sqrt(s);
  const cplx e1 = std::exp(-r);
  const cplx om = -cexpm1(-2.0 * r);  // 1 - e^{-2r}
  switch (kind.tag) {
    case TransferTag::NeuDir: return 2.0 * e1 / (r * om);
    case TransferTag::DirNeu: return 2.0 * r * e1 / om;
    case TransferTag::NeuNeu:
    case TransferTag::DirDir: return 2.0 * e1 / (1.0 + std::exp(-2.0 * r));
    case TransferTag::InteriorX0:
      return (std::exp(-r * (1.0 - kind.x0)) + std::exp(-r * (1.0 + kind.x0))) / (r * om);
  }
  throw std::logic_error("transfer: bad tag");
}

double log_omega_characterization(double xi, const TransferKind& kind) {
  const double a = std::fabs(xi);
  const double root = std::sqrt(0.5 * a);
  switch (kind.tag) {
    case TransferTag::NeuDir:
    case TransferTag::DirNeu: return root - 0.5 * std::log1p(a);
    case TransferTag::NeuNeu:
    case TransferTag::DirDir: return root;
    case TransferTag::InteriorX0: return (1.0 - kind.x0) * root - std::log1p(std::sqrt(a));
  }
  throw std::logic_error("omega: bad tag");
}

double omega_characterization(double xi, const TransferKind& kind) {
  return std::exp(log_omega_characterization(xi, kind));
}

void SimConfig::validate() const {
  if (J < 1) throw std::invalid_argument("SimConfig: J must be at least 1");
  if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("SimConfig: T must be positive");
  if (hermite_order != 1 && hermite_order != 3 && hermite_order != 5)
    throw std::invalid_argument("SimConfig: hermite_order must be 1, 3 or 5");
  for (double x : x_grid)
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("SimConfig: x_grid must lie in [0, 1]");
}

std::string SimResult::y_csv() const {
  std::ostringstream os;
  os << "t,y\n";
  for (size_t m = 0; m < t.size(); ++m) os << fmt17(t[m]) << ',' << fmt17(y[m]) << '\n';
  return os.str();
}

std::string SimResult::z_csv() const {
  std::ostringstream os;
  os << "t,x,z\n";
  for (size_t m = 0; m < t.size(); ++m)
    for (size_t i = 0; i < x_grid.size(); ++i)
      os << fmt17(t[m]) << ',' << fmt17(x_grid[i]) << ',' << fmt17(z[m * x_grid.size() + i]) << '\n';
  return os.str();
}

SimResult simulate(const gevrey::DerivsFn& u, int max_deriv, const SimConfig& cfg) {
  cfg.validate();
  const int avail = max_deriv >= 2 ? 5 : max_deriv == 1 ? 3 : 1;
  const int order = std::min(cfg.hermite_order, avail);
  const int nd = (order - 1) / 2;
  const long M = std::max(1L, std::lround(cfg.T / cfg.dt));
  const double h = cfg.T / M;
  const int J = cfg.J;

  SimResult res;
  res.hermite_order = order;
  res.x_grid = cfg.x_grid;
  const size_t nx = cfg.x_grid.size();
  res.t.resize(M + 1);
  res.y.assign(M + 1, 0.0);
  res.z.assign((M + 1) * nx, 0.0);

  std::vector<double> U((M + 1) * 3, 0.0);
  for (long m = 0; m <= M; ++m) {
    res.t[m] = m == M ? cfg.T : m * h;
    u(res.t[m], nd, &U[3 * m]);
  }

  std::vector<double> lam(J), w(J), E(J), G(6 * J), c(J, 0.0);
  for (int j = 0; j < J; ++j) {
    lam[j] = (j * kPi) * (j * kPi);
    w[j] = j == 0 ? 1.0 : (j % 2 ? -std::sqrt(2.0) : std::sqrt(2.0));
    E[j] = std::exp(-lam[j] * h);
    mode_moments(lam[j] * h, &G[6 * j]);
    for (int m = 0; m < 6; ++m) G[6 * j + m] *= h;
  }
  // e_j at x = 0 and on the grid
  std::vector<double> ex(J * nx);
  for (size_t i = 0; i < nx; ++i)
    for (int j = 0; j < J; ++j)
      ex[i * J + j] = j == 0 ? 1.0 : std::sqrt(2.0) * std::cos(j * kPi * cfg.x_grid[i]);

  double S0[3] = {0, 0, 0};
  std::vector<double> Sx(3 * nx, 0.0);
  if (cfg.tail_correction) {
    for (int p = 1; p <= 3; ++p) {
      S0[p - 1] = mode_tail(0.0, p, J);
      for (size_t i = 0; i < nx; ++i) Sx[3 * i + p - 1] = mode_tail(cfg.x_grid[i], p, J);
    }
  }
  const double A1 = mode_tail_abs(1, J), A2 = mode_tail_abs(2, J), A3 = mode_tail_abs(3, J),
               A4 = mode_tail_abs(4, J);
  const double transient = std::exp(-((J * kPi) * (J * kPi)) * h);

  double a[6];
  double max_u = 0.0, worst = 0.0;
  double prev[4] = {0.0, 0.0, 0.0, 0.0};  // p, p', p'', p''' at the end of the previous step
  for (long m = 0; m < M; ++m) {
    const double* u0 = &U[3 * m];
    const double* u1 = &U[3 * (m + 1)];
    std::fill(a, a + 6, 0.0);
    double q1, q2, q3;
    a[0] = u0[0];
    if (order == 1) {
      a[1] = u1[0] - u0[0];
      q1 = a[1] / h;
      q2 = q3 = 0.0;
    } else if (order == 3) {
      a[1] = h * u0[1];
      a[2] = 3.0 * (u1[0] - u0[0]) - h * (2.0 * u0[1] + u1[1]);
      a[3] = 2.0 * (u0[0] - u1[0]) + h * (u0[1] + u1[1]);
      q1 = u1[1];
      q2 = (2.0 * a[2] + 6.0 * a[3]) / (h * h);
      q3 = 6.0 * a[3] / (h * h * h);
    } else {
      a[1] = h * u0[1];
      a[2] = 0.5 * h * h * u0[2];
      double r0 = u1[0] - a[0] - a[1] - a[2];
      double r1 = h * u1[1] - a[1] - 2.0 * a[2];
      double r2 = h * h * u1[2] - 2.0 * a[2];
      a[3] = 10.0 * r0 - 4.0 * r1 + 0.5 * r2;
      a[4] = -15.0 * r0 + 7.0 * r1 - r2;
      a[5] = 6.0 * r0 - 3.0 * r1 + 0.5 * r2;
      q1 = u1[1];
      q2 = u1[2];
      q3 = (6.0 * a[3] + 24.0 * a[4] + 60.0 * a[5]) / (h * h * h);
    }
    for (int j = 0; j < J; ++j) {
      const double* g = &G[6 * j];
      double f = 0.0;
      for (int k = order; k >= 0; --k) f += a[k] * g[k];
      c[j] = E[j] * c[j] + w[j] * f;
    }
    double y = 0.0;
    for (int j = J - 1; j >= 0; --j) y += c[j] * (j == 0 ? 1.0 : std::sqrt(2.0));
    const double q0 = u1[0];
    if (cfg.tail_correction) y += q0 * S0[0] - q1 * S0[1] + q2 * S0[2];
    res.y[m + 1] = y;
    for (size_t i = 0; i < nx; ++i) {
      double z = 0.0;
      const double* e = &ex[i * J];
      for (int j = J - 1; j >= 0; --j) z += c[j] * e[j];
      if (cfg.tail_correction) z += q0 * Sx[3 * i] - q1 * Sx[3 * i + 1] + q2 * Sx[3 * i + 2];
      res.z[(m + 1) * nx + i] = z;
    }
    max_u = std::max(max_u, std::fabs(q0));
    // derivative jumps at the step start leave a transient that decays like e^{-lambda_J h}
    const double h2 = h * h, h3 = h2 * h;
    const double start[4] = {a[0], a[1] / h, 2.0 * a[2] / h2, 6.0 * a[3] / h3};
    const double jump = std::fabs(start[0] - prev[0]) * A1 + std::fabs(start[1] - prev[1]) * A2 +
                        std::fabs(start[2] - prev[2]) * A3 + std::fabs(start[3] - prev[3]) * A4;
    const double next = order == 1 ? 0.0 : std::fabs(q3) * A4;
    worst = std::max(worst, next + transient * jump);
    prev[0] = q0;
    prev[1] = q1;
    prev[2] = q2;
    prev[3] = q3;
  }
  res.tail_uncorrected = max_u * A1;
  res.tail_estimate = cfg.tail_correction ? worst : res.tail_uncorrected;
  res.tail_flag = res.tail_estimate > cfg.tail_tol;
  return res;
}

SimResult simulate(const gevrey::Signal& sig, const SimConfig& cfg) {
  if (sig.t0() > 1e-12 || sig.t1() < cfg.T - 1e-12)
    throw std::invalid_argument("simulate: input must be defined on [0, T]");
  if (sig.has_deriv()) return simulate(sig.derivs_fn(), 2, cfg);
  auto interp = [&sig](double t, int, double* out) {
    const auto& v = sig.values();
    double p = (t - sig.t0()) / sig.step();
    long i = std::clamp(static_cast<long>(std::floor(p)), 0L, static_cast<long>(v.size()) - 2);
    double f = p - i;
    out[0] = (1.0 - f) * v[i] + f * v[i + 1];
  };
  return simulate(interp, 0, cfg);
}

RefineReport refine_check(const gevrey::DerivsFn& u, int max_deriv, const SimConfig& cfg) {
  auto base = simulate(u, max_deriv, cfg);
  SimConfig cj = cfg, ct = cfg;
  cj.J = 2 * cfg.J;
  cj.x_grid.clear();
  ct.dt = 0.5 * cfg.dt;
  ct.x_grid.clear();
  auto rj = simulate(u, max_deriv, cj);
  auto rt = simulate(u, max_deriv, ct);
  RefineReport r{0.0, 0.0, 0.0};
  for (size_t m = 0; m < base.y.size(); ++m) {
    r.base_max = std::max(r.base_max, std::fabs(base.y[m]));
    r.dJ = std::max(r.dJ, std::fabs(base.y[m] - rj.y[m]));
    r.ddt = std::max(r.ddt, std::fabs(base.y[m] - rt.y[2 * m]));
  }
  return r;
}

}  // namespace heatflat::heatsim
