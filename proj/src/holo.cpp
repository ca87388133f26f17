#include "heatflat/holo.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace heatflat::holo {

using numkit::kPi;
using numkit::log_gamma;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Gauss-Kronrod 7/15 on [-1, 1]; odd indices of kXK are the Gauss nodes.
constexpr double kXK[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                           0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                           0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                           0.207784955007898467600689403773245, 0.0};
constexpr double kWK[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                           0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                           0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                           0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWG[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Node15 {
  double x[15], wk[15], wg[15];
  Node15() {
    for (int i = 0; i < 7; ++i) {
      x[i] = -kXK[i];
      x[14 - i] = kXK[i];
      wk[i] = wk[14 - i] = kWK[i];
      wg[i] = wg[14 - i] = (i % 2) ? kWG[i / 2] : 0.0;
    }
    x[7] = 0.0;
    wk[7] = kWK[7];
    wg[7] = kWG[3];
  }
};
const Node15 kNodes;

struct Cell {
  double u0, u1, v0, v1;
  double value, error;
  bool operator<(const Cell& o) const { return error < o.error; }
};

template <class F>
Cell integrate_cell(F&& f, double u0, double u1, double v0, double v1) {
  const double cu = 0.5 * (u0 + u1), hu = 0.5 * (u1 - u0);
  const double cv = 0.5 * (v0 + v1), hv = 0.5 * (v1 - v0);
  double k = 0.0, g = 0.0;
  for (int i = 0; i < 15; ++i) {
    double rk = 0.0, rg = 0.0;
    for (int j = 0; j < 15; ++j) {
      double val = f(cu + hu * kNodes.x[i], cv + hv * kNodes.x[j]);
      rk += kNodes.wk[j] * val;
      rg += kNodes.wg[j] * val;
    }
    k += kNodes.wk[i] * rk;
    g += kNodes.wg[i] * rg;
  }
  k *= hu * hv;
  g *= hu * hv;
  return {u0, u1, v0, v1, k, std::fabs(k - g)};
}

struct AdaptiveResult {
  double value, error;
  long evals;
  bool converged;
};

// Globally adaptive 2-D Gauss-Kronrod on [u0,u1] x [v0,v1].
template <class F>
AdaptiveResult adaptive_2d(F&& f, double u0, double u1, double v0, double v1, int nu, int nv, double rel_tol,
                           long max_evals) {
  std::priority_queue<Cell> heap;
  long evals = 0;
  double total = 0.0, err = 0.0;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      double a = u0 + (u1 - u0) * i / nu, b = u0 + (u1 - u0) * (i + 1) / nu;
      double c = v0 + (v1 - v0) * j / nv, d = v0 + (v1 - v0) * (j + 1) / nv;
      Cell cell = integrate_cell(f, a, b, c, d);
      evals += 225;
      total += cell.value;
      err += cell.error;
      heap.push(cell);
    }
  while (err > rel_tol * std::fabs(total) && err > 1e-300 && evals < max_evals) {
    Cell worst = heap.top();
    heap.pop();
    total -= worst.value;
    err -= worst.error;
    double um = 0.5 * (worst.u0 + worst.u1), vm = 0.5 * (worst.v0 + worst.v1);
    const double us[3] = {worst.u0, um, worst.u1}, vs[3] = {worst.v0, vm, worst.v1};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Cell cell = integrate_cell(f, us[i], us[i + 1], vs[j], vs[j + 1]);
        evals += 225;
        total += cell.value;
        err += cell.error;
        heap.push(cell);
      }
  }
  // re-add from the leaves to shed the drift of the running sums
  double s = 0.0, c = 0.0, e = 0.0;
  while (!heap.empty()) {
    double v = heap.top().value;
    e += heap.top().error;
    heap.pop();
    double t = s + v;
    c += std::fabs(s) >= std::fabs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  return {s + c, e, evals, e <= rel_tol * std::fabs(s + c) || e <= 1e-300};
}

LogScalar log_term(double lm, cplx phase) {
  LogScalar r;
  r.log_mag = lm;
  r.phase = phase;
  return r;
}

}  // namespace

std::vector<double> OmegaDomain::fine_margins() {
  std::vector<double> m;
  for (int i = 0; i < 10; ++i) m.push_back(0.2 * std::pow(0.5, i));
  return m;
}

bool CoeffSeq::all_zero() const {
  return std::all_of(a.begin(), a.end(), [](const LogScalar& x) { return x.is_zero(); });
}

CoeffSeq CoeffSeq::shifted(int p) const {
  if (p < 0) throw std::invalid_argument("CoeffSeq::shifted: negative shift");
  CoeffSeq r;
  r.parity = parity;
  if (p < static_cast<int>(a.size())) r.a.assign(a.begin() + p, a.end());
  return r;
}

CoeffSeq CoeffSeq::from_json(const nlohmann::json& j) {
  CoeffSeq c;
  const nlohmann::json* terms = &j;
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (it.key() != "terms" && it.key() != "parity")
        throw std::invalid_argument("CoeffSeq: unknown key " + it.key());
    terms = &j.at("terms");
    if (j.contains("parity")) {
      std::string p = j.at("parity").get<std::string>();
      if (p == "even") c.parity = Parity::Even;
      else if (p == "odd") c.parity = Parity::Odd;
      else throw std::invalid_argument("CoeffSeq: parity must be even or odd");
    }
  }
  if (!terms->is_array()) throw std::invalid_argument("CoeffSeq: terms must be an array");
  for (const auto& t : *terms) {
    if (!t.is_object()) throw std::invalid_argument("CoeffSeq: each term is an object");
    for (auto it = t.begin(); it != t.end(); ++it)
      if (it.key() != "log_mag" && it.key() != "sign" && it.key() != "phase")
        throw std::invalid_argument("CoeffSeq: unknown term key " + it.key());
    const auto& lm = t.at("log_mag");
    if (lm.is_null()) {
      c.a.push_back(LogScalar::zero());
      continue;
    }
    cplx ph(1.0, 0.0);
    if (t.contains("phase")) {
      const auto& p = t.at("phase");
      ph = cplx(p.at(0).get<double>(), p.at(1).get<double>());
      ph /= std::abs(ph);
    } else if (t.contains("sign")) {
      double s = t.at("sign").get<double>();
      if (s == 0.0) {
        c.a.push_back(LogScalar::zero());
        continue;
      }
      ph = s > 0 ? 1.0 : -1.0;
    }
    c.a.push_back(log_term(lm.get<double>(), ph));
  }
  return c;
}

nlohmann::json CoeffSeq::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& x : a) {
    if (x.is_zero()) {
      terms.push_back({{"log_mag", nullptr}, {"sign", 0}});
    } else if (x.phase.imag() == 0.0) {
      terms.push_back({{"log_mag", x.log_mag}, {"sign", x.phase.real() < 0 ? -1 : 1}});
    } else {
      terms.push_back({{"log_mag", x.log_mag}, {"phase", {x.phase.real(), x.phase.imag()}}});
    }
  }
  return {{"parity", parity == Parity::Even ? "even" : "odd"}, {"terms", terms}};
}

CoeffSeq seq_factorial(int N) {
  CoeffSeq c;
  for (int n = 0; n < N; ++n) {
    double lb = n == 0 ? 0.0 : log_gamma(n) + log_gamma(n + 1.0);
    c.a.push_back(LogScalar::from_log(n * std::log(4.0) + lb));
  }
  return c;
}

CoeffSeq seq_geometric(double cst, int N) {
  CoeffSeq c;
  for (int k = 0; k < N; ++k) {
    if (cst == 0.0 && k > 0) {
      c.a.push_back(LogScalar::zero());
      continue;
    }
    double lm = log_gamma(2.0 * k + 1.0) + (k ? k * std::log(std::fabs(cst)) : 0.0);
    c.a.push_back(LogScalar::from_log(lm, (cst < 0 && k % 2) ? -1 : 1));
  }
  return c;
}

CoeffSeq seq_polylog(double s, int N) {
  CoeffSeq c;
  c.a.push_back(LogScalar::zero());
  for (int k = 1; k < N; ++k) c.a.push_back(LogScalar::from_log(log_gamma(2.0 * k + 1.0) - s * std::log(k)));
  return c;
}

CoeffSeq seq_edge_polylog(int N) {
  static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  CoeffSeq c;
  c.a.push_back(LogScalar::zero());
  for (int k = 1; k < N; ++k)
    c.a.push_back(log_term(log_gamma(2.0 * k + 1.0) + k * std::log(2.0) - 0.5 * std::log(k), ipow[k % 4]));
  return c;
}

CoeffSeq seq_from_name(const std::string& name, int N) {
  auto arg = [&name](const std::string& head) {
    if (name.size() < head.size() + 2 || name.back() != ')') throw std::invalid_argument("bad generator: " + name);
    return std::stod(name.substr(head.size() + 1, name.size() - head.size() - 2));
  };
  if (name == "factorial") return seq_factorial(N);
  if (name == "edge_polylog") return seq_edge_polylog(N);
  if (name.rfind("geometric(", 0) == 0) return seq_geometric(arg("geometric"), N);
  if (name.rfind("polylog(", 0) == 0) return seq_polylog(arg("polylog"), N);
  throw std::invalid_argument("unknown generator: " + name);
}

PadeResult robust_pade(const std::vector<cplx>& c_in, int m, int n, double tol) {
  if (static_cast<int>(c_in.size()) < m + n + 1) throw std::invalid_argument("robust_pade: too few coefficients");
  using Mat = Eigen::MatrixXcd;
  std::vector<cplx> c(c_in.begin(), c_in.begin() + m + n + 1);
  double cn = 0.0, c0 = 0.0;
  for (auto& x : c) cn = std::max(cn, std::abs(x));
  for (int i = 0; i <= m; ++i) c0 = std::max(c0, std::abs(c[i]));
  if (cn == 0.0 || c0 <= tol * cn) return {{0.0}, {1.0}};
  double c2 = 0.0;
  for (auto& x : c) c2 += std::norm(x);
  const double ts = tol * std::sqrt(c2);
  auto Z = [&](int i, int j) { return i >= j ? c[i - j] : cplx(0.0); };
  Eigen::VectorXcd b;
  while (true) {
    if (n == 0) {
      b = Eigen::VectorXcd::Ones(1);
      break;
    }
    Mat C(n, n + 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= n; ++j) C(i, j) = Z(m + 1 + i, j);
    Eigen::JacobiSVD<Mat> svd(C, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rho = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > ts) ++rho;
    if (rho == n) {
      b = svd.matrixV().col(n);
      break;
    }
    m -= n - rho;
    n = rho;
  }
  std::vector<cplx> a(m + 1), bb(b.data(), b.data() + b.size());
  for (int i = 0; i <= m; ++i) {
    cplx s = 0.0;
    for (int j = 0; j <= n; ++j) s += Z(i, j) * bb[j];
    a[i] = s;
  }
  // common zeros at the origin
  int lam = 0;
  while (lam < static_cast<int>(bb.size()) - 1 && std::abs(bb[lam]) <= tol) ++lam;
  bb.erase(bb.begin(), bb.begin() + lam);
  a.erase(a.begin(), a.begin() + std::min<size_t>(lam, a.size() - 1));
  while (bb.size() > 1 && std::abs(bb.back()) <= tol) bb.pop_back();
  while (a.size() > 1 && std::abs(a.back()) <= ts) a.pop_back();
  const cplx b0 = bb[0];
  for (auto& x : a) x /= b0;
  for (auto& x : bb) x /= b0;
  return {a, bb};
}

std::vector<cplx> polynomial_roots(const std::vector<cplx>& p) {
  int d = static_cast<int>(p.size()) - 1;
  while (d > 0 && p[d] == 0.0) --d;
  if (d <= 0) return {};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) comp(i, d - 1) = -p[i] / p[d];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + d);
  return r;
}

namespace {

cplx horner(const std::vector<cplx>& p, cplx x) {
  cplx s = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) s = s * x + *it;
  return s;
}

}  // namespace

SeriesEvaluator::SeriesEvaluator(const CoeffSeq& seq, double R_scale, int pade_degree)
    : parity_(seq.parity), R_(R_scale) {
  if (!(R_scale > 0.0)) throw std::domain_error("SeriesEvaluator: R must be positive");
  const int N = static_cast<int>(seq.a.size());
  std::vector<double> lc(N);
  std::vector<cplx> ph(N);
  int last = -1, nonzero = 0;
  for (int k = 0; k < N; ++k) {
    const auto& x = seq.a[k];
    lc[k] = x.is_zero() ? numkit::kNegInf : x.log_mag - log_gamma(parity_ == Parity::Even ? 2.0 * k + 1 : 2.0 * k + 2);
    ph[k] = x.phase;
    if (!x.is_zero()) {
      last = k;
      ++nonzero;
    }
  }
  if (last < 0) {
    zero_ = true;
    return;
  }
  const int K = last + 1;
  bool polynomial = nonzero < 8 || K < 16;
  if (!polynomial) {
    // slope of ln|c_k| over the upper half
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int k = K / 2; k < K; ++k) {
      if (!std::isfinite(lc[k])) continue;
      sx += k;
      sy += lc[k];
      sxx += double(k) * k;
      sxy += k * lc[k];
      ++cnt;
    }
    double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    log_rho_ = -slope;
  }
  c_.resize(K);
  for (int k = 0; k < K; ++k) {
    double e = lc[k] + k * log_rho_;
    if (e > 700.0) throw std::runtime_error("SeriesEvaluator: coefficients too irregular to normalize");
    c_[k] = std::isfinite(lc[k]) ? std::exp(e) * ph[k] : cplx(0.0);
  }
  suffix_.assign(K + 1, 0.0);
  for (int k = K - 1; k >= 0; --k) suffix_[k] = std::max(suffix_[k + 1], std::abs(c_[k]));
  if (polynomial) return;

  // Domb-Sykes: c_k / c_{k-1} = A + B/k
  {
    int k0 = std::max(K / 2, 2);
    std::vector<cplx> r;
    std::vector<double> ik;
    bool ok = true;
    for (int k = k0; k < K; ++k) {
      if (c_[k - 1] == 0.0 || c_[k] == 0.0) {
        ok = false;
        break;
      }
      r.push_back(c_[k] / c_[k - 1]);
      ik.push_back(1.0 / k);
    }
    if (ok && r.size() >= 8) {
      const size_t n = r.size();
      double mx = 0;
      cplx my = 0;
      for (size_t i = 0; i < n; ++i) {
        mx += ik[i];
        my += r[i];
      }
      mx /= n;
      my /= n;
      double sxx = 0;
      cplx sxy = 0;
      for (size_t i = 0; i < n; ++i) {
        sxx += (ik[i] - mx) * (ik[i] - mx);
        sxy += (ik[i] - mx) * (r[i] - my);
      }
      cplx B = sxy / sxx, A = my - B * mx;
      double res = 0;
      for (size_t i = 0; i < n; ++i) res += std::norm(r[i] - A - B * ik[i]);
      res = std::sqrt(res / n);
      if (std::abs(A) > 1e-3 && res < 1e-4 * std::abs(A)) sing_w_ = std::exp(log_rho_) / A;
    }
  }

  int n = std::min(pade_degree, (K - 1) / 2);
  for (int which = 0; which < 2; ++which) {
    int d = which == 0 ? n : std::max(1, n - 6);
    auto pr = robust_pade(c_, d, d);
    pa_[which] = pr.num;
    pb_[which] = pr.den;
  }
  double mx = 0.0, md = 0.0;
  for (int i = 0; i < 16; ++i) {
    cplx x = 0.8 * std::polar(1.0, 2 * kPi * i / 16);
    double t;
    bool ok, dv;
    cplx d = eval_direct(x, &t, &ok, &dv);
    if (!ok) continue;
    mx = std::max(mx, std::abs(d));
    md = std::max(md, std::abs(d - eval_pade(x, 0)));
  }
  pade_check_ = mx > 0 ? md / mx : 0.0;
}

cplx SeriesEvaluator::w_of(cplx z) const { return 2.0 * R_ * R_ * z * z; }

cplx SeriesEvaluator::eval_direct(cplx x, double* tail, bool* ok, bool* diverging) const {
  const double ax = std::abs(x);
  const int K = static_cast<int>(c_.size());
  const bool poly = pa_[0].empty();
  cplx s = 0.0, p = 1.0;
  double pm = 1.0;
  *diverging = false;
  *ok = false;
  *tail = 0.0;
  if (poly) {
    for (int k = K - 1; k >= 0; --k) s = s * x + c_[k];
    *ok = true;
    return s;
  }
  if (ax >= 1.0) {
    *diverging = true;
    *tail = std::numeric_limits<double>::infinity();
    return s;
  }
  double last = 0.0, prev = 0.0;
  for (int k = 0; k < K; ++k) {
    cplx t = c_[k] * p;
    s += t;
    prev = last;
    last = std::abs(t);
    p *= x;
    pm *= ax;
    if (k + 1 < K) {
      double bound = suffix_[k + 1] * pm / (1.0 - ax);
      if (bound <= 1e-15 * std::abs(s)) {
        *tail = bound;
        *ok = true;
        return s;
      }
    }
  }
  *tail = last;
  *diverging = last >= prev && last > 0.0;
  return s;
}

cplx SeriesEvaluator::eval_pade(cplx x, int which) const {
  return horner(pa_[which], x) / horner(pb_[which], x);
}

SeriesEvaluator::Value SeriesEvaluator::eval(cplx z) const {
  if (zero_) return {0.0, 0.0, true, false};
  const cplx x = w_of(z) * std::exp(-log_rho_);
  const cplx pre = parity_ == Parity::Odd ? std::sqrt(2.0) * R_ * z : cplx(1.0);
  double tail;
  bool ok, dv;
  cplx s = eval_direct(x, &tail, &ok, &dv);
  if (ok || pa_[0].empty()) return {pre * s, std::abs(pre) * tail, true, dv};
  cplx p0 = eval_pade(x, 0), p1 = eval_pade(x, 1);
  return {pre * p0, std::abs(pre) * std::abs(p0 - p1), false, dv};
}

std::optional<cplx> SeriesEvaluator::dominant_singularity() const {
  if (!sing_w_) return std::nullopt;
  return std::sqrt(*sing_w_ / (2.0 * R_ * R_));
}

std::vector<cplx> SeriesEvaluator::stable_poles() const {
  std::vector<cplx> out;
  if (pb_[0].size() < 2) return out;
  auto p0 = polynomial_roots(pb_[0]);
  auto p1 = polynomial_roots(pb_[1]);
  const double rho = std::exp(log_rho_);
  for (cplx p : p0) {
    if (std::abs(p) < 0.99) continue;  // inside the disc: spurious
    bool match = false;
    for (cplx q : p1) match = match || std::abs(p - q) < 1e-6 * std::max(1.0, std::abs(p));
    if (match) out.push_back(std::sqrt(p * rho / (2.0 * R_ * R_)));
  }
  return out;
}

EvalResult eval_series(const CoeffSeq& c, cplx z, double R_scale) {
  if (std::fabs(z.real()) + std::fabs(z.imag()) > 1.0 + 1e-15) throw std::domain_error("eval_series: z outside the closed square");
  SeriesEvaluator ev(c, R_scale);
  auto v = ev.eval(z);
  return {v.f, v.tail, v.diverging, v.direct};
}

const char* to_string(Membership m) {
  switch (m) {
    case Membership::Convergent: return "convergent";
    case Membership::Divergent: return "divergent";
    case Membership::Undecided: return "undecided";
  }
  return "?";
}

namespace {

nlohmann::json num_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json BergmanReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (size_t i = 0; i < margins.size(); ++i)
    rows.push_back({{"eps", margins[i]},
                    {"norm2", num_or_null(norm2[i])},
                    {"quad_error", num_or_null(quad_error[i])},
                    {"evaluations", evaluations[i]}});
  nlohmann::json j = {{"verdict", to_string(verdict)}, {"slope", num_or_null(slope)},
                      {"last_ratio", num_or_null(last_ratio)}, {"reason", reason},
                      {"pade_check", pade_check}, {"margins", rows}};
  if (singularity) j["singularity"] = {singularity->real(), singularity->imag()};
  return j;
}

BergmanReport bergman_norm_estimate(const CoeffSeq& c, double R_scale, const std::vector<double>& margins,
                                    const BergmanOptions& opt) {
  if (margins.empty()) throw std::invalid_argument("bergman_norm_estimate: no margins");
  for (size_t i = 0; i < margins.size(); ++i) {
    if (!(margins[i] > 0.0 && margins[i] < 0.5)) throw std::invalid_argument("bergman_norm_estimate: margins must lie in (0, 0.5)");
    if (i && !(margins[i] < margins[i - 1])) throw std::invalid_argument("bergman_norm_estimate: margins must decrease");
  }
  SeriesEvaluator ev(c, R_scale);
  BergmanReport rep;
  rep.margins = margins;
  rep.singularity = ev.dominant_singularity();
  rep.pade_check = ev.pade_check();
  const auto poles = ev.stable_poles();
  const double s2 = std::sqrt(0.5);
  auto integrand = [&ev, s2](double u, double v) {
    cplx z((u - v) * s2, (u + v) * s2);
    return std::norm(ev(z));
  };
  bool early = false;
  for (double eps : margins) {
    if (early) {
      rep.norm2.push_back(kNaN);
      rep.quad_error.push_back(kNaN);
      rep.evaluations.push_back(0);
      continue;
    }
    bool inside = rep.singularity && OmegaDomain::contains(*rep.singularity, eps);
    for (cplx p : poles) inside = inside || OmegaDomain::contains(p, eps);
    if (inside) {
      early = true;
      rep.verdict = Membership::Divergent;
      rep.reason = "singularity inside (1 - eps) Omega at eps = " + std::to_string(eps);
      rep.norm2.push_back(kNaN);
      rep.quad_error.push_back(kNaN);
      rep.evaluations.push_back(0);
      continue;
    }
    const double L = (1.0 - eps) * s2;
    // f is even or odd, so |f|^2 is symmetric under z -> -z; 5 x 10 cells start at 75 x 150 nodes
    auto q = adaptive_2d(integrand, 0.0, L, -L, L, 5, 10, opt.rel_tol, opt.max_evals);
    rep.norm2.push_back(2.0 * q.value);
    rep.quad_error.push_back(2.0 * q.error);
    rep.evaluations.push_back(static_cast<int>(q.evals));
  }
  if (early) return rep;

  std::vector<double> d, e;
  for (size_t i = 1; i < margins.size(); ++i) {
    d.push_back(rep.norm2[i] - rep.norm2[i - 1]);
    e.push_back(margins[i]);
  }
  const double top = rep.norm2.back();
  if (d.size() < 2) {
    rep.reason = "too few margins";
    return rep;
  }
  if (top == 0.0 || std::all_of(d.begin(), d.end(), [top](double x) { return std::fabs(x) <= 1e-12 * std::fabs(top); })) {
    rep.verdict = Membership::Convergent;
    rep.reason = "norms constant";
    return rep;
  }
  const size_t n = d.size(), m = std::min<size_t>(3, n);
  bool positive = true;
  for (size_t i = n - m; i < n; ++i) positive = positive && d[i] > 0.0;
  if (positive) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = n - m; i < n; ++i) {
      double x = -std::log(e[i]), y = std::log(d[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    rep.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  } else {
    rep.slope = kNaN;
  }
  rep.last_ratio = d[n - 1] / d[n - 2];
  const bool decaying =
      d[n - 1] <= opt.converge_ratio * d[n - 2] && (n < 3 || d[n - 2] <= opt.converge_ratio * d[n - 3]);
  if (positive && rep.slope >= opt.diverge_slope) {
    rep.verdict = Membership::Divergent;
    rep.reason = "increments grow like a power of 1/eps";
  } else if (decaying) {
    rep.verdict = Membership::Convergent;
    rep.reason = "increments decay geometrically";
  } else {
    rep.reason = "increments neither decay nor grow";
  }
  return rep;
}

nlohmann::json RadiusReport::to_json() const {
  nlohmann::json pr = nlohmann::json::array();
  for (auto& p : probes) pr.push_back({{"R", p.first}, {"verdict", to_string(p.second)}});
  if (unbounded) return {{"unbounded", true}, {"lo", lo}, {"probes", pr}};
  return {{"unbounded", false}, {"lo", lo}, {"hi", hi}, {"widened", widened}, {"probes", pr}};
}

RadiusReport radius_Ra(const CoeffSeq& c, double tol, const std::vector<double>& margins) {
  if (!(tol > 1e-4)) throw std::invalid_argument("radius_Ra: tol must exceed 1e-4");
  RadiusReport rep;
  if (c.all_zero()) {
    rep.unbounded = true;
    rep.lo = std::numeric_limits<double>::infinity();
    return rep;
  }
  int nonzero = 0, last = -1;
  for (size_t k = 0; k < c.a.size(); ++k)
    if (!c.a[k].is_zero()) {
      ++nonzero;
      last = static_cast<int>(k);
    }
  if (nonzero < 8 || last < 15) {
    // a polynomial is entire
    rep.unbounded = true;
    rep.lo = std::numeric_limits<double>::infinity();
    return rep;
  }
  SeriesEvaluator base(c, 1.0);
  // the disc of convergence covers Omega for R <= sqrt(rho/2) and sits inside it for R >= sqrt(rho)
  const double rho = std::exp(base.log_radius_w());
  const double r_full = std::sqrt(0.5 * rho), r_in = std::sqrt(rho);
  if (r_in > 1e6) {
    rep.unbounded = true;
    rep.lo = r_in;
    return rep;
  }
  auto classify = [&](double R) {
    auto v = bergman_norm_estimate(c, R, margins).verdict;
    rep.probes.emplace_back(R, v);
    return v;
  };
  double lo = 0.99 * r_full, hi = 1.01 * r_in;
  int tries = 0;
  while (classify(lo) != Membership::Convergent) {
    if (++tries > 10) throw std::runtime_error("radius_Ra: no convergent lower bracket found");
    lo *= 0.5;
  }
  tries = 0;
  while (classify(hi) != Membership::Divergent) {
    if (++tries > 10) {
      rep.unbounded = true;
      rep.lo = hi;
      return rep;
    }
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    auto v = classify(mid);
    if (v == Membership::Convergent) {
      lo = mid;
    } else if (v == Membership::Divergent) {
      hi = mid;
    } else {
      double w = 0.25 * (hi - lo);
      bool moved = false;
      if (classify(mid - w) == Membership::Convergent) {
        lo = mid - w;
        moved = true;
      }
      if (classify(mid + w) == Membership::Divergent) {
        hi = mid + w;
        moved = true;
      }
      if (!moved) {
        rep.widened = true;
        break;
      }
    }
  }
  rep.lo = lo;
  rep.hi = hi;
  return rep;
}

nlohmann::json CounterexampleReport::to_json() const {
  return {{"residual_slope", residual_slope},
          {"residual_intercept", residual_intercept},
          {"q_max", q_max},
          {"q_last", q.empty() ? 0.0 : q.back()},
          {"function_norm", function_norm.to_json()},
          {"derivative_norm", derivative_norm.to_json()},
          {"verdict", to_string(verdict)}};
}

CounterexampleReport counterexample_factorial(int N) {
  if (N < 100) throw std::invalid_argument("counterexample_factorial: N must be at least 100");
  CounterexampleReport r;
  // ln(a_n/(2n)!) = n ln 4 + ln (n-1)! + ln n! - ln (2n)!
  auto la = [](int n) { return n * std::log(4.0) + log_gamma(n) + log_gamma(n + 1.0) - log_gamma(2.0 * n + 1.0); };
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  r.q_max = 0.0;
  for (int n = 1; n <= N; ++n) {
    double l = la(n);
    double lead = 0.5 * std::log(kPi / n);
    double q = std::exp(l + 0.5 * std::log1p(n));
    r.q.push_back(q);
    r.q_max = std::max(r.q_max, q);
    if (n >= std::max(10, N / 10)) {
      double res = std::exp(lead) * std::expm1(l - lead);
      double x = std::log(static_cast<double>(n)), y = std::log(std::fabs(res));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++cnt;
    }
  }
  r.residual_slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  r.residual_intercept = (sy - r.residual_slope * sx) / cnt;
  const int M = std::max(N, 4000);
  CoeffSeq a = seq_factorial(M);
  const double R = std::sqrt(0.5);
  r.function_norm = bergman_norm_estimate(a, R, OmegaDomain::default_margins());
  CoeffSeq d = a.shifted(1);
  d.parity = Parity::Odd;
  r.derivative_norm = bergman_norm_estimate(d, R, OmegaDomain::default_margins());
  r.verdict = r.derivative_norm.verdict;
  return r;
}

std::vector<LossRow> loss_factors(const std::vector<double>& s_grid) {
  std::vector<LossRow> rows;
  for (double s : s_grid) {
    if (!(s > 1.0)) throw std::domain_error("loss_factors: s must exceed 1");
    LossRow r;
    r.s = s;
    r.rho = std::cos(kPi / (2.0 * s));
    r.Gamma = std::pow(r.rho, -s);
    r.rho_mrr = std::exp(-1.0 / (std::exp(1.0) * s));
    r.diff = r.rho_mrr - r.rho;
    r.sign = r.diff > 0 ? 1 : (r.diff < 0 ? -1 : 0);
    r.bridge_gap = std::fabs(r.rho - std::pow(r.Gamma, -1.0 / s));
    rows.push_back(r);
  }
  return rows;
}

double loss_crossover(double tol) {
  auto g = [](double s) { return std::exp(-1.0 / (std::exp(1.0) * s)) - std::cos(kPi / (2.0 * s)); };
  double a = 3.0, b = 4.0;
  if (!(g(a) > 0 && g(b) < 0)) throw std::runtime_error("loss_crossover: no sign change on (3, 4)");
  while (b - a > tol) {
    double m = 0.5 * (a + b);
    (g(m) > 0 ? a : b) = m;
  }
  return 0.5 * (a + b);
}

BergmanReport borel_range_test(const CoeffSeq& c, int p, Parity parity, double R, const std::vector<double>& margins) {
  CoeffSeq d = c.shifted(p);
  d.parity = parity;
  return bergman_norm_estimate(d, R, margins);
}

}  // namespace heatflat::holo
