#pragma once

namespace heatflat::quad {

// 16-point Gauss-Legendre on [-1, 1], symmetric half
inline constexpr double kGLx[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                   0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                   0.9445750230732326, 0.9894009349916499};
inline constexpr double kGLw[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                   0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                   0.0622535239386479, 0.0271524594117541};

template <class F>
double gauss_legendre(F&& f, double a, double b) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
  for (int i = 0; i < 8; ++i) s += kGLw[i] * (f(c - h * kGLx[i]) + f(c + h * kGLx[i]));
  return s * h;
}

template <class F>
double composite_gl(F&& f, double a, double b, int panels) {
  double s = 0.0, w = (b - a) / panels;
  for (int i = 0; i < panels; ++i) s += gauss_legendre(f, a + i * w, a + (i + 1) * w);
  return s;
}

}  // namespace heatflat::quad
