#include "ufem/bessel.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace ufem {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209;
constexpr double kPi = 3.14159265358979323846264338;

// ---------------------------------------------------------------- x <= 2 ---

void series_k01(double x, double& k0, double& k1) {
  const double q = 0.25 * x * x;
  const double lg = std::log(0.5 * x);

  // I0 = sum q^k/(k!)^2; K0 = -(lg+gamma) I0 + sum_{k>=1} H_k q^k/(k!)^2
  // I1 = (x/2) sum q^k/(k!(k+1)!)
  // K1 = 1/x + lg*I1 - (x/4) sum (H_k + H_{k+1} - 2 gamma) q^k/(k!(k+1)!)
  double t0 = 1.0, t1 = 1.0;  // q^k/(k!)^2 and q^k/(k!(k+1)!)
  double hk = 0.0, hk1 = 1.0;
  double i0 = 1.0, s0 = 0.0;
  double i1 = 1.0, s1 = 1.0 - 2.0 * kEulerGamma;
  for (int k = 1; k <= 60; ++k) {
    t0 *= q / (static_cast<double>(k) * k);
    t1 *= q / (static_cast<double>(k) * (k + 1));
    hk += 1.0 / k;
    hk1 += 1.0 / (k + 1);
    i0 += t0;
    s0 += t0 * hk;
    i1 += t1;
    s1 += t1 * (hk + hk1 - 2.0 * kEulerGamma);
    if (t0 < 1e-19 * i0 && t1 < 1e-19 * i1) break;
  }
  k0 = -(lg + kEulerGamma) * i0 + s0;
  k1 = 1.0 / x + lg * (0.5 * x * i1) - 0.25 * x * s1;
}

// ------------------------------------------------------- 2 < x <= 512 ------

// e^x K_nu(x) by trapezoid on the cosh integral; step shrinks like 1/sqrt(x)
// to resolve the near-Gaussian bump of width ~ x^{-1/2} at t = 0.
double scaled_k_trapezoid(int nu, double x) {
  const double h = std::fmin(0.2, 0.5 / std::sqrt(x));
  const double tmax = std::acosh(1.0 + 62.0 / x);
  const int n = static_cast<int>(std::ceil(tmax / h)) + 2;
  double s = 0.5;  // t = 0: integrand is exactly 1
  for (int k = 1; k <= n; ++k) {
    double t = k * h;
    double sh = std::sinh(0.5 * t);  // cosh t - 1 = 2 sinh^2(t/2), no cancellation
    s += std::exp(-2.0 * x * sh * sh) * (nu == 0 ? 1.0 : std::cosh(t));
  }
  return h * s;
}

constexpr int kSegments = 8;  // [2,4], [4,8], ..., [256,512]
constexpr int kCheb = 28;
double cheb_coef[2][kSegments][kCheb];
std::once_flag cheb_once;

void build_cheb() {
  for (int s = 0; s < kSegments; ++s) {
    double a = std::ldexp(2.0, s), b = 2.0 * a;
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double fv[2][kCheb];
    for (int j = 0; j < kCheb; ++j) {
      double t = std::cos(kPi * (j + 0.5) / kCheb);
      double x = mid + half * t;
      for (int nu = 0; nu < 2; ++nu) fv[nu][j] = std::sqrt(x) * scaled_k_trapezoid(nu, x);
    }
    for (int nu = 0; nu < 2; ++nu)
      for (int k = 0; k < kCheb; ++k) {
        double c = 0.0;
        for (int j = 0; j < kCheb; ++j) c += fv[nu][j] * std::cos(kPi * k * (j + 0.5) / kCheb);
        cheb_coef[nu][s][k] = 2.0 * c / kCheb;
      }
  }
}

double cheb_eval(int nu, double x) {
  std::call_once(cheb_once, build_cheb);
  int s = 0;
  double a = 2.0;
  while (s + 1 < kSegments && x > 2.0 * a) {
    a *= 2.0;
    ++s;
  }
  double t = (x - 1.5 * a) / (0.5 * a);  // segment [a, 2a] -> [-1, 1]
  const double* c = cheb_coef[nu][s];
  double b1 = 0.0, b2 = 0.0;
  for (int k = kCheb - 1; k >= 1; --k) {
    double b0 = 2.0 * t * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  double r = t * b1 - b2 + 0.5 * c[0];  // R_nu(x) = sqrt(x) e^x K_nu(x)
  return r * std::exp(-x) / std::sqrt(x);
}

// ------------------------------------------------------------ x > 512 ------

double asymptotic_k(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0, s = 1.0;
  for (int k = 1; k <= 9; ++k) {
    term *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k * x);
    s += term;
  }
  return std::sqrt(0.5 * kPi / x) * std::exp(-x) * s;
}

}  // namespace

double bessel_k(int order, double x) {
  if (order != 0 && order != 1) throw std::invalid_argument("bessel_k: order must be 0 or 1");
  if (!(x > 0.0)) throw std::domain_error("bessel_k: argument must be positive");
  if (x <= 2.0) {
    double k0, k1;
    series_k01(x, k0, k1);
    return order == 0 ? k0 : k1;
  }
  if (x <= 512.0) return cheb_eval(order, x);
  return asymptotic_k(order, x);
}

double bessel_k0(double x) { return bessel_k(0, x); }
double bessel_k1(double x) { return bessel_k(1, x); }

}  // namespace ufem
