#include "philap/nfunction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace philap {

namespace {

constexpr double kCustomFdStep = 1e-6;  // relative step for Custom derivatives

double checked_exponent(double p) {
  if (!(p > 1.0)) {
    std::ostringstream os;
    os << "kernel exponent must exceed 1, got " << p;
    throw ExponentOutOfRange(os.str());
  }
  return p;
}

// Adaptive Simpson on [a, b] with absolute tolerance scaled by the running
// estimate.  The integrands here are smooth except possibly at the left
// endpoint, where they vanish; plain recursion with a depth cap suffices.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol) {
  if (b <= a) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double rough = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = rel_tol * std::max(std::abs(rough), 1e-300);
  return adaptive_simpson(f, a, b, fa, fm, fb, tol, 48);
}

}  // namespace

PhiKernel PhiKernel::power(double p) {
  PhiKernel k;
  k.family_ = KernelFamily::Power;
  k.exponents_ = {checked_exponent(p)};
  return k;
}

PhiKernel PhiKernel::sum_powers(std::vector<double> exponents) {
  if (exponents.empty()) {
    throw ExponentOutOfRange("sum-of-powers kernel needs at least one exponent");
  }
  for (double p : exponents) checked_exponent(p);
  std::sort(exponents.begin(), exponents.end());
  PhiKernel k;
  k.family_ = KernelFamily::SumPowers;
  k.exponents_ = std::move(exponents);
  return k;
}

PhiKernel PhiKernel::custom(std::function<double(double)> phi) {
  PhiKernel k;
  k.family_ = KernelFamily::Custom;
  k.custom_phi_ = std::move(phi);
  return k;
}

double PhiKernel::phi(double s) const {
  switch (family_) {
    case KernelFamily::Power:
      return std::pow(s, exponents_[0] - 2.0);
    case KernelFamily::SumPowers: {
      double v = 0;
      for (double p : exponents_) v += std::pow(s, p - 2.0);
      return v;
    }
    case KernelFamily::Custom:
      return custom_phi_(s);
  }
  return 0;
}

double PhiKernel::sphi_prime(double s) const {
  switch (family_) {
    case KernelFamily::Power:
      return (exponents_[0] - 1.0) * std::pow(s, exponents_[0] - 2.0);
    case KernelFamily::SumPowers: {
      double v = 0;
      for (double p : exponents_) v += (p - 1.0) * std::pow(s, p - 2.0);
      return v;
    }
    case KernelFamily::Custom: {
      const double h = kCustomFdStep * std::max(std::abs(s), 1e-30);
      const double up = (s + h) * custom_phi_(s + h);
      const double lo = (s - h) * custom_phi_(s - h);
      return (up - lo) / (2.0 * h);
    }
  }
  return 0;
}

double PhiKernel::phi_prime(double s) const {
  switch (family_) {
    case KernelFamily::Power:
      return (exponents_[0] - 2.0) * std::pow(s, exponents_[0] - 3.0);
    case KernelFamily::SumPowers: {
      double v = 0;
      for (double p : exponents_) v += (p - 2.0) * std::pow(s, p - 3.0);
      return v;
    }
    case KernelFamily::Custom: {
      const double h = kCustomFdStep * std::max(std::abs(s), 1e-30);
      return (custom_phi_(s + h) - custom_phi_(s - h)) / (2.0 * h);
    }
  }
  return 0;
}

double PhiKernel::Phi(double t) const {
  if (t <= 0) return 0.0;
  switch (family_) {
    case KernelFamily::Power:
      return std::pow(t, exponents_[0]) / exponents_[0];
    case KernelFamily::SumPowers: {
      double v = 0;
      for (double p : exponents_) v += std::pow(t, p) / p;
      return v;
    }
    case KernelFamily::Custom:
      return integrate([this](double s) { return s * custom_phi_(s); }, 0.0, t,
                       1e-12);
  }
  return 0;
}

ExponentEstimate estimate_exponents(const PhiKernel& kernel, int grid_points,
                                    double n_dim) {
  ExponentEstimate est;
  switch (kernel.family()) {
    case KernelFamily::Power:
      est.ell = est.m = kernel.exponents()[0];
      break;
    case KernelFamily::SumPowers:
      est.ell = kernel.exponents().front();
      est.m = kernel.exponents().back();
      break;
    case KernelFamily::Custom: {
      // ratio (s phi)'/phi sampled on a log grid; exponents are 1 + inf/sup.
      const double lo = 1e-6, hi = 1e6;
      double rmin = std::numeric_limits<double>::infinity();
      double rmax = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < grid_points; ++i) {
        const double s =
            lo * std::pow(hi / lo, double(i) / double(grid_points - 1));
        const double denom = kernel.phi(s);
        if (!(denom > 0) || !std::isfinite(denom)) {
          throw NonMonotoneKernel("kernel not positive on the sampling grid");
        }
        const double r = kernel.sphi_prime(s) / denom;
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
      }
      est.ell = 1.0 + rmin;
      est.m = 1.0 + rmax;
      break;
    }
  }
  if (!(est.ell > 1.0)) {
    std::ostringstream os;
    os << "estimated lower exponent " << est.ell << " must exceed 1";
    throw ExponentOutOfRange(os.str());
  }
  if (n_dim > 0 && est.m >= n_dim) {
    std::ostringstream os;
    os << "estimated upper exponent " << est.m
       << " must stay below the space dimension " << n_dim;
    throw ExponentOutOfRange(os.str());
  }
  return est;
}

double NFunction::Phi(double t) const { return kernel_->Phi(std::abs(t)); }

double NFunction::Phi_prime(double t) const { return t * kernel_->phi(t); }

namespace {

// Bisection for a strictly increasing f with f(0) = 0, solving f(s) = y.
double increasing_inverse(const std::function<double(double)>& f, double y,
                          double rel_tol, const char* what) {
  if (y <= 0) return 0.0;
  double lo = 0.0, hi = 1.0;
  double fhi = f(hi);
  int guard = 0;
  while (fhi < y) {
    lo = hi;
    hi *= 2.0;
    fhi = f(hi);
    if (++guard > 2100 || !std::isfinite(hi)) {
      throw BracketFailure(std::string(what) + ": no upper bracket");
    }
  }
  if (lo == 0.0) {
    // shrink towards zero so the bracket is tight on both sides
    double cand = 0.5;
    guard = 0;
    while (f(cand) > y) {
      hi = cand;
      cand *= 0.5;
      if (++guard > 2100) break;
    }
    lo = cand;
  }
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double NFunction::Phi_inverse(double y) const {
  return increasing_inverse([this](double t) { return Phi(t); }, y, 1e-13,
                            "Phi inverse");
}

double NFunction::conjugate_arg(double t) const {
  return increasing_inverse([this](double s) { return s * kernel_->phi(s); }, t,
                            1e-12, "conjugate argument");
}

double NFunction::conjugate(double t) const {
  if (t <= 0) return 0.0;
  const double s = conjugate_arg(t);
  return t * s - Phi(s);
}

double NFunction::conjugate_inverse(double y) const {
  return increasing_inverse([this](double t) { return conjugate(t); }, y, 1e-12,
                            "conjugate inverse");
}

double NFunction::sobolev_conjugate(double t, double n_dim) const {
  if (!(n_dim > 1)) {
    throw DivergentIntegral("Sobolev conjugate needs a dimension above 1");
  }
  if (m_ >= n_dim) {
    std::ostringstream os;
    os << "Sobolev conjugate integral diverges at 0: upper exponent " << m_
       << " >= dimension " << n_dim;
    throw DivergentIntegral(os.str());
  }
  if (t <= 0) return 0.0;
  // G(tau) = integral_0^tau Phi^{-1}(s) s^{-(N+1)/N} ds.  Substituting
  // s = u^q with q large enough turns the integrable singularity at 0 into a
  // vanishing integrand: the transformed exponent is at least
  // q (1/m - 1/N) - 1, so q is chosen to push it above 2.
  const double margin = 1.0 / m_ - 1.0 / n_dim;
  const double q = std::ceil(3.0 / margin);
  const double expo = (n_dim + 1.0) / n_dim;
  auto G = [&](double tau) {
    if (tau <= 0) return 0.0;
    const double U = std::pow(tau, 1.0 / q);
    auto g = [&](double u) {
      if (u <= 0) return 0.0;
      const double s = std::pow(u, q);
      return Phi_inverse(s) * std::pow(s, -expo) * q * std::pow(u, q - 1.0);
    };
    return integrate(g, 0.0, U, 1e-10);
  };
  return increasing_inverse(G, t, 1e-10, "Sobolev conjugate");
}

double NFunction::zeta0(double t) const {
  return std::min(std::pow(t, ell_), std::pow(t, m_));
}

double NFunction::zeta1(double t) const {
  return std::max(std::pow(t, ell_), std::pow(t, m_));
}

double NFunction::zeta2(double t) const {
  const double lc = ell_ / (ell_ - 1.0);
  const double mc = m_ / (m_ - 1.0);
  return std::min(std::pow(t, lc), std::pow(t, mc));
}

double NFunction::zeta3(double t) const {
  const double lc = ell_ / (ell_ - 1.0);
  const double mc = m_ / (m_ - 1.0);
  return std::max(std::pow(t, lc), std::pow(t, mc));
}

NFunction build_nfunction(const PhiKernel& kernel, int grid_points,
                          double n_dim) {
  // s phi(s) must increase strictly across the sampled range; together with
  // ell > 1 from the exponent estimate this pins the limits 0 and infinity.
  const double lo = 1e-8, hi = 1e8;
  const int n = std::max(grid_points, 16);
  double prev = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = lo * std::pow(hi / lo, double(i) / double(n - 1));
    const double v = s * kernel.phi(s);
    if (!std::isfinite(v) || v <= prev) {
      std::ostringstream os;
      os << "s*phi(s) fails strict monotonicity near s = " << s;
      throw NonMonotoneKernel(os.str());
    }
    prev = v;
  }
  const ExponentEstimate est = estimate_exponents(kernel, grid_points, n_dim);
  NFunction nf;
  nf.kernel_ = std::make_shared<PhiKernel>(kernel);
  nf.ell_ = est.ell;
  nf.m_ = est.m;
  return nf;
}

NFunction build_nfunction_with_exponents(const PhiKernel& kernel, double ell,
                                         double m) {
  if (!(ell > 1.0) || !(m >= ell)) {
    throw ExponentOutOfRange("declared exponents must satisfy 1 < ell <= m");
  }
  NFunction nf;
  nf.kernel_ = std::make_shared<PhiKernel>(kernel);
  nf.ell_ = ell;
  nf.m_ = m;
  return nf;
}

ZetaReport check_zeta_bounds(const NFunction& nf,
                             const std::vector<ZetaSample>& samples) {
  constexpr double kSlack = 1e-9;
  ZetaReport rep;
  rep.worst_lower = rep.worst_upper = std::numeric_limits<double>::infinity();
  rep.worst_conj_lower = rep.worst_conj_upper =
      std::numeric_limits<double>::infinity();
  auto update = [](double& worst, double margin, bool& is_worst) {
    is_worst = margin < worst;
    if (is_worst) worst = margin;
  };
  for (const ZetaSample& s : samples) {
    if (!(s.rho > 0) || !(s.t > 0)) continue;
    ++rep.checked;
    const double phi_rho = nf.Phi(s.rho);
    const double phi_rt = nf.Phi(s.rho * s.t);
    const double conj_rho = nf.conjugate(s.rho);
    const double conj_rt = nf.conjugate(s.rho * s.t);
    const double m0 = (phi_rt - nf.zeta0(s.t) * phi_rho) /
                      std::max({phi_rt, nf.zeta0(s.t) * phi_rho, 1e-300});
    const double m1 = (nf.zeta1(s.t) * phi_rho - phi_rt) /
                      std::max({phi_rt, nf.zeta1(s.t) * phi_rho, 1e-300});
    const double m2 = (conj_rt - nf.zeta2(s.t) * conj_rho) /
                      std::max({conj_rt, nf.zeta2(s.t) * conj_rho, 1e-300});
    const double m3 = (nf.zeta3(s.t) * conj_rho - conj_rt) /
                      std::max({conj_rt, nf.zeta3(s.t) * conj_rho, 1e-300});
    bool hit = false;
    update(rep.worst_lower, m0, hit);
    if (hit) rep.worst_sample = s;
    update(rep.worst_upper, m1, hit);
    if (hit) rep.worst_sample = s;
    update(rep.worst_conj_lower, m2, hit);
    if (hit) rep.worst_sample = s;
    update(rep.worst_conj_upper, m3, hit);
    if (hit) rep.worst_sample = s;
    const double worst = std::min({m0, m1, m2, m3});
    if (worst < -kSlack) {
      std::ostringstream os;
      os << "power-envelope bound violated at rho = " << s.rho
         << ", t = " << s.t << " (margin " << worst << ")";
      throw BoundViolation(os.str());
    }
  }
  return rep;
}

}  // namespace philap
