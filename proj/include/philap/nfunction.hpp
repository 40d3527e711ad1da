// N-function calculus for kernels phi driving div(phi(|grad u|) grad u).
//
// A kernel phi defines Phi(t) = integral_0^t s phi(s) ds.  The admissible class
// is pinned by three conditions: s phi(s) -> 0 at 0 and -> infinity at infinity,
// s phi(s) strictly increasing, and ell-1 <= (s phi(s))'/phi(s) <= m-1 for
// growth exponents 1 < ell <= m.  This header provides construction, exponent
// estimation, the convex conjugate, the Sobolev conjugate, and the power-type
// comparison bounds both conjugates inherit from (ell, m).
#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "philap/errors.hpp"

namespace philap {

enum class KernelFamily { Power, SumPowers, Custom };

// phi itself plus the pieces of derivative information the rest of the library
// needs.  Builtin families carry closed forms; Custom differentiates centrally
// with relative step 1e-6 and integrates adaptively.
class PhiKernel {
 public:
  static PhiKernel power(double p);
  static PhiKernel sum_powers(std::vector<double> exponents);
  static PhiKernel custom(std::function<double(double)> phi);

  KernelFamily family() const { return family_; }
  const std::vector<double>& exponents() const { return exponents_; }

  double phi(double s) const;
  // d/ds [s phi(s)]
  double sphi_prime(double s) const;
  // d/ds phi(s)
  double phi_prime(double s) const;
  // integral_0^t s phi(s) ds
  double Phi(double t) const;

 private:
  PhiKernel() = default;
  KernelFamily family_ = KernelFamily::Power;
  std::vector<double> exponents_;  // builtin families
  std::function<double(double)> custom_phi_;
};

struct ExponentEstimate {
  double ell = 0;
  double m = 0;
};

// Growth exponents of the kernel: ell = 1 + inf (s phi)'/phi, m = 1 + sup.
// Builtin families return their analytic values; Custom samples `grid_points`
// log-spaced points spanning at least [1e-6, 1e6].  Throws ExponentOutOfRange
// if ell <= 1, or if n_dim > 0 is supplied and m >= n_dim.
ExponentEstimate estimate_exponents(const PhiKernel& kernel,
                                    int grid_points = 400,
                                    double n_dim = 0);

// Immutable value type bundling a kernel with verified exponents.
class NFunction {
 public:
  const PhiKernel& kernel() const { return *kernel_; }
  double ell() const { return ell_; }
  double m() const { return m_; }

  double phi(double s) const { return kernel_->phi(s); }
  double Phi(double t) const;
  // Phi'(t) = t phi(t)
  double Phi_prime(double t) const;
  double sphi_prime(double s) const { return kernel_->sphi_prime(s); }
  double phi_prime(double s) const { return kernel_->phi_prime(s); }

  // Inverse of Phi on [0, inf), by bisection.
  double Phi_inverse(double y) const;

  // Convex conjugate conj(t) = max_{s>=0} (t s - Phi(s)), evaluated through
  // the first-order condition s phi(s) = t.
  double conjugate(double t) const;
  // The maximizer s(t) solving s phi(s) = t.
  double conjugate_arg(double t) const;
  // Inverse of the conjugate on [0, inf).
  double conjugate_inverse(double y) const;

  // Sobolev conjugate: inverse of tau -> integral_0^tau Phi^{-1}(s) s^{-(N+1)/N} ds.
  // Requires m < n_dim; throws DivergentIntegral otherwise.
  double sobolev_conjugate(double t, double n_dim) const;

  // Power-type comparison envelopes.  zeta0/zeta1 bracket Phi(rho t)/Phi(rho),
  // zeta2/zeta3 bracket conj(rho t)/conj(rho) with the conjugate exponents
  // ell/(ell-1) and m/(m-1).
  double zeta0(double t) const;
  double zeta1(double t) const;
  double zeta2(double t) const;
  double zeta3(double t) const;

 private:
  friend NFunction build_nfunction(const PhiKernel&, int, double);
  friend NFunction build_nfunction_with_exponents(const PhiKernel&, double,
                                                  double);
  std::shared_ptr<const PhiKernel> kernel_;
  double ell_ = 0;
  double m_ = 0;
};

// Validates the kernel on a sampled grid (monotonicity of s phi(s), limit
// behaviour at 0 and infinity), estimates exponents, and assembles the
// evaluators.  Throws NonMonotoneKernel or ExponentOutOfRange.
NFunction build_nfunction(const PhiKernel& kernel, int grid_points = 400,
                          double n_dim = 0);

// Assembles an NFunction with caller-declared exponents, skipping estimation.
// Intended for diagnostics: a deliberately wrong declaration lets convexity
// checks demonstrate their detection power.
NFunction build_nfunction_with_exponents(const PhiKernel& kernel, double ell,
                                         double m);

struct ZetaSample {
  double rho = 0;
  double t = 0;
};

struct ZetaReport {
  // Worst signed margins, normalised by the bounding side; negative = violation.
  double worst_lower = 0;   // min over samples of (Phi(rho t) - zeta0 Phi(rho)) / scale
  double worst_upper = 0;   // min over samples of (zeta1 Phi(rho) - Phi(rho t)) / scale
  double worst_conj_lower = 0;
  double worst_conj_upper = 0;
  ZetaSample worst_sample;
  int checked = 0;
};

// Verifies the four power-type envelope inequalities on the given samples with
// relative slack 1e-9.  Returns worst margins; throws BoundViolation carrying
// the offending (rho, t) if any inequality fails beyond slack.
ZetaReport check_zeta_bounds(const NFunction& nf,
                             const std::vector<ZetaSample>& samples);

}  // namespace philap
