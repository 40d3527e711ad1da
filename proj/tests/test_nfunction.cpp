#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "philap/nfunction.hpp"

using namespace philap;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
  }
  return out;
}

std::vector<ZetaSample> random_samples(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> e(-3.0, 3.0);
  std::vector<ZetaSample> s(n);
  for (auto& z : s) {
    z.rho = std::pow(10.0, e(rng));
    z.t = std::pow(10.0, e(rng));
  }
  return s;
}

}  // namespace

TEST_SUITE("nfunction") {

TEST_CASE("power kernel closed forms") {
  const double p = 3.0;
  const NFunction nf = build_nfunction(PhiKernel::power(p));
  CHECK(nf.ell() == doctest::Approx(p).epsilon(1e-12));
  CHECK(nf.m() == doctest::Approx(p).epsilon(1e-12));
  const double pc = p / (p - 1.0);
  for (double t : {0.3, 1.0, 2.0, 7.5}) {
    CHECK(nf.Phi(t) == doctest::Approx(std::pow(t, p) / p).epsilon(1e-10));
    CHECK(nf.Phi_prime(t) ==
          doctest::Approx(std::pow(t, p - 1.0)).epsilon(1e-10));
    CHECK(nf.conjugate(t) ==
          doctest::Approx(std::pow(t, pc) / pc).epsilon(1e-8));
    CHECK(nf.conjugate_arg(t) ==
          doctest::Approx(std::pow(t, 1.0 / (p - 1.0))).epsilon(1e-8));
  }
}

TEST_CASE("sum-powers kernel closed forms") {
  const NFunction nf = build_nfunction(PhiKernel::sum_powers({2.0, 3.0}));
  CHECK(nf.ell() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(nf.m() == doctest::Approx(3.0).epsilon(1e-12));
  for (double t : {0.2, 1.0, 4.0}) {
    CHECK(nf.Phi(t) ==
          doctest::Approx(t * t / 2.0 + t * t * t / 3.0).epsilon(1e-10));
    CHECK(nf.phi(t) == doctest::Approx(1.0 + t).epsilon(1e-12));
  }
}

TEST_CASE("builtin exponent estimates are analytic") {
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const auto est = estimate_exponents(PhiKernel::power(p));
    CHECK(std::abs(est.ell - p) <= 1e-6);
    CHECK(std::abs(est.m - p) <= 1e-6);
  }
  const auto est23 = estimate_exponents(PhiKernel::sum_powers({2.0, 3.0}));
  CHECK(std::abs(est23.ell - 2.0) <= 1e-6);
  CHECK(std::abs(est23.m - 3.0) <= 1e-6);
  const auto est15 = estimate_exponents(PhiKernel::sum_powers({1.5, 2.5}));
  CHECK(std::abs(est15.ell - 1.5) <= 1e-6);
  CHECK(std::abs(est15.m - 2.5) <= 1e-6);
}

TEST_CASE("custom kernel estimation recovers a power law") {
  // phi(s) = s is the p = 3 power kernel in disguise.
  const auto est =
      estimate_exponents(PhiKernel::custom([](double s) { return s; }));
  CHECK(std::abs(est.ell - 3.0) <= 1e-6);
  CHECK(std::abs(est.m - 3.0) <= 1e-6);
}

TEST_CASE("inverse round trips") {
  for (const NFunction& nf : {build_nfunction(PhiKernel::power(2.5)),
                              build_nfunction(PhiKernel::sum_powers({2, 3}))}) {
    for (double t : log_grid(1e-3, 1e3, 13)) {
      CHECK(nf.Phi_inverse(nf.Phi(t)) == doctest::Approx(t).epsilon(1e-9));
      CHECK(nf.conjugate_inverse(nf.conjugate(t)) ==
            doctest::Approx(t).epsilon(1e-8));
      // the conjugate maximizer solves s phi(s) = t
      CHECK(nf.Phi_prime(nf.conjugate_arg(t)) ==
            doctest::Approx(t).epsilon(1e-8));
    }
  }
}

TEST_CASE("conjugate matches direct Legendre maximization") {
  for (const NFunction& nf : {build_nfunction(PhiKernel::power(2.5)),
                              build_nfunction(PhiKernel::sum_powers({2, 3}))}) {
    for (double t : log_grid(1e-3, 1e3, 20)) {
      const double direct = oracle::legendre_conjugate(
          [&](double s) { return nf.Phi(s); }, t);
      const double scale = std::max(1.0, std::abs(direct));
      CHECK(std::abs(nf.conjugate(t) - direct) <= 1e-8 * scale);
    }
  }
}

TEST_CASE("biconjugation recovers the N-function") {
  for (const NFunction& nf :
       {build_nfunction(PhiKernel::power(1.5)),
        build_nfunction(PhiKernel::power(3.0)),
        build_nfunction(PhiKernel::sum_powers({1.5, 2.5}))}) {
    for (double t : log_grid(1e-3, 1e3, 50)) {
      const double s = nf.Phi_prime(t);
      const double back = t * s - nf.conjugate(s);
      const double scale = std::max(1.0, nf.Phi(t));
      CHECK(std::abs(back - nf.Phi(t)) <= 1e-8 * scale);
    }
  }
}

TEST_CASE("sobolev conjugate closed form for the quadratic kernel") {
  // Phi(t) = t^2/2 in dimension 3: the defining integral is
  // G(tau) = 6 sqrt(2) tau^{1/6}, so the conjugate is (t / (6 sqrt 2))^6.
  const NFunction nf = build_nfunction(PhiKernel::power(2.0));
  for (double t : {2.0, 5.0, 9.0}) {
    const double exact = std::pow(t / (6.0 * std::sqrt(2.0)), 6.0);
    CHECK(nf.sobolev_conjugate(t, 3.0) ==
          doctest::Approx(exact).epsilon(1e-6));
  }
}

TEST_CASE("sobolev conjugate rejects divergent integrals") {
  const NFunction nf = build_nfunction(PhiKernel::power(3.0));
  CHECK_THROWS_AS((void)nf.sobolev_conjugate(1.0, 2.5), DivergentIntegral);
  CHECK_THROWS_AS((void)estimate_exponents(PhiKernel::power(3.0), 400, 2.5),
                  ExponentOutOfRange);
}

TEST_CASE("zeta envelopes hold on random sweeps") {
  const auto samples = random_samples(10000, 7u);
  for (const NFunction& nf :
       {build_nfunction(PhiKernel::power(1.5)),
        build_nfunction(PhiKernel::power(3.0)),
        build_nfunction(PhiKernel::sum_powers({2, 3}))}) {
    const ZetaReport rep = check_zeta_bounds(nf, samples);
    CHECK(rep.checked == 10000);
    CHECK(rep.worst_lower >= -1e-9);
    CHECK(rep.worst_upper >= -1e-9);
    CHECK(rep.worst_conj_lower >= -1e-9);
    CHECK(rep.worst_conj_upper >= -1e-9);
  }
}

TEST_CASE("zeta check flags deliberately wrong exponents") {
  // Declaring (6, 6) for the cubic kernel makes the lower envelope claim
  // t^3 >= t^6, false for t > 1.
  const NFunction wrong =
      build_nfunction_with_exponents(PhiKernel::power(3.0), 6.0, 6.0);
  std::vector<ZetaSample> samples{{1.0, 10.0}, {2.0, 5.0}};
  CHECK_THROWS_AS((void)check_zeta_bounds(wrong, samples), BoundViolation);
}

TEST_CASE("kernel validation rejects a non-monotone flux") {
  CHECK_THROWS_AS(
      (void)build_nfunction(
          PhiKernel::custom([](double s) { return 1.0 / (s * s); })),
      NonMonotoneKernel);
}

}  // TEST_SUITE
