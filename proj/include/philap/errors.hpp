// Exception types shared across the library.  Builders and solvers throw;
// check-style routines return margin reports and only throw when an inequality
// that must hold mathematically is violated beyond its slack.
#pragma once

#include <stdexcept>
#include <string>

namespace philap {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Kernel s -> s*phi(s) fails strict monotonicity on the sampled grid.
struct NonMonotoneKernel : Error {
  using Error::Error;
};

// Estimated or declared growth exponents leave the admissible range.
struct ExponentOutOfRange : Error {
  using Error::Error;
};

// A bisection/bracketing step could not enclose its root.
struct BracketFailure : Error {
  using Error::Error;
};

// The integral defining the Sobolev conjugate diverges at zero.
struct DivergentIntegral : Error {
  using Error::Error;
};

// A guaranteed inequality (zeta bound, Poincare, ...) failed beyond slack.
struct BoundViolation : Error {
  using Error::Error;
};

struct DegenerateElement : Error {
  using Error::Error;
};

struct NonFiniteResidual : Error {
  using Error::Error;
};

struct NoConvergence : Error {
  using Error::Error;
};

struct LineSearchStall : Error {
  using Error::Error;
};

// Converged solution has nodal values below -1e-12.
struct NegativeSolution : Error {
  using Error::Error;
};

// Barrier problem returned the zero field while its load allows a positive one,
// or the mixed-case coefficient h is identically zero.
struct ZeroBarrier : Error {
  using Error::Error;
};

struct InvalidSpec : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

}  // namespace philap
