#pragma once

#include <stdexcept>
#include <string>

namespace kernrank {

/// Broad error categories. The CLI maps each category to a process exit code.
enum class ErrorKind {
  validation,         // bad arguments, unknown kernel strings, violated preconditions
  domain_violation,   // point outside a kernel or chart domain
  singular_system,    // linear system rank-deficient under the tolerance policy
  quadrature,         // quadrature self-convergence failed
  mismatch,           // manifest replay differs from the recorded payload
  numerical,          // non-convergent series, singular expansions, ill-conditioned fits
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error(ErrorKind::validation, w) {}
};

struct SubsetNotContained : Error {
  explicit SubsetNotContained(const std::string& w) : Error(ErrorKind::validation, w) {}
};

struct DomainViolation : Error {
  explicit DomainViolation(const std::string& w) : Error(ErrorKind::domain_violation, w) {}
};

struct OutOfChart : Error {
  explicit OutOfChart(const std::string& w) : Error(ErrorKind::domain_violation, w) {}
};

struct NonConvergent : Error {
  explicit NonConvergent(const std::string& w) : Error(ErrorKind::numerical, w) {}
};

struct NotAnalytic : Error {
  explicit NotAnalytic(const std::string& w) : Error(ErrorKind::validation, w) {}
};

struct SingularExpansion : Error {
  explicit SingularExpansion(const std::string& w) : Error(ErrorKind::numerical, w) {}
};

struct IllConditionedFit : Error {
  explicit IllConditionedFit(const std::string& w) : Error(ErrorKind::numerical, w) {}
};

struct QuadratureNotConverged : Error {
  explicit QuadratureNotConverged(const std::string& w) : Error(ErrorKind::quadrature, w) {}
};

/// Carries the numerical rank observed when the solve was refused.
struct SingularSystem : Error {
  SingularSystem(const std::string& w, int rank) : Error(ErrorKind::singular_system, w), rank(rank) {}
  int rank;
};

/// `field` is a JSON-pointer style path to the first differing value.
struct MismatchDetected : Error {
  MismatchDetected(const std::string& w, std::string field)
      : Error(ErrorKind::mismatch, w), field(std::move(field)) {}
  std::string field;
};

}  // namespace kernrank
