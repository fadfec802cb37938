#ifndef DCOPT_ERRORS_HPP
#define DCOPT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dcopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidEvaluation : public Error {
 public:
  using Error::Error;
};

class IndefiniteOperator : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Line search ran out of backtracks.
class Stagnation : public Error {
 public:
  using Error::Error;
};

class SubsolverFailure : public Error {
 public:
  SubsolverFailure(const std::string& what, double best_gap)
      : Error(what), best_gap_(best_gap) {}
  double best_gap() const { return best_gap_; }

 private:
  double best_gap_;
};

class GammaCapExceeded : public Error {
 public:
  using Error::Error;
};

class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line) : Error(what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dcopt

#endif  // DCOPT_ERRORS_HPP
