#pragma once

#include <stdexcept>
#include <string>

namespace cscale {

// Base of every error the library throws. Callers that only care about
// "something in the pipeline rejected the input" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  explicit ParseError(const std::string& what) : ParseError(what, 0) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class InfeasibleDesign : public Error {
 public:
  using Error::Error;
};

class InvalidJudgment : public Error {
 public:
  using Error::Error;
};

class NoGoldOverlap : public Error {
 public:
  using Error::Error;
};

class ZeroVariance : public Error {
 public:
  using Error::Error;
};

class DegenerateSplit : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class UnknownHashtag : public Error {
 public:
  using Error::Error;
};

class MissingIntensity : public Error {
 public:
  using Error::Error;
};

class UnknownAnnotator : public Error {
 public:
  using Error::Error;
};

class RejectedAnnotator : public Error {
 public:
  using Error::Error;
};

class NoAssignment : public Error {
 public:
  using Error::Error;
};

class DuplicateSubmission : public Error {
 public:
  using Error::Error;
};

}  // namespace cscale
