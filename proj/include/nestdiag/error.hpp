#pragma once

#include <stdexcept>
#include <string>

namespace nestdiag {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A birth contour matches no dead point's log-likelihood.
class BirthContourMissing : public Error {
public:
  BirthContourMissing(std::size_t index, double contour)
      : Error("birth contour " + std::to_string(contour) + " of point " +
              std::to_string(index) + " matches no dead point"),
        index_(index) {}
  std::size_t index() const { return index_; }

private:
  std::size_t index_;
};

/// More points are born on a contour than there are dead points carrying it.
class BirthChainAmbiguous : public Error {
public:
  BirthChainAmbiguous(std::size_t index, double contour)
      : Error("birth contour " + std::to_string(contour) + " of point " +
              std::to_string(index) + " has no unclaimed predecessor"),
        index_(index) {}
  std::size_t index() const { return index_; }

private:
  std::size_t index_;
};

/// Input text could not be parsed; line is 1-based (0 when not applicable).
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

}  // namespace nestdiag
