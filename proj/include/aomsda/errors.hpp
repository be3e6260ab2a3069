#ifndef AOMSDA_ERRORS_HPP
#define AOMSDA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace aomsda {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Matrix or vector shapes do not line up.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// A node or element index is outside the valid range.
class IndexError : public Error {
  public:
    using Error::Error;
};

/// A structural mutation was refused (e.g. removing the last hidden node).
class RefusalError : public Error {
  public:
    using Error::Error;
};

/// An argument violates a documented precondition.
class ValidationError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

/// Malformed input file; the message carries the offending row number.
class ParseError : public Error {
  public:
    using Error::Error;
};

/// A loss became NaN or infinite during training.
class NumericalError : public Error {
  public:
    NumericalError(std::string phase, std::size_t round, const std::string& what)
        : Error(what), phase_(std::move(phase)), round_(round) {}

    const std::string& phase() const { return phase_; }
    std::size_t round() const { return round_; }

  private:
    std::string phase_;
    std::size_t round_;
};

} // namespace aomsda

#endif // AOMSDA_ERRORS_HPP
