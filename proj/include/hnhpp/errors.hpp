#pragma once

#include <stdexcept>
#include <string>

namespace hnhpp {

/// Bad input: malformed data, parameters outside their support, invalid config.
/// The CLI maps this to exit status 2.
class ValidationError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// A computation could not produce a finite answer. CLI exit status 3.
class NumericalError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// The data hit a point where the model intensity is infinite, e.g. a retweet
/// stamped at exactly its original's time while psi = 0 and lambda > 0.
class DegenerateDataError : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

} // namespace hnhpp
