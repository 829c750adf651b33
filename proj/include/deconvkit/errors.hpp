#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace deconvkit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Invalid distribution, configuration or method parameter.
class ParameterError : public Error
{
public:
  using Error::Error;
};

/// Characteristic function requested for a family without a closed form.
class UnsupportedFamilyError : public Error
{
public:
  using Error::Error;
};

/// Too few (or too concentrated) observations for the requested estimator.
class InsufficientDataError : public Error
{
public:
  using Error::Error;
};

class DegenerateKnotsError : public Error
{
public:
  using Error::Error;
};

/// IRLS did not converge. Carries the deviance of every iteration.
class FitFailureError : public Error
{
public:
  FitFailureError(const std::string& what, std::vector<double> deviance_trace)
    : Error(what)
    , trace_(std::move(deviance_trace))
  {}

  const std::vector<double>& trace() const noexcept { return trace_; }

private:
  std::vector<double> trace_;
};

class WindowError : public Error
{
public:
  using Error::Error;
};

/// Var(z) must exceed Var(x) for the deconvolution to be meaningful.
class VarianceOrderError : public Error
{
public:
  using Error::Error;
};

class DampingFitError : public Error
{
public:
  using Error::Error;
};

class LengthMismatchError : public Error
{
public:
  using Error::Error;
};

class GridError : public Error
{
public:
  using Error::Error;
};

class ScenarioInfeasibleError : public Error
{
public:
  using Error::Error;
};

/// Malformed input file (CSV or JSON). `line` is 1-based, 0 when unknown.
class ParseError : public Error
{
public:
  ParseError(const std::string& what, std::size_t line = 0)
    : Error(line ? what + " (line " + std::to_string(line) + ")" : what)
    , line_(line)
  {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace deconvkit
