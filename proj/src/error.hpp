// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exception hierarchy shared by every module. The C API maps each kind onto
// a status code, so new kinds must be added there as well.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mnm {

enum class ErrorKind {
  invalid_argument,
  shape_mismatch,
  model_mismatch,
  not_converged,
  diverged,
  io,
  format,
  config,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::invalid_argument, what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::shape_mismatch, what) {}
};

class ModelMismatch : public Error {
 public:
  explicit ModelMismatch(const std::string& what) : Error(ErrorKind::model_mismatch, what) {}
};

/// An iterative method ran out of iterations. Carries the last residual and
/// the residual trace so callers can report how close it got.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, std::vector<double> trace = {})
      : Error(ErrorKind::not_converged, what), residual_(residual), trace_(std::move(trace)) {}
  double residual() const noexcept { return residual_; }
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  double residual_;
  std::vector<double> trace_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::vector<double> trace)
      : Error(ErrorKind::diverged, what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

enum class FormatErrorKind { bad_magic, truncated, unknown_dtype, malformed };

class FormatError : public Error {
 public:
  FormatError(FormatErrorKind detail, const std::string& what)
      : Error(ErrorKind::format, what), detail_(detail) {}
  FormatErrorKind detail() const noexcept { return detail_; }

 private:
  FormatErrorKind detail_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

}  // namespace mnm
