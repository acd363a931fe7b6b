// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace rwre {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed argument to an operation (non-positive weight, non-neighbours...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Unsupported or malformed configuration / distribution descriptor.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

// Zero-variance or single-category data where a statistic is undefined.
class DegenerateData : public Error {
 public:
  using Error::Error;
};

// A Monte Carlo estimate came out non-finite.
class HeavyTailError : public Error {
 public:
  using Error::Error;
};

class DataQualityError : public Error {
 public:
  using Error::Error;
};

// A model assumption a command depends on does not hold.
class PreconditionFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace rwre
