// Copyright Contributors to the nightflare project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace nightflare {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A pixel value, parameter or document that violates a documented
/// precondition (non-finite samples, negative sigma, bad scale, ...).
class InputError : public Error {
public:
    using Error::Error;
};

/// Two rasters that must agree in width/height/channels do not.
class ShapeError : public InputError {
public:
    using InputError::InputError;
};

/// A masked reduction selected no pixels.
class EmptySelectionError : public Error {
public:
    using Error::Error;
};

/// File system or codec failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace nightflare
