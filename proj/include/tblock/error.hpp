/*
 *   Copyright 2026 The tblock Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace tblock {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Unknown benchmark name or malformed stencil definition.
class CatalogError : public Error {
  public:
    using Error::Error;
};

/// An operation was called with arguments that violate its precondition.
class PreconditionError : public Error {
  public:
    using Error::Error;
};

/// Hardware or suite configuration could not be parsed.
class ConfigError : public Error {
  public:
    using Error::Error;
};

} // namespace tblock
