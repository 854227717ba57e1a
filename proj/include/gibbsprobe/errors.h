// Copyright 2026 The gibbsprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GIBBSPROBE_ERRORS_H
#define GIBBSPROBE_ERRORS_H

#include <stdexcept>
#include <string>

namespace gibbsprobe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Sizes of two objects that must agree do not (config vs. model, roster vs. vector, ...).
class DimensionError : public Error {
   public:
    using Error::Error;
};

/// An object violates one of its invariants (unsorted key, non-finite value, beta <= 0, ...).
class InvariantError : public Error {
   public:
    using Error::Error;
};

/// Exhaustive enumeration was requested above the configured spin cap.
class CapExceededError : public Error {
   public:
    CapExceededError(int n_spins, int cap)
        : Error("enumeration over " + std::to_string(n_spins) + " spins exceeds the cap of " +
                std::to_string(cap)),
          n_spins(n_spins),
          cap(cap) {
    }
    int n_spins;
    int cap;
};

/// Malformed input file. `line` is 1-based, 0 when the error is not tied to a line.
class ParseError : public Error {
   public:
    ParseError(const std::string &source, int line, const std::string &what)
        : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
          line(line) {
    }
    int line;
};

/// The interaction screening optimizer could not produce a minimizer.
class LearnError : public Error {
   public:
    LearnError(const std::string &what, int focal, double grad_norm)
        : Error(what), focal(focal), grad_norm(grad_norm) {
    }
    int focal;
    double grad_norm;
};

/// Failure of an external black-box sampler process or of its output.
class BlackboxError : public Error {
   public:
    using Error::Error;
};

/// A numeric fit did not converge from any start.
class FitError : public Error {
   public:
    using Error::Error;
};

}  // namespace gibbsprobe

#endif  // GIBBSPROBE_ERRORS_H
