// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace lutnn {

// Error taxonomy mirrors the CLI exit codes: config 2, data 3, training 4,
// verification 5. Anything else escaping main is a plain bug (exit 1).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TrainError : std::runtime_error {
  explicit TrainError(const std::string& msg) : std::runtime_error(msg) {}
};

struct VerifyError : std::runtime_error {
  explicit VerifyError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lutnn
