// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace doalab {

// Shape mismatch between operands.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A documented precondition on values (not shapes) was violated.
struct ContractError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Rank-deficient steering matrix; usually a duplicate selected DOA.
struct SingularError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside its mathematical domain (e.g. |u| > 1).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace doalab
