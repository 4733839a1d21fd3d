#pragma once

#include <stdexcept>
#include <string>

namespace lpurify {

// Error taxonomy shared by every module. The CLI maps these onto process
// exit codes: missing inputs -> 2, configuration -> 3, artifact integrity -> 4.

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IndexError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite value produced by a committed numeric operation.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Object used in a state it does not support (untrained model, spent tape).
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Artifact integrity: bad magic/version.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Artifact integrity: payload shorter than its header promises.
struct LengthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Artifact integrity: CRC64 trailer does not match.
struct ChecksumError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace lpurify
