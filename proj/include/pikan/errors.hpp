#pragma once

#include <stdexcept>
#include <string>

namespace pikan {

/// Invalid argument passed to a library operation.
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Non-finite value encountered in an evaluation path.
struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input batch spans a zero-width range; an adapted grid would collapse.
struct DegenerateRangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Missing or malformed external data file.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Training aborted because the loss became non-finite.
struct NumericAbort : std::runtime_error {
    long epoch;
    std::string last_checkpoint;

    NumericAbort(long at_epoch, std::string checkpoint_ref)
        : std::runtime_error("non-finite loss at epoch " + std::to_string(at_epoch) +
                             (checkpoint_ref.empty() ? std::string(", no checkpoint written")
                                                     : ", last good checkpoint: " + checkpoint_ref)),
          epoch(at_epoch),
          last_checkpoint(std::move(checkpoint_ref)) {}
};

}  // namespace pikan
