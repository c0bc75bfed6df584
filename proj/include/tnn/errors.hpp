#ifndef TNN_ERRORS_HPP
#define TNN_ERRORS_HPP

#include <stdexcept>

namespace tnn {

/// Problems with an input dataset or file payload.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FormatError : DataError {
    using DataError::DataError;
};
struct LengthError : DataError {
    using DataError::DataError;
};
struct CountMismatchError : DataError {
    using DataError::DataError;
};

/// Files or directories that cannot be written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration (bad key, value or combination).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tnn

#endif  // TNN_ERRORS_HPP
