#ifndef SPECFIT_ERRORS_HPP
#define SPECFIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace specfit {

struct DegenerateDriverError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UnsupportedOrderError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SingularNormingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IllConditionedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace specfit

#endif
