#ifndef CMGND_ERRORS_HPP
#define CMGND_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cmgnd {

// Invalid distribution or model parameters (sigma <= 0, nu <= 0, bad weights, ...).
class invalid_parameter : public std::invalid_argument {
public:
    explicit invalid_parameter(const std::string& msg) : std::invalid_argument(msg) {}
};

// Malformed user input: empty data, bad CSV, inconsistent constraint spec, ...
class input_error : public std::invalid_argument {
public:
    explicit input_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Estimation failed (e.g. every start diverged).
class fit_error : public std::runtime_error {
public:
    explicit fit_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A simulation experiment could not produce a usable table.
class experiment_error : public std::runtime_error {
public:
    explicit experiment_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cmgnd

#endif  // CMGND_ERRORS_HPP
