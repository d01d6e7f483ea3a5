#pragma once

#include <stdexcept>
#include <string>

namespace graphflow {

// Iterative solve or integration failed to meet its tolerance; carries the
// best residual reached so callers can report it.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double residual = -1.0)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace graphflow
