#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace netmirror {

// Error categories map onto CLI exit codes: config 2, data 3, numerical 4.
enum class ErrorKind { Config = 2, Data = 3, Numerical = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// Raised by the spectral embedding when one of the requested top eigenvalues
/// is not strictly positive. Carries the full list of computed eigenvalues so
/// the caller can pick a smaller dimension.
class RankDeficiencyError : public NumericalError {
public:
    RankDeficiencyError(const std::string& what, std::vector<double> eigenvalues)
        : NumericalError(what), eigenvalues_(std::move(eigenvalues)) {}
    const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }

private:
    std::vector<double> eigenvalues_;
};

class NotPsdError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace netmirror
