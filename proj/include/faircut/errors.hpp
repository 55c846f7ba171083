#ifndef FAIRCUT_ERRORS_HPP
#define FAIRCUT_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace faircut {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input (bad JSON, invalid arguments).
class InputError : public Error {
public:
    using Error::Error;
};

class DimensionError : public InputError {
public:
    using InputError::InputError;
};

/// A numerical routine could not reach its accuracy target.
class PrecisionError : public Error {
public:
    PrecisionError(const std::string& what, double achieved)
        : Error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// The zero finder exhausted its budget. Never a proof that no zero exists.
class NoZeroFound : public Error {
public:
    NoZeroFound(const std::string& what, double best_residual,
                std::vector<double> per_labeling = {})
        : Error(what), best_residual_(best_residual),
          per_labeling_(std::move(per_labeling)) {}
    double best_residual() const noexcept { return best_residual_; }
    const std::vector<double>& per_labeling() const noexcept { return per_labeling_; }

private:
    double best_residual_;
    std::vector<double> per_labeling_;
};

/// A caller-supplied map violates its symmetry contract.
class ContractError : public Error {
public:
    using Error::Error;
};

class InstanceTooLarge : public InputError {
public:
    using InputError::InputError;
};

class BudgetExceeded : public InputError {
public:
    using InputError::InputError;
};

class UnsupportedShape : public InputError {
public:
    using InputError::InputError;
};

class UnsupportedDimension : public InputError {
public:
    using InputError::InputError;
};

class Unsupported : public InputError {
public:
    using InputError::InputError;
};

class QuantileError : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class CertificateFailed : public Error {
public:
    CertificateFailed(const std::string& what, double delta, double slack)
        : Error(what), delta_(delta), slack_(slack) {}
    double delta() const noexcept { return delta_; }
    double slack() const noexcept { return slack_; }

private:
    double delta_;
    double slack_;
};

} // namespace faircut

#endif // FAIRCUT_ERRORS_HPP
