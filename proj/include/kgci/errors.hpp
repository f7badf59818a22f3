#pragma once

#include <stdexcept>
#include <string>

namespace kgci {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularDesign : public Error {
public:
    using Error::Error;
};

class DegenerateContrast : public Error {
public:
    using Error::Error;
};

/// Raised by orthogonalize_tau when both candidate covariances vanish.
class BothCovariancesZeroAmbiguous : public Error {
public:
    using Error::Error;
};

class DegenerateRatio : public Error {
public:
    using Error::Error;
};

class KnotOrderError : public Error {
public:
    using Error::Error;
};

class NonPositiveS : public Error {
public:
    using Error::Error;
};

class QuadratureBudgetExceeded : public Error {
public:
    using Error::Error;
};

class RootNotBracketed : public Error {
public:
    using Error::Error;
};

class Infeasible : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace kgci
