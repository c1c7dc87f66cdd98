#pragma once

#include <stdexcept>
#include <string>

namespace evtrig {

/// Invalid model, rule or run configuration (dimension mismatch, unknown key, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A state or derivative became non-finite.
class NumericOverflowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A linear-algebra certificate could not be produced (singular Sylvester
/// operator, non-Hurwitz closed loop, indefinite weight).
class CertificateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The model lacks the truncated-series evaluator required for manifold work.
class UnsupportedModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Least-squares fit on a degenerate window.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace evtrig
