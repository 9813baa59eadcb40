#pragma once

#include <stdexcept>
#include <string>

namespace tbdyn {

// Invalid parameters, states or configuration.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

// x^(2+mu) requested for x < 0 with fractional mu.
class argument_domain_error : public std::domain_error {
public:
    explicit argument_domain_error(const std::string& what) : std::domain_error(what) {}
};

// Analytic series (M, N, P, Q and condition (4)) require integer mu.
class unsupported_exponent : public std::domain_error {
public:
    explicit unsupported_exponent(const std::string& what) : std::domain_error(what) {}
};

// Lyapunov function evaluated outside the open positive quadrant.
class domain_error : public std::domain_error {
public:
    explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

// A computation produced NaN or infinity from valid-looking input.
class evaluation_error : public std::runtime_error {
public:
    explicit evaluation_error(const std::string& what) : std::runtime_error(what) {}
};

// Root bracketing failed (internal failure, should not occur for q <= 50).
class root_search_error : public std::runtime_error {
public:
    explicit root_search_error(const std::string& what) : std::runtime_error(what) {}
};

// Integer polynomial coefficients would overflow 64-bit storage.
class coefficient_overflow : public std::overflow_error {
public:
    explicit coefficient_overflow(const std::string& what) : std::overflow_error(what) {}
};

// Classifier cannot decide on the given horizon; rerun with a longer one.
class inconclusive_error : public std::runtime_error {
public:
    explicit inconclusive_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace tbdyn
