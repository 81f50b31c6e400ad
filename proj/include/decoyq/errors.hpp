#pragma once

#include <stdexcept>
#include <string>

namespace decoyq {

// Malformed or inconsistent run configuration (CLI exit code 2).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// The admissibility conditions behind the count bounds do not hold for the
// given source bounds; the bound formulas are invalid, not merely loose
// (CLI exit code 3).
class condition_error : public std::runtime_error {
public:
    explicit condition_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside its numerical domain (CLI exit code 4).
class domain_error : public std::runtime_error {
public:
    explicit domain_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace decoyq
