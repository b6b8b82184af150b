#pragma once

#include <stdexcept>
#include <string>

namespace pmpc {

/// Violated precondition or dimension mismatch in a library call.
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed or inconsistent input file.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Offline synthesis failed (unstabilizable pair, empty terminal set, divergent iteration).
class SynthesisError : public std::runtime_error {
public:
    explicit SynthesisError(const std::string& what) : std::runtime_error(what) {}
};

/// A problem instance that has no feasible solution where one is required.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pmpc
