#pragma once

#include <stdexcept>
#include <string>

namespace bifol {

// Base class for everything this library throws on purpose.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Bad arguments, bad configuration, bad construction data.  Maps to CLI
// exit code 2.
class argument_error : public error {
public:
    explicit argument_error(const std::string& what) : error(what) {}
};

// A computation that was asked for could not be completed.  Carries the
// pipeline stage it happened in.  Maps to CLI exit code 3.
class computation_error : public error {
public:
    computation_error(std::string stage, const std::string& what)
        : error("[" + stage + "] " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

// Leaf never came back to the section within the arclength budget.
class non_section_error : public computation_error {
public:
    explicit non_section_error(const std::string& what)
        : computation_error("first-return", what) {}
};

// Sampled return map came out non-monotone; the section is not transverse.
class transversality_error : public computation_error {
public:
    transversality_error(const std::string& stage, const std::string& what)
        : computation_error(stage, what) {}
};

// Dynamics looks non-minimal (degenerate empirical measure, failed gap test).
class non_minimal_error : public computation_error {
public:
    non_minimal_error(const std::string& stage, const std::string& what)
        : computation_error(stage, what) {}
};

// Asymptotic-cycle estimate cannot distinguish direction from noise at this
// budget.  Deliberately not a "failure": a bigger budget may succeed.
class inconclusive_cycle_error : public computation_error {
public:
    explicit inconclusive_cycle_error(const std::string& what)
        : computation_error("asymptotic-cycle", what) {}
};

// Per-cell inverse solve diverged.
class not_invertible_error : public computation_error {
public:
    explicit not_invertible_error(const std::string& what)
        : computation_error("grid-invert", what) {}
};

// Straightening refused: traced samples leave grid nodes too far away.
class budget_error : public computation_error {
public:
    budget_error(const std::string& stage, const std::string& what)
        : computation_error(stage, what) {}
};

class io_error : public error {
public:
    explicit io_error(const std::string& what) : error(what) {}
};

}  // namespace bifol
