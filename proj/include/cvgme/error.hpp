#pragma once

#include <stdexcept>
#include <string>

namespace cvgme {

enum class errc {
    invalid_dimension,
    numeric_input,
    decomposition_failure,
    invalid_split,
    invalid_symplectic,
    unsupported_order,
    invalid_root,
    invalid_tree,
    lookup,
    size_limit,
    structural,
    parameter,
    construction_infeasible,
    precondition,
    parse,
};

inline const char* to_string(errc c) noexcept {
    switch (c) {
    case errc::invalid_dimension: return "invalid-dimension";
    case errc::numeric_input: return "numeric-input";
    case errc::decomposition_failure: return "decomposition-failure";
    case errc::invalid_split: return "invalid-split";
    case errc::invalid_symplectic: return "invalid-symplectic";
    case errc::unsupported_order: return "unsupported-order";
    case errc::invalid_root: return "invalid-root";
    case errc::invalid_tree: return "invalid-tree";
    case errc::lookup: return "lookup";
    case errc::size_limit: return "size-limit";
    case errc::structural: return "structural";
    case errc::parameter: return "parameter";
    case errc::construction_infeasible: return "construction-infeasible";
    case errc::precondition: return "precondition";
    case errc::parse: return "parse";
    }
    return "unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

// Thrown by cholesky(); carries the 0-based pivot that went non-positive.
class decomposition_error : public error {
public:
    decomposition_error(int pivot, const std::string& what)
        : error(errc::decomposition_failure, what), pivot_(pivot) {}

    int pivot() const noexcept { return pivot_; }

private:
    int pivot_;
};

// Thrown by state_from_witness() when Tr[Z_W] >= 1.
class infeasible_error : public error {
public:
    explicit infeasible_error(double trace)
        : error(errc::construction_infeasible,
                "Tr[Z_W] = " + std::to_string(trace) + " is not below 1"),
          trace_(trace) {}

    double trace() const noexcept { return trace_; }

private:
    double trace_;
};

} // namespace cvgme
