#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mixrisk {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Series, continued fraction, quadrature or root solver exhausted its budget.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The requested confidence level has no admissible (non-negative) VaR
// under the given model and portfolio.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Model, portfolio or configuration violates one or more invariants.
// Carries every violation, not just the first one found.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(std::vector<std::string> issues)
        : std::invalid_argument(join(issues)), issues_(std::move(issues)) {}

    explicit ValidationError(const std::string& issue)
        : ValidationError(std::vector<std::string>{issue}) {}

    const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string out;
        for (const auto& s : issues) {
            if (!out.empty()) out += "; ";
            out += s;
        }
        return out;
    }

    std::vector<std::string> issues_;
};

}  // namespace mixrisk
