#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nls {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

// Error taxonomy. The CLI maps `kind()` into its JSON error record.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

struct DataError : Error {
    explicit DataError(const std::string& m) : Error("data", m) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("config", m) {}
};
struct FormatError : Error {
    explicit FormatError(const std::string& m) : Error("format", m) {}
};
struct UnsupportedVersion : Error {
    explicit UnsupportedVersion(const std::string& m) : Error("unsupported-version", m) {}
};
struct ConvergenceError : Error {
    explicit ConvergenceError(const std::string& m) : Error("convergence", m) {}
};
struct BranchNotFound : Error {
    explicit BranchNotFound(const std::string& m) : Error("branch-not-found", m) {}
};
struct DegenerateBranch : Error {
    explicit DegenerateBranch(const std::string& m) : Error("degenerate-branch", m) {}
};
struct ContractViolation : Error {
    explicit ContractViolation(const std::string& m) : Error("contract-violation", m) {}
};
struct EdgeProximity : Error {
    explicit EdgeProximity(const std::string& m) : Error("edge-proximity", m) {}
};
struct TaylorAssemblyError : Error {
    explicit TaylorAssemblyError(const std::string& m) : Error("taylor-assembly", m) {}
};

}  // namespace nls
