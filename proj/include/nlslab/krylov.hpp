#pragma once

#include <functional>

#include "nlslab/common.hpp"

namespace nls {

using LinOp = std::function<CVec(const CVec&)>;

struct GmresResult {
    CVec x;
    int iterations = 0;
    double rel_residual = 0.0;  // true residual |b - A x| / |b|
    bool converged = false;
};

// Restarted GMRES with right preconditioning (solves A M y = b, x = M y),
// so the monitored residual is the unpreconditioned one.
GmresResult gmres(const LinOp& A, const CVec& b, const LinOp& M, double tol, int restart = 60,
                  int max_iter = 3000, const CVec* x0 = nullptr);

}  // namespace nls
