#include "nlslab/krylov.hpp"

#include <cmath>
#include <vector>

namespace nls {

GmresResult gmres(const LinOp& A, const CVec& b, const LinOp& M, double tol, int restart, int max_iter,
                  const CVec* x0) {
    GmresResult res;
    const long n = b.size();
    res.x = x0 ? *x0 : CVec::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        res.x.setZero();
        res.converged = true;
        return res;
    }
    CVec r = b - (x0 ? A(res.x) : CVec::Zero(n));
    double rnorm = r.norm();
    res.rel_residual = rnorm / bnorm;
    int total = 0;
    while (res.rel_residual > tol && total < max_iter) {
        const int m = restart;
        std::vector<CVec> V;
        std::vector<CVec> Z;
        V.reserve(m + 1);
        Z.reserve(m);
        CMat Hh = CMat::Zero(m + 1, m);
        std::vector<cplx> cs(m), sn(m);
        CVec g = CVec::Zero(m + 1);
        g[0] = rnorm;
        V.push_back(r / rnorm);
        int k = 0;
        for (; k < m && total < max_iter; ++k, ++total) {
            Z.push_back(M(V[k]));
            CVec w = A(Z[k]);
            // modified Gram-Schmidt, one reorthogonalization pass
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= k; ++i) {
                    cplx hik = V[i].dot(w);
                    Hh(i, k) += hik;
                    w -= hik * V[i];
                }
            double hn = w.norm();
            Hh(k + 1, k) = hn;
            for (int i = 0; i < k; ++i) {
                cplx t = std::conj(cs[i]) * Hh(i, k) + std::conj(sn[i]) * Hh(i + 1, k);
                Hh(i + 1, k) = -sn[i] * Hh(i, k) + cs[i] * Hh(i + 1, k);
                Hh(i, k) = t;
            }
            double den = std::hypot(std::abs(Hh(k, k)), hn);
            if (den == 0.0) {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = Hh(k, k) / den;
                sn[k] = hn / den;
            }
            Hh(k, k) = std::conj(cs[k]) * Hh(k, k) + std::conj(sn[k]) * Hh(k + 1, k);
            Hh(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = std::conj(cs[k]) * g[k];
            if (hn > 0.0) V.push_back(w / hn);
            if (std::abs(g[k + 1]) / bnorm <= 0.5 * tol || hn == 0.0) {
                ++k;
                ++total;
                break;
            }
        }
        // back substitution
        CVec y = CVec::Zero(k);
        for (int i = k - 1; i >= 0; --i) {
            cplx s = g[i];
            for (int j = i + 1; j < k; ++j) s -= Hh(i, j) * y[j];
            y[i] = s / Hh(i, i);
        }
        for (int i = 0; i < k; ++i) res.x += y[i] * Z[i];
        r = b - A(res.x);
        double new_norm = r.norm();
        res.rel_residual = new_norm / bnorm;
        if (new_norm >= rnorm && k < 2) break;  // stagnation
        rnorm = new_norm;
    }
    res.iterations = total;
    res.converged = res.rel_residual <= tol;
    return res;
}

}  // namespace nls
