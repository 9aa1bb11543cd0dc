#include "nlslab/linearize.hpp"

#include <cmath>

namespace nls {

LinearizedOperator LinearizedOperator::assemble(const GroundState& gs, const Nonlinearity& beta, const Grid& grid) {
    if (!gs.has_derivative()) throw DataError("ground state lacks omega-neighbors for the derivative");
    if (static_cast<std::size_t>(gs.phi.size()) != grid.n()) throw DataError("ground state does not match grid");
    LinearizedOperator H;
    H.grid_ = grid;
    H.omega_ = gs.omega;
    H.phi_ = gs.phi;
    H.dphi_ = gs.dphi;
    H.q_ = gs.q;
    H.dq_ = gs.dq;
    const long n = gs.phi.size();
    H.d_.resize(n);
    H.a_.resize(n);
    for (long j = 0; j < n; ++j) {
        double s = gs.phi[j] * gs.phi[j];
        H.a_[j] = beta.dbeta(s) * s;
        H.d_[j] = beta.beta(s) + H.a_[j];
    }
    return H;
}

LinearizedOperator LinearizedOperator::free(const Grid& grid, double omega) {
    LinearizedOperator H;
    H.grid_ = grid;
    H.omega_ = omega;
    H.free_ = true;
    const long n = static_cast<long>(grid.n());
    H.phi_ = H.dphi_ = H.d_ = H.a_ = RVec::Zero(n);
    return H;
}

CVec LinearizedOperator::apply(const CVec& X) const {
    const long n = static_cast<long>(grid_.n());
    CVec x1 = X.head(n), x2 = X.tail(n);
    CVec y1 = -laplacian(grid_, x1) + omega_ * x1;
    CVec y2 = -laplacian(grid_, x2) + omega_ * x2;
    auto d = d_.cast<cplx>().array();
    auto a = a_.cast<cplx>().array();
    CVec out(2 * n);
    out.head(n) = (y1.array() + d * x1.array() + a * x2.array()).matrix();
    out.tail(n) = (-y2.array() - d * x2.array() - a * x1.array()).matrix();
    return out;
}

CVec LinearizedOperator::free_inverse(const CVec& r, cplx z) const {
    const long n = static_cast<long>(grid_.n());
    CVec out(2 * n);
    // upper: (-Lap + omega - z), lower: -(-Lap + omega + z)
    out.head(n) = shifted_laplacian_inverse(grid_, r.head(n), omega_ - z);
    out.tail(n) = -shifted_laplacian_inverse(grid_, r.tail(n), omega_ + z);
    return out;
}

LinearizedOperator LinearizedOperator::embedded(const Grid& big) const {
    if (big.dim() != grid_.dim() || std::abs(big.h() - grid_.h()) > 1e-12 * grid_.h() || big.n() < grid_.n())
        throw DataError("embedding needs a larger grid with the same spacing");
    const long n = static_cast<long>(grid_.n()), off = static_cast<long>(big.n() - grid_.n()) / 2;
    LinearizedOperator H = *this;
    H.grid_ = big;
    auto pad = [&](const RVec& v) {
        RVec out = RVec::Zero(static_cast<long>(big.n()));
        out.segment(off, n) = v;
        return out;
    };
    H.phi_ = pad(phi_);
    H.dphi_ = pad(dphi_);
    H.d_ = pad(d_);
    H.a_ = pad(a_);
    return H;
}

CVec LinearizedOperator::Phi() const {
    CVec p = phi_.cast<cplx>();
    return stack(p, p);
}

std::vector<CVec> LinearizedOperator::kernel() const {
    CVec p = phi_.cast<cplx>(), dp = dphi_.cast<cplx>();
    std::vector<CVec> k{stack(p, -p), stack(dp, dp)};
    if (!grid_.radial()) {
        CVec px = deriv(grid_, p);
        CVec xp = (grid_.xs().cast<cplx>().array() * p.array()).matrix();
        k.push_back(stack(px, px));
        k.push_back(stack(xp, -xp));
    }
    return k;
}

std::vector<CVec> LinearizedOperator::adjoint_kernel() const {
    CVec p = phi_.cast<cplx>(), dp = dphi_.cast<cplx>();
    std::vector<CVec> k{stack(p, p), stack(dp, -dp)};
    if (!grid_.radial()) {
        CVec px = deriv(grid_, p);
        CVec xp = (grid_.xs().cast<cplx>().array() * p.array()).matrix();
        k.push_back(stack(px, -px));
        k.push_back(stack(xp, xp));
    }
    return k;
}

namespace {

// discrete basis (right vectors) and its dual family (left vectors)
void discrete_basis(const LinearizedOperator& H, const std::vector<Eigenpair>& modes, std::vector<CVec>& right,
                    std::vector<CVec>& left) {
    if (!H.is_free()) {
        right = H.kernel();
        auto A = H.adjoint_kernel();
        // dual of sigma3 Phi is sigma3 d_omega Phi, of d_omega Phi is Phi,
        // of d_x Phi is x Phi, of x sigma3 Phi is sigma3 d_x Phi
        left = {A[1], A[0]};
        if (!H.grid().radial()) {
            left.push_back(A[3]);
            left.push_back(A[2]);
        }
    }
    for (const auto& m : modes) {
        right.push_back(m.xi);
        left.push_back(sigma3(m.xi));
        right.push_back(sigma1(m.xi));
        left.push_back(sigma1(sigma3(m.xi)));
    }
}

}  // namespace

Components spectral_project(const LinearizedOperator& H, const std::vector<Eigenpair>& modes, const CVec& X) {
    const Grid& g = H.grid();
    if (!H.is_free() && std::abs(H.dq()) <= 1e-10 * std::max(1.0, H.q())) throw DegenerateBranch("q'(omega) vanishes");
    std::vector<CVec> right, left;
    discrete_basis(H, modes, right, left);
    const long m = static_cast<long>(right.size());
    // Gram matrix G(i, j) = <right_j | left_i>; nearly diag(q', q', -q, -q, 1, 1, ...),
    // solved exactly so that the projector is exact on the grid
    CMat G(m, m);
    CVec rhs(m);
    for (long i = 0; i < m; ++i) {
        rhs[i] = pair(g, X, left[i]);
        for (long j = 0; j < m; ++j) G(i, j) = pair(g, right[j], left[i]);
    }
    CVec coef = m > 0 ? CVec(G.partialPivLu().solve(rhs)) : CVec();
    Components c;
    long k = 0;
    if (!H.is_free()) {
        c.k_phase = coef[k++];
        c.k_scale = coef[k++];
        if (!g.radial()) {
            c.k_shift = coef[k++];
            c.k_boost = coef[k++];
        }
    }
    c.c_phase = c.k_phase.real();
    c.c_scale = c.k_scale.real();
    c.c_shift = c.k_shift.real();
    c.c_boost = c.k_boost.real();
    for (std::size_t j = 0; j < modes.size(); ++j) {
        c.z.push_back(coef[k++]);
        c.zbar.push_back(coef[k++]);
    }
    CVec f = X;
    for (long j = 0; j < m; ++j) f -= coef[j] * right[j];
    c.f = f;
    return c;
}

CVec apply_pc(const LinearizedOperator& H, const std::vector<Eigenpair>& modes, const CVec& X) {
    return spectral_project(H, modes, X).f;
}

CVec reassemble(const LinearizedOperator& H, const std::vector<Eigenpair>& modes, const Components& c) {
    CVec X = c.f;
    if (!H.is_free()) {
        auto K = H.kernel();
        X += c.k_phase * K[0] + c.k_scale * K[1];
        if (!H.grid().radial()) X += c.k_shift * K[2] + c.k_boost * K[3];
    }
    for (std::size_t j = 0; j < modes.size(); ++j) X += c.z[j] * modes[j].xi + c.zbar[j] * sigma1(modes[j].xi);
    return X;
}

}  // namespace nls
