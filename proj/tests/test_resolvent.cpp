#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "nlslab/resolvent.hpp"
#include "nlslab/spectrum.hpp"

using namespace nls;

namespace {

struct QuinticOp {
    Nonlinearity beta = Nonlinearity::polynomial({-1.0, -3.0});
    Grid g{1, 1024, 30.0};
    GroundState gs = ground_state_entry(beta, 1.0, g);
    LinearizedOperator H = LinearizedOperator::assemble(gs, beta, g);
    std::vector<Eigenpair> modes = discrete_spectrum(H).modes;
};

QuinticOp& quintic() {
    static QuinticOp q;
    return q;
}

CVec gaussian_spinor(const Grid& g, double a1, double a2, double c2) {
    const long n = static_cast<long>(g.n());
    CVec r(2 * n);
    for (long j = 0; j < n; ++j) {
        double x = g.xs()[j];
        r[j] = a1 * std::exp(-x * x);
        r[n + j] = a2 * std::exp(-(x - c2) * (x - c2));
    }
    return r;
}

}  // namespace

TEST_SUITE("resolvent") {

TEST_CASE("resolvent of the free operator is diagonal in Fourier space") {
    Grid g(1, 256, 20.0);
    auto H0 = LinearizedOperator::free(g, 1.0);
    const long n = 256;
    CHECK(resolvent_apply(H0, cplx(0, 1), CVec::Zero(2 * n)).norm() == 0.0);
    const double k0 = g.ks()[5];
    CVec e(n);
    for (long j = 0; j < n; ++j) e[j] = std::exp(cplx(0.0, k0 * g.xs()[j]));
    CVec rhs = stack(e, 2.0 * e);
    CVec x = resolvent_apply(H0, cplx(0, 1), rhs);
    CVec expect = stack(e / (k0 * k0 + 1.0 - cplx(0, 1)), 2.0 * e / (-(k0 * k0 + 1.0) - cplx(0, 1)));
    CHECK((x - expect).norm() <= 1e-10 * expect.norm());
}

TEST_CASE("resolvent residual and resolvent identity") {
    auto& Q = quintic();
    std::mt19937 rng(5);
    std::normal_distribution<double> nd;
    const long n2 = 2 * static_cast<long>(Q.g.n());
    CVec v(n2);
    for (long j = 0; j < n2; ++j) v[j] = cplx(nd(rng), nd(rng));
    const cplx z1(0.5, 0.3), z2(1.7, -0.4);
    CVec x1 = resolvent_apply(Q.H, z1, v);
    CHECK((Q.H.apply(x1) - z1 * x1 - v).norm() <= 1e-10 * v.norm());
    CVec x2 = resolvent_apply(Q.H, z2, v);
    CVec lhs = x1 - x2;
    CVec rhs = (z1 - z2) * resolvent_apply(Q.H, z1, x2);
    CHECK((lhs - rhs).norm() <= 1e-8 * lhs.norm());
}

TEST_CASE("limiting resolvent against the free outgoing Green's function") {
    Grid g(1, 1024, 30.0);
    const long n = 1024;
    const double w = 1.0, Lam = 1.6;
    auto H0 = LinearizedOperator::free(g, w);
    CVec r = gaussian_spinor(g, 1.0, 0.5, 1.0);
    auto zero = limiting_resolvent(H0, Lam, CVec::Zero(2 * n));
    CHECK(zero.x.norm() == 0.0);

    auto R = limiting_resolvent(H0, Lam, r);
    CHECK(R.converged);
    CHECK(R.monotone);
    // closed form: upper (-d^2 - k^2)^{-1} kernel i e^{ik|x|}/(2k), lower -e^{-kappa|x|}/(2 kappa)
    const double k = std::sqrt(Lam - w), kap = std::sqrt(Lam + w);
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    CVec ex(2 * n);
    for (long j = 0; j < n; ++j) {
        const double x = g.xs()[j], xm = std::clamp(x, -12.0, 12.0);
        auto f1r = [&](double y) { return std::real(cplx(0, 1) / (2 * k) * std::exp(cplx(0, k * std::abs(x - y)))) * std::exp(-y * y); };
        auto f1i = [&](double y) { return std::imag(cplx(0, 1) / (2 * k) * std::exp(cplx(0, k * std::abs(x - y)))) * std::exp(-y * y); };
        auto f2 = [&](double y) { return -std::exp(-kap * std::abs(x - y)) / (2 * kap) * 0.5 * std::exp(-(y - 1) * (y - 1)); };
        auto I = [&](auto f) { return GK::integrate(f, -12.0, xm, 15, 1e-13) + GK::integrate(f, xm, 12.0, 15, 1e-13); };
        ex[j] = cplx(I(f1r), I(f1i));
        ex[n + j] = I(f2);
    }
    CHECK(weighted_norm(g, R.x - ex, 2.0) <= 1e-4 * weighted_norm(g, ex, 2.0));
    // outgoing condition: positive imaginary part of the upper channel
    CVec up = r;
    up.tail(n).setZero();
    auto Ru = limiting_resolvent(H0, Lam, up);
    CHECK(pair(g, up, sigma3(Ru.x)).imag() > 0.0);

    auto& Q = quintic();
    CVec G = apply_pc(Q.H, Q.modes, gaussian_spinor(Q.g, 1.0, 0.0, 0.0));
    CVec Gu = G;
    Gu.tail(n).setZero();
    auto RV = limiting_resolvent(Q.H, 2.0 * Q.modes[0].lambda, Gu);
    CHECK(RV.converged);
    CHECK(pair(Q.g, Gu, sigma3(RV.x)).imag() > 0.0);
    CHECK_THROWS_AS(limiting_resolvent(Q.H, 0.5, Gu), DataError);
}

TEST_CASE("monomial classification") {
    std::vector<double> lam{0.4};
    CHECK(classify_monomial({{1}, {1}, 0}, lam, 1.0) == MonomialClass::NormalFormZ0);
    CHECK(classify_monomial({{3}, {0}, 1}, lam, 1.0) == MonomialClass::NormalFormZ1);
    CHECK(classify_monomial({{1}, {0}, 1}, lam, 1.0) == MonomialClass::Removable);
    CHECK(classify_monomial({{2}, {0}, 0}, lam, 1.0) == MonomialClass::Removable);
    std::vector<double> lam2{0.4, 0.2};
    CHECK(classify_monomial({{1, 0}, {0, 2}, 0}, lam2, 1.0) == MonomialClass::NormalFormZ0);
    CHECK(std::string(to_string(MonomialClass::NormalFormZ1)) == "NormalForm-Z1");
}

TEST_CASE("homological equation at leading order") {
    auto& Q = quintic();
    const long n2 = 2 * static_cast<long>(Q.g.n());
    std::vector<double> lam{0.5};
    MonomialKey k0{{1}, {0}, 0}, k1{{1}, {0}, 1};
    auto s = solve_homological(lam, {{k0, cplx(1.0)}}, {{k1, CVec::Zero(n2)}}, Q.H, Q.modes);
    CHECK(std::abs(s.b[k0] - cplx(0.0, 2.0)) <= 1e-14);
    CHECK(s.B[k1].norm() == 0.0);

    CVec K = gaussian_spinor(Q.g, 1.0, -0.7, 0.5);
    auto s2 = solve_homological(lam, {}, {{k1, K}}, Q.H, Q.modes);
    CHECK(s2.residual[k1] <= 1e-8);
    // B stays in the continuous subspace
    CHECK(spinor_norm(Q.g, apply_pc(Q.H, Q.modes, s2.B[k1]) - s2.B[k1]) <= 1e-8 * spinor_norm(Q.g, s2.B[k1]));

    CHECK_THROWS_AS(solve_homological(lam, {{MonomialKey{{1}, {1}, 0}, cplx(1.0)}}, {}, Q.H, Q.modes), ContractViolation);
    CHECK_THROWS_AS(solve_homological({0.4}, {}, {{MonomialKey{{3}, {0}, 1}, K}}, Q.H, Q.modes), ContractViolation);
    CHECK_THROWS_AS(solve_homological({0.9995}, {}, {{k1, K}}, Q.H, Q.modes), EdgeProximity);
}

}
