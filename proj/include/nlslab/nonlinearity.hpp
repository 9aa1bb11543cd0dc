#pragma once

#include <string>
#include <vector>

#include "nlslab/common.hpp"

namespace nls {

// beta(s) with s = |u|^2. Either a polynomial sum_k c_k s^k (k >= 1) or a
// single power c * s^a with real a > 0.
class Nonlinearity {
public:
    static Nonlinearity zero();
    static Nonlinearity cubic();  // beta(s) = -s
    // coeffs[k-1] multiplies s^k
    static Nonlinearity polynomial(std::vector<double> coeffs);
    static Nonlinearity power(double coeff, double exponent);
    // "cubic", "zero", "poly:-1,-6", "power:-1,1.5"
    static Nonlinearity parse(const std::string& text);

    double beta(double s) const;
    double dbeta(double s) const;
    double d2beta(double s) const;
    double B(double s) const;  // B(0) = 0, B' = beta
    cplx beta(cplx s) const;   // polynomial case only

    bool is_polynomial() const { return !power_; }
    bool is_zero() const;
    const std::vector<double>& coeffs() const { return c_; }
    // p with |beta(v^2)| ~ |v|^(p-1) for large v
    double growth_exponent() const;
    std::string descriptor() const;

private:
    bool power_ = false;
    std::vector<double> c_;  // polynomial coefficients
    double pc_ = 0.0, pa_ = 1.0;
};

}  // namespace nls
