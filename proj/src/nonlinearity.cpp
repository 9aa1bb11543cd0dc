#include "nlslab/nonlinearity.hpp"

#include <cmath>
#include <sstream>

namespace nls {

Nonlinearity Nonlinearity::zero() { return polynomial({}); }

Nonlinearity Nonlinearity::cubic() { return polynomial({-1.0}); }

Nonlinearity Nonlinearity::polynomial(std::vector<double> coeffs) {
    while (!coeffs.empty() && coeffs.back() == 0.0) coeffs.pop_back();
    for (double c : coeffs)
        if (!std::isfinite(c)) throw DataError("non-finite nonlinearity coefficient");
    Nonlinearity b;
    b.c_ = std::move(coeffs);
    return b;
}

Nonlinearity Nonlinearity::power(double coeff, double exponent) {
    if (!(exponent > 0.0) || !std::isfinite(coeff)) throw DataError("power nonlinearity needs exponent > 0");
    double r = std::round(exponent);
    if (std::abs(exponent - r) == 0.0) {
        std::vector<double> c(static_cast<std::size_t>(r), 0.0);
        c.back() = coeff;
        return polynomial(c);
    }
    Nonlinearity b;
    b.power_ = true;
    b.pc_ = coeff;
    b.pa_ = exponent;
    return b;
}

Nonlinearity Nonlinearity::parse(const std::string& text) {
    if (text == "cubic") return cubic();
    if (text == "zero") return zero();
    auto colon = text.find(':');
    if (colon == std::string::npos) throw DataError("unknown nonlinearity '" + text + "'");
    std::string kind = text.substr(0, colon);
    std::vector<double> vals;
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            vals.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw DataError("bad nonlinearity coefficient '" + item + "'");
        }
    }
    if (kind == "poly") return polynomial(vals);
    if (kind == "power" && vals.size() == 2) return power(vals[0], vals[1]);
    throw DataError("unknown nonlinearity '" + text + "'");
}

double Nonlinearity::beta(double s) const {
    if (power_) return s > 0.0 ? pc_ * std::pow(s, pa_) : 0.0;
    double acc = 0.0;
    for (std::size_t k = c_.size(); k-- > 0;) acc = (acc + c_[k]) * s;
    return acc;
}

cplx Nonlinearity::beta(cplx s) const {
    if (power_) throw TaylorAssemblyError("complex evaluation of a non-polynomial nonlinearity");
    cplx acc = 0.0;
    for (std::size_t k = c_.size(); k-- > 0;) acc = (acc + c_[k]) * s;
    return acc;
}

double Nonlinearity::dbeta(double s) const {
    if (power_) return s > 0.0 ? pc_ * pa_ * std::pow(s, pa_ - 1.0) : 0.0;
    double acc = 0.0;
    for (std::size_t k = c_.size(); k-- > 1;) acc = acc * s + static_cast<double>(k + 1) * c_[k];
    if (!c_.empty()) acc = acc * s + c_[0];
    return acc;
}

double Nonlinearity::d2beta(double s) const {
    if (power_) return s > 0.0 ? pc_ * pa_ * (pa_ - 1.0) * std::pow(s, pa_ - 2.0) : 0.0;
    double acc = 0.0;
    for (std::size_t k = c_.size(); k-- > 1;) acc = acc * s + static_cast<double>((k + 1) * k) * c_[k];
    return acc;
}

double Nonlinearity::B(double s) const {
    if (power_) return s > 0.0 ? pc_ * std::pow(s, pa_ + 1.0) / (pa_ + 1.0) : 0.0;
    double acc = 0.0;
    for (std::size_t k = c_.size(); k-- > 0;) acc = (acc + c_[k] / static_cast<double>(k + 2)) * s;
    return acc * s;
}

bool Nonlinearity::is_zero() const { return power_ ? pc_ == 0.0 : c_.empty(); }

double Nonlinearity::growth_exponent() const {
    if (power_) return 2.0 * pa_ + 1.0;
    return c_.empty() ? 1.0 : 2.0 * static_cast<double>(c_.size()) + 1.0;
}

std::string Nonlinearity::descriptor() const {
    std::ostringstream os;
    os.precision(17);
    if (power_) {
        os << "power:" << pc_ << "," << pa_;
        return os.str();
    }
    if (c_.empty()) return "zero";
    os << "poly:";
    for (std::size_t k = 0; k < c_.size(); ++k) os << (k ? "," : "") << c_[k];
    return os.str();
}

}  // namespace nls
