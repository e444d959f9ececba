#pragma once

// The two parameter bundles everything else consumes: the ternary diagonal
// form F(x + theta) = (x1+t1)^k - a2 (x2+t2)^k - a3 (x3+t3)^k searched for
// small values, and the pair of power functions phi1, phi2 whose four-variable
// difference inequality gets counted.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace diophlab {

struct TernaryForm {
    unsigned k = 2;           // degree, >= 2
    double alpha2 = 1.0;      // > 0
    double alpha3 = 0.5;      // in [1/2, 1]
    std::array<double, 3> theta{0.0, 0.0, 0.0};

    void validate() const {
        if (k < 2) throw std::invalid_argument("TernaryForm: k must be >= 2");
        if (!(alpha2 > 0.0))
            throw std::invalid_argument("TernaryForm: alpha2 must be > 0");
        if (!(alpha3 >= 0.5 && alpha3 <= 1.0))
            throw std::invalid_argument("TernaryForm: alpha3 must lie in [1/2, 1]");
    }
};

// phi1(x) = (x + theta1)^alpha, phi2(x) = beta * (x + theta2)^alpha.
struct PhiPair {
    double alpha = 2.0;   // not 0 or 1
    double beta = 1.0;    // nonzero
    double theta1 = 0.0;
    double theta2 = 0.0;

    void validate() const {
        if (alpha == 0.0 || alpha == 1.0)
            throw std::invalid_argument("PhiPair: alpha must not be 0 or 1");
        if (beta == 0.0) throw std::invalid_argument("PhiPair: beta must be nonzero");
    }

    double phi1(double x) const { return std::pow(x + theta1, alpha); }
    double phi2(double x) const { return beta * std::pow(x + theta2, alpha); }
};

} // namespace diophlab
