#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace kpsh {

using Complex = std::complex<double>;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// A point of C^n stored in real coordinates (x_1..x_n, y_1..y_n).
using Point = Eigen::VectorXd;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (index out of range, bad size).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Spectrum outside the closed Garding cone where sigma_k^{1/k} is defined.
class InadmissibleSpectrum : public Error {
public:
    using Error::Error;
};

/// Iterative numerics that failed to converge.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Finite-difference stencil leaves the grid.
class StencilError : public Error {
public:
    using Error::Error;
};

/// Barrier evaluated on its singular set.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Right-hand side failed (H1)/(H2) or positivity certification.
class CertificationError : public Error {
public:
    using Error::Error;
};

/// Grid too coarse for the requested ball.
class ResolutionError : public Error {
public:
    using Error::Error;
};

/// No admissible radius exists for the given right-hand side.
class InfeasibleRhs : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or input file.
class ParseError : public Error {
public:
    using Error::Error;
};

inline double binomial(int n, int k)
{
    if (k < 0 || k > n) {
        return 0.0;
    }
    double result = 1.0;
    for (int i = 1; i <= k; ++i) {
        result = result * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return std::round(result);
}

/// Real dimension 2n of a point, checked.
inline int complex_dimension(const Point& z)
{
    if (z.size() == 0 || z.size() % 2 != 0) {
        throw DomainError("point must have even, positive real dimension");
    }
    return static_cast<int>(z.size() / 2);
}

inline Complex complex_coordinate(const Point& z, int j)
{
    const auto n = z.size() / 2;
    return {z(j), z(n + j)};
}

} // namespace kpsh
