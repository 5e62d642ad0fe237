#pragma once

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace qlab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

// Iterative routine stopped without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

template <class Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* where) {
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string(where) + ": non-finite entry");
    }
}

inline void require_square(const CMatrix& m, const char* where) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw std::invalid_argument(std::string(where) + ": expected a non-empty square matrix");
    }
}

}  // namespace qlab
