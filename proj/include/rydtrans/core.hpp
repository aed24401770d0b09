#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rydtrans {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Energies and rates are angular frequencies in rad/us.
// "x MHz" in the configs always means 2*pi*x rad/us.
inline constexpr double mhz(double f) { return two_pi * f; }
inline constexpr double to_mhz(double w) { return w / two_pi; }

// Dispersion coefficient used throughout, rad/us * um^6.
inline constexpr double c6_default = two_pi * 1.416e6;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CapacityError : Error {
    using Error::Error;
};
struct PreconditionError : Error {
    using Error::Error;
};
struct BasisMismatch : Error {
    using Error::Error;
};
struct SingularityError : Error {
    using Error::Error;
};
struct BranchCutError : Error {
    using Error::Error;
};
struct ValidityError : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline bool is_hermitian(const Mat& m, double rel = 1e-10)
{
    if (m.rows() != m.cols()) return false;
    double scale = std::max(max_abs(m), 1e-300);
    return max_abs(m - m.adjoint()) <= rel * scale;
}

inline bool is_unitary(const Mat& m, double tol = 1e-9)
{
    if (m.rows() != m.cols()) return false;
    return max_abs(m.adjoint() * m - Mat::Identity(m.rows(), m.cols())) <= tol;
}

// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a)
{
    double w = std::remainder(a, two_pi);
    if (w <= -pi) w += two_pi;
    return w;
}

} // namespace rydtrans
