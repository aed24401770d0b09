#pragma once

#include <array>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qspace.hpp"

namespace rydtrans {

enum class Provenance { analytic, numeric_elimination, floquet_log };

inline const char* to_string(Provenance p)
{
    switch (p) {
    case Provenance::analytic: return "analytic";
    case Provenance::numeric_elimination: return "numeric_elimination";
    case Provenance::floquet_log: return "floquet_log";
    }
    return "?";
}

struct EffectiveModel {
    std::vector<std::string> labels;
    Mat h;                     // hermitian, rad/us, ground reference removed
    double shift = 0.0;        // energy subtracted from every ground level
    std::vector<Mat> lindblads; // rows: output space of each jump operator, cols: labels
    Provenance provenance = Provenance::numeric_elimination;
    bool divergent = false;    // some coupling exceeds half the smallest excited gap

    std::size_t index(const std::string& l) const
    {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == l) return i;
        throw BasisMismatch("label '" + l + "' not in effective model");
    }
    cplx hopping(const std::string& a, const std::string& b) const { return h(index(a), index(b)); }
    double onsite(const std::string& a) const { return h(index(a), index(a)).real(); }
};

inline bool has_rydberg(const std::string& l)
{
    return l.find_first_of("r23") != std::string::npos;
}

struct EliminationOptions {
    // Which labels count as fast states; ground labels are always excluded.
    // Unset means every non-ground label.
    std::function<bool(const std::string&)> excited;
    double condition_limit = 1e12;
};

// Second-order elimination of the excited labels of h. The ground block may be
// non-degenerate; for ground energies E_a, E_b the coupling is
//   -1/2 V_a^dag [ (H_NH - E_b)^-1 + ((H_NH - E_a)^-1)^dag ] V_b
// which reduces to the usual form when all ground levels coincide.
// Jump operators are applied column-wise: L_eff(:, b) = L (H_NH - E_b)^-1 V_b.
inline EffectiveModel eliminate(const Mat& h, const Basis& basis,
                                const std::vector<std::string>& ground,
                                const std::vector<Mat>& lindblads = {},
                                const EliminationOptions& opt = {})
{
    if (static_cast<std::size_t>(h.rows()) != basis.size())
        throw BasisMismatch("hamiltonian dimension differs from basis");
    auto gi = basis.indices(ground);
    std::vector<std::size_t> ei;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        bool is_ground = std::find(gi.begin(), gi.end(), i) != gi.end();
        if (!is_ground && (!opt.excited || opt.excited(basis.label(i)))) ei.push_back(i);
    }
    const std::size_t ng = gi.size(), ne = ei.size();

    EffectiveModel out;
    out.labels = ground;
    out.shift = h(gi[0], gi[0]).real();
    out.h = submatrix(h, gi, gi) - out.shift * Mat::Identity(ng, ng);
    if (ne == 0) return out;

    Mat hnh = submatrix(h, ei, ei) - out.shift * Mat::Identity(ne, ne);
    for (auto& l : lindblads) {
        if (static_cast<std::size_t>(l.cols()) != basis.size())
            throw BasisMismatch("jump operator dimension differs from basis");
        Mat le(l.rows(), ne);
        for (std::size_t k = 0; k < ne; ++k) le.col(k) = l.col(ei[k]);
        hnh -= cplx(0, 0.5) * (le.adjoint() * le);
    }
    Mat v = submatrix(h, ei, gi);

    Mat x(ne, ng);
    for (std::size_t b = 0; b < ng; ++b) {
        double eb = out.h(b, b).real();
        Mat a = hnh - eb * Mat::Identity(ne, ne);
        Eigen::JacobiSVD<Mat> svd(a);
        const auto& sv = svd.singularValues();
        double smin = sv(sv.size() - 1);
        if (!(smin > 0) || sv(0) / smin > opt.condition_limit) {
            Eigen::ComplexEigenSolver<Mat> es(a, false);
            cplx worst = es.eigenvalues()(0);
            for (Eigen::Index k = 1; k < es.eigenvalues().size(); ++k)
                if (std::abs(es.eigenvalues()(k)) < std::abs(worst)) worst = es.eigenvalues()(k);
            std::ostringstream msg;
            msg << "excited block singular for ground level '" << ground[b]
                << "': eigenvalue " << worst.real() << (worst.imag() < 0 ? "" : "+")
                << worst.imag() << "i rad/us";
            throw SingularityError(msg.str());
        }
        x.col(b) = a.partialPivLu().solve(v.col(b));
    }

    Mat second(ng, ng);
    for (std::size_t a = 0; a < ng; ++a)
        for (std::size_t b = 0; b < ng; ++b)
            second(a, b) = -0.5 * (v.col(a).dot(x.col(b)) + std::conj(v.col(b).dot(x.col(a))));
    out.h += second;
    out.h = 0.5 * (out.h + out.h.adjoint()).eval();

    for (auto& l : lindblads) {
        Mat le(l.rows(), ne);
        for (std::size_t k = 0; k < ne; ++k) le.col(k) = l.col(ei[k]);
        out.lindblads.push_back(le * x);
    }

    Eigen::SelfAdjointEigenSolver<Mat> es(submatrix(h, ei, ei) - out.shift * Mat::Identity(ne, ne),
                                          Eigen::EigenvaluesOnly);
    double gap = es.eigenvalues().cwiseAbs().minCoeff();
    for (std::size_t a = 0; a < ng; ++a)
        for (std::size_t b = 0; b < ng; ++b)
            if (a != b && std::abs(out.h(a, b)) > 0.5 * gap) out.divergent = true;
    return out;
}

// Closed forms. All arguments and results in rad/us.

namespace detail {
inline double checked(double num, double den, const char* what)
{
    if (den == 0.0 || !std::isfinite(num / den))
        throw SingularityError(std::string(what) + ": vanishing denominator");
    return num / den;
}
} // namespace detail

inline double j12_analytic(double omega1, double omega2, double omega_p, double delta)
{
    return detail::checked(omega1 * omega2 * omega_p * omega_p,
                           delta * delta * delta - 2 * delta * omega_p * omega_p, "j12");
}

// Coupling when the doubly-Rydberg level is detuned by dU = U - Delta.
inline double j12_detuned(double omega, double omega_p, double delta, double du)
{
    double d3 = delta * delta * delta;
    return detail::checked(omega * omega * omega_p * omega_p,
                           d3 - 2 * delta * omega_p * omega_p - delta * delta * du, "j12 detuned");
}

// dU at which j12_detuned diverges.
inline double j12_detuned_pole(double omega_p, double delta)
{
    return (delta * delta * delta - 2 * delta * omega_p * omega_p) / (delta * delta);
}

inline bool j12_detuned_near_pole(double omega_p, double delta, double du)
{
    double d3 = delta * delta * delta;
    return std::abs(d3 - 2 * delta * omega_p * omega_p - delta * delta * du) < 1e-6 * std::abs(d3);
}

// Three-atom chain coupling through a pair with vdW shift uk.
inline double jk_ssh_analytic(double omega, double omega_p, double delta, double delta_big, double uk)
{
    double eta = 4 * omega_p * omega_p + delta_big * delta_big - uk * delta_big;
    double d2 = delta * delta;
    double den = d2 * d2 - uk * d2 * delta - eta * d2 + 2 * uk * omega_p * omega_p * delta;
    return detail::checked(-omega * omega * omega_p * omega_p * (uk - 2 * delta), den, "jk");
}

// Coupling when only a fraction alpha1 of |rr> sits at the resonant pair level.
inline double j_corrected_multistate(double omega_j, double omega_jp1, double omega_p, double delta,
                                     double alpha1)
{
    double a2 = alpha1 * alpha1;
    return detail::checked(omega_j * omega_jp1 * a2 * omega_p * omega_p,
                           delta * delta * delta - 2 * delta * a2 * omega_p * omega_p, "j multistate");
}

// Same including the doubly-excited |ee> level at Delta and a pair detuning du.
inline double j_corrected_multistate(double omega_j, double omega_jp1, double omega_p, double delta,
                                     double alpha1, double delta_big, double du)
{
    double a2 = alpha1 * alpha1;
    double zeta = delta + a2 * delta - a2 * delta_big - du;
    double den = delta * delta * (delta - du) * (delta - delta_big) - 2 * zeta * delta * omega_p * omega_p;
    return detail::checked(omega_j * omega_jp1 * omega_p * omega_p * zeta, den, "j multistate detuned");
}

// Effective decay amplitudes (Gamma_1, Gamma_2, Gamma_3) of the two-atom model.
inline std::array<cplx, 3> gamma_effective(double omega, double omega_p, double delta, double gamma)
{
    const cplx i(0, 1);
    cplx den = gamma * gamma - 3.0 * i * gamma * delta - 2 * delta * delta + 4 * omega_p * omega_p;
    cplx lor = gamma - 2.0 * i * delta;
    if (std::abs(den) == 0.0 || std::abs(lor) == 0.0)
        throw SingularityError("gamma_effective: vanishing denominator");
    cplx chi = std::sqrt(2 * gamma) / den;
    cplx g1 = i * omega * chi * (gamma * gamma - 3.0 * i * gamma * delta - 2 * delta * delta + 2 * omega_p * omega_p) / lor;
    cplx g2 = -2.0 * i * omega * omega_p * omega_p * chi / lor;
    cplx g3 = omega * omega_p * chi;
    return {g1, g2, g3};
}

// Slope of the chain coupling with respect to a shift F of the pair energy.
inline double dJdF_sensitivity(double omega, double omega_p, double delta, double delta_big, double u,
                               double f)
{
    double uf = u + f;
    double eta = 4 * omega_p * omega_p + delta_big * delta_big - uf * delta_big;
    double base = delta * (delta * delta - eta) - (delta * delta - 2 * omega_p * omega_p) * uf;
    double num = (delta - delta_big) * (delta - delta_big) * omega * omega * omega_p * omega_p;
    return detail::checked(num, base * base, "dJ/dF");
}

} // namespace rydtrans
