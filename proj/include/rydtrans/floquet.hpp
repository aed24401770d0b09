#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "evolve.hpp"

namespace rydtrans {

inline Mat period_propagator(const DriveSchedule& sched)
{
    sched.validate();
    Mat u = Mat::Identity(sched.segments[0].h.rows(), sched.segments[0].h.cols());
    for (auto& s : sched.segments) u = HermitianPropagator(s.h).matrix(s.duration) * u;
    return u;
}

struct UnitaryLog {
    RVec quasi; // rad/us, principal branch
    Mat vecs;   // orthonormal eigenvectors (columns)
    double period = 0.0;

    Mat hamiltonian() const { return vecs * quasi.cast<cplx>().asDiagonal() * vecs.adjoint(); }
};

// H with exp(-i H T) = u, eigenphases taken in (-pi, pi]. The complex Schur form
// of a unitary matrix is diagonal, so its Schur vectors are orthonormal eigenvectors.
inline UnitaryLog unitary_log(const Mat& u, double period, double branch_tol = 1e-6)
{
    if (!is_unitary(u, 1e-9)) throw NumericError("period propagator is not unitary");
    Eigen::ComplexSchur<Mat> cs(u);
    UnitaryLog out;
    out.period = period;
    out.vecs = cs.matrixU();
    out.quasi.resize(u.rows());
    for (Eigen::Index k = 0; k < u.rows(); ++k) {
        double ph = std::arg(cs.matrixT()(k, k));
        if (pi - std::abs(ph) < branch_tol)
            throw BranchCutError("eigenphase at the branch cut; reduce the segment duration");
        out.quasi(k) = -ph / period;
    }
    return out;
}

inline Mat effective_floquet_hamiltonian(const DriveSchedule& sched)
{
    return unitary_log(period_propagator(sched), sched.period()).hamiltonian();
}

struct GroundProjection {
    Mat h;                        // hermitian, on the ground labels
    RVec quasi;                   // quasi-energies of the selected Floquet states
    std::vector<double> overlaps; // weight of each selected state inside the ground span
    bool ambiguous = false;       // some overlap below 0.5
};

// Picks the Floquet states with the largest weight on the ground labels and
// builds the ground-manifold Hamiltonian from their symmetrically orthonormalised
// projections.
inline GroundProjection ground_manifold(const UnitaryLog& lg, const std::vector<std::size_t>& ground)
{
    const std::size_t ng = ground.size();
    const Eigen::Index n = lg.vecs.cols();
    std::vector<std::pair<double, Eigen::Index>> w;
    for (Eigen::Index k = 0; k < n; ++k) {
        double s = 0;
        for (auto g : ground) s += std::norm(lg.vecs(g, k));
        w.emplace_back(s, k);
    }
    std::stable_sort(w.begin(), w.end(), [](auto& a, auto& b) { return a.first > b.first; });
    GroundProjection out;
    Mat bm(ng, ng);
    out.quasi.resize(ng);
    for (std::size_t c = 0; c < ng; ++c) {
        auto k = w[c].second;
        out.overlaps.push_back(w[c].first);
        if (w[c].first < 0.5) out.ambiguous = true;
        out.quasi(c) = lg.quasi(k);
        for (std::size_t r = 0; r < ng; ++r) bm(r, c) = lg.vecs(ground[r], k);
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(bm.adjoint() * bm);
    RVec isq = es.eigenvalues().cwiseSqrt().cwiseInverse();
    Mat bo = bm * es.eigenvectors() * isq.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    out.h = bo * out.quasi.cast<cplx>().asDiagonal() * bo.adjoint();
    out.h = 0.5 * (out.h + out.h.adjoint()).eval();
    return out;
}

using BondList = std::vector<std::pair<int, int>>;

inline BondList ring_bonds(int n)
{
    BondList b;
    for (int j = 0; j < n; ++j) b.emplace_back(j, (j + 1) % n);
    return b;
}

struct FloquetResult {
    double tau = 0.0;
    RVec quasi;
    BondList bonds;
    std::vector<double> j_eff;              // rad/us
    std::vector<std::optional<double>> phi; // radians, (-pi, pi]
    double phi_total = 0.0;                 // loop flux, (-pi, pi]
    Mat h_ground;
    std::vector<double> overlaps;
    bool ambiguous = false;

    double j_mean() const
    {
        double s = 0;
        for (double j : j_eff) s += j;
        return s / j_eff.size();
    }
    double phi_mean() const
    {
        double s = 0;
        for (auto& p : phi) s += p.value_or(0.0);
        return s / phi.size();
    }
};

// Reads H = -sum J e^{i phi} |a><b| + h.c. off a ground-manifold Hamiltonian.
inline FloquetResult extract_chiral_parameters(const Mat& h_ground, const BondList& bonds)
{
    FloquetResult r;
    r.bonds = bonds;
    r.h_ground = h_ground;
    double tot = 0;
    for (auto [a, b] : bonds) {
        cplx x = h_ground(a, b);
        r.j_eff.push_back(std::abs(x));
        if (std::abs(x) == 0.0) {
            r.phi.push_back(std::nullopt);
            continue;
        }
        double ph = wrap_angle(std::arg(-x));
        r.phi.push_back(ph);
        tot += ph;
    }
    r.phi_total = wrap_angle(tot);
    return r;
}

// One segment per atom; during segment i only the weak drive of atom i is on.
inline DriveSchedule sequential_schedule(const SystemConfig& cfg, const Basis& b, double tau)
{
    DriveSchedule s;
    for (int i = 0; i < cfg.atoms(); ++i) {
        SystemConfig c = cfg;
        for (int k = 0; k < cfg.atoms(); ++k)
            if (k != i) c.omega[k] = 0.0;
        s.segments.push_back({full_hamiltonian(c, b), tau});
    }
    return s;
}

// Floquet analysis of the sequential drive on a ring of atoms.
inline FloquetResult chiral_floquet(const SystemConfig& cfg, double tau)
{
    Basis b = Basis::full(cfg.atoms());
    auto sched = sequential_schedule(cfg, b, tau);
    auto lg = unitary_log(period_propagator(sched), sched.period());
    auto gp = ground_manifold(lg, b.indices(single_excitation_labels(cfg.atoms())));
    auto r = extract_chiral_parameters(gp.h, ring_bonds(cfg.atoms()));
    r.tau = tau;
    r.quasi = gp.quasi;
    r.overlaps = gp.overlaps;
    r.ambiguous = gp.ambiguous;
    return r;
}

// The twelve states of the triangle that connect neighbouring single excitations
// through one doubly-Rydberg intermediate, in loop order.
inline std::vector<std::string> triangle_channel_labels()
{
    return {"egg", "erg", "rrg", "reg", "geg", "ger", "grr", "gre", "gge", "rge", "rgr", "egr"};
}

// Independent estimate of the bond parameters: log of the period propagator on
// the twelve-state subspace, then for every bond the three intermediate states are
// diagonalised and removed at second order.
inline FloquetResult triangle_channel_sum(const SystemConfig& cfg, double tau, double min_gap_ratio = 10.0)
{
    if (cfg.atoms() != 3) throw PreconditionError("channel sum needs three atoms");
    Basis full = Basis::full(3);
    Basis sub(3, triangle_channel_labels());
    auto sched = sequential_schedule(cfg, full, tau);
    const double ref = cfg.delta_big + 2 * cfg.delta;
    Mat u = Mat::Identity(12, 12);
    for (auto& s : sched.segments) {
        Mat hs = restrict_operator(full, sub, s.h) - ref * Mat::Identity(12, 12);
        u = HermitianPropagator(hs).matrix(s.duration) * u;
    }
    Mat h = unitary_log(u, sched.period()).hamiltonian();

    const std::array<std::array<int, 5>, 3> blocks{{{0, 1, 2, 3, 4}, {4, 5, 6, 7, 8}, {8, 9, 10, 11, 0}}};
    Mat hg = Mat::Zero(3, 3);
    for (int k = 0; k < 3; ++k) {
        auto& bl = blocks[k];
        int a = bl[0], bb = bl[4];
        Mat hm(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) hm(i, j) = h(bl[1 + i], bl[1 + j]);
        Eigen::SelfAdjointEigenSolver<Mat> es(hm);
        double eg = 0.5 * (h(a, a).real() + h(bb, bb).real());
        cplx j = h(a, bb);
        for (int i = 0; i < 3; ++i) {
            Vec c = es.eigenvectors().col(i);
            cplx r1 = 0, r2 = 0;
            for (int m = 0; m < 3; ++m) {
                r1 += h(a, bl[1 + m]) * c(m);
                r2 += std::conj(c(m)) * h(bl[1 + m], bb);
            }
            double gap = es.eigenvalues()(i) - eg;
            double coupling = std::max(std::abs(r1), std::abs(r2));
            if (std::abs(gap) < min_gap_ratio * coupling)
                throw NumericError("channel sum: intermediate gap too small for second order");
            j -= r1 * r2 / gap;
        }
        int ga = k, gb = (k + 1) % 3;
        hg(ga, gb) = j;
        hg(gb, ga) = std::conj(j);
        hg(ga, ga) = h(a, a) + ref;
    }
    auto r = extract_chiral_parameters(hg, ring_bonds(3));
    r.tau = tau;
    return r;
}

enum class PhaseConvention { radians, pi_units };

// <I_ab> = 2 i J (e^{i phi} <sigma_a^+ sigma_b^-> - c.c.) on `state`, or on the
// lowest eigenvector of the ground-manifold Hamiltonian when no state is given.
// With pi_units the phase is inserted as its value in units of pi.
inline double chiral_current(const FloquetResult& fr, std::size_t bond,
                             PhaseConvention conv = PhaseConvention::radians,
                             const std::optional<Vec>& state = std::nullopt)
{
    Vec psi;
    if (state) {
        psi = *state;
    } else {
        Eigen::SelfAdjointEigenSolver<Mat> es(fr.h_ground);
        psi = es.eigenvectors().col(0);
    }
    auto [a, b] = fr.bonds.at(bond);
    double ph = fr.phi[bond].value_or(0.0);
    if (conv == PhaseConvention::pi_units) ph /= pi;
    cplx s = std::conj(psi(a)) * psi(b);
    cplx z = std::polar(1.0, ph) * s;
    cplx i(0, 1);
    return (2.0 * i * fr.j_eff[bond] * (z - std::conj(z))).real();
}

struct QuasiPoint {
    double tau;
    RVec quasi; // sorted ground-manifold quasi-energies
    bool ambiguous;
};

inline std::vector<QuasiPoint> quasi_energy_sweep(const SystemConfig& cfg, const std::vector<double>& taus)
{
    std::vector<QuasiPoint> out;
    for (double tau : taus) {
        auto r = chiral_floquet(cfg, tau);
        RVec q = r.quasi;
        std::sort(q.data(), q.data() + q.size());
        out.push_back({tau, q, r.ambiguous});
    }
    return out;
}

struct NoCrossing : Error {
    using Error::Error;
};

// Smallest tau in [lo, hi] where the loop flux equals target: coarse sweep, then
// bisection on the first continuous bracket. Brackets where the ground-manifold
// Floquet states carry less than min_overlap weight on the ground labels sit next
// to a quasi-energy resonance and are skipped.
inline double find_tau_for_flux(const SystemConfig& cfg, double target, double lo, double hi,
                                double step = 0.00025, double min_overlap = 0.99)
{
    struct Pt {
        double f, ov;
    };
    auto eval = [&](double tau) {
        auto r = chiral_floquet(cfg, tau);
        double ov = *std::min_element(r.overlaps.begin(), r.overlaps.end());
        return Pt{wrap_angle(r.phi_total - target), ov};
    };
    double t0 = lo;
    Pt p0 = eval(lo);
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int k = 1; k <= n; ++k) {
        double t1 = lo + k * step;
        Pt p1 = eval(t1);
        bool flip = (p0.f <= 0 && p1.f >= 0) || (p0.f >= 0 && p1.f <= 0);
        if (flip && std::abs(p1.f - p0.f) < pi && std::min(p0.ov, p1.ov) >= min_overlap) {
            double a = t0, b = t1, fa = p0.f;
            for (int it = 0; it < 60 && b - a > 1e-9; ++it) {
                double m = 0.5 * (a + b), fm = eval(m).f;
                if ((fa <= 0) == (fm <= 0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            double tau = 0.5 * (a + b);
            if (std::abs(eval(tau).f) > 0.005 * pi) throw NoCrossing("flux bracket did not converge");
            return tau;
        }
        t0 = t1;
        p0 = p1;
    }
    throw NoCrossing("no flux crossing in the requested window");
}

// Quartic fits of the chiral time interval. x is the parameter in rad/us.
struct TauFit {
    const char* name;
    std::array<double, 5> c; // c[0] + c[1] x + ... + c[4] x^4, units us * (rad/us)^-k
    double x_lo, x_hi;
};

// Coefficient rows as tabulated (p: versus delta at fixed omega_p, q: versus
// omega_p at fixed delta). The fifth p coefficient for +pi/2 is listed as 3.4895;
// tau_fits_corrected() uses 3.4895e-5, which is what reproduces the direct search.
inline std::array<TauFit, 4> tau_fits_tabulated()
{
    return {{{"p+", {0.23278, -4.0934e-2, 7.0238e-3, -7.3771e-4, 3.4895}, 0.8 * pi, 2 * pi},
             {"p-", {0.24661, -3.2661e-2, 7.3238e-3, -1.0702e-3, 5.4603e-5}, 0.8 * pi, 2 * pi},
             {"q+", {0.52719, -0.16104, 2.5016e-2, -1.8631e-3, 5.3498e-5}, 1.6 * pi, 3.2 * pi},
             {"q-", {9.0639e-2, 5.1437e-2, -1.1041e-2, 8.3451e-4, -2.2295e-5}, 1.6 * pi, 3.2 * pi}}};
}

inline std::array<TauFit, 4> tau_fits_corrected()
{
    auto f = tau_fits_tabulated();
    f[0].c[4] = 3.4895e-5;
    return f;
}

struct TauFitValue {
    double tau;
    bool in_range;
};

inline TauFitValue tau_fit_eval(const TauFit& fit, double x)
{
    double v = 0;
    for (int k = 4; k >= 0; --k) v = v * x + fit.c[k];
    return {v, x >= fit.x_lo - 1e-12 && x <= fit.x_hi + 1e-12};
}

struct SquarePoint {
    double tau;
    double j_mean;   // rad/us
    double phi_mean; // radians
    double phi_z;    // radians
    double current;  // rad/us, bond 1-2, radians convention
    double min_overlap;
};

inline std::vector<SquarePoint> square_lattice_chiral(const SystemConfig& cfg4, const std::vector<double>& taus)
{
    if (cfg4.atoms() != 4) throw PreconditionError("square lattice needs four atoms");
    std::vector<SquarePoint> out;
    for (double tau : taus) {
        auto r = chiral_floquet(cfg4, tau);
        double mo = *std::min_element(r.overlaps.begin(), r.overlaps.end());
        out.push_back({tau, r.j_mean(), r.phi_mean(), r.phi_total, chiral_current(r, 0), mo});
    }
    return out;
}

} // namespace rydtrans
