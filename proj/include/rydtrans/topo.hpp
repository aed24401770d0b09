#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "effop.hpp"
#include "evolve.hpp"

namespace rydtrans {

struct DriveScalars {
    double omega = mhz(0.05);
    double omega_p = mhz(1.0);
    double delta = mhz(1.0);
    double c6 = c6_default;
};

// Dimerised hopping chain; bond (0,1) carries j_a, bond (1,2) carries j_b, ...
struct SshChain {
    int n_sites = 4;
    cplx j_a = 0.0;
    cplx j_b = 0.0;

    void validate() const
    {
        if (n_sites < 4 || n_sites % 2 != 0) throw PreconditionError("SSH chain needs an even n >= 4");
        if (!std::isfinite(std::abs(j_a)) || !std::isfinite(std::abs(j_b)))
            throw PreconditionError("non-finite hopping");
    }
    double ratio() const { return std::abs(j_a) / std::abs(j_b); }
    bool topological() const { return std::abs(j_a) < std::abs(j_b); }

    Mat hopping_matrix() const
    {
        validate();
        Mat h = Mat::Zero(n_sites, n_sites);
        for (int i = 0; i + 1 < n_sites; ++i) {
            cplx j = (i % 2 == 0) ? j_a : j_b;
            h(i, i + 1) = j;
            h(i + 1, i) = std::conj(j);
        }
        return h;
    }
};

inline SshChain ssh_from_physics(int n_sites, double delta_big, double r_a, double r_b, const DriveScalars& s)
{
    if (r_a <= 0 || r_b <= 0) throw PreconditionError("spacings must be positive");
    SshChain c;
    c.n_sites = n_sites;
    c.j_a = jk_ssh_analytic(s.omega, s.omega_p, s.delta, delta_big, vdw_interaction(s.c6, r_a));
    c.j_b = jk_ssh_analytic(s.omega, s.omega_p, s.delta, delta_big, vdw_interaction(s.c6, r_b));
    c.validate();
    return c;
}

// Bond phases exp(i k r) picked up when the strong drive runs along the chain.
inline SshChain with_wavevector(SshChain c, double k, double r_a, double r_b)
{
    c.j_a *= std::polar(1.0, k * r_a);
    c.j_b *= std::polar(1.0, k * r_b);
    return c;
}

struct Spectrum {
    RVec energies; // ascending
    Mat vectors;   // columns
};

inline Spectrum ssh_spectrum(const SshChain& c)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(c.hopping_matrix());
    return {es.eigenvalues(), es.eigenvectors()};
}

struct EdgeStates {
    std::array<double, 2> energies;
    std::array<Vec, 2> profiles;
    double bulk_gap = 0.0;          // smallest |E| among the remaining states
    double localization_length = 0; // in unit cells, 1 / ln|j_b / j_a|
    double threshold = 0.0;         // |E| below which a state counts as an edge mode
    int count = 0;                  // states under the threshold
};

struct NoEdgeStates : Error {
    using Error::Error;
};

inline EdgeStates edge_states(const SshChain& c)
{
    if (!c.topological()) throw NoEdgeStates("chain is in the trivial phase");
    auto sp = ssh_spectrum(c);
    const int n = c.n_sites;
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(sp.energies(a)) < std::abs(sp.energies(b)); });
    EdgeStates e;
    for (int k = 0; k < 2; ++k) {
        e.energies[k] = sp.energies(order[k]);
        e.profiles[k] = sp.vectors.col(order[k]);
    }
    e.bulk_gap = std::abs(sp.energies(order[2]));
    e.threshold = 0.1 * e.bulk_gap;
    for (int i = 0; i < n; ++i)
        if (std::abs(sp.energies(i)) < e.threshold) ++e.count;
    double lr = std::log(std::abs(c.j_b) / std::abs(c.j_a));
    e.localization_length = lr > 0 ? 1.0 / lr : INFINITY;
    return e;
}

inline std::vector<Observable> site_observables(int n)
{
    std::vector<Observable> out;
    for (int i = 0; i < n; ++i) {
        Observable o;
        o.name = "site" + std::to_string(i + 1);
        o.index = static_cast<std::size_t>(i);
        out.push_back(o);
    }
    return out;
}

// Single-excitation dynamics on the hopping chain.
inline TrajectoryResult ssh_transport(const SshChain& c, const Vec& psi0, const TimeGrid& grid)
{
    if (psi0.size() != c.n_sites) throw BasisMismatch("initial state must live on the chain sites");
    return evolve_unitary(c.hopping_matrix(), QuantumState::pure(psi0.normalized()), grid,
                          site_observables(c.n_sites));
}

inline Vec site_state(int n, int site)
{
    Vec v = Vec::Zero(n);
    v(site) = 1.0;
    return v;
}

// Physical dimer chain matching ssh_from_physics, for full-Hamiltonian checks.
inline SystemConfig ssh_config(int n_sites, double delta_big, double r_a, double r_b, const DriveScalars& s)
{
    SystemConfig c;
    c.positions = geometry::dimer_chain(n_sites, r_a, r_b);
    c.omega.assign(n_sites, s.omega);
    c.omega_p = s.omega_p;
    c.delta = s.delta;
    c.delta_big = delta_big;
    c.c6 = s.c6;
    return c;
}

} // namespace rydtrans
