#pragma once

// Random-grid comparisons of the closed-form couplings against eliminate().
// Each returns the largest |J_numeric - J_formula| in rad/us.

#include <functional>
#include <random>

#include "rydtrans/effop.hpp"
#include "rydtrans/floquet.hpp"
#include "rydtrans/model.hpp"

namespace oracles {

using namespace rydtrans;

struct GridReport {
    int points = 0;
    double max_err = 0.0;
    double max_rel = 0.0;
};

struct Draw {
    double omega, omega_p, delta, delta_big, extra;
};

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : g_(seed) {}
    double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g_); }
    Draw draw()
    {
        Draw d;
        d.omega = mhz(uni(0.01, 0.1));
        d.omega_p = mhz(uni(0.5, 2.0));
        d.delta = mhz(uni(0.5, 3.0)) * (uni(0, 1) < 0.2 ? -1 : 1);
        d.delta_big = mhz(uni(100, 500));
        d.extra = uni(0, 1);
        return d;
    }

private:
    std::mt19937_64 g_;
};

inline const Basis& pair_basis()
{
    static const Basis b(2, {"eg", "ge", "er", "re", "rr"});
    return b;
}

inline bool far_from_pole(double num, double den, double scale) { return std::abs(den) > 0.05 * scale; }

// Runs `n` accepted points; `one` returns {numeric, formula} or nothing if the
// draw violates a precondition.
inline GridReport run_grid(std::uint64_t seed, int n,
                           const std::function<std::optional<std::pair<double, double>>(const Draw&)>& one)
{
    Sampler s(seed);
    GridReport r;
    int tries = 0;
    while (r.points < n && tries++ < 100 * n) {
        auto v = one(s.draw());
        if (!v) continue;
        ++r.points;
        double err = std::abs(v->first - v->second);
        r.max_err = std::max(r.max_err, err);
        r.max_rel = std::max(r.max_rel, err / std::abs(v->second));
    }
    return r;
}

inline double two_atom_numeric(const SystemConfig& c, const Basis& b)
{
    auto m = eliminate(full_hamiltonian(c, b), b, {"eg", "ge"});
    return m.hopping("eg", "ge").real();
}

inline GridReport pair_grid(std::uint64_t seed = 8, int n = 100)
{
    return run_grid(seed, n, [](const Draw& d) -> std::optional<std::pair<double, double>> {
        double den = d.delta * (d.delta * d.delta - 2 * d.omega_p * d.omega_p);
        if (!far_from_pole(0, den, std::pow(std::abs(d.delta), 3))) return std::nullopt;
        auto c = two_atom_config(d.omega, d.omega_p, d.delta, d.delta_big, d.delta_big);
        return std::pair{two_atom_numeric(c, pair_basis()), j12_analytic(d.omega, d.omega, d.omega_p, d.delta)};
    });
}

inline GridReport detuned_grid(std::uint64_t seed = 16, int n = 100)
{
    return run_grid(seed, n, [](const Draw& d) -> std::optional<std::pair<double, double>> {
        double du = mhz(-5.0 + 10.0 * d.extra);
        double den = std::pow(d.delta, 3) - 2 * d.delta * d.omega_p * d.omega_p - d.delta * d.delta * du;
        if (!far_from_pole(0, den, std::pow(std::abs(d.delta), 3))) return std::nullopt;
        auto c = two_atom_config(d.omega, d.omega_p, d.delta, d.delta_big, d.delta_big + du);
        return std::pair{two_atom_numeric(c, pair_basis()), j12_detuned(d.omega, d.omega_p, d.delta, du)};
    });
}

inline const Basis& ssh_basis()
{
    static const Basis b(3, {"egg", "geg", "gge", "rrg", "erg", "reg", "ger", "gre", "grr", "eeg", "gee"});
    return b;
}

inline GridReport ssh_grid(std::uint64_t seed = 20, int n = 100)
{
    return run_grid(seed, n, [](const Draw& d) -> std::optional<std::pair<double, double>> {
        double ua = d.delta_big * (0.8 + 0.4 * d.extra);
        double ub = d.delta_big * (1.2 - 0.4 * d.extra);
        double eta = 4 * d.omega_p * d.omega_p + d.delta_big * d.delta_big - ua * d.delta_big;
        double d2 = d.delta * d.delta;
        double den = d2 * d2 - ua * d2 * d.delta - eta * d2 + 2 * ua * d.omega_p * d.omega_p * d.delta;
        if (!far_from_pole(0, den, d2 * d.delta_big * d.delta_big)) return std::nullopt;
        SystemConfig c;
        c.positions = geometry::dimer_chain(3, resonant_spacing(c.c6, ua), resonant_spacing(c.c6, ub));
        c.omega.assign(3, d.omega);
        c.omega_p = d.omega_p;
        c.delta = d.delta;
        c.delta_big = d.delta_big;
        auto m = eliminate(full_hamiltonian(c, ssh_basis()), ssh_basis(), {"egg", "geg", "gge"});
        return std::pair{m.hopping("egg", "geg").real(),
                         jk_ssh_analytic(d.omega, d.omega_p, d.delta, d.delta_big, ua)};
    });
}

inline GridReport alpha_grid(std::uint64_t seed = 33, int n = 100)
{
    return run_grid(seed, n, [](const Draw& d) -> std::optional<std::pair<double, double>> {
        double a = 0.3 + 0.7 * d.extra;
        double den = d.delta * (d.delta * d.delta - 2 * a * a * d.omega_p * d.omega_p);
        if (!far_from_pole(0, den, std::pow(std::abs(d.delta), 3))) return std::nullopt;
        auto c = two_atom_config(d.omega, d.omega_p, d.delta, d.delta_big, d.delta_big);
        VdwSpectrum s{{{d.delta_big, a}}};
        auto m = eliminate(full_hamiltonian_multistate(c, s, pair_basis()), pair_basis(), {"eg", "ge"});
        return std::pair{m.hopping("eg", "ge").real(),
                         j_corrected_multistate(d.omega, d.omega, d.omega_p, d.delta, a)};
    });
}

inline GridReport alpha_ee_grid(std::uint64_t seed = 34, int n = 100)
{
    static const Basis b(2, {"eg", "ge", "er", "re", "rr", "ee"});
    return run_grid(seed, n, [](const Draw& d) -> std::optional<std::pair<double, double>> {
        double a = 0.3 + 0.7 * d.extra;
        double du = mhz(-5.0 + 10.0 * std::fmod(7.0 * d.extra, 1.0));
        double zeta = d.delta + a * a * d.delta - a * a * d.delta_big - du;
        double den = d.delta * d.delta * (d.delta - du) * (d.delta - d.delta_big) -
                     2 * zeta * d.delta * d.omega_p * d.omega_p;
        if (!far_from_pole(0, den, d.delta * d.delta * std::abs(d.delta - du) * d.delta_big)) return std::nullopt;
        auto c = two_atom_config(d.omega, d.omega_p, d.delta, d.delta_big, d.delta_big + du);
        VdwSpectrum s{{{d.delta_big + du, a}}};
        auto m = eliminate(full_hamiltonian_multistate(c, s, b), b, {"eg", "ge"});
        return std::pair{m.hopping("eg", "ge").real(),
                         j_corrected_multistate(d.omega, d.omega, d.omega_p, d.delta, a, d.delta_big, du)};
    });
}

inline SystemConfig triangle_config()
{
    SystemConfig c;
    c.positions = geometry::triangle(resonant_spacing(c.c6, mhz(300)));
    c.omega.assign(3, mhz(0.05));
    return c;
}

struct ChannelReport {
    int points = 0;
    double max_j_rel = 0.0;   // relative
    double max_phi_err = 0.0; // radians
};

// Channel sum against the matrix-log extraction on tau = 0.006, 0.012, ..., 0.12 us,
// below the first quasi-energy resonance of the triangle.
inline ChannelReport channel_grid()
{
    auto c = triangle_config();
    ChannelReport r;
    for (int k = 1; k <= 20; ++k) {
        double tau = 0.006 * k;
        auto a = chiral_floquet(c, tau);
        auto b = triangle_channel_sum(c, tau);
        for (int i = 0; i < 3; ++i) {
            r.max_j_rel = std::max(r.max_j_rel, std::abs(a.j_eff[i] - b.j_eff[i]) / a.j_eff[i]);
            r.max_phi_err = std::max(r.max_phi_err, std::abs(wrap_angle(a.phi[i].value() - b.phi[i].value())));
        }
        ++r.points;
    }
    return r;
}

} // namespace oracles
