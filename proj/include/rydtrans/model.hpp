#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "qspace.hpp"

namespace rydtrans {

using Vec3 = Eigen::Vector3d;

struct DecayModel {
    double gamma = 0.0; // rad/us
    double b_g = 0.5;
    double b_e = 0.5;
    double b_a = 0.0; // leakage out of the qubit levels

    void validate() const
    {
        if (gamma < 0 || b_g < 0 || b_e < 0 || b_a < 0)
            throw PreconditionError("decay rates and branching ratios must be >= 0");
        if (b_g + b_e + b_a > 1.0 + 1e-12)
            throw PreconditionError("branching ratios sum above 1");
    }
    bool needs_leak_level() const { return gamma > 0 && b_a > 0; }
};

struct SystemConfig {
    std::vector<Vec3> positions;   // um
    std::vector<cplx> omega;       // weak g-r drive per site, rad/us
    double omega_p = mhz(1.0);     // strong e-r drive
    double delta = mhz(1.0);       // energy of |g>
    double delta_big = mhz(300.0); // energy of |e>
    double c6 = c6_default;
    double kz = 0.0;               // 1/um, phase of the strong drive along z
    bool nearest_neighbor_only = false;
    DecayModel decay;

    int atoms() const { return static_cast<int>(positions.size()); }

    void validate() const
    {
        if (positions.empty()) throw PreconditionError("no atoms");
        if (omega.size() != positions.size())
            throw PreconditionError("need one weak Rabi amplitude per atom");
        if (!(c6 > 0)) throw PreconditionError("c6 must be positive");
        for (double v : {omega_p, delta, delta_big, c6, kz})
            if (!std::isfinite(v)) throw PreconditionError("non-finite frequency");
        for (auto& o : omega)
            if (!std::isfinite(o.real()) || !std::isfinite(o.imag()))
                throw PreconditionError("non-finite weak Rabi amplitude");
        for (std::size_t i = 0; i < positions.size(); ++i)
            for (std::size_t j = i + 1; j < positions.size(); ++j)
                if ((positions[i] - positions[j]).norm() <= 0.5)
                    throw PreconditionError("atoms closer than 0.5 um");
        decay.validate();
    }

    std::string alphabet() const { return decay.needs_leak_level() ? "gera" : "ger"; }
};

inline double vdw_interaction(double c6, double r)
{
    if (!(r > 0)) throw PreconditionError("distance must be positive");
    return c6 / std::pow(r, 6);
}

// Spacing at which C6/r^6 equals u.
inline double resonant_spacing(double c6, double u) { return std::pow(c6 / u, 1.0 / 6.0); }

namespace geometry {

inline std::vector<Vec3> chain(int n, double spacing)
{
    std::vector<Vec3> p;
    for (int j = 0; j < n; ++j) p.emplace_back(0.0, 0.0, spacing * j);
    return p;
}

// Alternating bonds r_a, r_b, r_a, ... starting with r_a.
inline std::vector<Vec3> dimer_chain(int n, double r_a, double r_b)
{
    std::vector<Vec3> p;
    double z = 0.0;
    for (int j = 0; j < n; ++j) {
        p.emplace_back(0.0, 0.0, z);
        z += (j % 2 == 0) ? r_a : r_b;
    }
    return p;
}

// Equilateral triangle in the xy plane, first atom on +y, counterclockwise order.
inline std::vector<Vec3> triangle(double side)
{
    std::vector<Vec3> p;
    double R = side / std::sqrt(3.0);
    for (int k = 0; k < 3; ++k) {
        double a = pi / 2 + two_pi * k / 3.0;
        p.emplace_back(R * std::cos(a), R * std::sin(a), 0.0);
    }
    return p;
}

inline std::vector<Vec3> square(double side)
{
    return {Vec3(0, 0, 0), Vec3(side, 0, 0), Vec3(side, side, 0), Vec3(0, side, 0)};
}

} // namespace geometry

// Phase factors exp(-i k.r_j) carried by a weak field with wave vector k (1/um).
inline std::vector<cplx> weak_field_phases(const std::vector<Vec3>& pos, const Vec3& k)
{
    std::vector<cplx> out;
    for (auto& r : pos) out.push_back(std::polar(1.0, -k.dot(r)));
    return out;
}

struct PairTerm {
    int j = 0, k = 0;
    double u = 0.0;
    bool nearest = false;
};

// All pairs with their vdW energy; "nearest" marks pairs within 1.5x the minimum
// separation.
inline std::vector<PairTerm> pair_terms(const SystemConfig& cfg)
{
    std::vector<PairTerm> out;
    double rmin = 1e300;
    for (int j = 0; j < cfg.atoms(); ++j)
        for (int k = j + 1; k < cfg.atoms(); ++k)
            rmin = std::min(rmin, (cfg.positions[j] - cfg.positions[k]).norm());
    for (int j = 0; j < cfg.atoms(); ++j)
        for (int k = j + 1; k < cfg.atoms(); ++k) {
            double r = (cfg.positions[j] - cfg.positions[k]).norm();
            out.push_back({j, k, vdw_interaction(cfg.c6, r), r < 1.5 * rmin});
        }
    return out;
}

struct VdwTerm {
    double energy = 0.0; // rad/us
    double alpha = 1.0;  // amplitude of |rr> in this pair eigenstate
};

struct VdwSpectrum {
    std::vector<VdwTerm> terms;

    void validate() const
    {
        if (terms.empty() || terms.size() > 3)
            throw PreconditionError("spectrum needs 1 to 3 terms");
        double s = 0, m = 0;
        for (auto& t : terms) {
            s += t.alpha * t.alpha;
            m = std::max(m, std::abs(t.alpha));
        }
        if (m == 0.0) throw PreconditionError("all spectrum amplitudes are zero");
        if (s > 1.0 + 1e-9) throw PreconditionError("sum of alpha^2 exceeds 1");
    }

    // Pair eigenstates near the 70S manifold used in the transport study.
    static VdwSpectrum reference()
    {
        return {{{mhz(300.0), std::sqrt(0.72)},
                 {mhz(-511.25), std::sqrt(0.126)},
                 {mhz(-1258.83), std::sqrt(0.088)}}};
    }
};

namespace detail {

inline double local_energy(const SystemConfig& cfg, char c)
{
    switch (c) {
    case level_g: return cfg.delta;
    case level_e: return cfg.delta_big;
    default: return 0.0;
    }
}

// Builds H over the basis, using pair_energy(p) for the |rr> energy of pair p.
template <class PairEnergy>
Mat assemble(const SystemConfig& cfg, const Basis& b, const std::vector<PairTerm>& pairs,
             PairEnergy&& pair_energy)
{
    if (b.atoms() != cfg.atoms()) throw BasisMismatch("basis atom count differs from config");
    const std::size_t dim = b.size();
    const int n = cfg.atoms();
    Mat h = Mat::Zero(dim, dim);
    std::vector<cplx> strong(n);
    for (int j = 0; j < n; ++j) strong[j] = cfg.omega_p * std::polar(1.0, cfg.kz * cfg.positions[j].z());

    for (std::size_t col = 0; col < dim; ++col) {
        const std::string& lab = b.label(col);
        double diag = 0.0;
        for (int j = 0; j < n; ++j) diag += local_energy(cfg, lab[j]);
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto& pt = pairs[p];
            if (cfg.nearest_neighbor_only && !pt.nearest) continue;
            if (lab[pt.j] == level_r && lab[pt.k] == level_r) diag += pair_energy(p);
        }
        h(col, col) = diag;
        for (int j = 0; j < n; ++j) {
            cplx amp;
            if (lab[j] == level_g) amp = cfg.omega[j];
            else if (lab[j] == level_e) amp = strong[j];
            else continue;
            std::string up = lab;
            up[j] = level_r;
            auto row = b.find(up);
            if (!row) continue;
            h(*row, col) = amp;
            h(col, *row) = std::conj(amp);
        }
    }
    return h;
}

} // namespace detail

// Hamiltonian in the frame where |g>, |e>, |r> sit at delta, Delta, 0, with
// vdW shifts on every doubly-Rydberg pair.
inline Mat full_hamiltonian(const SystemConfig& cfg, const Basis& b)
{
    cfg.validate();
    auto pairs = pair_terms(cfg);
    return detail::assemble(cfg, b, pairs, [&](std::size_t p) { return pairs[p].u; });
}

inline Basis full_basis(const SystemConfig& cfg) { return Basis::full(cfg.atoms(), cfg.alphabet()); }

// Basis for the pair-eigenstate model: the base labels followed by, for each
// nearest-neighbour pair and each extra spectrum term i (digit '2' or '3'), a copy
// of every label holding |rr> on that pair with the pair letters replaced by i.
inline Basis multistate_basis(const SystemConfig& cfg, const VdwSpectrum& spec, const Basis& base)
{
    spec.validate();
    std::vector<std::string> extra;
    auto pairs = pair_terms(cfg);
    for (std::size_t t = 1; t < spec.terms.size(); ++t) {
        char tag = static_cast<char>('1' + t);
        for (auto& pt : pairs) {
            if (!pt.nearest) continue;
            for (auto& lab : base.labels()) {
                if (lab[pt.j] != level_r || lab[pt.k] != level_r) continue;
                std::string a = lab;
                a[pt.j] = a[pt.k] = tag;
                extra.push_back(a);
            }
        }
    }
    return base.with_appended(extra);
}

// Replaces the diagonal U|rr><rr| of every nearest-neighbour pair by a coupling of
// the pair's single-Rydberg neighbours to the spectrum levels E_i with amplitude
// alpha_i. Labels on `b` must come from multistate_basis.
inline Mat full_hamiltonian_multistate(const SystemConfig& cfg, const VdwSpectrum& spec,
                                       const Basis& b)
{
    cfg.validate();
    spec.validate();
    auto pairs = pair_terms(cfg);
    std::vector<std::string> base_labels;
    for (auto& l : b.labels())
        if (l.find_first_not_of("gera") == std::string::npos) base_labels.push_back(l);
    Basis base(b.atoms(), base_labels, b.alphabet());

    const double e1 = spec.terms[0].energy;
    const double a1 = spec.terms[0].alpha;
    Mat hb = detail::assemble(cfg, base, pairs,
                              [&](std::size_t p) { return pairs[p].nearest ? e1 : pairs[p].u; });

    const Mat h0 = hb; // unscaled couplings, reused for the auxiliary copies
    auto in_pair_sector = [](const std::string& l, const PairTerm& pt) {
        return l[pt.j] == level_r && l[pt.k] == level_r;
    };
    // Scale drive couplings that enter or leave a pair's |rr> sector by alpha_1.
    for (auto& pt : pairs) {
        if (!pt.nearest) continue;
        for (std::size_t s = 0; s < base.size(); ++s) {
            if (!in_pair_sector(base.label(s), pt)) continue;
            for (std::size_t t = 0; t < base.size(); ++t) {
                if (t == s || hb(t, s) == cplx(0) || in_pair_sector(base.label(t), pt)) continue;
                hb(t, s) *= a1;
                hb(s, t) *= a1;
            }
        }
    }

    Mat h = Mat::Zero(b.size(), b.size());
    for (std::size_t i = 0; i < base.size(); ++i)
        for (std::size_t j = 0; j < base.size(); ++j) h(b.index(base.label(i)), b.index(base.label(j))) = hb(i, j);
    if (spec.terms.size() == 1) return h;

    for (std::size_t t = 1; t < spec.terms.size(); ++t) {
        char tag = static_cast<char>('1' + t);
        const double et = spec.terms[t].energy;
        const double at = spec.terms[t].alpha;
        for (auto& pt : pairs) {
            if (!pt.nearest) continue;
            auto aux_of = [&](std::string l) {
                l[pt.j] = l[pt.k] = tag;
                return l;
            };
            for (std::size_t s = 0; s < base.size(); ++s) {
                const auto& ls = base.label(s);
                if (!in_pair_sector(ls, pt)) continue;
                auto as = b.index(aux_of(ls));
                h(as, as) = h0(s, s).real() - e1 + et;
                for (std::size_t u = 0; u < base.size(); ++u) {
                    if (u == s || h0(u, s) == cplx(0)) continue;
                    const auto& lu = base.label(u);
                    if (in_pair_sector(lu, pt)) {
                        auto au = b.index(aux_of(lu));
                        h(au, as) = h0(u, s);
                        h(as, au) = h0(s, u);
                    } else {
                        auto iu = b.index(lu);
                        h(iu, as) = at * h0(u, s);
                        h(as, iu) = at * h0(s, u);
                    }
                }
            }
        }
    }
    return h;
}

// sqrt(b_j gamma) |j_n><r_n| for every site n and channel j with b_j > 0.
inline std::vector<Mat> lindblad_ops(const SystemConfig& cfg, const Basis& b)
{
    cfg.decay.validate();
    std::vector<Mat> out;
    const auto& d = cfg.decay;
    if (d.gamma == 0.0) return out;
    if (d.b_a > 0 && b.alphabet().find(level_a) == std::string::npos)
        throw PreconditionError("leakage channel needs a basis with the 'a' level");
    const std::pair<char, double> channels[] = {{level_g, d.b_g}, {level_e, d.b_e}, {level_a, d.b_a}};
    for (int n = 0; n < b.atoms(); ++n)
        for (auto [lev, br] : channels)
            if (br > 0) out.push_back(std::sqrt(br * d.gamma) * site_operator(b, n, lev, level_r));
    return out;
}

// Two atoms at the spacing where C6/r^6 = u, same weak amplitude on both.
inline SystemConfig two_atom_config(double omega, double omega_p, double delta,
                                    double delta_big, double u, double c6 = c6_default)
{
    SystemConfig c;
    c.positions = geometry::chain(2, resonant_spacing(c6, u));
    c.omega = {omega, omega};
    c.omega_p = omega_p;
    c.delta = delta;
    c.delta_big = delta_big;
    c.c6 = c6;
    return c;
}

} // namespace rydtrans
