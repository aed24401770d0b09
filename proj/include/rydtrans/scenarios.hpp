#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "floquet.hpp"
#include "gates.hpp"
#include "io.hpp"
#include "topo.hpp"

namespace rydtrans::scenarios {

inline constexpr const char* version = "1.0.0";

// Frequencies in summaries are reported in kHz meaning 1e3 rad/s (rad/us x 1e3).
inline double khz(double w) { return w * 1e3; }

struct Validity {
    double norm_drift = 0.0;
    double herm_error = 0.0;
    double min_eigenvalue = 0.0;
    int runs = 0;

    void add(const TrajectoryResult& r, bool mixed = false)
    {
        ++runs;
        norm_drift = std::max(norm_drift, r.max_norm_drift);
        if (mixed) {
            herm_error = std::max(herm_error, r.max_herm_error);
            min_eigenvalue = std::min(min_eigenvalue, r.min_eigenvalue);
        }
    }
    void add_unitary(const Mat& u)
    {
        ++runs;
        norm_drift = std::max(norm_drift, max_abs(u.adjoint() * u - Mat::Identity(u.rows(), u.cols())));
    }
    bool ok() const { return norm_drift < 1e-8 && herm_error < 1e-8 && min_eigenvalue > -1e-8; }
    json to_json() const
    {
        return {{"runs", runs}, {"max_norm_drift", norm_drift}, {"max_herm_error", herm_error},
                {"min_eigenvalue", min_eigenvalue}, {"ok", ok()}};
    }
};

struct Result {
    json summary = json::object();
    std::vector<Table> tables;
    Validity validity;
};

struct Context {
    std::uint64_t seed = 1;
    int threads = 1;
};

struct Info {
    std::string name;
    std::string description;
    std::string reproduces;
    json defaults;
    std::function<Result(const json&, const Context&)> run;
};

struct UnknownScenario : Error {
    using Error::Error;
};

struct OutputExists : Error {
    using Error::Error;
};

namespace detail {

inline json two_atom_system()
{
    return {{"omega", "0.05 MHz"}, {"omega_p", "1 MHz"}, {"delta", "1 MHz"}, {"delta_big", "300 MHz"},
            {"geometry", {{"preset", "chain"}, {"n", 2}, {"spacing", "resonant"}}}};
}

inline json chain_system(int n)
{
    json s = two_atom_system();
    s["geometry"]["n"] = n;
    return s;
}

inline json triangle_system()
{
    json s = two_atom_system();
    s["geometry"] = {{"preset", "triangle"}, {"side", "resonant"}};
    return s;
}

inline json ssh_drive()
{
    return {{"omega", "0.05 MHz"}, {"omega_p", "1 MHz"}, {"delta", "1 MHz"}};
}

inline DriveScalars drive_of(const json& j)
{
    DriveScalars s;
    s.omega = get_quantity(j, "omega", Quantity::frequency, s.omega);
    s.omega_p = get_quantity(j, "omega_p", Quantity::frequency, s.omega_p);
    s.delta = get_quantity(j, "delta", Quantity::frequency, s.delta);
    s.c6 = get_quantity(j, "c6", Quantity::frequency, s.c6);
    return s;
}

inline std::vector<double> quantity_list(const json& j, Quantity q)
{
    std::vector<double> out;
    for (auto& v : j) out.push_back(parse_quantity(v, q));
    return out;
}

inline TimeGrid grid_of(const json& cfg, double t_end_default, int samples_default)
{
    TimeGrid g{0.0, get_quantity(cfg, "t_end", Quantity::time, t_end_default),
               cfg.value("samples", samples_default)};
    g.validate();
    return g;
}

struct Peak {
    double value = 0.0, time = 0.0;
};

inline Peak peak_of(const std::vector<double>& t, const std::vector<double>& v, double from = 0.0)
{
    Peak p{-1.0, 0.0};
    for (std::size_t i = 0; i < v.size(); ++i)
        if (t[i] >= from && v[i] > p.value) p = {v[i], t[i]};
    return p;
}

// Largest value inside the first excursion above half the global maximum.
inline Peak first_peak(const std::vector<double>& t, const std::vector<double>& v)
{
    double half = 0.5 * peak_of(t, v).value;
    Peak p{-1.0, 0.0};
    bool inside = false;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] >= half) {
            inside = true;
            if (v[i] > p.value) p = {v[i], t[i]};
        } else if (inside) {
            break;
        }
    }
    return p;
}

inline double max_deviation(const TrajectoryResult& a, const TrajectoryResult& b)
{
    double d = 0;
    for (std::size_t o = 0; o < a.values.size(); ++o)
        for (std::size_t s = 0; s < a.values[o].size(); ++s)
            d = std::max(d, std::abs(a.values[o][s] - b.values[o][s]));
    return d;
}

// Columns: t, then one column per observable of every run.
inline Table series_table(const std::string& name, const std::vector<std::pair<std::string, const TrajectoryResult*>>& runs)
{
    Table t;
    t.name = name;
    t.columns.push_back("t_us");
    for (auto& [prefix, r] : runs)
        for (auto& n : r->names) t.columns.push_back(prefix.empty() ? n : prefix + ":" + n);
    const auto& times = runs.front().second->times;
    for (std::size_t s = 0; s < times.size(); ++s) {
        std::vector<double> row{times[s]};
        for (auto& pr : runs)
            for (auto& v : pr.second->values) row.push_back(v[s]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

// Effective dynamics on the ground labels of a full model, reported with the same
// observable names as the full run.
inline TrajectoryResult effective_run(const Mat& h, const Basis& b, const std::vector<std::string>& ground,
                                      const std::string& initial, const TimeGrid& grid, EffectiveModel* model = nullptr)
{
    auto m = eliminate(h, b, ground);
    Basis eb(b.atoms(), ground, b.alphabet());
    auto r = evolve_unitary(m.h, QuantumState::basis_state(eb, initial), grid, populations(eb, ground));
    if (model) *model = std::move(m);
    return r;
}

inline std::vector<std::string> bond_names(const BondList& bonds)
{
    std::vector<std::string> out;
    for (auto [a, b] : bonds) out.push_back(std::to_string(a + 1) + std::to_string(b + 1));
    return out;
}

inline json floquet_json(const FloquetResult& f)
{
    json j = json::object();
    auto names = bond_names(f.bonds);
    for (std::size_t k = 0; k < f.bonds.size(); ++k) {
        j["J_" + names[k] + "_kHz"] = khz(f.j_eff[k]);
        j["phi_" + names[k] + "_pi"] = f.phi[k] ? json(*f.phi[k] / pi) : json(nullptr);
    }
    j["phi_z_pi"] = f.phi_total / pi;
    j["ambiguous"] = f.ambiguous;
    return j;
}

inline SystemConfig with_weak(SystemConfig c, const std::vector<double>& pattern, double scale)
{
    if (pattern.size() != c.positions.size()) throw ConfigError("omega pattern length differs from atom count");
    c.omega.clear();
    for (double p : pattern) c.omega.push_back(p * scale);
    return c;
}

// ---------------------------------------------------------------- transport2

inline Result transport2(const json& cfg, const Context&)
{
    Result out;
    SystemConfig sys = config_from_json(cfg.at("system"));
    if (sys.atoms() != 2) throw ConfigError("transport2 needs two atoms");
    const TimeGrid grid = grid_of(cfg, 200.0, 2001);
    const double t_tr = get_quantity(cfg, "t_transfer", Quantity::time, 100.0);
    const double win = cfg.value("peak_window", 0.01);

    SystemConfig coh = sys;
    coh.decay.gamma = 0.0;
    Basis b = full_basis(coh);
    Mat h = full_hamiltonian(coh, b);
    const std::vector<std::string> ground{"eg", "ge"};
    auto full = evolve_unitary(h, QuantumState::basis_state(b, "eg"), grid, populations(b, ground));
    EffectiveModel em;
    auto eff = effective_run(h, b, ground, "eg", grid, &em);
    out.validity.add(full);
    out.validity.add(eff);
    out.tables.push_back(series_table("coherent", {{"full", &full}, {"effective", &eff}}));

    HermitianPropagator prop(h);
    Vec psi0 = QuantumState::basis_state(b, "eg").psi;
    const std::size_t ige = b.index("ge");
    auto pge = [&](double t) { return std::norm(prop.apply(psi0, t)(ige)); };
    Peak pk{-1, 0};
    for (int k = 0; k <= 400; ++k) {
        double t = t_tr * (1 - win + 2 * win * k / 400.0);
        double v = pge(t);
        if (v > pk.value) pk = {v, t};
    }
    json& s = out.summary;
    s["P_ge_at_transfer"] = pge(t_tr);
    s["t_transfer_us"] = t_tr;
    s["P_ge_peak_near_transfer"] = pk.value;
    s["t_peak_us"] = pk.time;
    s["max_deviation_full_vs_effective"] = max_deviation(full, eff);
    s["J_numeric_kHz"] = khz(em.hopping("eg", "ge").real());
    s["J_analytic_kHz"] = khz(j12_analytic(sys.omega[0].real(), sys.omega[1].real(), sys.omega_p, sys.delta));

    if (sys.decay.gamma > 0) {
        Basis bd = full_basis(sys);
        Mat hd = full_hamiltonian(sys, bd);
        auto ls = lindblad_ops(sys, bd);
        LindbladOptions opt;
        opt.method = cfg.value("lindblad_method", std::string("rk45")) == "exact" ? LindbladMethod::exact
                                                                                  : LindbladMethod::rk45;
        TimeGrid g{0.0, t_tr, cfg.value("lindblad_samples", 101)};
        std::vector<Observable> obs{{"T", site_operator(bd, 1, level_e, level_e), {}},
                                    Observable::population(bd, "eg"), Observable::population(bd, "ge")};
        auto r = evolve_lindblad(hd, ls, QuantumState::basis_state(bd, "eg"), g, obs, opt);
        out.validity.add(r, true);
        out.tables.push_back(series_table("dissipative", {{"", &r}}));
        s["T"] = r["T"].back();
        s["decay"] = {{"gamma_MHz", to_mhz(sys.decay.gamma)}, {"b_g", sys.decay.b_g}, {"b_e", sys.decay.b_e},
                      {"b_a", sys.decay.b_a}};
        auto gm = gamma_effective(sys.omega[0].real(), sys.omega_p, sys.delta, sys.decay.gamma);
        s["gamma_effective"] = {complex_to_json(gm[0]), complex_to_json(gm[1]), complex_to_json(gm[2])};
    }
    return out;
}

// ---------------------------------------------------------------- five-atom chains

inline Result chain5_run(const json& cfg, const SystemConfig& sys, const std::string& compensation)
{
    Result out;
    const int n = sys.atoms();
    const TimeGrid grid = grid_of(cfg, 800.0, 4001);
    Basis b = full_basis(sys);
    Mat h = full_hamiltonian(sys, b);
    auto ground = single_excitation_labels(n);
    auto em = eliminate(h, b, ground);

    if (compensation == "approx") {
        for (int j = 0; j < n; ++j) {
            double s = std::norm(sys.omega[j]);
            if (j > 0) s += std::norm(sys.omega[j - 1]);
            if (j + 1 < n) s += std::norm(sys.omega[j + 1]);
            h += (s / sys.delta) * site_operator(b, j, level_e, level_e);
        }
    } else if (compensation == "exact") {
        double mean = 0;
        for (int j = 0; j < n; ++j) mean += em.h(j, j).real() / n;
        for (int j = 0; j < n; ++j) h -= (em.h(j, j).real() - mean) * site_operator(b, j, level_e, level_e);
    } else if (compensation != "none") {
        throw ConfigError("stark_compensation must be none, approx or exact");
    }

    const std::string first = ground.front(), last = ground.back();
    auto full = evolve_unitary(h, QuantumState::basis_state(b, first), grid, populations(b, ground));
    Basis eb(n, ground, b.alphabet());
    auto eff = evolve_unitary(em.h, QuantumState::basis_state(eb, first), grid, populations(eb, ground));
    out.validity.add(full);
    out.validity.add(eff);
    out.tables.push_back(series_table("populations", {{"full", &full}, {"effective", &eff}}));

    auto pk = peak_of(full.times, full["P(" + last + ")"]);
    auto pe = peak_of(eff.times, eff["P(" + last + ")"]);
    json& s = out.summary;
    s["end_population_peak"] = pk.value;
    s["t_peak_us"] = pk.time;
    s["effective_end_population_peak"] = pe.value;
    s["effective_t_peak_us"] = pe.time;
    s["max_deviation_full_vs_effective"] = max_deviation(full, eff);
    s["stark_compensation"] = compensation;
    json hop = json::array(), on = json::array();
    for (int j = 0; j < n; ++j) {
        on.push_back(khz(em.h(j, j).real()));
        if (j + 1 < n) hop.push_back(khz(em.h(j, j + 1).real()));
    }
    s["hopping_kHz"] = hop;
    s["onsite_kHz"] = on;
    return out;
}

inline Result chain5_uniform(const json& cfg, const Context&)
{
    SystemConfig sys = config_from_json(cfg.at("system"));
    return chain5_run(cfg, sys, "none");
}

inline Result chain5_perfect(const json& cfg, const Context&)
{
    SystemConfig sys = config_from_json(cfg.at("system"));
    std::vector<double> pattern = cfg.at("pattern").get<std::vector<double>>();
    sys = with_weak(sys, pattern, get_quantity(cfg, "omega_scale", Quantity::frequency));
    return chain5_run(cfg, sys, cfg.value("stark_compensation", std::string("none")));
}

// ---------------------------------------------------------------- mismatch-deltaU

inline Result mismatch_delta_u(const json& cfg, const Context&)
{
    Result out;
    SystemConfig sys = config_from_json(cfg.at("system"));
    if (sys.atoms() != 2) throw ConfigError("mismatch-deltaU needs two atoms");
    const TimeGrid grid = grid_of(cfg, 400.0, 2001);
    auto dus = quantity_list(cfg.at("delta_u"), Quantity::frequency);
    const double om = sys.omega[0].real();
    std::vector<TrajectoryResult> runs;
    json per = json::array();
    for (double du : dus) {
        SystemConfig c = sys;
        const double u = sys.delta_big + du;
        if (!(u > 0)) throw ConfigError("delta_big + delta_u must be positive");
        c.positions = geometry::chain(2, resonant_spacing(c.c6, u));
        Basis b = full_basis(c);
        Mat h = full_hamiltonian(c, b);
        auto r = evolve_unitary(h, QuantumState::basis_state(b, "eg"), grid, populations(b, {"ge"}));
        out.validity.add(r);
        auto em = eliminate(h, b, {"eg", "ge"});
        auto pk = peak_of(r.times, r["P(ge)"]);
        const bool pole = j12_detuned_near_pole(sys.omega_p, sys.delta, du);
        json e{{"delta_u_MHz", to_mhz(du)}, {"J_numeric_kHz", khz(em.hopping("eg", "ge").real())},
               {"elimination_divergent", em.divergent}, {"P_ge_peak", pk.value}, {"t_peak_us", pk.time},
               {"near_pole", pole}, {"J_formula_kHz", nullptr}};
        if (!pole) e["J_formula_kHz"] = khz(j12_detuned(om, sys.omega_p, sys.delta, du));
        per.push_back(e);
        runs.push_back(std::move(r));
    }
    std::vector<std::pair<std::string, const TrajectoryResult*>> cols;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        std::ostringstream p;
        p << "dU=" << to_mhz(dus[i]) << "MHz";
        cols.emplace_back(p.str(), &runs[i]);
    }
    out.tables.push_back(series_table("populations", cols));
    out.summary["runs"] = per;
    out.summary["pole_delta_u_MHz"] = to_mhz(j12_detuned_pole(sys.omega_p, sys.delta));
    return out;
}

// ---------------------------------------------------------------- SSH

inline double ssh_spacing(const json& cfg, const char* key, double c6)
{
    const json& v = cfg.at(key);
    if (v.is_string() && v.get<std::string>() == "resonant")
        return resonant_spacing(c6, get_quantity(cfg, "u_ref", Quantity::frequency));
    return parse_spacing(v, c6, 0.0);
}

inline Result ssh_phase_diagram(const json& cfg, const Context&)
{
    Result out;
    auto drive = drive_of(cfg.at("drive"));
    const double ra = ssh_spacing(cfg, "r_a", drive.c6), rb = ssh_spacing(cfg, "r_b", drive.c6);
    const double lo = get_quantity(cfg, "delta_big_min", Quantity::frequency);
    const double hi = get_quantity(cfg, "delta_big_max", Quantity::frequency);
    const int np = cfg.value("points", 401);
    if (np < 2 || !(hi > lo)) throw ConfigError("need delta_big_max > delta_big_min and at least 2 points");
    Table t{"ratio", {"delta_big_MHz", "J_a_kHz", "J_b_kHz", "ratio", "topological"}, {}};
    json crossings = json::array();
    double prev_d = 0, prev_r = 0;
    for (int k = 0; k < np; ++k) {
        double d = lo + (hi - lo) * k / (np - 1);
        auto c = ssh_from_physics(4, d, ra, rb, drive);
        double r = c.ratio();
        t.rows.push_back({to_mhz(d), khz(c.j_a.real()), khz(c.j_b.real()), r, c.topological() ? 1.0 : 0.0});
        if (k > 0 && (prev_r - 1) * (r - 1) < 0)
            crossings.push_back(to_mhz(prev_d + (d - prev_d) * (1 - prev_r) / (r - prev_r)));
        prev_d = d;
        prev_r = r;
    }
    out.tables.push_back(t);
    json probes = json::array();
    for (double d : quantity_list(cfg.at("probe"), Quantity::frequency)) {
        auto c = ssh_from_physics(4, d, ra, rb, drive);
        probes.push_back({{"delta_big_MHz", to_mhz(d)}, {"ratio", c.ratio()}, {"topological", c.topological()}});
    }
    out.summary["r_a_um"] = ra;
    out.summary["r_b_um"] = rb;
    out.summary["crossings_MHz"] = crossings;
    out.summary["probes"] = probes;
    return out;
}

inline Result ssh_spectrum_scenario(const json& cfg, const Context&)
{
    Result out;
    auto drive = drive_of(cfg.at("drive"));
    const double ra = ssh_spacing(cfg, "r_a", drive.c6), rb = ssh_spacing(cfg, "r_b", drive.c6);
    const double d = get_quantity(cfg, "delta_big", Quantity::frequency);
    auto c = ssh_from_physics(cfg.value("n", 100), d, ra, rb, drive);
    auto sp = ssh_spectrum(c);
    Table t{"spectrum", {"index", "energy_kHz"}, {}};
    for (Eigen::Index i = 0; i < sp.energies.size(); ++i) t.rows.push_back({double(i), khz(sp.energies(i))});
    out.tables.push_back(t);
    json& s = out.summary;
    s["delta_big_MHz"] = to_mhz(d);
    s["ratio"] = c.ratio();
    s["topological"] = c.topological();
    if (c.topological()) {
        auto e = edge_states(c);
        Table p{"edge_profiles", {"site", "edge0", "edge1"}, {}};
        for (int i = 0; i < c.n_sites; ++i)
            p.rows.push_back({double(i + 1), std::norm(e.profiles[0](i)), std::norm(e.profiles[1](i))});
        out.tables.push_back(p);
        s["bulk_gap_kHz"] = khz(e.bulk_gap);
        s["edge_energies_kHz"] = {khz(e.energies[0]), khz(e.energies[1])};
        s["edge_count"] = e.count;
        s["localization_length_cells"] = e.localization_length;
    } else {
        s["bulk_gap_kHz"] = khz(std::abs(sp.energies.cwiseAbs().minCoeff()));
        s["edge_count"] = 0;
    }
    return out;
}

inline Result ssh_transport8(const json& cfg, const Context&)
{
    Result out;
    auto drive = drive_of(cfg.at("drive"));
    const double ra = ssh_spacing(cfg, "r_a", drive.c6), rb = ssh_spacing(cfg, "r_b", drive.c6);
    const int n = cfg.value("n", 8);
    const int site = cfg.value("initial_site", 1) - 1;
    if (site < 0 || site >= n) throw ConfigError("initial_site out of range");
    const TimeGrid grid = grid_of(cfg, 3000.0, 3001);
    json per = json::array();
    std::vector<TrajectoryResult> runs;
    std::vector<std::string> names;
    for (double d : quantity_list(cfg.at("delta_big_list"), Quantity::frequency)) {
        auto c = ssh_from_physics(n, d, ra, rb, drive);
        auto r = ssh_transport(c, site_state(n, site), grid);
        out.validity.add(r);
        const auto& p = r.values[site];
        double mean = 0;
        for (double v : p) mean += v / p.size();
        per.push_back({{"delta_big_MHz", to_mhz(d)}, {"ratio", c.ratio()}, {"topological", c.topological()},
                       {"mean_initial_site_population", mean}});
        std::ostringstream nm;
        nm << "Delta=" << to_mhz(d) << "MHz";
        names.push_back(nm.str());
        runs.push_back(std::move(r));
    }
    std::vector<std::pair<std::string, const TrajectoryResult*>> cols;
    for (std::size_t i = 0; i < runs.size(); ++i) cols.emplace_back(names[i], &runs[i]);
    out.tables.push_back(series_table("chain", cols));
    out.summary["runs"] = per;

    // Four-atom full model against the dimerised chain and against its own elimination.
    if (cfg.contains("full_check")) {
        const json& fc = cfg.at("full_check");
        const int n4 = fc.value("n", 4);
        const TimeGrid g4 = grid_of(fc, 1500.0, 1501);
        json checks = json::array();
        for (double d : quantity_list(fc.at("delta_big_list"), Quantity::frequency)) {
            SystemConfig sc = ssh_config(n4, d, ra, rb, drive);
            Basis b = full_basis(sc);
            Mat h = full_hamiltonian(sc, b);
            auto ground = single_excitation_labels(n4);
            auto full = evolve_unitary(h, QuantumState::basis_state(b, ground.front()), g4, populations(b, ground));
            EffectiveModel em;
            auto eff = effective_run(h, b, ground, ground.front(), g4, &em);
            auto ch = ssh_transport(ssh_from_physics(n4, d, ra, rb, drive), site_state(n4, 0), g4);
            for (std::size_t o = 0; o < ch.names.size(); ++o) ch.names[o] = full.names[o];
            out.validity.add(full);
            out.validity.add(eff);
            auto c4 = ssh_from_physics(n4, d, ra, rb, drive);
            checks.push_back({{"delta_big_MHz", to_mhz(d)},
                              {"max_deviation_full_vs_elimination", max_deviation(full, eff)},
                              {"max_deviation_full_vs_chain", max_deviation(full, ch)},
                              {"J_a_numeric_kHz", khz(em.h(0, 1).real())},
                              {"J_b_numeric_kHz", khz(em.h(1, 2).real())},
                              {"J_a_formula_kHz", khz(c4.j_a.real())},
                              {"J_b_formula_kHz", khz(c4.j_b.real())}});
            std::ostringstream nm;
            nm << "full4_Delta=" << to_mhz(d) << "MHz";
            out.tables.push_back(series_table(nm.str(), {{"full", &full}, {"chain", &ch}}));
        }
        out.summary["full_check"] = checks;
    }
    return out;
}

// ---------------------------------------------------------------- chiral

inline std::vector<double> tau_range(double lo, double hi, double step)
{
    if (!(step > 0) || !(hi >= lo)) throw ConfigError("bad tau range");
    std::vector<double> out;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int k = 0; k <= n; ++k) out.push_back(lo + k * step);
    return out;
}

inline Result chiral_sweep(const json& cfg, const Context&)
{
    Result out;
    SystemConfig sys = config_from_json(cfg.at("system"));
    auto taus = tau_range(get_quantity(cfg, "tau_min", Quantity::time), get_quantity(cfg, "tau_max", Quantity::time),
                          get_quantity(cfg, "tau_step", Quantity::time));
    Table t{"sweep",
            {"tau_us", "J12_kHz", "J23_kHz", "J31_kHz", "phi12_pi", "phi23_pi", "phi31_pi", "phi_z_pi",
             "I12_kHz", "min_overlap"},
            {}};
    int skipped = 0;
    for (double tau : taus) {
        try {
            auto f = chiral_floquet(sys, tau);
            auto ph = [&](int k) { return f.phi[k] ? *f.phi[k] / pi : NAN; };
            double mo = *std::min_element(f.overlaps.begin(), f.overlaps.end());
            t.rows.push_back({tau, khz(f.j_eff[0]), khz(f.j_eff[1]), khz(f.j_eff[2]), ph(0), ph(1), ph(2),
                              f.phi_total / pi, khz(chiral_current(f, 0, PhaseConvention::pi_units)), mo});
        } catch (const BranchCutError&) {
            ++skipped;
        }
    }
    out.tables.push_back(t);
    json& s = out.summary;
    s["points"] = t.rows.size();
    s["skipped_branch_cut"] = skipped;
    const json& fs = cfg.at("flux_search");
    const double lo = get_quantity(fs, "lo", Quantity::time), hi = get_quantity(fs, "hi", Quantity::time);
    for (auto [key, target] : {std::pair{"tau_plus_half_pi_us", pi / 2}, std::pair{"tau_minus_half_pi_us", -pi / 2}}) {
        try {
            s[key] = find_tau_for_flux(sys, target, lo, hi);
        } catch (const NoCrossing&) {
            s[key] = nullptr;
        }
    }
    json fits = json::object();
    for (auto [label, set] : {std::pair{"tabulated", tau_fits_tabulated()}, std::pair{"corrected", tau_fits_corrected()}}) {
        json f = json::object();
        for (auto& fit : set) {
            double x = fit.name[0] == 'p' ? sys.delta : sys.omega_p;
            auto v = tau_fit_eval(fit, x);
            f[fit.name] = {{"tau_us", v.tau}, {"in_range", v.in_range}};
        }
        fits[label] = f;
    }
    s["tau_fits"] = fits;
    return out;
}

struct ChiralDynamics {
    std::vector<int> order;      // sites (1-based) in the order they exceed the threshold
    std::vector<double> peaks;   // per site; site 1 counts only after it has emptied
    TrajectoryResult trace;
};

inline ChiralDynamics chiral_dynamics(const SystemConfig& sys, double tau, double t_end, double threshold)
{
    const int n = sys.atoms();
    Basis b = Basis::full(n);
    auto sched = sequential_schedule(sys, b, tau);
    auto ground = single_excitation_labels(n);
    const int periods = static_cast<int>(std::floor(t_end / sched.period()));
    ChiralDynamics d;
    d.trace = evolve_schedule(sched, QuantumState::basis_state(b, ground.front()), periods, populations(b, ground));
    d.peaks.assign(n, 0.0);
    bool left = false;
    for (std::size_t s = 0; s < d.trace.times.size(); ++s) {
        int best = 0;
        for (int j = 0; j < n; ++j) {
            double v = d.trace.values[j][s];
            if (v > d.trace.values[best][s]) best = j;
            if (j == 0 && v < 0.5) left = true;
            if (j > 0 || left) d.peaks[j] = std::max(d.peaks[j], v);
        }
        if (d.trace.values[best][s] > threshold && (d.order.empty() || d.order.back() != best + 1))
            d.order.push_back(best + 1);
    }
    return d;
}

inline Result chiral_run(const json& cfg, const Context&)
{
    Result out;
    SystemConfig sys = config_from_json(cfg.at("system"));
    const double tau = get_quantity(cfg, "tau", Quantity::time);
    auto f = chiral_floquet(sys, tau);
    json& s = out.summary;
    s["tau_us"] = tau;
    s["floquet"] = floquet_json(f);
    s["phi_z_pi"] = f.phi_total / pi;
    s["J12_kHz"] = khz(f.j_eff[0]);
    s["phi12_pi"] = f.phi[0] ? json(*f.phi[0] / pi) : json(nullptr);
    json cur = json::object();
    auto names = bond_names(f.bonds);
    for (std::size_t k = 0; k < f.bonds.size(); ++k) {
        cur["I" + names[k] + "_kHz"] = khz(chiral_current(f, k, PhaseConvention::pi_units));
        cur["I" + names[k] + "_radians_kHz"] = khz(chiral_current(f, k, PhaseConvention::radians));
    }
    s["currents"] = cur;
    s["I12_kHz"] = cur["I12_kHz"];
    if (cfg.value("channel_sum", true) && sys.atoms() == 3) {
        try {
            s["channel_sum"] = floquet_json(triangle_channel_sum(sys, tau));
        } catch (const NumericError& e) {
            s["channel_sum"] = {{"error", e.what()}};
        }
    }
    auto d = chiral_dynamics(sys, tau, get_quantity(cfg, "t_end", Quantity::time, 2800.0), cfg.value("threshold", 0.9));
    out.validity.add(d.trace);
    out.tables.push_back(series_table("dynamics", {{"", &d.trace}}));
    s["order"] = d.order;
    s["site_peaks"] = d.peaks;
    return out;
}

inline Result chiral_square(const json& cfg, const Context&)
{
    Result out;
    SystemConfig sys = config_from_json(cfg.at("system"));
    if (sys.atoms() != 4) throw ConfigError("chiral-square needs four atoms");
    std::vector<double> taus;
    const double step = get_quantity(cfg, "tau_step", Quantity::time);
    for (auto& r : cfg.at("tau_ranges")) {
        auto part = tau_range(parse_quantity(r.at(0), Quantity::time), parse_quantity(r.at(1), Quantity::time), step);
        taus.insert(taus.end(), part.begin(), part.end());
    }
    Table t{"square", {"tau_us", "J_mean_kHz", "phi_mean_pi", "phi_z_pi", "I12_kHz", "min_overlap"}, {}};
    int agree = 0, counted = 0, skipped = 0;
    for (double tau : taus) {
        std::vector<SquarePoint> pts;
        try {
            pts = square_lattice_chiral(sys, {tau});
        } catch (const BranchCutError&) {
            ++skipped;
            continue;
        }
        auto& p = pts.front();
        t.rows.push_back({p.tau, khz(p.j_mean), p.phi_mean / pi, p.phi_z / pi, khz(p.current), p.min_overlap});
        if (std::abs(p.phi_z) > 0.01 * pi && std::abs(p.phi_z) < 0.99 * pi && std::abs(p.current) > 1e-9) {
            ++counted;
            if ((p.current > 0) != (p.phi_z > 0)) ++agree;
        }
    }
    out.tables.push_back(t);
    out.summary["points"] = t.rows.size();
    out.summary["skipped_branch_cut"] = skipped;
    out.summary["sign_checked"] = counted;
    out.summary["current_opposes_flux"] = agree;

    Basis b = Basis::full(4);
    auto sched = sequential_schedule(sys, b, get_quantity(cfg, "run_tau", Quantity::time, 0.05));
    const int periods = static_cast<int>(std::floor(get_quantity(cfg, "t_end", Quantity::time, 2000.0) / sched.period()));
    auto ground = single_excitation_labels(4);
    auto r = evolve_schedule(sched, QuantumState::basis_state(b, ground.front()), periods, populations(b, ground));
    out.validity.add(r);
    out.tables.push_back(series_table("dynamics", {{"", &r}}));
    return out;
}

// ---------------------------------------------------------------- wave vector

inline Result wavevector_check(const json& cfg, const Context&)
{
    Result out;
    const double k = get_quantity(cfg, "kz", Quantity::inverse_length);
    const TimeGrid grid = grid_of(cfg, 400.0, 401);
    json chains = json::array();
    for (int n : cfg.at("n_list").get<std::vector<int>>()) {
        json sj = cfg.at("system");
        sj["geometry"]["n"] = n;
        SystemConfig a = config_from_json(sj);
        SystemConfig bk = a;
        bk.kz = k;
        Basis b = full_basis(a);
        auto labels = single_excitation_labels(n);
        auto psi0 = QuantumState::basis_state(b, labels.front());
        auto r0 = evolve_unitary(full_hamiltonian(a, b), psi0, grid, populations(b, labels));
        auto r1 = evolve_unitary(full_hamiltonian(bk, b), psi0, grid, populations(b, labels));
        out.validity.add(r0);
        out.validity.add(r1);
        chains.push_back({{"n", n}, {"max_population_difference", max_deviation(r0, r1)}});
        out.tables.push_back(series_table("chain" + std::to_string(n), {{"k0", &r0}, {"k", &r1}}));
    }
    out.summary["chains"] = chains;

    // Strong drive perpendicular to the triangle, then along its plane.
    SystemConfig tri = config_from_json(cfg.at("triangle"));
    const double tau = get_quantity(cfg, "tau", Quantity::time);
    SystemConfig perp = tri;
    perp.kz = k;
    SystemConfig plane = tri;
    for (auto& p : plane.positions) p = Vec3(p.x(), p.z(), p.y());
    plane.kz = k;
    auto f0 = chiral_floquet(tri, tau);
    auto fp = chiral_floquet(perp, tau);
    auto fi = chiral_floquet(plane, tau);
    json tj{{"tau_us", tau}, {"phi_z_pi_no_phase", f0.phi_total / pi}, {"phi_z_pi_perpendicular", fp.phi_total / pi},
            {"phi_z_pi_in_plane", fi.phi_total / pi}};
    // Bond phases shift by k (z_b - z_a) under the in-plane lighting.
    double gauge = 0;
    for (std::size_t q = 0; q < fi.bonds.size(); ++q) {
        auto [a, b] = fi.bonds[q];
        double pred = wrap_angle(f0.phi[q].value_or(0) + k * (plane.positions[b].z() - plane.positions[a].z()));
        gauge = std::max(gauge, std::abs(wrap_angle(fi.phi[q].value_or(0) - pred)));
    }
    tj["max_bond_phase_gauge_error_pi"] = gauge / pi;
    out.summary["triangle"] = tj;
    return out;
}

// ---------------------------------------------------------------- noise

inline double ge_peak_time(const SystemConfig& sys)
{
    Basis b = full_basis(sys);
    Mat h = full_hamiltonian(sys, b);
    auto em = eliminate(h, b, {"eg", "ge"});
    const double j = std::abs(em.hopping("eg", "ge"));
    if (j == 0.0) throw NumericError("no exchange coupling");
    const double t_est = pi / (2 * j);
    HermitianPropagator prop(h);
    Vec psi0 = QuantumState::basis_state(b, "eg").psi;
    const std::size_t ige = b.index("ge");
    auto pge = [&](double t) { return std::norm(prop.apply(psi0, t)(ige)); };
    // Largest value before the first revival; t_est is within a few percent of the
    // true half period for the parameters of interest.
    const int n = 4000;
    const double dt = 1.6 * t_est / n;
    int best = 1;
    double vbest = -1;
    for (int k = 1; k <= n; ++k) {
        double v = pge(k * dt);
        if (v > vbest) {
            vbest = v;
            best = k;
        }
    }
    Peak pk{-1, 0};
    for (int q = -100; q <= 100; ++q) {
        double t = (best + q / 100.0) * dt, v = pge(t);
        if (v > pk.value) pk = {v, t};
    }
    return pk.time;
}

inline NoiseModel noise_of(const json& j, std::uint64_t seed)
{
    NoiseModel m;
    m.amplitude = get_quantity(j, "amplitude", Quantity::frequency, m.amplitude);
    m.scale = get_quantity(j, "scale", Quantity::frequency, m.scale);
    m.refresh_interval = get_quantity(j, "refresh_interval", Quantity::time, m.refresh_interval);
    m.n_trajectories = j.value("n_trajectories", m.n_trajectories);
    m.seed = seed;
    return m;
}

inline Result noise_mc(const json& cfg, const Context& ctx)
{
    Result out;
    NoiseModel base = noise_of(cfg.at("noise"), ctx.seed);
    json per = json::array();
    std::vector<std::pair<std::string, SystemConfig>> sets;
    for (const char* key : {"original", "optimized"}) sets.emplace_back(key, config_from_json(cfg.at(key)));
    const int spp = cfg.value("samples_per_peak", 100);
    for (auto& [name, sys] : sets) {
        const double tp = ge_peak_time(sys);
        const double period = 2 * tp;
        TimeGrid g{0.0, 2 * period, 4 * spp + 1};
        Basis b = full_basis(sys);
        std::vector<TrajectoryResult> runs;
        std::vector<std::string> labels;
        for (auto& dn : cfg.at("distributions")) {
            NoiseModel m = base;
            std::string d = dn.get<std::string>();
            if (d == "uniform") m.distribution = NoiseModel::Distribution::uniform;
            else if (d == "standard_normal") m.distribution = NoiseModel::Distribution::standard_normal;
            else throw ConfigError("unknown noise distribution '" + d + "'");
            auto r = evolve_noisy(sys, m, QuantumState::basis_state(b, "eg"), g, populations(b, {"ge"}), ctx.threads);
            out.validity.add(r);
            double lo = 1e300, hi = -1e300;
            for (std::size_t s = 0; s < r.times.size(); ++s)
                if (r.times[s] >= period - 1e-9) {
                    lo = std::min(lo, r.values[0][s]);
                    hi = std::max(hi, r.values[0][s]);
                }
            per.push_back({{"parameters", name}, {"distribution", d}, {"t_peak_us", tp},
                           {"contrast_second_period", hi - lo}});
            labels.push_back(name + ":" + d);
            runs.push_back(std::move(r));
        }
        Table t{"ensemble_" + name, {"t_us"}, {}};
        for (auto& l : labels) {
            t.columns.push_back(l + ":P(ge)");
            t.columns.push_back(l + ":stderr");
        }
        for (std::size_t s = 0; s < g.times().size(); ++s) {
            std::vector<double> row{runs.front().times[s]};
            for (auto& r : runs) {
                row.push_back(r.values[0][s]);
                row.push_back(r.std_error[0][s]);
            }
            t.rows.push_back(std::move(row));
        }
        out.tables.push_back(t);
    }
    out.summary["ensembles"] = per;
    out.summary["n_trajectories"] = base.n_trajectories;
    auto slope = [&](const SystemConfig& c) {
        auto pt = pair_terms(c);
        return dJdF_sensitivity(c.omega[0].real(), c.omega_p, c.delta, c.delta_big, pt.front().u, 0.0);
    };
    double s0 = slope(sets[0].second), s1 = slope(sets[1].second);
    out.summary["dJdF_original"] = s0;
    out.summary["dJdF_optimized"] = s1;
    out.summary["dJdF_ratio"] = std::abs(s1 / s0);
    return out;
}

// ---------------------------------------------------------------- multistate vdW

inline VdwSpectrum spectrum_of(const json& j)
{
    VdwSpectrum s;
    for (auto& t : j) s.terms.push_back({parse_quantity(t.at("energy"), Quantity::frequency), t.at("alpha").get<double>()});
    s.validate();
    return s;
}

inline Result vdw_multistate(const json& cfg, const Context&)
{
    Result out;
    SystemConfig sys = config_from_json(cfg.at("system"));
    if (sys.atoms() != 2) throw ConfigError("vdw-multistate needs two atoms");
    const VdwSpectrum spec0 = spectrum_of(cfg.at("spectrum"));
    const TimeGrid grid = grid_of(cfg, 400.0, 2001);
    const double om = sys.omega[0].real();
    json per = json::array();
    std::vector<TrajectoryResult> runs;
    std::vector<std::string> names;
    for (double du : quantity_list(cfg.at("delta_u"), Quantity::frequency)) {
        VdwSpectrum spec = spec0;
        spec.terms[0].energy = sys.delta_big + du;
        Basis base = full_basis(sys);
        Basis b = multistate_basis(sys, spec, base);
        Mat h = full_hamiltonian_multistate(sys, spec, b);
        auto r = evolve_unitary(h, QuantumState::basis_state(b, "eg"), grid, populations(b, {"ge"}));
        out.validity.add(r);
        auto em = eliminate(h, b, {"eg", "ge"});
        auto pk = peak_of(r.times, r["P(ge)"]);
        auto p1 = first_peak(r.times, r["P(ge)"]);
        const double a1 = spec.terms[0].alpha;
        json e{{"delta_u_MHz", to_mhz(du)}, {"J_numeric_kHz", khz(em.hopping("eg", "ge").real())},
               {"P_ge_first_peak", p1.value}, {"t_first_peak_us", p1.time}, {"P_ge_max", pk.value},
               {"t_max_us", pk.time}, {"dimension", b.size()}};
        auto put = [&](const char* key, auto&& fn) {
            try {
                e[key] = khz(fn());
            } catch (const SingularityError&) {
                e[key] = nullptr;
            }
        };
        put("J_alpha_formula_kHz", [&] { return j_corrected_multistate(om, om, sys.omega_p, sys.delta, a1, sys.delta_big, du); });
        put("J_single_state_formula_kHz", [&] { return j12_detuned(om, sys.omega_p, sys.delta, du); });
        per.push_back(e);
        std::ostringstream nm;
        nm << "dU=" << to_mhz(du) << "MHz";
        names.push_back(nm.str());
        runs.push_back(std::move(r));
    }
    std::vector<std::pair<std::string, const TrajectoryResult*>> cols;
    for (std::size_t i = 0; i < runs.size(); ++i) cols.emplace_back(names[i], &runs[i]);
    out.tables.push_back(series_table("populations", cols));
    out.summary["runs"] = per;
    return out;
}

// ---------------------------------------------------------------- sqrt(SWAP)

inline Result swap_gate(const json& cfg, const Context&)
{
    Result out;
    const double om = get_quantity(cfg, "omega", Quantity::frequency);
    const double op = get_quantity(cfg, "omega_p", Quantity::frequency);
    const double de = get_quantity(cfg, "delta", Quantity::frequency);
    const double db = get_quantity(cfg, "delta_big", Quantity::frequency);
    auto sys = two_atom_config(om, op, de, db, db);
    sys.omega[1] = -sys.omega[0];
    std::optional<double> t;
    if (cfg.contains("t")) t = get_quantity(cfg, "t", Quantity::time);
    auto full = sqrt_swap_full(sys, t);
    auto eff = sqrt_swap_effective(om, op, de, t);
    out.validity.add_unitary(eff.gate);
    json& s = out.summary;
    s["t_us"] = full.evolution_time;
    s["fidelity_full"] = full.fidelity;
    s["average_fidelity_full"] = full.average_fidelity;
    s["leakage_full"] = full.leakage;
    s["infidelity_effective"] = 1 - eff.fidelity;
    auto sc = stark_closed_form(om, -om, op, de, db);
    auto sn = stark_numeric(sys, Basis::full(2));
    s["stark_closed_form_kHz"] = {{"S1", khz(sc.s1)}, {"S2", khz(sc.s2)}, {"S3", khz(sc.s3)}, {"J", khz(sc.j)}};
    s["stark_numeric_kHz"] = {{"S1", khz(sn.s1)}, {"S2", khz(sn.s2)}, {"S3", khz(sn.s3)}, {"J", khz(sn.j)}};

    const json& cv = cfg.at("curve");
    const double t0 = get_quantity(cv, "from", Quantity::time), t1 = get_quantity(cv, "to", Quantity::time);
    const int np = cv.value("points", 201);
    if (np < 2 || !(t1 > t0)) throw ConfigError("bad fidelity curve range");
    Table tb{"fidelity", {"t_us", "fidelity_full", "fidelity_effective"}, {}};
    for (int k = 0; k < np; ++k) {
        double tt = t0 + (t1 - t0) * k / (np - 1);
        tb.rows.push_back({tt, sqrt_swap_full(sys, tt).fidelity, sqrt_swap_effective(om, op, de, tt).fidelity});
    }
    out.tables.push_back(tb);
    return out;
}

} // namespace detail

// ---------------------------------------------------------------- registry

inline const std::vector<Info>& registry()
{
    using namespace detail;
    static const std::vector<Info> reg = [] {
        std::vector<Info> r;
        json sys2 = two_atom_system();
        sys2["decay"] = {{"gamma", "0.005 MHz"}, {"branching", "hyperfine-1/8"}};
        r.push_back({"transport2", "two-atom g-e exchange, full vs effective, with Rydberg decay",
                     "two-atom transfer curves and dissipative transmission",
                     {{"system", sys2}, {"t_end", 200}, {"samples", 2001}, {"t_transfer", 100},
                      {"peak_window", 0.01}, {"lindblad_method", "rk45"}, {"lindblad_samples", 101}},
                     transport2});
        r.push_back({"chain5-uniform", "five-atom chain with equal weak drives",
                     "five-atom transport with uniform couplings",
                     {{"system", chain_system(5)}, {"t_end", 1000}, {"samples", 4001}}, chain5_uniform});
        r.push_back({"chain5-perfect", "five-atom chain with the perfect-transfer drive pattern",
                     "five-atom end-to-end transfer",
                     {{"system", chain_system(5)}, {"omega_scale", "0.025 MHz"},
                      {"pattern", {1.0, 2.0, std::sqrt(1.5), 2.0, 1.0}}, {"stark_compensation", "none"},
                      {"t_end", 800}, {"samples", 4001}},
                     chain5_perfect});
        r.push_back({"mismatch-deltaU", "two-atom exchange with the pair shift detuned from Delta",
                     "exchange rate versus pair-shift mismatch",
                     {{"system", two_atom_system()}, {"delta_u", {"-1 MHz", "0 MHz", "1 MHz"}}, {"t_end", 400},
                      {"samples", 2001}},
                     mismatch_delta_u});
        json ssh{{"drive", ssh_drive()}, {"r_a", "4 um"}, {"r_b", "resonant"}, {"u_ref", "300 MHz"}};
        json pd = ssh;
        pd.update({{"delta_big_min", "300 MHz"}, {"delta_big_max", "340 MHz"}, {"points", 401},
                   {"probe", {"310 MHz", "330 MHz"}}});
        r.push_back({"ssh-phase-diagram", "dimer hopping ratio versus Delta", "SSH phase boundary", pd,
                     ssh_phase_diagram});
        json spj = ssh;
        spj.update({{"n", 100}, {"delta_big", "310 MHz"}});
        r.push_back({"ssh-spectrum", "SSH spectrum and edge modes of a 100-site chain",
                     "SSH N=100 spectrum with zero modes", spj, ssh_spectrum_scenario});
        json tr = ssh;
        tr.update({{"n", 8}, {"delta_big_list", {"310 MHz", "330 MHz"}}, {"initial_site", 1}, {"t_end", 3000},
                   {"samples", 3001},
                   {"full_check", {{"n", 4}, {"delta_big_list", {"330 MHz", "310 MHz"}}, {"t_end", 1500}, {"samples", 1501}}}});
        r.push_back({"ssh-transport8", "edge-state dynamics on an 8-site SSH chain, with a 4-atom full check",
                     "SSH transport in both phases", tr, ssh_transport8});
        r.push_back({"chiral-sweep", "Floquet bond parameters of the triangle versus segment time",
                     "quasi-energies, flux and chiral time fits",
                     {{"system", triangle_system()}, {"tau_min", 0.001}, {"tau_max", 0.2}, {"tau_step", 0.001},
                      {"flux_search", {{"lo", 0.1}, {"hi", 0.16}}}},
                     chiral_sweep});
        r.push_back({"chiral-run", "single segment time: bond parameters, currents and chiral motion",
                     "chiral bond parameters, ground-state currents, chiral dynamics",
                     {{"system", triangle_system()}, {"tau", 0.12425}, {"t_end", 2800}, {"threshold", 0.9},
                      {"channel_sum", true}},
                     chiral_run});
        json sq = two_atom_system();
        sq["geometry"] = {{"preset", "square"}, {"side", "resonant"}};
        r.push_back({"chiral-square", "Floquet flux and current on a four-atom square",
                     "square-lattice chiral parameters",
                     {{"system", sq}, {"tau_ranges", {{0.001, 0.096}, {0.13, 0.199}}}, {"tau_step", 0.001},
                      {"run_tau", 0.05}, {"t_end", 2000}},
                     chiral_square});
        r.push_back({"wavevector-check", "strong-drive wave vector leaves populations and loop flux unchanged",
                     "wave-vector invariance",
                     {{"system", chain_system(2)}, {"kz", "5.062 per_um"}, {"n_list", {2, 3}}, {"t_end", 400},
                      {"samples", 401}, {"triangle", triangle_system()}, {"tau", 0.12425}},
                     wavevector_check});
        json opt = two_atom_system();
        opt.update({{"omega", "1 MHz"}, {"omega_p", "10 MHz"}, {"delta", "10 MHz"}, {"delta_big", "300 MHz"}});
        opt["geometry"]["spacing"] = {{"u", "100 MHz"}};
        r.push_back({"noise-mc", "pair-shift noise ensembles for the original and optimized parameters",
                     "robustness against position noise",
                     {{"original", two_atom_system()}, {"optimized", opt},
                      {"noise", {{"amplitude", "3 MHz"}, {"scale", "1 MHz"}, {"refresh_interval", 1.0}, {"n_trajectories", 50}}},
                      {"distributions", {"uniform", "standard_normal"}}, {"samples_per_peak", 100}},
                     noise_mc});
        json vs = two_atom_system();
        vs["geometry"]["spacing"] = "3.99 um";
        json spec = json::array();
        for (auto& t : VdwSpectrum::reference().terms) {
            std::ostringstream e;
            e << std::setprecision(10) << to_mhz(t.energy) << " MHz";
            spec.push_back({{"energy", e.str()}, {"alpha", t.alpha}});
        }
        r.push_back({"vdw-multistate", "exchange through several pair eigenstates", "multistate pair interaction",
                     {{"system", vs}, {"spectrum", spec}, {"delta_u", {"0 MHz", "-50 MHz"}}, {"t_end", 8000},
                      {"samples", 8001}},
                     vdw_multistate});
        r.push_back({"swap-gate", "square-root-of-SWAP from the exchange interaction", "sqrt(SWAP) gate",
                     {{"omega", "0.05 MHz"}, {"omega_p", "1 MHz"}, {"delta", "1 MHz"}, {"delta_big", "300 MHz"},
                      {"t", 50}, {"curve", {{"from", 45}, {"to", 55}, {"points", 201}}}},
                     swap_gate});
        return r;
    }();
    return reg;
}

inline const Info& find(const std::string& name)
{
    for (auto& i : registry())
        if (i.name == name) return i;
    throw UnknownScenario("unknown scenario '" + name + "'");
}

// key.sub=value; value is read as JSON when it parses, else kept as a string.
inline void apply_override(json& cfg, const std::string& kv)
{
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + kv + "' is not key=value");
    std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    json v = json::parse(val, nullptr, false);
    if (v.is_discarded()) v = val;
    json* node = &cfg;
    std::size_t start = 0;
    while (true) {
        auto dot = key.find('.', start);
        std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("empty key segment in '" + key + "'");
        if (dot == std::string::npos) {
            (*node)[part] = v;
            return;
        }
        if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
        node = &(*node)[part];
        start = dot + 1;
    }
}

inline json effective_config(const Info& info, const json& file_cfg, const std::vector<std::string>& sets)
{
    json c = info.defaults;
    if (!file_cfg.is_null()) {
        if (!file_cfg.is_object()) throw ConfigError("config file must hold a JSON object");
        c.merge_patch(file_cfg);
    }
    for (auto& s : sets) apply_override(c, s);
    return c;
}

inline Result run(const Info& info, const json& cfg, const Context& ctx)
{
    try {
        auto r = info.run(cfg, ctx);
        r.summary["scenario"] = info.name;
        r.summary["validity"] = r.validity.to_json();
        return r;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

inline std::string stamp_lines(const Info& info, const json& cfg, const Context& ctx, std::vector<std::string>* lines)
{
    std::string hash = hex64(fnv1a(cfg.dump()));
    if (lines) {
        lines->push_back("scenario " + info.name);
        lines->push_back("config_hash " + hash);
        lines->push_back("seed " + std::to_string(ctx.seed));
        lines->push_back(std::string("version ") + version);
    }
    return hash;
}

// Writes config.json, summary.json and one CSV per table into dir.
inline json write_artifacts(const std::filesystem::path& dir, const Info& info, const json& cfg, const Context& ctx,
                            const Result& r, bool force)
{
    namespace fs = std::filesystem;
    if (fs::exists(dir / "summary.json") && !force)
        throw OutputExists("output directory " + dir.string() + " already holds results; use --force");
    fs::create_directories(dir);
    std::vector<std::string> head;
    std::string hash = stamp_lines(info, cfg, ctx, &head);
    {
        std::ofstream f(dir / "config.json");
        f << cfg.dump(2) << "\n";
    }
    json files = json::array({"config.json", "summary.json"});
    for (auto& t : r.tables) {
        std::string name = t.name + ".csv";
        write_csv((dir / name).string(), t, head);
        files.push_back(name);
    }
    json s = r.summary;
    s["config_hash"] = hash;
    s["seed"] = ctx.seed;
    s["version"] = version;
    s["files"] = files;
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    s["timestamp"] = buf;
    std::ofstream f(dir / "summary.json");
    f << s.dump(2) << "\n";
    return s;
}

} // namespace rydtrans::scenarios
