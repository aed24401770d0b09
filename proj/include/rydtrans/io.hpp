#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "effop.hpp"
#include "model.hpp"

namespace rydtrans {

using json = nlohmann::json;

struct ConfigError : Error {
    using Error::Error;
};

enum class Quantity { frequency, length, inverse_length, time, dimensionless };

// Numbers are taken in base units (rad/us, um, 1/um, us). Strings carry a unit:
// "300 MHz" (= 2 pi x 300 rad/us), "1.5 kHz", "2 rad/us", "4.1 um", "5.062 per_um", "0.1 us".
inline double parse_quantity(const json& v, Quantity q)
{
    if (v.is_number()) return v.get<double>();
    if (!v.is_string()) throw ConfigError("expected a number or a string with unit, got " + v.dump());
    std::istringstream in(v.get<std::string>());
    double x;
    std::string unit;
    if (!(in >> x)) throw ConfigError("cannot read number from " + v.dump());
    in >> unit;
    auto bad = [&] { return ConfigError("unit '" + unit + "' does not fit " + v.dump()); };
    switch (q) {
    case Quantity::frequency:
        if (unit == "MHz") return mhz(x);
        if (unit == "kHz") return mhz(x * 1e-3);
        if (unit == "rad/us" || unit.empty()) return x;
        throw bad();
    case Quantity::length:
        if (unit == "um" || unit.empty()) return x;
        if (unit == "nm") return x * 1e-3;
        throw bad();
    case Quantity::inverse_length:
        if (unit == "per_um" || unit == "1/um" || unit.empty()) return x;
        if (unit == "per_m" || unit == "1/m") return x * 1e-6;
        throw bad();
    case Quantity::time:
        if (unit == "us" || unit.empty()) return x;
        if (unit == "ns") return x * 1e-3;
        throw bad();
    case Quantity::dimensionless:
        if (unit.empty()) return x;
        throw bad();
    }
    throw bad();
}

inline double get_quantity(const json& j, const std::string& key, Quantity q)
{
    if (!j.contains(key)) throw ConfigError("missing key '" + key + "'");
    return parse_quantity(j.at(key), q);
}

inline double get_quantity(const json& j, const std::string& key, Quantity q, double fallback)
{
    return j.contains(key) ? parse_quantity(j.at(key), q) : fallback;
}

// Spacings may be written as "resonant" (C6/r^6 equals Delta) or as {"u": "250 MHz"}
// for the distance with that pair shift.
inline double parse_spacing(const json& v, double c6, double delta_big)
{
    if (v.is_string() && v.get<std::string>() == "resonant") return resonant_spacing(c6, delta_big);
    if (v.is_object()) {
        double u = get_quantity(v, "u", Quantity::frequency);
        if (!(u > 0)) throw ConfigError("pair shift for a spacing must be positive");
        return resonant_spacing(c6, u);
    }
    return parse_quantity(v, Quantity::length);
}

inline SystemConfig config_from_json(const json& j)
{
    SystemConfig c;
    c.omega_p = get_quantity(j, "omega_p", Quantity::frequency, c.omega_p);
    c.delta = get_quantity(j, "delta", Quantity::frequency, c.delta);
    c.delta_big = get_quantity(j, "delta_big", Quantity::frequency, c.delta_big);
    c.c6 = get_quantity(j, "c6", Quantity::frequency, c.c6);
    c.kz = get_quantity(j, "kz", Quantity::inverse_length, 0.0);
    c.nearest_neighbor_only = j.value("nearest_neighbor_only", false);

    if (!j.contains("geometry")) throw ConfigError("missing geometry");
    const auto& g = j.at("geometry");
    std::string preset = g.value("preset", "chain");
    if (preset == "chain") {
        c.positions = geometry::chain(g.at("n").get<int>(), parse_spacing(g.at("spacing"), c.c6, c.delta_big));
    } else if (preset == "dimer_chain") {
        c.positions = geometry::dimer_chain(g.at("n").get<int>(), parse_spacing(g.at("r_a"), c.c6, c.delta_big),
                                            parse_spacing(g.at("r_b"), c.c6, c.delta_big));
    } else if (preset == "triangle") {
        c.positions = geometry::triangle(parse_spacing(g.at("side"), c.c6, c.delta_big));
    } else if (preset == "square") {
        c.positions = geometry::square(parse_spacing(g.at("side"), c.c6, c.delta_big));
    } else if (preset == "explicit") {
        for (auto& p : g.at("positions")) {
            if (!p.is_array() || p.size() != 3) throw ConfigError("positions must be [x, y, z] triples");
            c.positions.emplace_back(parse_quantity(p[0], Quantity::length), parse_quantity(p[1], Quantity::length),
                                     parse_quantity(p[2], Quantity::length));
        }
    } else {
        throw ConfigError("unknown geometry preset '" + preset + "'");
    }

    const int n = c.atoms();
    if (!j.contains("omega")) throw ConfigError("missing omega");
    const auto& om = j.at("omega");
    if (om.is_array()) {
        if (static_cast<int>(om.size()) != n) throw ConfigError("omega list length differs from atom count");
        for (auto& x : om) {
            if (x.is_object())
                c.omega.push_back(std::polar(parse_quantity(x.at("abs"), Quantity::frequency),
                                             x.value("phase", 0.0)));
            else
                c.omega.push_back(parse_quantity(x, Quantity::frequency));
        }
    } else {
        c.omega.assign(n, parse_quantity(om, Quantity::frequency));
    }

    if (j.contains("decay")) {
        const auto& d = j.at("decay");
        c.decay.gamma = get_quantity(d, "gamma", Quantity::frequency, 0.0);
        std::string preset_b = d.value("branching", "equal");
        if (preset_b == "equal") c.decay.b_g = c.decay.b_e = 0.5, c.decay.b_a = 0.0;
        else if (preset_b == "hyperfine-1/8") c.decay.b_g = c.decay.b_e = 0.125, c.decay.b_a = 0.75;
        else if (preset_b == "leak-only") c.decay.b_g = c.decay.b_e = 0.0, c.decay.b_a = 1.0;
        else if (preset_b == "custom") {
            c.decay.b_g = d.value("b_g", 0.0);
            c.decay.b_e = d.value("b_e", 0.0);
            c.decay.b_a = d.value("b_a", 0.0);
        } else throw ConfigError("unknown branching preset '" + preset_b + "'");
    }
    try {
        c.validate();
    } catch (const PreconditionError& e) {
        throw ConfigError(e.what());
    }
    return c;
}

inline json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

// Row-major list of [re, im] pairs.
inline json matrix_to_json(const Mat& m)
{
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(complex_to_json(m(r, c)));
    return a;
}

inline json to_json(const EffectiveModel& m)
{
    json hop = json::array();
    for (std::size_t a = 0; a < m.labels.size(); ++a)
        for (std::size_t b = 0; b < m.labels.size(); ++b)
            if (a != b && std::abs(m.h(a, b)) > 0)
                hop.push_back({{"from", m.labels[b]}, {"to", m.labels[a]}, {"re", m.h(a, b).real()},
                               {"im", m.h(a, b).imag()}});
    json on = json::object();
    for (std::size_t a = 0; a < m.labels.size(); ++a) on[m.labels[a]] = m.h(a, a).real();
    return {{"hoppings", hop}, {"onsite", on}, {"shift", m.shift}, {"provenance", to_string(m.provenance)},
            {"divergent", m.divergent}};
}

// 64-bit FNV-1a, used to stamp outputs with the configuration they came from.
inline std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    std::ostringstream o;
    o << std::hex << std::setw(16) << std::setfill('0') << v;
    return o.str();
}

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline void write_csv(const std::string& path, const Table& t, const std::vector<std::string>& header_lines)
{
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path);
    for (auto& l : header_lines) f << "# " << l << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) f << (i ? "," : "") << t.columns[i];
    f << "\n" << std::setprecision(12);
    for (auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << r[i];
        f << "\n";
    }
}

} // namespace rydtrans
