#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "core.hpp"

namespace rydtrans {

// Local levels in fixed order g < e < r. The optional fourth level 'a' is a
// leakage sink used only by dissipative runs.
inline constexpr char level_g = 'g';
inline constexpr char level_e = 'e';
inline constexpr char level_r = 'r';
inline constexpr char level_a = 'a';

inline constexpr std::size_t default_dimension_cap = 19683; // 3^9

class Basis {
public:
    Basis() = default;

    Basis(int atoms, std::vector<std::string> labels, std::string alphabet = "ger")
        : atoms_(atoms), alphabet_(std::move(alphabet)), labels_(std::move(labels))
    {
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (static_cast<int>(labels_[i].size()) != atoms_)
                throw PreconditionError("label '" + labels_[i] + "' has wrong length");
            if (!index_.emplace(labels_[i], i).second)
                throw PreconditionError("duplicate label '" + labels_[i] + "'");
        }
    }

    // Lexicographic in the alphabet order, leftmost site most significant.
    static Basis full(int n, const std::string& alphabet = "ger",
                      std::size_t cap = default_dimension_cap)
    {
        return restricted(n, nullptr, alphabet, cap);
    }

    static Basis restricted(int n, const std::function<bool(const std::string&)>& keep,
                            const std::string& alphabet = "ger",
                            std::size_t cap = default_dimension_cap)
    {
        if (n < 1) throw PreconditionError("atom count must be >= 1");
        const std::size_t d = alphabet.size();
        std::size_t total = 1;
        for (int i = 0; i < n; ++i) {
            total *= d;
            if (total > cap)
                throw CapacityError("basis dimension " + std::to_string(d) + "^" +
                                    std::to_string(n) + " exceeds cap " +
                                    std::to_string(cap));
        }
        std::vector<std::string> out;
        std::string lab(n, alphabet[0]);
        for (std::size_t k = 0; k < total; ++k) {
            std::size_t rem = k;
            for (int s = n - 1; s >= 0; --s) {
                lab[s] = alphabet[rem % d];
                rem /= d;
            }
            if (!keep || keep(lab)) out.push_back(lab);
        }
        return Basis(n, std::move(out), alphabet);
    }

    int atoms() const { return atoms_; }
    std::size_t size() const { return labels_.size(); }
    const std::string& alphabet() const { return alphabet_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(std::size_t i) const { return labels_.at(i); }
    bool contains(const std::string& l) const { return index_.count(l) != 0; }

    std::optional<std::size_t> find(const std::string& l) const
    {
        auto it = index_.find(l);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t index(const std::string& l) const
    {
        auto it = index_.find(l);
        if (it == index_.end()) throw BasisMismatch("label '" + l + "' not in basis");
        return it->second;
    }

    std::vector<std::size_t> indices(const std::vector<std::string>& ls) const
    {
        std::vector<std::size_t> out;
        out.reserve(ls.size());
        for (auto& l : ls) out.push_back(index(l));
        return out;
    }

    Basis with_appended(const std::vector<std::string>& extra) const
    {
        auto ls = labels_;
        ls.insert(ls.end(), extra.begin(), extra.end());
        return Basis(atoms_, std::move(ls), alphabet_);
    }

    bool operator==(const Basis& o) const
    {
        return atoms_ == o.atoms_ && labels_ == o.labels_;
    }

private:
    int atoms_ = 0;
    std::string alphabet_;
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::size_t> index_;
};

// |bra_site><ket_site| on the given basis. Images outside the basis are dropped.
inline Mat site_operator(const Basis& b, int site, char bra, char ket)
{
    if (site < 0 || site >= b.atoms()) throw PreconditionError("site out of range");
    Mat m = Mat::Zero(b.size(), b.size());
    for (std::size_t j = 0; j < b.size(); ++j) {
        const auto& lab = b.label(j);
        if (lab[site] != ket) continue;
        std::string img = lab;
        img[site] = bra;
        if (auto i = b.find(img)) m(*i, j) = 1.0;
    }
    return m;
}

inline Mat projector(const Basis& b, const std::string& lab)
{
    Mat m = Mat::Zero(b.size(), b.size());
    auto i = b.index(lab);
    m(i, i) = 1.0;
    return m;
}

struct QuantumState {
    bool mixed = false;
    Vec psi;
    Mat rho;
    double time = 0.0;

    static QuantumState pure(Vec v, double t = 0.0) { return {false, std::move(v), {}, t}; }
    static QuantumState density(Mat r, double t = 0.0) { return {true, {}, std::move(r), t}; }

    static QuantumState basis_state(const Basis& b, const std::string& lab)
    {
        Vec v = Vec::Zero(b.size());
        v(b.index(lab)) = 1.0;
        return pure(std::move(v));
    }

    std::size_t dim() const { return mixed ? rho.rows() : psi.size(); }

    Mat as_density() const { return mixed ? rho : Mat(psi * psi.adjoint()); }

    // Throws ValidityError when norm, trace, hermiticity or positivity is off.
    void check(double norm_tol = 1e-9, double trace_tol = 1e-8) const
    {
        if (!mixed) {
            double n = psi.norm();
            if (std::abs(n - 1.0) > norm_tol)
                throw ValidityError("state norm drift " + std::to_string(n - 1.0));
            return;
        }
        double tr = rho.trace().real();
        if (std::abs(tr - 1.0) > trace_tol)
            throw ValidityError("density trace drift " + std::to_string(tr - 1.0));
        if (max_abs(rho - rho.adjoint()) > 1e-10)
            throw ValidityError("density matrix not hermitian");
        Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-8)
            throw ValidityError("density matrix has negative eigenvalue");
    }
};

inline cplx expectation(const QuantumState& s, const Mat& op)
{
    if (static_cast<std::size_t>(op.rows()) != s.dim() || op.rows() != op.cols())
        throw BasisMismatch("operator and state dimensions differ");
    if (s.mixed) return (s.rho * op).trace();
    return s.psi.dot(op * s.psi);
}

// Map amplitudes from a restricted basis into a larger one (and back).
inline Vec embed(const Basis& sub, const Basis& full, const Vec& v)
{
    Vec out = Vec::Zero(full.size());
    for (std::size_t i = 0; i < sub.size(); ++i) out(full.index(sub.label(i))) = v(i);
    return out;
}

inline Vec restrict_vector(const Basis& full, const Basis& sub, const Vec& v)
{
    Vec out(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i) out(i) = v(full.index(sub.label(i)));
    return out;
}

inline Mat restrict_operator(const Basis& full, const Basis& sub, const Mat& m)
{
    auto idx = full.indices(sub.labels());
    Mat out(sub.size(), sub.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = m(idx[i], idx[j]);
    return out;
}

inline Mat submatrix(const Mat& m, const std::vector<std::size_t>& rows,
                     const std::vector<std::size_t>& cols)
{
    Mat out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = m(rows[i], cols[j]);
    return out;
}

// Labels with exactly one 'e' and all other sites 'g', ordered by site.
inline std::vector<std::string> single_excitation_labels(int n)
{
    std::vector<std::string> out;
    for (int j = 0; j < n; ++j) {
        std::string s(n, level_g);
        s[j] = level_e;
        out.push_back(s);
    }
    return out;
}

} // namespace rydtrans
