#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include "model.hpp"

namespace rydtrans {

struct TimeGrid {
    double t_start = 0.0;
    double t_end = 1.0;
    int n_samples = 2;

    void validate() const
    {
        if (!(t_end > t_start)) throw PreconditionError("time grid needs t_end > t_start");
        if (n_samples < 2) throw PreconditionError("time grid needs at least 2 samples");
    }
    double at(int k) const { return t_start + (t_end - t_start) * k / (n_samples - 1); }
    std::vector<double> times() const
    {
        std::vector<double> t(n_samples);
        for (int k = 0; k < n_samples; ++k) t[k] = at(k);
        return t;
    }
};

// Expectation value of `op`, or of a single basis population when `index` is set.
struct Observable {
    std::string name;
    Mat op;
    std::optional<std::size_t> index;

    static Observable population(const Basis& b, const std::string& label)
    {
        return {"P(" + label + ")", {}, b.index(label)};
    }
    double eval(const Vec& psi) const
    {
        if (index) return std::norm(psi(*index));
        return psi.dot(op * psi).real();
    }
    double eval(const Mat& rho) const
    {
        if (index) return rho(*index, *index).real();
        return (rho * op).trace().real();
    }
};

inline std::vector<Observable> populations(const Basis& b, const std::vector<std::string>& labels)
{
    std::vector<Observable> out;
    for (auto& l : labels) out.push_back(Observable::population(b, l));
    return out;
}

struct TrajectoryResult {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;    // values[observable][sample]
    std::vector<std::vector<double>> std_error; // filled by ensemble runs only
    QuantumState final_state;
    double max_norm_drift = 0.0;  // pure runs: |‖psi‖ - 1|; mixed runs: |Tr rho - 1|
    double max_herm_error = 0.0;  // mixed runs only
    double min_eigenvalue = 0.0;  // mixed runs only, most negative seen at samples

    const std::vector<double>& operator[](const std::string& name) const
    {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return values[i];
        throw PreconditionError("no observable named " + name);
    }
};

// exp(-i H t) through one Hermitian eigendecomposition.
class HermitianPropagator {
public:
    explicit HermitianPropagator(const Mat& h)
    {
        if (!is_hermitian(h)) throw PreconditionError("hamiltonian is not hermitian");
        Eigen::SelfAdjointEigenSolver<Mat> es(h);
        w_ = es.eigenvalues();
        v_ = es.eigenvectors();
    }
    Vec apply(const Vec& psi, double t) const
    {
        Vec c = v_.adjoint() * psi;
        for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -w_(k) * t);
        return v_ * c;
    }
    Mat matrix(double t) const
    {
        Vec ph(w_.size());
        for (Eigen::Index k = 0; k < w_.size(); ++k) ph(k) = std::polar(1.0, -w_(k) * t);
        return v_ * ph.asDiagonal() * v_.adjoint();
    }
    const RVec& energies() const { return w_; }
    const Mat& vectors() const { return v_; }

private:
    RVec w_;
    Mat v_;
};

namespace detail {
inline TrajectoryResult make_result(const std::vector<Observable>& obs, const std::vector<double>& times)
{
    TrajectoryResult r;
    r.times = times;
    for (auto& o : obs) {
        r.names.push_back(o.name);
        r.values.emplace_back(times.size(), 0.0);
    }
    return r;
}
} // namespace detail

inline TrajectoryResult evolve_unitary(const Mat& h, const QuantumState& psi0, const TimeGrid& grid,
                                       const std::vector<Observable>& obs)
{
    grid.validate();
    if (psi0.mixed) throw PreconditionError("evolve_unitary needs a pure state");
    psi0.check();
    HermitianPropagator prop(h);
    Vec c = prop.vectors().adjoint() * psi0.psi;
    auto r = detail::make_result(obs, grid.times());
    Vec psi;
    for (int k = 0; k < grid.n_samples; ++k) {
        double t = grid.at(k) - grid.t_start;
        Vec ck = c;
        for (Eigen::Index i = 0; i < ck.size(); ++i) ck(i) *= std::polar(1.0, -prop.energies()(i) * t);
        psi = prop.vectors() * ck;
        r.max_norm_drift = std::max(r.max_norm_drift, std::abs(psi.norm() - 1.0));
        for (std::size_t o = 0; o < obs.size(); ++o) r.values[o][k] = obs[o].eval(psi);
    }
    r.final_state = QuantumState::pure(psi, grid.t_end);
    return r;
}

enum class LindbladMethod { rk45, exact };

struct LindbladOptions {
    LindbladMethod method = LindbladMethod::rk45;
    double atol = 1e-9;
    double rtol = 1e-7;
    double min_step = 1e-12;
};

// Superoperator acting on column-stacked density matrices.
inline Mat liouvillian(const Mat& h, const std::vector<Mat>& ls)
{
    const Eigen::Index d = h.rows();
    const cplx i(0, 1);
    Mat id = Mat::Identity(d, d);
    auto kron = [](const Mat& a, const Mat& b) {
        Mat k(a.rows() * b.rows(), a.cols() * b.cols());
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            for (Eigen::Index c = 0; c < a.cols(); ++c) k.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
        return k;
    };
    // vec(A X B) = (B^T kron A) vec(X)
    Mat lv = -i * (kron(id, h) - kron(h.transpose(), id));
    for (auto& l : ls) {
        Mat ldl = l.adjoint() * l;
        lv += kron(l.conjugate(), l) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id);
    }
    return lv;
}

inline Eigen::SparseMatrix<cplx> sparse_liouvillian(const Mat& h, const std::vector<Mat>& ls)
{
    using Sp = Eigen::SparseMatrix<cplx>;
    const Eigen::Index d = h.rows();
    auto sp = [](const Mat& m) { return Sp(m.sparseView(1e-300, 1)); };
    auto kron = [d](const Sp& a, const Sp& b) {
        std::vector<Eigen::Triplet<cplx>> tr;
        for (int ka = 0; ka < a.outerSize(); ++ka)
            for (Sp::InnerIterator ia(a, ka); ia; ++ia)
                for (int kb = 0; kb < b.outerSize(); ++kb)
                    for (Sp::InnerIterator ib(b, kb); ib; ++ib)
                        tr.emplace_back(ia.row() * d + ib.row(), ia.col() * d + ib.col(), ia.value() * ib.value());
        Sp k(d * d, d * d);
        k.setFromTriplets(tr.begin(), tr.end());
        return k;
    };
    const cplx i(0, 1);
    Sp id(d, d);
    id.setIdentity();
    Mat hnh = h;
    for (auto& l : ls) hnh -= 0.5 * i * (l.adjoint() * l);
    // vec(A X B) = (B^T kron A) vec(X), column stacking
    Sp lv = kron(id, sp(-i * hnh)) + kron(sp(Mat(i * hnh.conjugate())), id);
    for (auto& l : ls) lv += kron(sp(l.conjugate()), sp(l));
    lv.makeCompressed();
    return lv;
}

namespace detail {

// Dormand-Prince 5(4) stepper with first-same-as-last, RMS error norm.
class DormandPrince {
public:
    explicit DormandPrince(Eigen::Index n) : k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), yn(n) {}

    template <class Rhs>
    void advance(Rhs&& f, Vec& y, double& t, double t_target, double& h, double atol, double rtol,
                 double min_step)
    {
        if (!primed_) {
            f(y, k1);
            primed_ = true;
        }
        while (t < t_target) {
            bool last = false;
            double hh = h;
            if (t + hh >= t_target) {
                hh = t_target - t;
                last = true;
            }
            tmp = y + hh * (a21 * k1);
            f(tmp, k2);
            tmp = y + hh * (a31 * k1 + a32 * k2);
            f(tmp, k3);
            tmp = y + hh * (a41 * k1 + a42 * k2 + a43 * k3);
            f(tmp, k4);
            tmp = y + hh * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            f(tmp, k5);
            tmp = y + hh * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            f(tmp, k6);
            yn = y + hh * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            f(yn, k7);
            tmp = hh * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            double acc = 0.0;
            for (Eigen::Index q = 0; q < tmp.size(); ++q) {
                double sc = atol + rtol * std::max(std::abs(y(q)), std::abs(yn(q)));
                double e = std::abs(tmp(q)) / sc;
                acc += e * e;
            }
            double en = std::sqrt(acc / static_cast<double>(tmp.size()));
            bool accept = en <= 1.0;
            if (accept) {
                t = last ? t_target : t + hh;
                y.swap(yn);
                k1.swap(k7);
                ++steps;
            }
            double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
            if (!accept) fac = std::min(fac, 1.0);
            if (!(last && accept)) h = hh * fac;
            if (h < min_step) throw NumericError("integrator step size below minimum");
        }
    }

    long steps = 0;

private:
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    Vec k1, k2, k3, k4, k5, k6, k7, tmp, yn;
    bool primed_ = false;
};

} // namespace detail

inline TrajectoryResult evolve_lindblad(const Mat& h, const std::vector<Mat>& ls, const QuantumState& rho0,
                                        const TimeGrid& grid, const std::vector<Observable>& obs,
                                        const LindbladOptions& opt = {})
{
    grid.validate();
    if (!is_hermitian(h)) throw PreconditionError("hamiltonian is not hermitian");
    Mat rho = rho0.as_density();
    QuantumState::density(rho).check();
    const Eigen::Index d = h.rows();
    for (auto& l : ls)
        if (l.rows() != d || l.cols() != d) throw BasisMismatch("jump operator dimension differs");

    auto r = detail::make_result(obs, grid.times());
    auto record = [&](int k, const Mat& m) {
        r.max_norm_drift = std::max(r.max_norm_drift, std::abs(m.trace().real() - 1.0));
        r.max_herm_error = std::max(r.max_herm_error, max_abs(m - m.adjoint()));
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
        r.min_eigenvalue = std::min(r.min_eigenvalue, es.eigenvalues().minCoeff());
        for (std::size_t o = 0; o < obs.size(); ++o) r.values[o][k] = obs[o].eval(m);
    };
    record(0, rho);

    if (opt.method == LindbladMethod::exact) {
        Mat lv = liouvillian(h, ls);
        double dt = grid.at(1) - grid.at(0);
        Mat step = (lv * dt).exp();
        Vec v = Eigen::Map<const Vec>(rho.data(), d * d);
        for (int k = 1; k < grid.n_samples; ++k) {
            v = step * v;
            rho = Eigen::Map<const Mat>(v.data(), d, d);
            record(k, rho);
        }
        r.final_state = QuantumState::density(rho, grid.t_end);
        return r;
    }

    Eigen::SparseMatrix<cplx> lv = sparse_liouvillian(h, ls);
    Vec y = Eigen::Map<const Vec>(rho.data(), d * d);
    detail::DormandPrince dp(y.size());
    double t = grid.t_start;
    double hstep = std::min(1e-3, (grid.t_end - grid.t_start) / 10);
    auto rhs = [&](const Vec& x, Vec& out) { out.noalias() = lv * x; };
    for (int s = 1; s < grid.n_samples; ++s) {
        dp.advance(rhs, y, t, grid.at(s), hstep, opt.atol, opt.rtol, opt.min_step);
        rho = Eigen::Map<const Mat>(y.data(), d, d);
        record(s, rho);
    }
    r.final_state = QuantumState::density(rho, grid.t_end);
    return r;
}

struct Segment {
    Mat h;
    double duration = 0.0;
};

struct DriveSchedule {
    std::vector<Segment> segments;

    double period() const
    {
        double t = 0;
        for (auto& s : segments) t += s.duration;
        return t;
    }
    void validate() const
    {
        if (segments.empty()) throw PreconditionError("empty drive schedule");
        for (auto& s : segments)
            if (!(s.duration > 0)) throw PreconditionError("segment duration must be positive");
    }
};

// Stroboscopic evolution. With per_segment the state is sampled after every
// segment, otherwise once per period.
inline TrajectoryResult evolve_schedule(const DriveSchedule& sched, const QuantumState& psi0, int n_periods,
                                        const std::vector<Observable>& obs, bool per_segment = false)
{
    sched.validate();
    if (psi0.mixed) throw PreconditionError("evolve_schedule needs a pure state");
    psi0.check();
    std::vector<Mat> props;
    for (auto& s : sched.segments) props.push_back(HermitianPropagator(s.h).matrix(s.duration));

    std::vector<double> times{0.0};
    std::vector<std::vector<double>> vals(obs.size());
    Vec psi = psi0.psi;
    auto rec = [&](double t) {
        if (t > 0) times.push_back(t);
        for (std::size_t o = 0; o < obs.size(); ++o) vals[o].push_back(obs[o].eval(psi));
    };
    rec(0.0);
    double t = 0.0, drift = 0.0;
    for (int n = 0; n < n_periods; ++n) {
        for (std::size_t k = 0; k < props.size(); ++k) {
            psi = props[k] * psi;
            t += sched.segments[k].duration;
            if (per_segment || k + 1 == props.size()) rec(t);
        }
        drift = std::max(drift, std::abs(psi.norm() - 1.0));
    }
    TrajectoryResult r;
    r.times = times;
    for (auto& o : obs) r.names.push_back(o.name);
    r.values = std::move(vals);
    r.final_state = QuantumState::pure(psi, t);
    r.max_norm_drift = drift;
    return r;
}

struct NoiseModel {
    enum class Distribution { uniform, standard_normal };
    Distribution distribution = Distribution::uniform;
    double amplitude = mhz(3.0); // half-width a of the uniform law, rad/us
    double scale = mhz(1.0);     // unit of the normal law, rad/us
    double refresh_interval = 1.0;
    std::uint64_t seed = 1;
    int n_trajectories = 50;

    void validate() const
    {
        if (amplitude < 0 || scale < 0) throw PreconditionError("noise amplitude must be >= 0");
        if (!(refresh_interval > 0)) throw PreconditionError("refresh interval must be positive");
        if (n_trajectories < 1) throw PreconditionError("need at least one trajectory");
    }

    // Trajectory k draws from its own generator seeded with (seed, k).
    std::mt19937_64 stream(int k) const
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(k)};
        return std::mt19937_64(seq);
    }

    double draw(std::mt19937_64& g) const
    {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        if (distribution == Distribution::uniform) return -amplitude + 2 * amplitude * u(g);
        double x1 = 1.0 - u(g); // (0, 1]
        double x2 = u(g);
        return scale * std::sqrt(-2 * std::log(x1)) * std::cos(two_pi * x2);
    }
};

// Ensemble average over trajectories where every nearest-neighbour pair energy
// is shifted by an independent sample-and-hold F(t).
inline TrajectoryResult evolve_noisy(const SystemConfig& cfg, const NoiseModel& noise, const QuantumState& psi0,
                                     const TimeGrid& grid, const std::vector<Observable>& obs, int threads = 1)
{
    noise.validate();
    grid.validate();
    if (psi0.mixed) throw PreconditionError("evolve_noisy needs a pure state");
    Basis b = Basis::full(cfg.atoms());
    const Mat h0 = full_hamiltonian(cfg, b);
    std::vector<RVec> pair_diag;
    for (auto& pt : pair_terms(cfg)) {
        if (!pt.nearest) continue;
        RVec dg = RVec::Zero(b.size());
        for (std::size_t i = 0; i < b.size(); ++i)
            if (b.label(i)[pt.j] == level_r && b.label(i)[pt.k] == level_r) dg(i) = 1.0;
        pair_diag.push_back(dg);
    }
    const int nt = noise.n_trajectories;
    const int ns = grid.n_samples;
    std::vector<std::vector<std::vector<double>>> per(nt);
    std::vector<double> drift(nt, 0.0);

    auto run = [&](int k) {
        auto gen = noise.stream(k);
        std::vector<std::vector<double>> vals(obs.size(), std::vector<double>(ns));
        Vec psi = psi0.psi;
        long interval = -1;
        std::optional<HermitianPropagator> prop;
        double t = grid.t_start;
        auto hold_for = [&](long idx) {
            while (interval < idx) {
                ++interval;
                Mat h = h0;
                for (auto& dg : pair_diag) {
                    double f = noise.draw(gen);
                    for (Eigen::Index i = 0; i < dg.size(); ++i) h(i, i) += f * dg(i);
                }
                prop.emplace(h);
            }
        };
        for (std::size_t o = 0; o < obs.size(); ++o) vals[o][0] = obs[o].eval(psi);
        for (int s = 1; s < ns; ++s) {
            double ts = grid.at(s);
            while (t < ts - 1e-12) {
                long idx = static_cast<long>(std::floor((t - grid.t_start) / noise.refresh_interval + 1e-9));
                double te = grid.t_start + (idx + 1) * noise.refresh_interval;
                hold_for(idx);
                double t1 = std::min(te, ts);
                psi = prop->apply(psi, t1 - t);
                t = t1;
            }
            drift[k] = std::max(drift[k], std::abs(psi.norm() - 1.0));
            for (std::size_t o = 0; o < obs.size(); ++o) vals[o][s] = obs[o].eval(psi);
        }
        per[k] = std::move(vals);
    };

    int nthreads = std::max(1, std::min(threads, nt));
    if (nthreads == 1) {
        for (int k = 0; k < nt; ++k) run(k);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nthreads; ++w)
            pool.emplace_back([&, w] {
                for (int k = w; k < nt; k += nthreads) run(k);
            });
        for (auto& th : pool) th.join();
    }

    auto r = detail::make_result(obs, grid.times());
    r.std_error.assign(obs.size(), std::vector<double>(ns, 0.0));
    for (std::size_t o = 0; o < obs.size(); ++o)
        for (int s = 0; s < ns; ++s) {
            double sum = 0, sq = 0;
            for (int k = 0; k < nt; ++k) sum += per[k][o][s];
            double mean = sum / nt;
            for (int k = 0; k < nt; ++k) sq += (per[k][o][s] - mean) * (per[k][o][s] - mean);
            r.values[o][s] = mean;
            double var = nt > 1 ? sq / (nt - 1) : 0.0;
            r.std_error[o][s] = std::sqrt(var / nt);
        }
    for (double dv : drift) r.max_norm_drift = std::max(r.max_norm_drift, dv);
    return r;
}

} // namespace rydtrans
