#include <gtest/gtest.h>

#include "rydtrans/evolve.hpp"
#include "rydtrans/model.hpp"

using namespace rydtrans;

namespace {
SystemConfig default_two_atom() { return two_atom_config(mhz(0.05), mhz(1), mhz(1), mhz(300), mhz(300)); }
}

TEST(Vdw, InteractionValues)
{
    EXPECT_NEAR(to_mhz(vdw_interaction(c6_default, 3.0)), 1943.0, 1943.0 * 1e-3);
    EXPECT_NEAR(to_mhz(vdw_interaction(c6_default, 10.0)), 1.416, 1e-12);
    EXPECT_NEAR(to_mhz(vdw_interaction(c6_default, 4.1)), 300.0, 300.0 * 0.02);
    EXPECT_NEAR(to_mhz(vdw_interaction(c6_default, resonant_spacing(c6_default, mhz(300)))), 300.0, 1e-9);
    EXPECT_THROW(vdw_interaction(c6_default, 0.0), PreconditionError);
}

TEST(Hamiltonian, SingleAtomDiagonal)
{
    SystemConfig c;
    c.positions = geometry::chain(1, 1.0);
    c.omega = {0.0};
    c.omega_p = 0.0;
    Mat h = full_hamiltonian(c, full_basis(c));
    Mat want = Mat::Zero(3, 3);
    want(0, 0) = c.delta;
    want(1, 1) = c.delta_big;
    EXPECT_EQ(h, want);
}

TEST(Hamiltonian, PairShiftAndCouplings)
{
    auto c = default_two_atom();
    Basis b = full_basis(c);
    Mat h = full_hamiltonian(c, b);
    EXPECT_TRUE(is_hermitian(h));
    EXPECT_NEAR(h(b.index("rr"), b.index("rr")).real(), mhz(300), 1e-9);
    EXPECT_EQ(h(b.index("rg"), b.index("gg")), cplx(mhz(0.05)));
    EXPECT_EQ(h(b.index("er"), b.index("ee")), cplx(mhz(1)));
    EXPECT_EQ(h(b.index("ge"), b.index("eg")), cplx(0));
}

TEST(Hamiltonian, NextNearestTermOnChain)
{
    SystemConfig c;
    c.positions = geometry::chain(3, 4.1);
    c.omega.assign(3, mhz(0.05));
    Basis b = full_basis(c);
    Mat h = full_hamiltonian(c, b);
    double nnn = to_mhz(h(b.index("rgr"), b.index("rgr")).real() - c.delta);
    EXPECT_NEAR(nnn, 1.416e6 / std::pow(8.2, 6), 1e-9);
    EXPECT_NEAR(nnn, 4.66, 0.01);
    c.nearest_neighbor_only = true;
    Mat hn = full_hamiltonian(c, b);
    EXPECT_NEAR(hn(b.index("rgr"), b.index("rgr")).real(), c.delta, 1e-12);
    EXPECT_EQ(hn(b.index("rrg"), b.index("rrg")), h(b.index("rrg"), b.index("rrg")));
}

TEST(Hamiltonian, StrongDrivePhaseFollowsZ)
{
    auto c = default_two_atom();
    c.kz = 5.062;
    Basis b = full_basis(c);
    Mat h = full_hamiltonian(c, b);
    double z1 = c.positions[1].z();
    cplx amp = h(b.index("gr"), b.index("ge"));
    EXPECT_NEAR(std::arg(amp), wrap_angle(c.kz * z1), 1e-12);
    EXPECT_NEAR(std::abs(amp), c.omega_p, 1e-12);
}

TEST(Geometry, Shapes)
{
    auto t = geometry::triangle(4.0);
    EXPECT_NEAR((t[0] - t[1]).norm(), 4.0, 1e-12);
    EXPECT_NEAR((t[1] - t[2]).norm(), 4.0, 1e-12);
    EXPECT_NEAR((t[2] - t[0]).norm(), 4.0, 1e-12);
    auto s = geometry::square(4.0);
    EXPECT_NEAR((s[0] - s[2]).norm(), 4.0 * std::sqrt(2.0), 1e-12);
    auto d = geometry::dimer_chain(4, 4.0, 4.1);
    EXPECT_NEAR(d[1].z() - d[0].z(), 4.0, 1e-12);
    EXPECT_NEAR(d[2].z() - d[1].z(), 4.1, 1e-12);
}

TEST(Config, Validation)
{
    auto c = default_two_atom();
    EXPECT_NO_THROW(c.validate());
    auto bad = c;
    bad.omega.pop_back();
    EXPECT_THROW(bad.validate(), PreconditionError);
    bad = c;
    bad.positions[1] = bad.positions[0] + Vec3(0, 0, 0.3);
    EXPECT_THROW(bad.validate(), PreconditionError);
    bad = c;
    bad.decay = {1.0, 0.6, 0.6, 0.0};
    EXPECT_THROW(bad.validate(), PreconditionError);
    bad = c;
    bad.delta = NAN;
    EXPECT_THROW(bad.validate(), PreconditionError);
}

TEST(Multistate, ReferenceValuesStored)
{
    auto s = VdwSpectrum::reference();
    ASSERT_EQ(s.terms.size(), 3u);
    EXPECT_DOUBLE_EQ(s.terms[1].energy, mhz(-511.25));
    EXPECT_DOUBLE_EQ(s.terms[2].energy, mhz(-1258.83));
    EXPECT_DOUBLE_EQ(s.terms[0].alpha * s.terms[0].alpha, 0.72);
    EXPECT_NO_THROW(s.validate());
    EXPECT_THROW((VdwSpectrum{{{1.0, 0.0}}}).validate(), PreconditionError);
    EXPECT_THROW((VdwSpectrum{{{1.0, 0.9}, {2.0, 0.9}}}).validate(), PreconditionError);
}

TEST(Multistate, SingleTermReducesExactly)
{
    for (int n : {2, 3}) {
        SystemConfig c;
        c.positions = geometry::chain(n, resonant_spacing(c6_default, mhz(300)));
        c.omega.assign(n, mhz(0.05));
        c.nearest_neighbor_only = true;
        Basis base = full_basis(c);
        VdwSpectrum s{{{pair_terms(c).front().u, 1.0}}};
        Basis b = multistate_basis(c, s, base);
        EXPECT_EQ(b, base);
        EXPECT_EQ(full_hamiltonian_multistate(c, s, b), full_hamiltonian(c, base));
    }
}

TEST(Multistate, ReferenceSpectrumGivesExchange)
{
    auto c = default_two_atom();
    c.positions = geometry::chain(2, 3.99);
    auto s = VdwSpectrum::reference();
    Basis b = multistate_basis(c, s, full_basis(c));
    EXPECT_EQ(b.size(), 11u);
    EXPECT_TRUE(b.contains("22"));
    EXPECT_TRUE(b.contains("33"));
    Mat h = full_hamiltonian_multistate(c, s, b);
    EXPECT_TRUE(is_hermitian(h));
    EXPECT_NEAR(h(b.index("22"), b.index("22")).real(), mhz(-511.25), 1e-9);
    EXPECT_NEAR(std::abs(h(b.index("22"), b.index("er"))), std::sqrt(0.126) * mhz(1), 1e-12);
    EXPECT_NEAR(std::abs(h(b.index("rr"), b.index("er"))), std::sqrt(0.72) * mhz(1), 1e-12);
    auto r = evolve_unitary(h, QuantumState::basis_state(b, "eg"), {0, 600, 1201}, populations(b, {"eg", "ge"}));
    double best = *std::max_element(r["P(ge)"].begin(), r["P(ge)"].end());
    EXPECT_GT(best, 0.95);
}

TEST(Dissipation, Operators)
{
    auto c = default_two_atom();
    EXPECT_TRUE(lindblad_ops(c, full_basis(c)).empty());
    c.decay = {mhz(0.005), 0.5, 0.5, 0.0};
    auto ls = lindblad_ops(c, full_basis(c));
    ASSERT_EQ(ls.size(), 4u);
    for (auto& l : ls) EXPECT_NEAR(max_abs(l), std::sqrt(mhz(0.005) / 2), 1e-15);
    c.decay = {mhz(0.005), 0.125, 0.125, 0.75};
    EXPECT_EQ(c.alphabet(), "gera");
    Basis b = full_basis(c);
    EXPECT_EQ(lindblad_ops(c, b).size(), 6u);
    EXPECT_THROW(lindblad_ops(c, Basis::full(2)), PreconditionError);
}
