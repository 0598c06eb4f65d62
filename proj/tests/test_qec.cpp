#include <gtest/gtest.h>

#include <random>

#include "cqedwb/qec.hpp"

using namespace cqedwb;

namespace {

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::UsageError;
}

StateVector random_qubit(std::mt19937& rng) {
    std::normal_distribution<double> g;
    StateVector v(2);
    v << cplx(g(rng), g(rng)), cplx(g(rng), g(rng));
    return v.normalized();
}

DensityMatrix zero_dm() {
    DensityMatrix z = DensityMatrix::Zero(2, 2);
    z(0, 0) = 1.0;
    return z;
}

double min_eig(const DensityMatrix& r) {
    return Eigen::SelfAdjointEigenSolver<ComplexMatrix>(r).eigenvalues().minCoeff();
}

// independent polar sampling of product states
DensityMatrix random_product(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DensityMatrix out = DensityMatrix::Ones(1, 1);
    for (int q = 0; q < 3; ++q) {
        const double th = std::acos(1 - 2 * u(rng)), ph = constants::two_pi * u(rng);
        StateVector s(2);
        s << std::cos(th / 2), std::exp(I_unit * ph) * std::sin(th / 2);
        out = kron(out, projector(s));
    }
    return out;
}

} // namespace

TEST(RunCircuit, TrivialCircuits) {
    std::mt19937 rng(1);
    DensityMatrix rho = kron_all({projector(random_qubit(rng)), projector(random_qubit(rng)), projector(random_qubit(rng))});
    EXPECT_LT((run_circuit(Circuit{}, rho) - rho).norm(), 1e-15);
    Circuit twice;
    twice.cnot(0, 2).cnot(0, 2);
    EXPECT_LT((circuit_unitary(twice) - ComplexMatrix::Identity(8, 8)).norm(), 1e-15);
    EXPECT_EQ(kind_of([&] { run_circuit(Circuit{}, DensityMatrix::Identity(4, 4)); }), ErrorKind::DimMismatch);
    Circuit bad;
    bad.cnot(0, 3);
    EXPECT_EQ(kind_of([&] { run_circuit(bad, rho); }), ErrorKind::DimMismatch);
}

TEST(RunCircuit, EncodeMakesGhzLikeState) {
    std::mt19937 rng(2);
    for (bool compiled : {false, true}) {
        StateVector psi = random_qubit(rng);
        StateVector in = kron_all({basis_state(2, 0), psi, basis_state(2, 0)});
        DensityMatrix out = run_circuit(repetition_encode(CodeKind::bit, compiled), projector(in));
        StateVector expect = StateVector::Zero(8);
        expect(0) = psi(0);
        expect(7) = psi(1);
        EXPECT_LT((out - projector(expect)).norm(), 1e-10);
    }
}

TEST(RunCircuit, TraceAndPositivityWithResetsAndChannels) {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> q(0, 2), kind(0, 5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        Circuit c;
        for (int k = 0; k < 12; ++k) {
            const int a = q(rng), b = (a + 1 + q(rng) % 2) % 3;
            switch (kind(rng)) {
            case 0: c.rotate(a, {Eigen::Vector3d(u(rng) - .5, u(rng) - .5, u(rng) - .5).normalized(), 6 * u(rng)}); break;
            case 1: c.cnot(a, b); break;
            case 2: c.cphase(a, b, PhaseGateSpec{2, {0, u(rng), u(rng), u(rng)}}); break;
            case 3: c.reset(a); break;
            case 4: c.channel(a, make_channel(ChannelKind::amplitude_damping, u(rng))); break;
            default: c.ccphase(0, 1, 2, phase_on_state("111")); break;
            }
        }
        DensityMatrix in = kron_all({projector(random_qubit(rng)), projector(random_qubit(rng)), projector(random_qubit(rng))});
        DensityMatrix out = run_circuit(c, in);
        EXPECT_NEAR(out.trace().real(), 1.0, 1e-10);
        EXPECT_GE(min_eig(out), -1e-9);
    }
}

TEST(RunCircuit, ResetReplacesWithGround) {
    Circuit c;
    c.reset(1);
    StateVector in = kron_all({basis_state(2, 1), basis_state(2, 1), basis_state(2, 1)});
    DensityMatrix out = run_circuit(c, projector(in));
    EXPECT_NEAR(out(5, 5).real(), 1.0, 1e-15);
    EXPECT_FALSE(c.is_unitary());
    EXPECT_EQ(kind_of([&] { circuit_unitary(c); }), ErrorKind::Unsupported);
}

TEST(CompiledCnot, MatchesPrimitive) {
    for (auto [ctl, tgt] : {std::pair{0, 1}, {1, 0}, {1, 2}, {2, 0}}) {
        Circuit a, b;
        add_cnot(a, ctl, tgt, false);
        add_cnot(b, ctl, tgt, true);
        EXPECT_LT(phase_insensitive_distance(circuit_unitary(b), circuit_unitary(a)), 1e-9);
    }
    for (auto kind : {CodeKind::bit, CodeKind::phase})
        EXPECT_LT(phase_insensitive_distance(circuit_unitary(repetition_code_circuit(kind, {}, true)),
                                             circuit_unitary(repetition_code_circuit(kind, {}, false))),
                  1e-9);
}

TEST(Syndromes, TableRows) {
    std::mt19937 rng(4);
    const double expected[4][2] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
    for (int trial = 0; trial < 10; ++trial) {
        StateVector psi = random_qubit(rng);
        StateVector in = kron_all({basis_state(2, 0), psi, basis_state(2, 0)});
        for (int flip = -1; flip < 3; ++flip) {
            Circuit c = repetition_encode(CodeKind::bit);
            if (flip >= 0) c.rotate(flip, rot_x(constants::pi));
            auto s = ghz_syndromes(run_circuit(c, projector(in)));
            EXPECT_NEAR(s.z1z2, expected[flip + 1][0], 1e-10);
            EXPECT_NEAR(s.z2z3, expected[flip + 1][1], 1e-10);
        }
    }
}

TEST(Syndromes, MixedFlipInterpolatesLinearly) {
    for (double p : {0.0, 0.1, 0.35, 0.8}) {
        Circuit c = repetition_encode(CodeKind::bit);
        c.channel(0, flip_channel('X', p));
        StateVector in = kron_all({basis_state(2, 0), basis_state(2, 1), basis_state(2, 0)});
        auto s = ghz_syndromes(run_circuit(c, projector(in)));
        EXPECT_NEAR(s.z1z2, 1 - 2 * p, 1e-12);
        EXPECT_NEAR(s.z2z3, 1.0, 1e-12);
    }
}

TEST(BitFlipCode, FullFlipsCorrectedAndAncillasFlagLocation) {
    std::mt19937 rng(5);
    // ancilla pair (Q1, Q3) after decoding: none, Q1, Q2, Q3
    const int ancilla_index[4] = {0, 2, 3, 1};
    for (int flip = -1; flip < 3; ++flip) {
        Circuit slot;
        if (flip >= 0) slot.rotate(flip, rot_x(constants::pi));
        Circuit code = repetition_code_circuit(CodeKind::bit, slot);
        StateVector psi = random_qubit(rng);
        DensityMatrix full = run_circuit(code, kron_all({zero_dm(), projector(psi), zero_dm()}));
        EXPECT_LT((partial_trace(full, {2, 2, 2}, {1}) - projector(psi)).norm(), 1e-10);
        DensityMatrix anc = partial_trace(full, {2, 2, 2}, {0, 2});
        EXPECT_NEAR(anc(ancilla_index[flip + 1], ancilla_index[flip + 1]).real(), 1.0, 1e-10);
    }
}

TEST(BitFlipCode, AnySingleRotationCorrected) {
    std::mt19937 rng(6);
    std::uniform_int_distribution<int> pick(0, 2);
    std::uniform_real_distribution<double> angle(0.0, constants::two_pi);
    for (int trial = 0; trial < 50; ++trial) {
        Circuit slot;
        slot.rotate(pick(rng), rot_x(angle(rng)));
        StateVector psi = random_qubit(rng);
        DensityMatrix out = run_logical(repetition_code_circuit(CodeKind::bit, slot), projector(psi));
        EXPECT_NEAR(psi.dot(out * psi).real(), 1.0, 1e-9);
    }
}

TEST(BitFlipCode, PartialFlipSplitsIntoBranches) {
    // after encode and a theta error on Q2, decoding leaves (a|0>+b|1>) x (sqrt(1-p)|00> + sqrt(p)|11>) on (Q2; Q1,Q3)
    const double theta = 0.9, p = std::pow(std::sin(theta / 2), 2);
    StateVector psi(2);
    psi << cplx(0.6, 0.0), cplx(0.0, 0.8);
    Circuit c = repetition_encode(CodeKind::bit);
    c.rotate(1, rot_x(theta));
    c.cnot(1, 0).cnot(1, 2);
    add_toffoli(c, 0, 2, 1);
    DensityMatrix full = run_circuit(c, kron_all({zero_dm(), projector(psi), zero_dm()}));
    EXPECT_LT((partial_trace(full, {2, 2, 2}, {1}) - projector(psi)).norm(), 1e-10);
    DensityMatrix anc = partial_trace(full, {2, 2, 2}, {0, 2});
    EXPECT_NEAR(anc(0, 0).real(), 1 - p, 1e-12);
    EXPECT_NEAR(anc(3, 3).real(), p, 1e-12);
    EXPECT_NEAR(std::abs(anc(0, 3)), std::sqrt(p * (1 - p)), 1e-12);
}

TEST(PhaseFlipCode, ConjugatedBitFlipCode) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> angle(0.0, constants::two_pi);
    for (int q = 0; q < 3; ++q) {
        const double th = angle(rng);
        Circuit zslot, xslot, xslot_neg;
        zslot.rotate(q, rot_z(th));
        xslot.rotate(q, rot_x(th));
        xslot_neg.rotate(q, rot_x(-th));
        const ComplexMatrix up = circuit_unitary(repetition_code_circuit(CodeKind::phase, zslot));
        const double d = std::min(phase_insensitive_distance(up, circuit_unitary(repetition_code_circuit(CodeKind::bit, xslot))),
                                  phase_insensitive_distance(up, circuit_unitary(repetition_code_circuit(CodeKind::bit, xslot_neg))));
        EXPECT_LT(d, 1e-9);
        StateVector psi = random_qubit(rng);
        DensityMatrix out = run_logical(repetition_code_circuit(CodeKind::phase, zslot), projector(psi));
        EXPECT_NEAR(psi.dot(out * psi).real(), 1.0, 1e-9);
    }
}

TEST(FidelitySweep, CubicPolynomial) {
    std::vector<double> grid;
    for (int i = 0; i < 41; ++i) grid.push_back(i / 40.0);
    auto s = qec_fidelity_sweep(CodeKind::phase, grid);
    EXPECT_NEAR(s.fidelity.front(), 1.0, 1e-12);
    EXPECT_NEAR(s.coeffs[0], 1.0, 1e-9);
    EXPECT_LT(std::abs(s.coeffs[1]), 1e-6);
    EXPECT_NEAR(s.coeffs[2], -3.0, 0.01);
    EXPECT_NEAR(s.coeffs[3], 2.0, 0.02);
    // three full flips decode to a logical flip
    EXPECT_NEAR(s.fidelity.back(), 0.0, 1e-9);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double p = grid[i];
        EXPECT_NEAR(s.fidelity[i], 1 - 3 * p * p + 2 * p * p * p, 1e-9);
    }
}

TEST(FidelitySweep, IncoherentModelSamePolynomial) {
    std::vector<double> grid;
    for (int i = 0; i < 11; ++i) grid.push_back(i / 10.0);
    for (auto kind : {CodeKind::bit, CodeKind::phase}) {
        auto coh = qec_fidelity_sweep(kind, grid, ErrorModel::coherent);
        auto inc = qec_fidelity_sweep(kind, grid, ErrorModel::incoherent);
        for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(coh.fidelity[i], inc.fidelity[i], 1e-9);
    }
    EXPECT_EQ(kind_of([] { error_slot(CodeKind::bit, 1.5, ErrorModel::coherent); }), ErrorKind::InvalidProbability);
}

TEST(Toffoli, TruthTableSwapsOnlyTopStates) {
    ComplexMatrix t = toffoli_matrix();
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) {
            int expect = r == c ? 1 : 0;
            if ((r == 5 || r == 7) && (c == 5 || c == 7)) expect = r == c ? 0 : 1;
            EXPECT_EQ(t(r, c), cplx(expect)) << r << "," << c;
        }
}

TEST(Toffoli, Constructions) {
    auto tb = toffoli_constructions();
    EXPECT_LT(phase_insensitive_distance(circuit_unitary(tb.full), toffoli_matrix()), 1e-9);
    // in the ccPhase frame of the target the optimized corner is diag(-i, i)
    ComplexMatrix h(2, 2);
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    const ComplexMatrix ht = embed_on(h, {1}, 3);
    ComplexMatrix framed = ht * circuit_unitary(tb.qec_optimized) * ht;
    framed /= framed(0, 0);
    Eigen::VectorXcd expect = Eigen::VectorXcd::Ones(8);
    expect(5) = -I_unit;
    expect(7) = I_unit;
    EXPECT_LT((framed - ComplexMatrix(expect.asDiagonal())).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT(std::abs(tb.ccphase_ideal(7, 7) + 1.0), 1e-15);
    EXPECT_LT((tb.ccphase_ideal.diagonal().head(7) - Eigen::VectorXcd::Ones(7)).norm(), 1e-15);
    EXPECT_EQ(std::count_if(tb.full.gates.begin(), tb.full.gates.end(), [](const Gate& g) { return g.kind == GateKind::cnot; }), 6);
    EXPECT_EQ(std::count_if(tb.qec_optimized.gates.begin(), tb.qec_optimized.gates.end(),
                            [](const Gate& g) { return g.kind == GateKind::cnot; }),
              4);
}

TEST(Toffoli, OptimizedAgreesOnTarget) {
    std::mt19937 rng(8);
    auto tb = toffoli_constructions();
    const ComplexMatrix uf = circuit_unitary(tb.full), uo = circuit_unitary(tb.qec_optimized);
    std::normal_distribution<double> g;
    for (int k = 0; k < 20; ++k) {
        StateVector v(8);
        for (int i = 0; i < 8; ++i) v(i) = cplx(g(rng), g(rng));
        v.normalize();
        DensityMatrix a = projector(StateVector(uf * v)), b = projector(StateVector(uo * v));
        EXPECT_LT((partial_trace(a, {2, 2, 2}, {1}) - partial_trace(b, {2, 2, 2}, {1})).norm(), 1e-10);
    }
}

TEST(GhzPhi, CircuitMatchesClosedForm) {
    for (int k = 0; k < 24; ++k) {
        const double phi = constants::two_pi * k / 24 + 0.01;
        StateVector raw = circuit_unitary(ghz_phi_circuit(phi)).col(0);
        EXPECT_NEAR(std::abs(ghz_phi_closed_form(phi).dot(raw)), 1.0, 1e-9);
        StateVector s = ghz_phi_state(phi);
        EXPECT_NEAR(s.norm(), 1.0, 1e-12);
        EXPECT_LT((s - ghz_phi_closed_form(phi)).norm(), 1e-9);
        EXPECT_NEAR(ghz_family_fidelity(projector(s)).first, 1.0, 1e-9);
    }
    StateVector ghz = StateVector::Zero(8);
    ghz(0) = ghz(7) = 1 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(ghz.dot(ghz_phi_state(constants::pi / 2))), 1.0, 1e-12);
}

TEST(Witnesses, GhzAndGround) {
    StateVector ghz = StateVector::Zero(8);
    ghz(0) = ghz(7) = 1 / std::sqrt(2.0);
    auto w = witnesses(projector(ghz));
    EXPECT_NEAR(w.m_s1, 4.0, 1e-12);
    EXPECT_NEAR(w.m_p1, -1.0, 1e-12);
    EXPECT_NEAR(w.ghz_fidelity, 1.0, 1e-9);
    auto g = witnesses(projector(basis_state(8, 0)));
    EXPECT_NEAR(g.m_s1, 0.0, 1e-12);
    EXPECT_NEAR(g.ghz_fidelity, 0.5, 1e-9);
    EXPECT_EQ(kind_of([] { witnesses(DensityMatrix::Identity(4, 4)); }), ErrorKind::DimMismatch);
}

TEST(Witnesses, SomeMerminSumViolatedAcrossFamily) {
    for (int k = 0; k < 360; ++k) {
        auto w = witnesses(projector(ghz_phi_state(constants::two_pi * k / 360)));
        EXPECT_GT(std::max(std::abs(w.m_s1), std::abs(w.m_s2)), 2.0) << k;
        EXPECT_LE(std::abs(w.m_s1), 4 + 1e-9);
        EXPECT_LE(std::abs(w.m_s2), 4 + 1e-9);
        EXPECT_GE(w.m_p1, -1 - 1e-9);
        EXPECT_LE(w.m_p1, 1 + 1e-9);
    }
}

TEST(Witnesses, ProductStatesRespectBiseparableBounds) {
    std::mt19937 rng(9);
    double worst_s = 0, worst_f = 0;
    for (int k = 0; k < 10000; ++k) {
        auto w = witnesses(random_product(rng));
        worst_s = std::max({worst_s, std::abs(w.m_s1), std::abs(w.m_s2)});
        worst_f = std::max(worst_f, w.ghz_fidelity);
    }
    EXPECT_LE(worst_s, 2 + 1e-9);
    EXPECT_LE(worst_f, 0.5 + 1e-9);
}

TEST(Witnesses, ChshOnBellPair) {
    StateVector bell = StateVector::Zero(4);
    bell(0) = bell(3) = 1 / std::sqrt(2.0);
    auto w = witnesses(projector(kron(basis_state(2, 0), bell)));
    EXPECT_NEAR(w.chsh, 2.0, 1e-12);
    // product states cannot exceed the classical bound
    std::mt19937 rng(10);
    for (int k = 0; k < 200; ++k) EXPECT_LE(std::abs(witnesses(random_product(rng)).chsh), 2 + 1e-9);
}
