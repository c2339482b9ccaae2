#include <gtest/gtest.h>

#include <random>
#include <set>

#include "su11/controllability.hpp"

using namespace su11;

namespace {

double q(double a, double b, double g, double u) { return g * u * u + 2 * a * u + b; }

// Independent invariants: 2 Tr(MN) on the raw matrices.
double trace_pair(const AlgebraElement& m, const AlgebraElement& n) {
    return 2.0 * (m.matrix() * n.matrix()).trace().real();
}

}  // namespace

TEST(Controllability, ScalarInvariantExamples) {
    auto i1 = scalar_invariants(Kx + 2.0 * Kz, Kx);
    EXPECT_NEAR(i1.alpha, 1.0, 1e-12);
    EXPECT_NEAR(i1.beta, -3.0, 1e-12);
    EXPECT_NEAR(i1.gamma, 1.0, 1e-12);
    auto i2 = scalar_invariants(Kz, -1.0 * Kx + Ky);
    EXPECT_NEAR(i2.alpha, 0.0, 1e-12);
    EXPECT_NEAR(i2.beta, -1.0, 1e-12);
    EXPECT_NEAR(i2.gamma, 2.0, 1e-12);
    auto i3 = scalar_invariants(Kz, Kz);
    EXPECT_NEAR(i3.alpha, -1.0, 1e-12);
    EXPECT_NEAR(i3.beta, -1.0, 1e-12);
    EXPECT_NEAR(i3.gamma, -1.0, 1e-12);
}

TEST(Controllability, SystemSpecRecomputable) {
    std::mt19937_64 g(1);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 100; ++i) {
        AlgebraElement a{u(g), u(g), u(g)}, b{u(g), u(g), u(g)};
        auto s = SystemSpec::make(a, b);
        EXPECT_NEAR(s.alpha, trace_pair(a, b), 1e-12 * 50);
        EXPECT_NEAR(s.beta, trace_pair(a, a), 1e-12 * 50);
        EXPECT_NEAR(s.gamma, trace_pair(b, b), 1e-12 * 50);
    }
}

TEST(Controllability, NegativitySetExamples) {
    auto n1 = negativity_set_nonempty(1, -3, 1);
    ASSERT_TRUE(n1.nonempty);
    ASSERT_TRUE(n1.witness_u);
    EXPECT_LT(q(1, -3, 1, *n1.witness_u), 0.0);
    EXPECT_NEAR(q(1, -3, 1, -1.0), -4.0, 1e-15);
    EXPECT_FALSE(negativity_set_nonempty(0, 1, 1).nonempty);
    EXPECT_FALSE(negativity_set_nonempty(0, 1, 1).witness_u);
    EXPECT_FALSE(negativity_set_nonempty(0, 0, 0).nonempty);
}

TEST(Controllability, VerdictExamples) {
    auto d = is_controllable(Kx, 2.0 * Kx);
    EXPECT_FALSE(d.controllable);
    EXPECT_EQ(d.reason, TableRow::Dependent);

    auto e2 = is_controllable(Kz, -1.0 * Kx + Ky);
    EXPECT_TRUE(e2.controllable);
    EXPECT_EQ(d.reason, TableRow::Dependent);
    EXPECT_EQ(e2.reason, TableRow::A0_GPos_BNeg);
    EXPECT_EQ(to_string(e2.reason), "α=0, γ>0, β<0");
    ASSERT_TRUE(e2.witness_u);
    EXPECT_LT(q(0, -1, 2, *e2.witness_u), 0.0);

    auto xy = is_controllable(Kx, Ky);
    EXPECT_FALSE(xy.controllable);
    EXPECT_EQ(xy.reason, TableRow::A0_GPos_BNonneg);
    EXPECT_FALSE(xy.witness_u);
}

TEST(Controllability, TableMatchesQuadraticOnRandomSystems) {
    std::mt19937_64 g(12345);
    // small integer coefficients hit the boundary rows (alpha = 0, gamma = 0, zero discriminant) exactly
    std::uniform_int_distribution<int> small(-2, 2);
    std::uniform_real_distribution<double> u(-4, 4);
    int discrepancies = 0, tested = 0, controllable = 0, not_controllable = 0;
    for (int i = 0; i < 10000; ++i) {
        AlgebraElement a, b;
        if (i % 2 == 0) {
            a = {double(small(g)), double(small(g)), double(small(g))};
            b = {double(small(g)), double(small(g)), double(small(g))};
        } else {
            a = {u(g), u(g), u(g)};
            b = {u(g), u(g), u(g)};
        }
        if (linearly_dependent(a, b)) continue;
        ++tested;
        auto v = is_controllable(a, b);
        auto n = negativity_set_nonempty(v.alpha, v.beta, v.gamma);
        if (v.controllable != n.nonempty) ++discrepancies;
        if (v.controllable != row_controllable(table_row(v.alpha, v.beta, v.gamma))) ++discrepancies;
        if (n.nonempty && !(n.witness_u && q(v.alpha, v.beta, v.gamma, *n.witness_u) < 0)) ++discrepancies;
        if (n.nonempty != v.witness_u.has_value()) ++discrepancies;
        (v.controllable ? controllable : not_controllable)++;
    }
    EXPECT_EQ(discrepancies, 0);
    EXPECT_GT(tested, 9000);
    EXPECT_GT(controllable, 100);
    EXPECT_GT(not_controllable, 100);
}

TEST(Controllability, EveryRowIsReached) {
    std::mt19937_64 g(77);
    std::uniform_int_distribution<int> small(-2, 2);
    std::set<TableRow> seen;
    for (int i = 0; i < 20000; ++i) {
        AlgebraElement a{double(small(g)), double(small(g)), double(small(g))};
        AlgebraElement b{double(small(g)), double(small(g)), double(small(g))};
        seen.insert(is_controllable(a, b).reason);
    }
    // alpha = 0 with gamma < 0 forces A to be spacelike, so beta = 0 only for A = 0 (dependent)
    EXPECT_EQ(seen.count(TableRow::A0_GNeg_B0), 0u);
    EXPECT_EQ(seen.size(), 9u);
    EXPECT_EQ(table_row(0.0, 0.0, -1.0), TableRow::A0_GNeg_B0);
}

TEST(Controllability, InvariantUnderConjugationAndScaling) {
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 300; ++i) {
        AlgebraElement a{u(g), u(g), u(g)}, b{u(g), u(g), u(g)};
        auto p = expm(AlgebraElement{u(g), u(g), u(g)});
        auto v = is_controllable(a, b);
        if (v.near_boundary) continue;
        auto vc = is_controllable(conjugate(p, a), conjugate(p, b));
        EXPECT_EQ(v.controllable, vc.controllable);
        double s = 0.5 + std::abs(u(g));
        auto vs = is_controllable(a, s * b);
        EXPECT_EQ(v.controllable, vs.controllable);
        if (v.witness_u) {
            // u B = (u / s)(s B): the rescaled witness stays in the negativity set
            auto d = a + (*v.witness_u / s) * (s * b);
            EXPECT_LT(inner_dagger(d, d), 0.0);
        }
    }
}
