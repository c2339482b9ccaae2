#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "su11/propagate.hpp"

using namespace su11;

namespace {

const double kPi = std::acos(-1.0);

double invariant_drift(const GroupElement& x) {
    Mat2 m = x.matrix();
    double det = std::abs(m.determinant() - 1.0);
    double eta_err = (m.adjoint() * eta() * m - eta()).norm();
    return std::max(det, eta_err);
}

}  // namespace

TEST(Propagate, ExampleOneAbnormalLaw) {
    auto traj = propagate(Kx + 2.0 * Kz, Kx, ControlLaw::constant(-1.0), 1.0);
    EXPECT_LE(frobenius_distance(traj.terminal(), expm(2.0 * Kz)), 1e-8);
    EXPECT_NEAR(traj.cost(), 1.0, 1e-12);
    EXPECT_EQ(traj.times.front(), 0.0);
    EXPECT_EQ(traj.times.back(), 1.0);
    EXPECT_LT(frobenius_distance(traj.states.front(), GroupElement()), 1e-15);
}

TEST(Propagate, ExampleOneCostIsHalfTheAngle) {
    // exp(T (2 Kz)) with J = T = theta / 2
    for (double theta : {0.5, 2.0, 7.0}) {
        double T = theta / 2.0;
        auto traj = propagate(Kx + 2.0 * Kz, Kx, ControlLaw::constant(-1.0), T);
        EXPECT_NEAR(traj.cost(), std::fmod(theta, 4 * kPi) / 2.0, 1e-10);
        EXPECT_LE(frobenius_distance(traj.terminal(), expm(theta * Kz)), 1e-8);
    }
}

TEST(Propagate, DriftOnly) {
    for (double theta : {0.3, 1.0, 5.0}) {
        auto x = propagate_terminal(Kz, Kx, ControlLaw::constant(0.0), theta);
        EXPECT_LE(frobenius_distance(x, expm(theta * Kz)), 1e-10);
    }
    auto zero = propagate(Kz, Kx, ControlLaw::constant(0.0), 0.0);
    EXPECT_EQ(zero.size(), 1u);
    EXPECT_EQ(zero.cost(), 0.0);
}

TEST(Propagate, Cost) {
    auto traj = propagate(Kz, Kx, ControlLaw::constant(-1.0), 1.0);
    EXPECT_NEAR(cost(traj), 1.0, 1e-12);
    EXPECT_NEAR(trapezoid_cost({0.0, 1.0, 2.0}, {1.0, 1.0, 1.0}), 2.0, 1e-15);
    auto s = propagate(Kz, Kx, ControlLaw::from([](double t) { return std::sin(t); }), kPi);
    EXPECT_NEAR(s.cost(), kPi / 2.0, 1e-6);
    for (size_t i = 1; i < s.size(); ++i) EXPECT_GE(s.cost_to_date[i], s.cost_to_date[i - 1]);
    EXPECT_EQ(s.cost_to_date.front(), 0.0);
}

TEST(Propagate, BaselineClosedForm) {
    EXPECT_NEAR(baseline_cost_limit(), 1.0 / std::sqrt(std::pow(1.0 / std::tanh(std::sqrt(2.0)), 2) - 1.0), 1e-15);
    EXPECT_NEAR(baseline_cost_limit(), 1.9351, 1e-4);
    EXPECT_NEAR(baseline_cost(1.0 + 1e-7), baseline_cost_limit(), 1e-5);
    EXPECT_GT(baseline_cost(1.5), baseline_cost(1.1));
    // not monotone right above 1: a shallow minimum near c = 1.0331 dips below the c -> 1 limit
    EXPECT_LT(baseline_cost(1.0331), baseline_cost_limit() - 7e-3);
    EXPECT_NEAR(baseline_cost(1.0331), 1.92780, 1e-5);
    double prev = baseline_cost(1.08);
    for (double c = 1.1; c < 10.0; c += 0.25) {
        double j = baseline_cost(c);
        EXPECT_GT(j, prev);
        prev = j;
    }
    EXPECT_THROW(baseline(1.0, 1, 1), std::domain_error);
    EXPECT_THROW(baseline(0.5, 1, 1), std::domain_error);
    EXPECT_THROW(baseline(2.0, 1, 2), std::domain_error);
}

TEST(Propagate, BaselineReachesTarget) {
    for (auto [c, n1, n2] : std::vector<std::tuple<double, int, int>>{{2.0, 1, 1}, {1.5, 2, 2}, {3.0, 1, 3}, {1.0331, 1, 1}}) {
        auto b = baseline(c, n1, n2);
        EXPECT_GT(b.law.t1, 0.0);
        EXPECT_GT(b.law.t2, 0.0);
        auto traj = propagate(baseline_drift(), baseline_control(), b.law.law(), b.law.total_time());
        EXPECT_LE(frobenius_distance(traj.terminal(), baseline_target()), 1e-6) << c;
        EXPECT_NEAR(traj.cost(), b.J, 1e-6) << c;
        EXPECT_NEAR(b.J, baseline_cost(c), 1e-12);
        for (double u : traj.controls) EXPECT_TRUE(u == 0.0 || std::abs(u - c / std::sqrt(2.0)) < 1e-15);
    }
}

TEST(Propagate, SwitchTimesAreOnTheGrid) {
    auto b = baseline(2.0, 1, 1);
    auto traj = propagate(baseline_drift(), baseline_control(), b.law.law(), b.law.total_time());
    int on = 0, off = 0;
    for (size_t i = 0; i + 1 < traj.size(); ++i) {
        if (traj.times[i] != traj.times[i + 1]) continue;
        EXPECT_EQ(traj.states[i].matrix(), traj.states[i + 1].matrix());
        if (traj.times[i] == b.law.on_time() && traj.controls[i] == 0.0 && traj.controls[i + 1] > 0.0) ++on;
        if (traj.times[i] == b.law.off_time() && traj.controls[i] > 0.0 && traj.controls[i + 1] == 0.0) ++off;
    }
    EXPECT_EQ(on, 1);
    EXPECT_EQ(off, 1);
}

TEST(Propagate, GroupInvariantsOverLongHorizon) {
    // A + u B stays elliptic (|u| < 1/sqrt 2), so X(t) stays bounded and the drift is absolute
    auto law = ControlLaw::from([](double t) { return 0.3 * std::sin(0.7 * t) + 0.2 * std::cos(3.1 * t); });
    auto traj = propagate(Kz, -1.0 * Kx + Ky, law, 100.0);
    double worst = 0.0, largest = 0.0;
    for (const auto& x : traj.states) {
        worst = std::max(worst, invariant_drift(x));
        largest = std::max(largest, x.matrix().norm());
    }
    EXPECT_LE(worst, 1e-8);
    EXPECT_LT(largest, 1e3);
}

TEST(Propagate, RichardsonSecondOrder) {
    auto law = ControlLaw::from([](double t) { return std::sin(2.0 * t) + 0.5; });
    auto r = richardson(Kz, -1.0 * Kx + Ky, law, 3.0, 1e-2);
    EXPECT_NEAR(r.ratio, 4.0, 0.3);
    EXPECT_LT(r.err_fine, r.err_coarse);
}

TEST(Propagate, PoleInWindowIsRejected) {
    auto c = synthesize(ExtremalState{-2, -2, 1}, 0, -1, 1);
    auto p = c.poles(0.0, 10.0);
    ASSERT_FALSE(p.empty());
    EXPECT_THROW(propagate(Kz, Kx, ControlLaw::from(c), p.front() + 0.1), PoleError);
    EXPECT_NO_THROW(propagate(Kz, Kx, ControlLaw::from(c), p.front() - 0.1));
}

TEST(Propagate, HamiltonianAndTransportedCostate) {
    AlgebraElement a = Kz, b = -1.0 * Kx + Ky;
    for (Costate s : {Costate{0.188444, -0.126238, 0.0495126}, Costate{-0.4, 0.3, 0.2}, Costate{0.9, 0.1, -0.5}}) {
        auto st = costate_init(s, a, b);
        auto law = synthesize(st, 0.0, -1.0, 2.0);
        // the scheme is second order: 1e-8 on c1, c2 needs a fine step over a moderate horizon
        double T = 3.0;
        auto poles = law.poles(0.0, T);
        if (!poles.empty()) T = poles.front() - 0.2;
        auto traj = propagate(a, b, ControlLaw::from(law), T, 1e-4);
        double h0 = hamiltonian(s, traj.controls[0], traj.states[0], a, b);
        for (size_t i = 0; i < traj.size(); i += 397) {
            EXPECT_NEAR(hamiltonian(s, traj.controls[i], traj.states[i], a, b), h0, 1e-6);
            auto tr = transported_costate(s, a, b, traj.states[i]);
            EXPECT_NEAR(tr.uB, traj.controls[i], 1e-6) << "t=" << traj.times[i];
            auto k0 = constants_of_motion(st, 0, -1, 2), k = constants_of_motion(tr, 0, -1, 2);
            EXPECT_NEAR(k.c1, k0.c1, 1e-8);
            EXPECT_NEAR(k.c2, k0.c2, 1e-8);
        }
    }
}

TEST(Propagate, DistanceSeries) {
    auto law = ControlLaw::from([](double t) { return std::cos(t); });
    auto traj = propagate(Kz, Kx, law, 4.0);
    auto d = distance_series(traj, GroupElement());
    EXPECT_EQ(d.front(), 0.0);
    ASSERT_TRUE(traj.distance_to_target);
    EXPECT_EQ(traj.distance_to_target->size(), traj.size());
    for (size_t i = 1; i < traj.size(); ++i) {
        double h = traj.times[i] - traj.times[i - 1];
        AlgebraElement m = Kz + traj.controls[i] * Kx;
        double bound = (std::exp(h * (std::abs(traj.controls[i]) + 2.0) * m.matrix().norm()) - 1.0) *
                       traj.states[i - 1].matrix().norm();
        EXPECT_LE(std::abs(d[i] - d[i - 1]), bound + 1e-15);
    }
}

TEST(Propagate, CsvRoundTrip) {
    auto b = baseline(2.0, 1, 1);
    auto traj = propagate(baseline_drift(), baseline_control(), b.law.law(), b.law.total_time(), 1e-2);
    std::stringstream ss;
    write_csv(ss, traj);
    auto rows = read_csv(ss);
    std::vector<std::string> header{"t", "u", "X11_re", "X11_im", "X12_re", "X12_im",
                                    "X21_re", "X21_im", "X22_re", "X22_im", "dist", "cost"};
    EXPECT_EQ(rows.header, header);
    ASSERT_EQ(rows.rows.size(), traj.size());
    for (size_t i = 0; i < traj.size(); i += 53) {
        EXPECT_EQ(rows.rows[i][0], traj.times[i]);
        EXPECT_EQ(rows.rows[i][1], traj.controls[i]);
        EXPECT_EQ(rows.rows[i][2], traj.states[i].matrix()(0, 0).real());
        EXPECT_EQ(rows.rows[i][9], traj.states[i].matrix()(1, 1).imag());
        EXPECT_TRUE(std::isnan(rows.rows[i][10]));
        EXPECT_EQ(rows.rows[i][11], traj.cost_to_date[i]);
    }
    distance_series(traj, baseline_target());
    std::stringstream s2;
    write_csv(s2, traj);
    auto r2 = read_csv(s2);
    EXPECT_EQ(r2.rows.back()[10], traj.distance_to_target->back());
    EXPECT_NEAR(trapezoid_cost([&] {
                    std::vector<double> t;
                    for (auto& r : r2.rows) t.push_back(r[0]);
                    return t;
                }(),
                               [&] {
                                   std::vector<double> u;
                                   for (auto& r : r2.rows) u.push_back(r[1]);
                                   return u;
                               }()),
                traj.cost(), 1e-12);
}
