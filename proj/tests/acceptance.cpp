// One PASS/FAIL line per acceptance criterion; exit status is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "problem.hpp"
#include "su11/algebra.hpp"
#include "su11/controllability.hpp"
#include "su11/elliptic.hpp"
#include "su11/propagate.hpp"
#include "su11/shoot.hpp"
#include "su11/synthesis.hpp"

using namespace su11;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int n, bool ok, const std::string& title, const std::string& detail) {
    std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", n, title.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string format(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool rel_close(double got, double want, double tol) { return std::abs(got - want) <= tol * std::abs(want); }

Problem example2() { return {Kz, -1.0 * Kx + Ky, expm(-2.0 * Kx + 2.0 * Ky)}; }

// ---- 1
void example_one() {
    auto t0 = Clock::now();
    auto traj = propagate(Kx + 2.0 * Kz, Kx, ControlLaw::constant(-1.0), 1.0);
    double d = frobenius_distance(traj.terminal(), expm(2.0 * Kz));
    double J = traj.cost();
    double s = seconds_since(t0);
    report(1, d <= 1e-8 && std::abs(J - 1.0) <= 1e-6 && s < 1.0, "Example 1 reproduction",
           format("distance=%.3e J=%.10f time=%.3fs", d, J, s));
}

// ---- 2
void example_two_invariants() {
    // entrywise matrices and 2 Tr(M N), independent of the coefficient shortcut
    Mat2 kx, ky, kz;
    kx << 0.0, cplx(0, -0.5), cplx(0, 0.5), 0.0;
    ky << 0.0, -0.5, -0.5, 0.0;
    kz << cplx(0, -0.5), 0.0, 0.0, cplx(0, 0.5);
    Mat2 a = kz, b = -kx + ky;
    auto pair = [](const Mat2& m, const Mat2& n) { return 2.0 * (m * n).trace().real(); };
    double alpha = pair(a, b), beta = pair(a, a), gamma = pair(b, b);
    auto lib = scalar_invariants(Kz, -1.0 * Kx + Ky);
    bool ok = std::abs(alpha) <= 1e-12 && std::abs(beta + 1) <= 1e-12 && std::abs(gamma - 2) <= 1e-12 &&
              std::abs(lib.alpha - alpha) <= 1e-12 && std::abs(lib.beta - beta) <= 1e-12 &&
              std::abs(lib.gamma - gamma) <= 1e-12;
    report(2, ok, "Example 2 scalar invariants", format("alpha=%.3g beta=%.15g gamma=%.15g", alpha, beta, gamma));
}

// ---- 3 and 4
void example_two_solve() {
    auto pf = cli::load_problem(std::string(SU11_DATA_DIR) + "/example2.yaml");
    auto cfg = pf.search;
    cfg.max_T = 60.0;
    auto t0 = Clock::now();
    auto rep = solve(pf.problem(), cfg);
    double s = seconds_since(t0);

    struct Row {
        double T, J;
    };
    const Row table[3] = {{9.625, 7.3473}, {21.950, 3.1318}, {34.395, 2.0125}};
    bool ok = rep.found();
    std::string detail;
    for (int i = 0; i < 3; ++i) {
        const Candidate* hit = nullptr;
        for (const auto& c : rep.candidates)
            if (rel_close(c.T, table[i].T, 0.02) && rel_close(c.J, table[i].J, 0.02) && c.residual <= 1e-3) hit = &c;
        ok = ok && hit;
        detail += format("(T%d,J%d)=(%g,%g) %s; ", i + 1, i + 1, table[i].T, table[i].J, hit ? "matched" : "no match");
    }
    detail += "found:";
    std::vector<const Candidate*> by_T;
    for (const auto& c : rep.candidates) by_T.push_back(&c);
    std::sort(by_T.begin(), by_T.end(), [](auto* x, auto* y) { return x->T < y->T; });
    for (auto* c : by_T) detail += format(" (%.4f,%.6f)", c->T, c->J);
    detail += format("; starts=%d time=%.1fs", rep.starts, s);
    report(3, ok, "Example 2 candidate table", detail);

    if (by_T.empty()) {
        report(4, false, "Weierstrass parameters", "no candidate");
        return;
    }
    const Candidate& c1 = *by_T.front();  // shortest-time branch
    auto st = costate_init(c1.costate, Kz, -1.0 * Kx + Ky);
    double u0 = std::abs(c1.control.evaluate(0.0));
    bool g_ok = rel_close(c1.control.g2, 9.8362, 1e-3) && rel_close(c1.control.g3, 4.4871, 1e-3);
    bool u_ok = std::abs(u0 - std::abs(st.uB)) <= 1e-6;
    report(4, g_ok && u_ok, "Weierstrass parameters",
           format("candidate T=%.4f: g2=%.6g g3=%.6g (want 9.8362, 4.4871); |u(0)|=%.9f |uB(0)|=%.9f", c1.T,
                  c1.control.g2, c1.control.g3, u0, std::abs(st.uB)));
}

// ---- 5
void baseline_limit() {
    double J = baseline_cost(1.0 + 1e-6);
    auto b = baseline(2.0, 1, 1);
    auto traj = propagate(baseline_drift(), baseline_control(), b.law.law(), b.law.total_time());
    double d = frobenius_distance(traj.terminal(), baseline_target());
    report(5, std::abs(J - 1.9351) <= 1e-3 && d <= 1e-6, "Baseline limit",
           format("J(1+1e-6)=%.6f residual(c=2)=%.3e", J, d));
}

// ---- 6
struct Check {
    std::string name;
    bool ok;
    std::string detail;
};

Check commutator_identities() {
    std::mt19937_64 g(2024);
    std::uniform_real_distribution<double> u(-5, 5);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        AlgebraElement m{u(g), u(g), u(g)}, n{u(g), u(g), u(g)};
        auto c = commutator(m, n);
        auto e1 = commutator(c, m) - (inner_dagger(m, n) * m - inner_dagger(m, m) * n);
        auto e2 = commutator(c, n) - (inner_dagger(n, n) * m - inner_dagger(m, n) * n);
        double e3 = inner_dagger(c, c) - (inner_dagger(m, n) * inner_dagger(m, n) - inner_dagger(m, m) * inner_dagger(n, n));
        worst = std::max({worst, e1.norm(), e2.norm(), std::abs(e3)});
    }
    return {"commutator identities", worst <= 1e-10, format("max error %.2e", worst)};
}

Check controllability_cross_check() {
    std::mt19937_64 g(12345);
    std::uniform_int_distribution<int> small(-2, 2);
    std::uniform_real_distribution<double> u(-4, 4);
    int bad = 0, tested = 0;
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
        if (v.controllable != negativity_set_nonempty(v.alpha, v.beta, v.gamma).nonempty) ++bad;
    }
    return {"controllability cross-check", bad == 0, format("%d discrepancies in %d systems", bad, tested)};
}

Check wp_residual() {
    std::mt19937_64 g(2718);
    std::uniform_real_distribution<double> u(-10, 10);
    double worst = 0.0;
    int sets = 0;
    while (sets < 20) {
        double g2 = u(g), g3 = u(g);
        if (WeierstrassInvariants::make(g2, g3).degenerate(1e-6)) continue;
        ++sets;
        Weierstrass w(g2, g3);
        cplx w1 = w.lattice().omega1, w2 = w.lattice().omega2;
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 10; ++j) {
                cplx z = (2.0 * (i + 0.5) / 10.0 - 1.0) * w1 + (2.0 * (j + 0.5) / 10.0 - 1.0) * w2;
                if (w.lattice_distance(z) < 10 * w.pole_radius()) continue;
                auto [p, dp] = w.wp_both(z);
                double scale = std::max(1.0, std::abs(dp * dp) + std::abs(4.0 * p * p * p) + std::abs(g2 * p) + std::abs(g3));
                worst = std::max(worst, std::abs(dp * dp - (4.0 * p * p * p - g2 * p - g3)) / scale);
            }
    }
    return {"wp ODE residual", worst <= 1e-9, format("max scaled residual %.2e over 20 lattices", worst)};
}

Check closed_form_vs_flow() {
    struct Case {
        double alpha, beta, gamma;
        ExtremalState st;
    };
    // one degenerate representative per branch
    std::vector<Case> cases = {{0, -2, 1, {-1, -2, -1}}, {-1, -2, 0, {-0.5, 0, 0}}, {-1, -2, -2, {0, 2, 0}}};
    std::mt19937_64 g(424242);
    std::uniform_real_distribution<double> u(-2, 2), mag(0.3, 2.0);
    double worst = 0.0;
    int used = 0, per_case[4] = {0, 0, 0, 0}, degenerate[4] = {0, 0, 0, 0};
    for (int attempt = 0; used < 50 && attempt < 10000; ++attempt) {
        Case c;
        if (attempt < int(cases.size())) {
            c = cases[attempt];
        } else {
            int which = 1 + attempt % 3;
            double s1 = u(g) < 0 ? -1 : 1, s2 = u(g) < 0 ? -1 : 1;
            c = {which == 1 ? 0.0 : s1 * mag(g), u(g), which == 2 ? 0.0 : s2 * mag(g), {u(g), u(g), u(g)}};
        }
        ExtremalControl law;
        try {
            law = synthesize(c.st, c.alpha, c.beta, c.gamma);
        } catch (const NoSolutionError&) {
            continue;
        }
        if (!law.poles(0.0, 5.0).empty()) continue;  // pole-free cases only
        auto flow = extremal_flow(c.st, c.alpha, c.beta, c.gamma, 1e-3, 5000);
        for (int k = 0; k <= 5000; k += 10)
            worst = std::max(worst, std::abs(law.evaluate(k * 1e-3) - flow[k].uB) / (1.0 + std::abs(flow[k].uB)));
        ++used;
        int cs = c.gamma == 0 ? 2 : (c.alpha == 0 ? 1 : 3);
        ++per_case[cs];
        if (!is_weierstrass(law.tag)) ++degenerate[cs];
    }
    bool ok = worst <= 1e-6 && used == 50 && degenerate[1] && degenerate[2] && degenerate[3] && per_case[1] &&
              per_case[2] && per_case[3];
    return {"closed form vs integrated extremal", ok,
            format("max error %.2e over %d pole-free cases (case1 %d, case2 %d, case3 %d; degenerate %d/%d/%d)", worst,
                   used, per_case[1], per_case[2], per_case[3], degenerate[1], degenerate[2], degenerate[3])};
}

Check conservation_and_group_drift() {
    std::mt19937_64 g(31);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    double worst_c = 0.0, worst_g = 0.0;
    int done = 0;
    while (done < 10) {
        double alpha = u(g), beta = u(g), gamma = u(g);
        ExtremalState st{u(g), u(g), u(g)};
        auto flow = extremal_flow(st, alpha, beta, gamma, 1e-3, 10000);
        bool bounded = true;
        for (auto& x : flow) bounded = bounded && std::abs(x.uB) < 20 && std::abs(x.uC) < 200;
        if (!bounded) continue;
        ++done;
        auto k0 = constants_of_motion(st, alpha, beta, gamma);
        for (auto& x : flow) {
            auto k = constants_of_motion(x, alpha, beta, gamma);
            worst_c = std::max({worst_c, std::abs(k.c1 - k0.c1), std::abs(k.c2 - k0.c2)});
        }
    }
    std::vector<std::function<double(double)>> laws = {
        [](double t) { return std::sin(t); }, [](double t) { return 0.5 - 0.3 * std::cos(2 * t); },
        [](double) { return -1.0; }};
    for (const auto& f : laws) {
        auto traj = propagate(Kz, -1.0 * Kx + Ky, ControlLaw::from(f), 10.0);
        for (const auto& x : traj.states) {
            Mat2 m = x.matrix();
            worst_g = std::max({worst_g, std::abs(m.determinant() - 1.0), (m.adjoint() * eta() * m - eta()).norm()});
        }
    }
    return {"conservation and group drift", worst_c <= 1e-8 && worst_g <= 1e-8,
            format("c1/c2 drift %.2e, group drift %.2e", worst_c, worst_g)};
}

void property_suite() {
    auto t0 = Clock::now();
    std::vector<Check> checks = {commutator_identities(), controllability_cross_check(), wp_residual(),
                                 closed_form_vs_flow(), conservation_and_group_drift()};
    double s = seconds_since(t0);
    bool ok = s < 30.0;
    std::string detail;
    for (const auto& c : checks) {
        ok = ok && c.ok;
        detail += format("%s %s (%s); ", c.name.c_str(), c.ok ? "ok" : "failed", c.detail.c_str());
    }
    detail += format("time=%.2fs", s);
    report(6, ok, "Property suite", detail);
}

}  // namespace

int main() {
    example_one();
    example_two_invariants();
    example_two_solve();
    baseline_limit();
    property_suite();
    return failures;
}
