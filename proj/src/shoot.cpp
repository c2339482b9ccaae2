#include "su11/shoot.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "su11/controllability.hpp"

namespace su11 {

namespace {

constexpr double kBlowup = 1e4;

struct ShotResult {
    Mat2 x;
    bool blew_up = false;
};

// Reduced extremal ODE (RK4 at half steps) driving the midpoint-exponential update of X.
// `visit(t, X)` is called after each full step when provided.
template <class Visit>
ShotResult shoot(const ExtremalState& s0, const SystemSpec& sys, double T, int n, Visit&& visit) {
    ShotResult r{Mat2::Identity(), false};
    if (T <= 0 || n <= 0) return r;
    double h = T / n, hh = 0.5 * h;
    ExtremalState s = s0;
    auto rk4 = [&](ExtremalState& st) {
        auto f = [&](const ExtremalState& x) { return extremal_ode_rhs(x, sys.alpha, sys.beta, sys.gamma); };
        auto ax = [](const ExtremalState& x, double k, const ExtremalState& d) {
            return ExtremalState{x.uA + k * d.uA, x.uB + k * d.uB, x.uC + k * d.uC};
        };
        auto k1 = f(st), k2 = f(ax(st, hh / 2, k1)), k3 = f(ax(st, hh / 2, k2)), k4 = f(ax(st, hh, k3));
        st.uA += hh / 6 * (k1.uA + 2 * k2.uA + 2 * k3.uA + k4.uA);
        st.uB += hh / 6 * (k1.uB + 2 * k2.uB + 2 * k3.uB + k4.uB);
        st.uC += hh / 6 * (k1.uC + 2 * k2.uC + 2 * k3.uC + k4.uC);
    };
    for (int i = 0; i < n; ++i) {
        rk4(s);
        double um = s.uB;
        if (!std::isfinite(um) || std::abs(um) > kBlowup) {
            r.blew_up = true;
            return r;
        }
        r.x = expm_matrix(h * (sys.A + um * sys.B)) * r.x;
        rk4(s);
        if (!visit((i + 1) * h, r.x)) break;
    }
    return r;
}

ShotResult shoot(const ExtremalState& s0, const SystemSpec& sys, double T, int n) {
    return shoot(s0, sys, T, n, [](double, const Mat2&) { return true; });
}

int steps_for(double T, double step) { return std::max(1, static_cast<int>(std::ceil(T / step - 1e-9))); }

// Residual vector for the local refinement: 8 real entries of X(T) - X_f (+ c1 in free-time mode).
struct EndpointFunctor {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    const SystemSpec* sys;
    const Problem* pb;
    bool free_time;
    double fixed_T;
    double step;
    int fixed_n;  // > 0: keep the step count fixed (smooth in T)

    int inputs() const { return free_time ? 4 : 3; }
    int values() const { return free_time ? 9 : 8; }

    int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
        Costate c{p[0], p[1], p[2], 1.0};
        double T = free_time ? p[3] : fixed_T;
        ExtremalState st = costate_init(c, sys->A, sys->B);
        f.resize(values());
        if (!(T > 0)) {
            f.setConstant(1e3);
            return 0;
        }
        int n = fixed_n > 0 ? fixed_n : steps_for(T, step);
        auto r = shoot(st, *sys, T, n);
        if (r.blew_up) {
            f.setConstant(1e3);
            return 0;
        }
        Mat2 d = r.x - pb->target.matrix();
        for (int i = 0; i < 4; ++i) {
            f[2 * i] = d(i / 2, i % 2).real();
            f[2 * i + 1] = d(i / 2, i % 2).imag();
        }
        if (free_time) f[8] = st.uA + 0.5 * st.uB * st.uB;
        return 0;
    }
};

struct Seed {
    Costate s;
    double T;
};

struct Refined {
    Costate s;
    double T;
    double res;
};

std::optional<Refined> refine(const Seed& seed, const SystemSpec& sys, const Problem& pb, const SearchConfig& cfg) {
    Eigen::VectorXd p(cfg.free_time ? 4 : 3);
    p << seed.s.sx, seed.s.sy, seed.s.sz, 0.0;
    if (cfg.free_time) p[3] = seed.T;
    auto run = [&](double step, int fixed_n) {
        EndpointFunctor fn{&sys, &pb, cfg.free_time, cfg.fixed_T, step, fixed_n};
        Eigen::NumericalDiff<EndpointFunctor> nd(fn);
        Eigen::LevenbergMarquardt<Eigen::NumericalDiff<EndpointFunctor>> lm(nd);
        lm.parameters.maxfev = cfg.max_evaluations;
        lm.parameters.xtol = cfg.lm_tolerance;
        lm.parameters.ftol = cfg.lm_tolerance;
        lm.minimize(p);
        Eigen::VectorXd f(fn.values());
        fn(p, f);
        return f.norm();
    };
    double T0 = cfg.free_time ? seed.T : cfg.fixed_T;
    double r1 = run(cfg.scan_step, steps_for(T0, cfg.scan_step));
    if (!std::isfinite(r1) || r1 > 1e-2) return std::nullopt;
    double T = cfg.free_time ? p[3] : cfg.fixed_T;
    if (!(T >= cfg.min_T && T <= cfg.max_T)) return std::nullopt;
    double r2 = run(cfg.step, 0);
    T = cfg.free_time ? p[3] : cfg.fixed_T;
    if (!(T >= cfg.min_T && T <= cfg.max_T)) return std::nullopt;
    return Refined{{p[0], p[1], p[2], 1.0}, T, r2};
}

// Local minima of the distance to X_f along one start, best first.
std::vector<double> distance_minima(const ExtremalState& st, const SystemSpec& sys, const Problem& pb,
                                    const SearchConfig& cfg) {
    struct M {
        double t, d;
    };
    std::vector<M> mins;
    double d2 = std::numeric_limits<double>::infinity(), d1 = d2, t1 = 0.0;
    int n = steps_for(cfg.max_T, cfg.scan_step);
    shoot(st, sys, cfg.max_T, n, [&](double t, const Mat2& x) {
        double d = (x - pb.target.matrix()).norm();
        if (d1 < d2 && d1 <= d && d1 < cfg.seed_distance && t1 >= cfg.min_T) mins.push_back({t1, d1});
        d2 = d1;
        d1 = d;
        t1 = t;
        return true;
    });
    std::sort(mins.begin(), mins.end(), [](const M& a, const M& b) { return a.d < b.d; });
    std::vector<double> out;
    for (size_t i = 0; i < mins.size() && static_cast<int>(i) < cfg.seeds_per_start; ++i) out.push_back(mins[i].t);
    return out;
}

bool same_candidate(const Refined& a, const Refined& b) {
    double ds = std::max({std::abs(a.s.sx - b.s.sx), std::abs(a.s.sy - b.s.sy), std::abs(a.s.sz - b.s.sz)});
    return ds <= 1e-4 && std::abs(a.T - b.T) <= 1e-2;
}

// State-space sampling: u_B, u_C drawn from the image of the costate box; u_A placed on c1 = 0 in
// free-time mode; a linear endpoint constraint, when present, fixes u_C.
std::vector<ExtremalState> sample_starts(const SystemSpec& sys, const Problem& pb, const SearchConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> box(-cfg.costate_bound, cfg.costate_bound);
    std::optional<Eigen::Vector3d> ell;
    if (cfg.use_endpoint_constraint) {
        if (auto n = endpoint_linear_constraint(pb)) {
            AlgebraElement c = commutator(sys.A, sys.B);
            Eigen::Matrix3d m;
            m << sys.A.x, sys.A.y, sys.A.z, sys.B.x, sys.B.y, sys.B.z, c.x, c.y, c.z;
            // S = -M^{-1} u, so <S, n> = 0 is l . u = 0 with l = M^{-T} n
            Eigen::Vector3d l = m.transpose().fullPivLu().solve(Eigen::Vector3d(n->x, n->y, n->z));
            if (std::abs(l[2]) > 1e-8 * l.norm()) ell = l;
        }
    }
    // direction uniform in the box, magnitude log-uniform down to 1% of the bound: small costates
    // (long, cheap extremals) are as likely as large ones
    std::uniform_real_distribution<double> logscale(std::log(1e-2), 0.0);
    std::vector<ExtremalState> out;
    for (int i = 0; i < cfg.starts; ++i) {
        double r = std::exp(logscale(rng));
        Costate c{r * box(rng), r * box(rng), r * box(rng), 1.0};
        ExtremalState st = costate_init(c, sys.A, sys.B);
        if (cfg.free_time) st.uA = -0.5 * st.uB * st.uB;
        if (ell) st.uC = -((*ell)[0] * st.uA + (*ell)[1] * st.uB) / (*ell)[2];
        out.push_back(st);
    }
    return out;
}

std::optional<Candidate> verify(const Refined& r, const Problem& pb, const SearchConfig& cfg) {
    Candidate c;
    c.costate = r.s;
    c.T = r.T;
    try {
        c.control = synthesize(costate_init(r.s, pb.A, pb.B), scalar_invariants(pb.A, pb.B).alpha,
                               scalar_invariants(pb.A, pb.B).beta, scalar_invariants(pb.A, pb.B).gamma);
        auto tr = propagate(pb.A, pb.B, ControlLaw::from(c.control), r.T, cfg.step);
        c.residual = frobenius_distance(tr.terminal(), pb.target);
        c.J = tr.cost();
        c.endpoint_ok = endpoint_filter(r.s, tr.terminal(), pb);
        c.extremal_residual = extremal_equation_residual(c.control, r.T);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (c.residual > cfg.tolerance || !c.endpoint_ok || c.extremal_residual > 1e-6) return std::nullopt;
    return c;
}

}  // namespace

// ---------------------------------------------------------------- public

nlohmann::json Candidate::summary() const {
    nlohmann::json j;
    j["costate"] = {costate.sx, costate.sy, costate.sz};
    j["lambda0"] = costate.lambda0;
    j["T"] = T;
    j["J"] = J;
    j["residual"] = residual;
    j["extremal_residual"] = extremal_residual;
    j["endpoint_ok"] = endpoint_ok;
    j["abnormal"] = abnormal;
    j["law"] = control.summary();
    return j;
}

double residual(const Costate& s, double T, const Problem& pb, double step) {
    if (T == 0.0) return frobenius_distance(GroupElement(), pb.target);
    auto inv = scalar_invariants(pb.A, pb.B);
    auto law = synthesize(costate_init(s, pb.A, pb.B), inv.alpha, inv.beta, inv.gamma);
    return frobenius_distance(propagate_terminal(pb.A, pb.B, ControlLaw::from(law), T, step), pb.target);
}

bool endpoint_filter(const Costate& s, const GroupElement& xT, const Problem& pb, double tol) {
    auto inv = scalar_invariants(pb.A, pb.B);
    auto k0 = constants_of_motion(costate_init(s, pb.A, pb.B), inv.alpha, inv.beta, inv.gamma);
    auto kT = constants_of_motion(transported_costate(s, pb.A, pb.B, xT), inv.alpha, inv.beta, inv.gamma);
    auto scale = [](double a, double b) { return 1.0 + std::max(std::abs(a), std::abs(b)); };
    return std::abs(k0.c1 - kT.c1) <= tol * scale(k0.c1, kT.c1) && std::abs(k0.c2 - kT.c2) <= tol * scale(k0.c2, kT.c2);
}

bool endpoint_filter(const Costate& s, double T, const Problem& pb, double tol, double step) {
    auto inv = scalar_invariants(pb.A, pb.B);
    auto law = synthesize(costate_init(s, pb.A, pb.B), inv.alpha, inv.beta, inv.gamma);
    return endpoint_filter(s, propagate_terminal(pb.A, pb.B, ControlLaw::from(law), T, step), pb, tol);
}

double extremal_equation_residual(const ExtremalControl& law, double T, int samples) {
    if (law.tag == LawTag::Abnormal) return 0.0;
    QuarticForm f = QuarticForm::make(law.consts, law.alpha, law.beta, law.gamma);
    double worst = 0.0;
    for (int i = 0; i <= samples; ++i) {
        double t = T * i / samples;
        double h = 1e-3;
        auto at = [&](double k) { return law.evaluate(t + k * h); };
        double u = at(0.0);
        double du = (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * h);
        double fu = f(u);
        double err = std::abs(du * du - fu) / (1.0 + std::abs(fu) + u * u);
        worst = std::max(worst, err);
    }
    return worst;
}

std::optional<AlgebraElement> endpoint_linear_constraint(const Problem& pb, double tol) {
    GroupElement xi = pb.target.inverse();
    AlgebraElement bT = conjugate(xi, pb.B);
    AlgebraElement aT = conjugate(xi, pb.A);
    // c1(T) - c1(0) = -<S, aT - A> + (<S, bT>^2 - <S, B>^2) / 2; linear iff bT = +-B
    double scale = std::max(1.0, pb.B.norm());
    if ((bT - pb.B).norm() > tol * scale && (bT + pb.B).norm() > tol * scale) return std::nullopt;
    AlgebraElement n = aT - pb.A;
    if (n.norm() <= tol * std::max(1.0, pb.A.norm())) return std::nullopt;
    return n;
}

double example2_manifold_coefficient() {
    double r = 2.0 * std::sqrt(2.0);
    return std::sinh(r) / (std::sqrt(2.0) * (std::cosh(r) - 1.0));
}

double example2_manifold(double sx, double sy) { return example2_manifold_coefficient() * (sx + sy); }

std::optional<Candidate> abnormal_candidate(const Problem& pb, double max_T, double step) {
    auto ab = abnormal_control(pb.A, pb.B);
    if (!ab) return std::nullopt;
    auto T = abnormal_reach_time(pb.A, pb.B, pb.target, max_T);
    if (!T) return std::nullopt;
    Candidate c;
    c.abnormal = true;
    c.costate = {0.0, 0.0, 0.0, 0.0};
    c.T = *T;
    c.control = abnormal_law(ab->u);
    auto tr = propagate(pb.A, pb.B, ControlLaw::constant(ab->u), *T, step);
    c.residual = frobenius_distance(tr.terminal(), pb.target);
    c.J = tr.cost();
    c.endpoint_ok = true;
    return c;
}

SolveReport solve(const Problem& pb, const SearchConfig& cfg) {
    auto verdict = is_controllable(pb.A, pb.B);
    if (!verdict.controllable)
        throw NotControllableError("system is not controllable (" + to_string(verdict.reason) + ")");
    SystemSpec sys = SystemSpec::make(pb.A, pb.B);
    SolveReport rep;
    rep.starts = std::max(0, cfg.starts);

    auto starts = sample_starts(sys, pb, cfg);
    std::vector<std::vector<Refined>> per_start(starts.size());
    std::atomic<size_t> next{0};
    std::atomic<int> refinements{0};
    auto worker = [&]() {
        for (size_t i = next++; i < starts.size(); i = next++) {
            const auto& st = starts[i];
            Costate c0 = costate_from_state(st, sys.A, sys.B);
            std::vector<double> seeds;
            if (cfg.free_time)
                seeds = distance_minima(st, sys, pb, cfg);
            else
                seeds = {cfg.fixed_T};
            for (double T : seeds) {
                ++refinements;
                try {
                    if (auto r = refine({c0, T}, sys, pb, cfg)) per_start[i].push_back(*r);
                } catch (const std::exception&) {
                }
            }
        }
    };
    int nt = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    nt = std::min<int>(nt, std::max<size_t>(1, starts.size()));
    std::vector<std::thread> pool;
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    rep.refinements = refinements;

    // merge in start order, keeping the best residual of each duplicate group
    std::vector<Refined> uniq;
    for (auto& v : per_start)
        for (auto& r : v) {
            auto it = std::find_if(uniq.begin(), uniq.end(), [&](const Refined& u) { return same_candidate(u, r); });
            if (it == uniq.end())
                uniq.push_back(r);
            else if (r.res < it->res)
                *it = r;
        }
    std::vector<std::optional<Candidate>> verified(uniq.size());
    next = 0;
    auto vworker = [&]() {
        for (size_t i = next++; i < uniq.size(); i = next++) verified[i] = verify(uniq[i], pb, cfg);
    };
    pool.clear();
    for (int i = 0; i < nt; ++i) pool.emplace_back(vworker);
    for (auto& t : pool) t.join();
    for (auto& v : verified)
        if (v) rep.candidates.push_back(*v);

    if (auto ab = abnormal_candidate(pb, cfg.free_time ? cfg.max_T : cfg.fixed_T, cfg.step)) {
        if (cfg.free_time || std::abs(ab->T - cfg.fixed_T) <= 1e-9 * std::max(1.0, cfg.fixed_T))
            rep.candidates.push_back(*ab);
    }
    std::stable_sort(rep.candidates.begin(), rep.candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.J < b.J; });
    return rep;
}

}  // namespace su11
