#include "su11/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <unsupported/Eigen/Polynomials>

namespace su11 {

namespace {

constexpr double kPi = std::numbers::pi;

int sign_of(double v) { return v < 0 ? -1 : 1; }

// relative closeness
bool close(double a, double b, double rel, double abs_floor = 0.0) {
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1.0}) + abs_floor;
}

double real_checked(cplx v, const char* what) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw PoleError(std::string(what) + ": non-finite value");
    if (std::abs(v.imag()) > 1e-7 * std::max(1.0, std::abs(v.real())))
        throw std::runtime_error(std::string(what) + ": closed form left the real axis (imaginary part " +
                                 std::to_string(v.imag()) + ")");
    return v.real();
}

// Polish a root of the k-th derivative of f (multiple roots of f are simple roots of a derivative).
cplx polish_on_derivative(const QuarticForm& f, cplx x, int k) {
    for (int i = 0; i < 30; ++i) {
        cplx d = f.eval(x, k + 1);
        if (std::abs(d) == 0.0) break;
        cplx step = f.eval(x, k) / d;
        x -= step;
        if (std::abs(step) <= 1e-15 * (1.0 + std::abs(x))) break;
    }
    return x;
}

}  // namespace

// ---------------------------------------------------------------- quartic

QuarticForm QuarticForm::make(const ConstantsOfMotion& k, double alpha, double beta, double gamma) {
    QuarticForm q;
    q.alpha = alpha;
    q.beta = beta;
    q.gamma = gamma;
    q.consts = k;
    double c1 = k.c1, c2 = k.c2;
    q.c = gamma * c1 * c1 - 2.0 * beta * c1 - 2.0 * c2;
    q.coef[4] = gamma / 4.0;
    q.coef[3] = alpha;
    q.coef[2] = beta - gamma * c1;
    q.coef[1] = -2.0 * alpha * c1;
    q.coef[0] = q.c;
    // invariants of a0 x^4 + 4 a1 x^3 + 6 a2 x^2 + 4 a3 x + a4
    double a0 = gamma / 4.0, a1 = alpha / 4.0, a2 = (beta - gamma * c1) / 6.0, a3 = -alpha * c1 / 2.0, a4 = q.c;
    q.g2 = a0 * a4 - 4.0 * a1 * a3 + 3.0 * a2 * a2;
    q.g3 = a0 * a2 * a4 + 2.0 * a1 * a2 * a3 - a2 * a2 * a2 - a0 * a3 * a3 - a1 * a1 * a4;

    int deg = q.degree();
    if (deg >= 2) {
        Eigen::VectorXd poly(deg + 1);
        for (int i = 0; i <= deg; ++i) poly[i] = q.coef[i];
        Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
        solver.compute(poly);
        for (int i = 0; i < solver.roots().size(); ++i) {
            cplx r = solver.roots()[i];
            if (std::abs(r.imag()) < 1e-12 * (1.0 + std::abs(r))) r = r.real();
            q.roots.push_back(r);
        }
        std::sort(q.roots.begin(), q.roots.end(), [](cplx x, cplx y) {
            if (x.real() != y.real()) return x.real() < y.real();
            return x.imag() < y.imag();
        });
    }
    return q;
}

double QuarticForm::operator()(double x) const {
    return (((coef[4] * x + coef[3]) * x + coef[2]) * x + coef[1]) * x + coef[0];
}

cplx QuarticForm::eval(cplx x, int d) const {
    // d-th derivative of sum coef[k] x^k
    cplx s = 0.0;
    for (int k = 4; k >= d; --k) {
        double fac = 1.0;
        for (int j = 0; j < d; ++j) fac *= (k - j);
        s = s * x + coef[k] * fac;
    }
    return s;
}

// ---------------------------------------------------------------- tags

std::string to_string(LawTag t) {
    switch (t) {
        case LawTag::Abnormal: return "abnormal";
        case LawTag::Equilibrium: return "equilibrium";
        case LawTag::Case1Weierstrass: return "case1-weierstrass";
        case LawTag::Case1Constant: return "case1-constant";
        case LawTag::Case1Tanh: return "case1-tanh";
        case LawTag::Case1Coth: return "case1-coth";
        case LawTag::Case1Rational: return "case1-rational";
        case LawTag::Case1Tan: return "case1-tan";
        case LawTag::Case1Zero: return "case1-zero";
        case LawTag::Case1Sech: return "case1-sech";
        case LawTag::Case1Sec: return "case1-sec";
        case LawTag::Case1Csch: return "case1-csch";
        case LawTag::Case2Weierstrass: return "case2-weierstrass";
        case LawTag::Case2Csch2: return "case2-csch2";
        case LawTag::Case2Sech2: return "case2-sech2";
        case LawTag::Case2Rational: return "case2-rational";
        case LawTag::Case2Tan2: return "case2-tan2";
        case LawTag::Case3Weierstrass: return "case3-weierstrass";
        case LawTag::Case3Sin: return "case3-sin";
        case LawTag::Case3Exp: return "case3-exp";
        case LawTag::Case3TwoDouble: return "case3-two-double";
        case LawTag::Case3Triple: return "case3-triple";
        case LawTag::Case3Quadruple: return "case3-quadruple";
    }
    return "?";
}

int case_of(LawTag t) {
    switch (t) {
        case LawTag::Abnormal:
        case LawTag::Equilibrium: return 0;
        case LawTag::Case1Weierstrass:
        case LawTag::Case1Constant:
        case LawTag::Case1Tanh:
        case LawTag::Case1Coth:
        case LawTag::Case1Rational:
        case LawTag::Case1Tan:
        case LawTag::Case1Zero:
        case LawTag::Case1Sech:
        case LawTag::Case1Sec:
        case LawTag::Case1Csch: return 1;
        case LawTag::Case2Weierstrass:
        case LawTag::Case2Csch2:
        case LawTag::Case2Sech2:
        case LawTag::Case2Rational:
        case LawTag::Case2Tan2: return 2;
        default: return 3;
    }
}

bool is_weierstrass(LawTag t) {
    return t == LawTag::Case1Weierstrass || t == LawTag::Case2Weierstrass || t == LawTag::Case3Weierstrass;
}

// ---------------------------------------------------------------- evaluation

int ExtremalControl::case1_sign(double t) const {
    if (!has_crossings) return t >= 0 ? sign_after0 : sign_before0;
    double P = cross_period, b = cross_base;
    auto count = [&](double lo, double hi) {  // crossings strictly inside (lo, hi)
        double jlo = std::floor((lo - b) / P) + 1.0;
        double jhi = std::ceil((hi - b) / P) - 1.0;
        return std::max(0.0, jhi - jlo + 1.0);
    };
    if (t >= 0) {
        double n = count(0.0, t);
        return (std::fmod(n, 2.0) == 0.0) ? sign_after0 : -sign_after0;
    }
    double n = count(t, 0.0);
    return (std::fmod(n, 2.0) == 0.0) ? sign_before0 : -sign_before0;
}

double ExtremalControl::eval_raw(double t) const {
    switch (tag) {
        case LawTag::Abnormal:
        case LawTag::Equilibrium:
        case LawTag::Case1Constant: return offset;
        case LawTag::Case1Zero: return 0.0;

        case LawTag::Case1Weierstrass: {
            cplx z = t + a;
            cplx d = wp->wp_both(z).first - root_k;
            // near a zero of u the difference cancels; the half-period shift gives it without cancellation
            if (std::abs(d) < 0.25 * std::sqrt(std::abs(root_prod))) {
                cplx w = wp->wp_both(z - half_period, false).first;
                d = std::isfinite(std::abs(w)) ? root_prod / (w - root_k) : cplx(0.0);
            }
            double r = 4.0 / gamma * real_checked(d, "case 1");
            if (r < 0) r = 0;
            return case1_sign(t) * std::sqrt(r);
        }
        case LawTag::Case2Weierstrass: {
            auto v = wp->wp_both(t + a);
            return (4.0 * real_checked(v.first, "case 2") - beta / 3.0) / alpha;
        }
        case LawTag::Case3Weierstrass: {
            auto v = wp->wp_both(t + a, false);
            if (!std::isfinite(std::abs(v.first))) return x0.real();
            cplx u = x0 + mu / (4.0 * (v.first - kappa));
            return real_checked(u, "case 3");
        }

        case LawTag::Case1Tanh: return amp * std::tanh(dir * rate * t + phase);
        case LawTag::Case1Coth: return amp / std::tanh(dir * rate * t + phase);
        case LawTag::Case1Rational: return amp / (phase - dir * t);
        case LawTag::Case1Tan: return amp * std::tan(dir * rate * t + phase);
        case LawTag::Case1Sech: return sgn * amp / std::cosh(phase + dir * rate * t);
        case LawTag::Case1Sec: return sgn * amp / std::cos(phase + dir * rate * t);
        case LawTag::Case1Csch: return amp / std::sinh(phase + dir * rate * t);

        case LawTag::Case2Csch2:
        case LawTag::Case2Sech2:
        case LawTag::Case2Rational:
        case LawTag::Case2Tan2: {
            double th = rate * t + phase;
            double x;
            if (tag == LawTag::Case2Csch2) {
                double s = std::sinh(th);
                x = offset + 3.0 * offset / (s * s);
            } else if (tag == LawTag::Case2Sech2) {
                double c = std::cosh(th);
                x = offset - 3.0 * offset / (c * c);
            } else if (tag == LawTag::Case2Rational) {
                x = 1.0 / ((t + phase) * (t + phase));
            } else {
                double tn = std::tan(th);
                x = amp * (1.0 + 1.5 * tn * tn);
            }
            return (4.0 * x - beta / 3.0) / alpha;
        }

        case LawTag::Case3Sin:
        case LawTag::Case3Exp:
        case LawTag::Case3TwoDouble:
        case LawTag::Case3Triple:
        case LawTag::Case3Quadruple: {
            cplx y;
            if (kappa != cplx(0.0)) {
                cplx r = std::sqrt(kappa);
                cplx yc = -mu / (2.0 * kappa);
                y = yc + (y0 - yc) * std::cosh(r * t) + yd0 * std::sinh(r * t) / r;
            } else {
                y = y0 + yd0 * t + 0.25 * mu * t * t;
            }
            return real_checked(x1 + 1.0 / y, "case 3 degenerate");
        }
    }
    return 0.0;
}

double ExtremalControl::evaluate(double t) const {
    double u = eval_raw(t);
    if (!std::isfinite(u) || std::abs(u) > kPoleMagnitude)
        throw PoleError("control law has a pole near t = " + std::to_string(t));
    return u;
}

double evaluate(const ExtremalControl& ctrl, double t) { return ctrl.evaluate(t); }

namespace {

// times in [lo, hi] where phase + dir * rate * t = offset + k * period
std::vector<double> periodic_hits(double phase, double dir_rate, double target, double period, double lo, double hi) {
    std::vector<double> out;
    // t = (target + k period - phase) / dir_rate
    double k_lo, k_hi;
    double a = (lo * dir_rate + phase - target) / period, b = (hi * dir_rate + phase - target) / period;
    k_lo = std::ceil(std::min(a, b) - 1e-12);
    k_hi = std::floor(std::max(a, b) + 1e-12);
    for (double k = k_lo; k <= k_hi; k += 1.0) out.push_back((target + k * period - phase) / dir_rate);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> single_hit(double t, double lo, double hi) {
    if (t >= lo && t <= hi) return {t};
    return {};
}

}  // namespace

std::vector<double> ExtremalControl::poles(double lo, double hi) const {
    std::vector<double> out;
    switch (tag) {
        case LawTag::Case1Weierstrass:
        case LawTag::Case2Weierstrass: out = wp->real_congruences(-a, lo, hi); break;
        case LawTag::Case3Weierstrass: {
            cplx z = wp->inverse(kappa);
            for (cplx d : {z - a, -z - a}) {
                auto h = wp->real_congruences(d, lo, hi);
                out.insert(out.end(), h.begin(), h.end());
            }
            break;
        }
        case LawTag::Case1Coth:
        case LawTag::Case1Csch: out = single_hit(-phase / (dir * rate), lo, hi); break;
        case LawTag::Case1Rational: out = single_hit(phase / dir, lo, hi); break;
        case LawTag::Case1Tan:
        case LawTag::Case1Sec: out = periodic_hits(phase, dir * rate, kPi / 2.0, kPi, lo, hi); break;
        case LawTag::Case2Csch2: out = single_hit(-phase / rate, lo, hi); break;
        case LawTag::Case2Rational: out = single_hit(-phase, lo, hi); break;
        case LawTag::Case2Tan2: out = periodic_hits(phase, rate, kPi / 2.0, kPi, lo, hi); break;
        case LawTag::Case3Sin:
        case LawTag::Case3Exp:
        case LawTag::Case3TwoDouble:
        case LawTag::Case3Triple:
        case LawTag::Case3Quadruple: {
            // zeros of y(t): scan |y| for local minima, then polish with Newton on the real line
            auto yv = [&](double t) -> std::pair<cplx, cplx> {
                if (kappa != cplx(0.0)) {
                    cplx r = std::sqrt(kappa);
                    cplx yc = -mu / (2.0 * kappa);
                    return {yc + (y0 - yc) * std::cosh(r * t) + yd0 * std::sinh(r * t) / r,
                            (y0 - yc) * r * std::sinh(r * t) + yd0 * std::cosh(r * t)};
                }
                return {y0 + yd0 * t + 0.25 * mu * t * t, yd0 + 0.5 * mu * t};
            };
            double scale = std::max(1.0, std::sqrt(std::abs(kappa)));
            double h = std::min(1e-2, 0.05 / scale);
            int n = static_cast<int>(std::ceil((hi - lo) / h)) + 1;
            n = std::min(n, 2000000);
            h = (hi - lo) / std::max(1, n - 1);
            double prev2 = std::numeric_limits<double>::infinity(), prev1 = std::abs(yv(lo).first);
            for (int i = 1; i <= n; ++i) {
                double t = lo + i * h;
                double cur = std::abs(yv(std::min(t, hi + h)).first);
                double tm = t - h;
                if (prev1 <= prev2 && prev1 <= cur) {
                    double tt = tm;
                    for (int it = 0; it < 50; ++it) {
                        auto [y, yd] = yv(tt);
                        if (std::abs(yd) == 0.0) break;
                        double step = (std::conj(yd) * y).real() / std::norm(yd);
                        tt -= step;
                        if (std::abs(step) < 1e-15 * (1.0 + std::abs(tt))) break;
                    }
                    double ymag = std::abs(yv(tt).first);
                    double yscale = std::abs(y0) + std::abs(yd0) * (1.0 + std::abs(tt)) + 1e-300;
                    if (ymag <= 1e-9 * yscale && tt >= lo - 1e-12 && tt <= hi + 1e-12) {
                        if (out.empty() || std::abs(out.back() - tt) > 1e-9) out.push_back(tt);
                    }
                }
                prev2 = prev1;
                prev1 = cur;
            }
            break;
        }
        default: break;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(), [](double x, double y) { return std::abs(x - y) < 1e-9; }),
              out.end());
    return out;
}

std::vector<double> ExtremalControl::sign_schedule(double t_max) const {
    std::vector<double> out;
    if (tag != LawTag::Case1Weierstrass || !has_crossings) return out;
    double j0 = std::floor(-cross_base / cross_period) + 1.0;
    for (double j = j0;; j += 1.0) {
        double t = cross_base + j * cross_period;
        if (t > t_max) break;
        if (t > 0) out.push_back(t);
    }
    return out;
}

nlohmann::json ExtremalControl::summary() const {
    nlohmann::json j;
    j["tag"] = to_string(tag);
    j["u0"] = u0;
    j["du0"] = v0;
    j["c1"] = consts.c1;
    j["c2"] = consts.c2;
    if (is_weierstrass(tag)) {
        j["g2"] = g2;
        j["g3"] = g3;
        j["a"] = {a.real(), a.imag()};
        j["omega1"] = {wp->lattice().omega1.real(), wp->lattice().omega1.imag()};
        j["omega2"] = {wp->lattice().omega2.real(), wp->lattice().omega2.imag()};
    }
    if (tag == LawTag::Case3Weierstrass) j["x0"] = {x0.real(), x0.imag()};
    if (tag == LawTag::Case1Weierstrass) {
        j["sign_after_0"] = sign_after0;
        if (has_crossings) {
            j["crossing_base"] = cross_base;
            j["crossing_period"] = cross_period;
        }
    }
    if (case_of(tag) == 3 && !is_weierstrass(tag)) j["x1"] = {x1.real(), x1.imag()};
    if (!is_weierstrass(tag) && case_of(tag) != 3 && tag != LawTag::Abnormal && tag != LawTag::Equilibrium) {
        j["amplitude"] = amp;
        j["rate"] = rate;
        j["phase"] = phase;
        j["direction"] = dir;
        j["sign"] = sgn;
    }
    return j;
}

// ---------------------------------------------------------------- abnormal

std::optional<AbnormalExtremal> abnormal_control(const AlgebraElement& a, const AlgebraElement& b) {
    double alpha = inner_dagger(a, b), gamma = inner_dagger(b, b);
    if (std::abs(gamma) <= 1e-12) return std::nullopt;
    double u = -alpha / gamma;
    return AbnormalExtremal{u, a + u * b};
}

ExtremalControl abnormal_law(double u) {
    ExtremalControl c;
    c.tag = LawTag::Abnormal;
    c.offset = u;
    c.u0 = u;
    return c;
}

std::optional<double> abnormal_reach_time(const AlgebraElement& a, const AlgebraElement& b, const GroupElement& xf,
                                          double t_max, double tol) {
    auto ab = abnormal_control(a, b);
    if (!ab) return std::nullopt;
    const AlgebraElement& d = ab->direction;
    if (d.norm() == 0.0) return std::nullopt;
    double d4 = 0.25 * inner_dagger(d, d);
    cplx tr = 0.5 * xf.matrix().trace();
    // X_f - (Tr/2) I must be a real multiple k of D
    Mat2 rest = xf.matrix() - tr * Mat2::Identity();
    double k = inner(rest, d.matrix()) / inner(d, d);
    std::vector<double> cands;
    double c = tr.real();
    if (d4 < -1e-14) {
        double r = std::sqrt(-d4);
        double th = std::atan2(k * r, c);
        if (th <= 0) th += 2.0 * kPi;
        for (double t = th / r; t <= t_max; t += 2.0 * kPi / r) cands.push_back(t);
    } else if (d4 > 1e-14) {
        double r = std::sqrt(d4);
        cands.push_back(std::asinh(k * r) / r);
    } else {
        cands.push_back(k);
    }
    for (double t : cands) {
        if (t <= 0 || t > t_max) continue;
        if (frobenius_distance(expm(t * d), xf) <= tol * std::max(1.0, xf.matrix().norm())) return t;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- costates

ExtremalState costate_init(const Costate& s, const AlgebraElement& a, const AlgebraElement& b) {
    AlgebraElement S = s.S();
    return {-inner(S, a), -inner(S, b), -inner(S, commutator(a, b))};
}

ExtremalState transported_costate(const Costate& s, const AlgebraElement& a, const AlgebraElement& b,
                                  const GroupElement& x) {
    GroupElement xi = x.inverse();
    auto transport = [&](const AlgebraElement& m) { return conjugate(xi, m); };
    AlgebraElement S = s.S();
    return {-inner(S, transport(a)), -inner(S, transport(b)), -inner(S, transport(commutator(a, b)))};
}

Costate costate_from_state(const ExtremalState& st, const AlgebraElement& a, const AlgebraElement& b) {
    AlgebraElement c = commutator(a, b);
    Eigen::Matrix3d m;
    m << a.x, a.y, a.z, b.x, b.y, b.z, c.x, c.y, c.z;
    Eigen::Vector3d rhs(-st.uA, -st.uB, -st.uC);
    Eigen::Vector3d s = m.fullPivLu().solve(rhs);
    return {s[0], s[1], s[2], 1.0};
}

ConstantsOfMotion constants_of_motion(const ExtremalState& st, double alpha, double beta, double gamma) {
    return {st.uA + 0.5 * st.uB * st.uB,
            0.5 * gamma * st.uA * st.uA - alpha * st.uA * st.uB - 0.5 * st.uC * st.uC - beta * st.uA};
}

ExtremalState extremal_ode_rhs(const ExtremalState& s, double alpha, double beta, double gamma) {
    return {s.uB * s.uC, -s.uC, alpha * s.uA - beta * s.uB + gamma * s.uA * s.uB - alpha * s.uB * s.uB};
}

std::vector<ExtremalState> extremal_flow(const ExtremalState& st, double alpha, double beta, double gamma,
                                         double step, int n) {
    std::vector<ExtremalState> out;
    out.reserve(n + 1);
    out.push_back(st);
    ExtremalState s = st;
    auto axpy = [](const ExtremalState& x, double h, const ExtremalState& k) {
        return ExtremalState{x.uA + h * k.uA, x.uB + h * k.uB, x.uC + h * k.uC};
    };
    for (int i = 0; i < n; ++i) {
        auto k1 = extremal_ode_rhs(s, alpha, beta, gamma);
        auto k2 = extremal_ode_rhs(axpy(s, step / 2, k1), alpha, beta, gamma);
        auto k3 = extremal_ode_rhs(axpy(s, step / 2, k2), alpha, beta, gamma);
        auto k4 = extremal_ode_rhs(axpy(s, step, k3), alpha, beta, gamma);
        s.uA += step / 6 * (k1.uA + 2 * k2.uA + 2 * k3.uA + k4.uA);
        s.uB += step / 6 * (k1.uB + 2 * k2.uB + 2 * k3.uB + k4.uB);
        s.uC += step / 6 * (k1.uC + 2 * k2.uC + 2 * k3.uC + k4.uC);
        out.push_back(s);
    }
    return out;
}

double hamiltonian(const Costate& s, double u, const GroupElement& x, const AlgebraElement& a,
                   const AlgebraElement& b) {
    AlgebraElement m = conjugate(x.inverse(), a + u * b);
    return inner(s.S(), m) + 0.5 * s.lambda0 * u * u;
}

// ---------------------------------------------------------------- synthesis

namespace {

ExtremalControl base_law(double u0, double v0, const ConstantsOfMotion& k, double alpha, double beta, double gamma) {
    ExtremalControl c;
    c.alpha = alpha;
    c.beta = beta;
    c.gamma = gamma;
    c.consts = k;
    c.u0 = u0;
    c.v0 = v0;
    c.p = beta - gamma * k.c1;
    return c;
}

ExtremalControl constant_law(ExtremalControl c, LawTag tag, double value) {
    c.tag = tag;
    c.offset = value;
    return c;
}

std::shared_ptr<const Weierstrass> make_wp(double g2, double g3) {
    try {
        return std::make_shared<const Weierstrass>(g2, g3);
    } catch (const DegenerateLatticeError&) {
        return nullptr;
    }
}

bool degenerate_invariants(double g2, double g3, double disc) {
    double scale = std::max(std::abs(g2 * g2 * g2), 27.0 * g3 * g3);
    if (scale == 0.0) return true;
    return std::abs(disc) <= kDegenerateBand * scale;
}

// ---- Case 1: alpha = 0, gamma != 0
ExtremalControl case1(ExtremalControl c) {
    const double gamma = c.gamma, beta = c.beta, u0 = c.u0, v0 = c.v0;
    const double p = beta - gamma * c.consts.c1;
    const double D = beta * beta + 2.0 * gamma * c.consts.c2;  // = p^2 - gamma q
    const double q = gamma * c.consts.c1 * c.consts.c1 - 2.0 * beta * c.consts.c1 - 2.0 * c.consts.c2;
    const double g2 = 4.0 * p * p / 3.0 - gamma * q;
    const double g3 = gamma * p * q / 3.0 - 8.0 * p * p * p / 27.0;
    const double disc = g2 * g2 * g2 - 27.0 * g3 * g3;  // proportional to D (D - p^2)^2
    c.g2 = g2;
    c.g3 = g3;
    c.p = p;

    std::shared_ptr<const Weierstrass> w;
    if (!degenerate_invariants(g2, g3, disc)) w = make_wp(g2, g3);
    if (w) {
        c.tag = LawTag::Case1Weierstrass;
        c.wp = w;
        double w0 = gamma / 4.0 * u0 * u0 + p / 3.0;
        c.a = w->inverse_with_slope(w0, gamma / 2.0 * u0 * v0);
        c.sign_after0 = (u0 != 0.0) ? sign_of(u0) : sign_of(v0);
        c.sign_before0 = (u0 != 0.0) ? sign_of(u0) : -sign_of(v0);
        // u = 0 exactly where wp(t + a) = p/3, a root of the cubic: t + a = half-period
        cplx h = w->half_period_for(p / 3.0);
        {
            const auto& e = w->invariants().roots;
            int k = 0;
            for (int i = 1; i < 3; ++i)
                if (std::abs(e[i] - p / 3.0) < std::abs(e[k] - p / 3.0)) k = i;
            c.half_period = h;
            c.root_k = p / 3.0;
            c.root_prod = (c.root_k - e[(k + 1) % 3]) * (c.root_k - e[(k + 2) % 3]);
        }
        double per = 2.0 * w->lattice().omega1.real();
        auto hits = w->real_congruences(h - c.a, -per, per);
        if (!hits.empty()) {
            double t0 = hits.front();
            // bisection on Re wp'(t + a), which changes sign at the crossing
            double lo = t0 - 1e-6 * per, hi = t0 + 1e-6 * per;
            auto fp = [&](double t) { return w->wp_both(t + c.a, false).second.real(); };
            double flo = fp(lo), fhi = fp(hi);
            if (flo * fhi < 0) {
                for (int i = 0; i < 80 && hi - lo > 1e-15 * (1.0 + std::abs(t0)); ++i) {
                    double mid = 0.5 * (lo + hi);
                    double fm = fp(mid);
                    if ((fm < 0) == (flo < 0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                t0 = 0.5 * (lo + hi);
            }
            c.has_crossings = true;
            c.cross_base = t0;
            c.cross_period = per;
            // a crossing sitting on t = 0 itself is accounted for by sign_after0 / sign_before0
            if (std::abs(t0) < 1e-9 * per) c.cross_base = 0.0;
        }
        return c;
    }

    // degenerate: D = 0 or D = p^2
    const double pscale = std::max({1.0, std::abs(beta), std::abs(gamma * c.consts.c1)});
    const bool p_zero = std::abs(p) <= 1e-8 * pscale;
    if (std::abs(D) <= std::abs(D - p * p) || p_zero) {
        if (gamma < 0) return constant_law(c, LawTag::Case1Constant, u0);
        if (p_zero) {
            if (u0 == 0.0) return constant_law(c, LawTag::Equilibrium, 0.0);
            c.tag = LawTag::Case1Rational;
            c.amp = 2.0 / std::sqrt(gamma);
            c.phase = 2.0 / (std::sqrt(gamma) * u0);
            c.dir = sign_of(v0);
            return c;
        }
        if (p < 0) {
            double kap = std::sqrt(-2.0 * p / gamma);
            c.rate = std::sqrt(-p / 2.0);
            c.amp = kap;
            if (close(std::abs(u0), kap, 1e-12)) return constant_law(c, LawTag::Equilibrium, u0);
            if (std::abs(u0) < kap) {
                c.tag = LawTag::Case1Tanh;
                c.phase = std::atanh(u0 / kap);
                c.dir = sign_of(v0);
            } else {
                c.tag = LawTag::Case1Coth;
                c.phase = std::atanh(kap / u0);
                c.dir = -sign_of(v0);
            }
            return c;
        }
        c.tag = LawTag::Case1Tan;
        c.amp = std::sqrt(2.0 * p / gamma);
        c.rate = std::sqrt(p / 2.0);
        c.phase = std::atan(u0 / c.amp);
        c.dir = sign_of(v0);
        return c;
    }
    // D = p^2: f = (gamma/4) u^2 (u^2 + 4p/gamma)
    if (std::abs(u0) <= 1e-14 * pscale) return constant_law(c, LawTag::Case1Zero, 0.0);
    double mu = std::sqrt(std::abs(4.0 * p / gamma));
    c.amp = mu;
    c.sgn = sign_of(u0);
    if (gamma < 0 && p < 0)
        throw NoSolutionError("no nontrivial solution other than u = 0 (gamma < 0, beta - gamma c1 < 0)");
    if (gamma < 0) {
        c.tag = LawTag::Case1Sech;
        c.rate = std::sqrt(p);
        c.phase = std::acosh(std::max(1.0, mu / std::abs(u0)));
        c.dir = (v0 == 0.0) ? 1 : -sign_of(v0) * sign_of(u0);
    } else if (p < 0) {
        c.tag = LawTag::Case1Sec;
        c.rate = std::sqrt(-p);
        c.phase = std::acos(std::min(1.0, mu / std::abs(u0)));
        c.dir = (v0 == 0.0) ? 1 : sign_of(v0) * sign_of(u0);
    } else {
        c.tag = LawTag::Case1Csch;
        c.rate = std::sqrt(p);
        c.phase = std::asinh(mu / u0);
        c.dir = -sign_of(v0);
    }
    return c;
}

// ---- Case 2: alpha != 0, gamma = 0;  x = alpha u / 4 + beta / 12 solves x'^2 = 4x^3 - g2 x - g3
ExtremalControl case2(ExtremalControl c) {
    const double alpha = c.alpha, beta = c.beta, c1 = c.consts.c1, c2 = c.consts.c2;
    const double g2 = (beta * beta + 6.0 * alpha * alpha * c1) / 12.0;
    const double g3 = (18.0 * alpha * alpha * beta * c1 + 27.0 * alpha * alpha * c2 - beta * beta * beta) / 216.0;
    c.g2 = g2;
    c.g3 = g3;
    const double x0 = alpha * c.u0 / 4.0 + beta / 12.0;
    const double xd0 = alpha * c.v0 / 4.0;

    std::shared_ptr<const Weierstrass> w;
    if (!degenerate_invariants(g2, g3, g2 * g2 * g2 - 27.0 * g3 * g3)) w = make_wp(g2, g3);
    if (w) {
        c.tag = LawTag::Case2Weierstrass;
        c.wp = w;
        c.a = w->inverse_with_slope(x0, xd0);
        return c;
    }
    const double e = -std::cbrt(g3) / 2.0;  // double root of the cubic
    if (std::abs(e) <= 1e-8 * std::max(1.0, std::abs(x0))) {
        if (std::abs(x0) <= 1e-14) return constant_law(c, LawTag::Equilibrium, c.u0);
        c.tag = LawTag::Case2Rational;
        c.phase = (xd0 > 0 ? -1.0 : 1.0) / std::sqrt(x0);  // x = 1/(t + a)^2
        return c;
    }
    if (close(x0, e, 1e-12)) return constant_law(c, LawTag::Equilibrium, c.u0);
    if (e > 0) {
        c.offset = e;
        c.rate = std::sqrt(3.0 * e);
        if (x0 > e) {
            c.tag = LawTag::Case2Csch2;
            c.phase = -sign_of(xd0) * std::asinh(std::sqrt(3.0 * e / (x0 - e)));
        } else {
            c.tag = LawTag::Case2Sech2;
            c.phase = (xd0 == 0.0 ? 1 : sign_of(xd0)) * std::acosh(std::max(1.0, std::sqrt(3.0 * e / (e - x0))));
        }
        return c;
    }
    const double E = -2.0 * e;  // cbrt(g3) > 0
    c.tag = LawTag::Case2Tan2;
    c.amp = E;
    c.rate = std::sqrt(1.5 * E);
    c.phase = (xd0 == 0.0 ? 1 : sign_of(xd0)) * std::atan(std::sqrt(std::max(0.0, (x0 / E - 1.0) / 1.5)));
    return c;
}

// ---- Case 3: alpha != 0, gamma != 0
ExtremalControl case3_weierstrass(ExtremalControl c, const QuarticForm& f, std::shared_ptr<const Weierstrass> w,
                                  cplx x0) {
    c.tag = LawTag::Case3Weierstrass;
    c.wp = w;
    c.x0 = x0;
    cplx fp = f.eval(x0, 1);
    cplx xi = f.eval(x0, 2) / 24.0;
    c.mu = fp;      // numerator f'(x0)
    c.kappa = xi;   // f''(x0) / 24
    cplx d = c.u0 - x0;
    if (std::abs(d) <= 1e-13 * (1.0 + std::abs(x0))) {
        c.a = 0.0;
    } else {
        cplx w0 = fp / (4.0 * d) + xi;
        cplx slope = -c.v0 * fp / (4.0 * d * d);
        c.a = w->inverse_with_slope(w0, slope);
    }
    return c;
}

struct Cluster {
    cplx center;
    int mult;
};

std::vector<Cluster> cluster_roots(const std::vector<cplx>& roots) {
    double scale = 1.0;
    for (auto r : roots) scale = std::max(scale, std::abs(r));
    double tol = 1e-3 * scale;
    std::vector<Cluster> out;
    std::vector<bool> used(roots.size(), false);
    for (size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        cplx sum = roots[i];
        int m = 1;
        used[i] = true;
        for (size_t j = i + 1; j < roots.size(); ++j)
            if (!used[j] && std::abs(roots[j] - roots[i]) <= tol) {
                used[j] = true;
                sum += roots[j];
                ++m;
            }
        out.push_back({sum / double(m), m});
    }
    return out;
}

ExtremalControl case3(ExtremalControl c, std::optional<int> root_index) {
    QuarticForm f = QuarticForm::make(c.consts, c.alpha, c.beta, c.gamma);
    c.g2 = f.g2;
    c.g3 = f.g3;
    std::shared_ptr<const Weierstrass> w;
    if (!degenerate_invariants(f.g2, f.g3, f.g2 * f.g2 * f.g2 - 27.0 * f.g3 * f.g3)) w = make_wp(f.g2, f.g3);
    if (w) {
        cplx x0;
        if (root_index) {
            x0 = f.roots.at(*root_index);
        } else {
            // real root closest to u0, else any root closest to u0
            double best_real = std::numeric_limits<double>::infinity(), best_any = best_real;
            cplx xr, xa;
            for (auto r : f.roots) {
                double d = std::abs(r - c.u0);
                if (r.imag() == 0.0 && d < best_real) best_real = d, xr = r;
                if (d < best_any) best_any = d, xa = r;
            }
            x0 = std::isfinite(best_real) ? xr : xa;
        }
        return case3_weierstrass(c, f, w, x0);
    }

    auto cl = cluster_roots(f.roots);
    std::sort(cl.begin(), cl.end(), [&](const Cluster& x, const Cluster& y) {
        if (x.mult != y.mult) return x.mult > y.mult;
        bool rx = std::abs(x.center.imag()) < 1e-9, ry = std::abs(y.center.imag()) < 1e-9;
        if (rx != ry) return rx;
        return std::abs(x.center - c.u0) > std::abs(y.center - c.u0);
    });
    if (cl.front().mult == 1) {
        // clustering missed the near-repeated pair: merge the closest two roots
        double best = std::numeric_limits<double>::infinity();
        cplx centre;
        for (size_t i = 0; i < f.roots.size(); ++i)
            for (size_t j = i + 1; j < f.roots.size(); ++j)
                if (std::abs(f.roots[i] - f.roots[j]) < best)
                    best = std::abs(f.roots[i] - f.roots[j]), centre = 0.5 * (f.roots[i] + f.roots[j]);
        cl.insert(cl.begin(), Cluster{centre, 2});
    }
    int top = cl.front().mult;
    int doubles = 0;
    for (auto& k : cl) doubles += (k.mult == 2);
    cplx x1 = polish_on_derivative(f, cl.front().center, top - 1);
    if (std::abs(x1.imag()) < 1e-9 * (1.0 + std::abs(x1))) x1 = x1.real();
    // a state on a repeated root stays there
    for (auto& k : cl)
        if (k.mult >= 2 && std::abs(k.center - c.u0) <= 1e-6 * (1.0 + std::abs(k.center)) && std::abs(c.v0) <= 1e-6)
            return constant_law(c, LawTag::Equilibrium, c.u0);

    if (top == 4 && c.gamma < 0) throw NoSolutionError("one 4-fold zero with gamma < 0: no real solution");
    c.x1 = x1;
    c.y0 = 1.0 / (c.u0 - x1);
    c.yd0 = -c.v0 * c.y0 * c.y0;
    // y^4 f(x1 + 1/y) = A y^2 + B y + C with A = f''/2, B = f'''/6
    cplx A = f.eval(x1, 2) / 2.0, B = f.eval(x1, 3) / 6.0;
    c.mu = B;
    if (top >= 3) {
        c.kappa = 0.0;
        c.tag = top == 3 ? LawTag::Case3Triple : LawTag::Case3Quadruple;
        if (top == 4) c.mu = 0.0;
    } else {
        c.kappa = A;
        if (doubles >= 2)
            c.tag = LawTag::Case3TwoDouble;
        else
            c.tag = A.real() < 0 ? LawTag::Case3Sin : LawTag::Case3Exp;
    }
    return c;
}

ExtremalControl dispatch(double uB0, const ConstantsOfMotion& k, double alpha, double beta, double gamma,
                         std::optional<double> rate, std::optional<int> root_index) {
    const double band = 1e-12;
    bool a0 = std::abs(alpha) <= band, g0 = std::abs(gamma) <= band;
    if (a0 && g0) throw std::invalid_argument("synthesize: alpha = gamma = 0 (system not controllable)");
    if (a0) alpha = 0.0;
    if (g0) gamma = 0.0;
    QuarticForm f = QuarticForm::make(k, alpha, beta, gamma);
    double fu = f(uB0);
    double mag = std::sqrt(std::max(0.0, fu));
    double v0 = (rate && *rate < 0) ? -mag : mag;
    // an explicit rate consistent with f(u0) = rate^2 is used as is
    if (rate && std::abs(*rate * *rate - fu) <= 1e-8 * (1.0 + std::abs(fu))) v0 = *rate;
    ExtremalControl c = base_law(uB0, v0, k, alpha, beta, gamma);
    // rest point: du/dt = 0 and d2u/dt2 = f'(u)/2 = 0 (Case 1 has its own degenerate tags)
    if (!a0 && std::abs(v0) <= 1e-12 * (1.0 + std::abs(uB0)) &&
        std::abs(f.eval(uB0, 1)) <= 1e-10 * (1.0 + std::abs(f.eval(uB0, 2)) + std::abs(uB0)))
        return constant_law(c, LawTag::Equilibrium, uB0);
    if (a0) return case1(c);
    if (g0) return case2(c);
    return case3(c, root_index);
}

}  // namespace

ExtremalControl synthesize(double uB0, const ConstantsOfMotion& consts, double alpha, double beta, double gamma,
                           std::optional<double> initial_rate) {
    return dispatch(uB0, consts, alpha, beta, gamma, initial_rate, std::nullopt);
}

ExtremalControl synthesize(const ExtremalState& st, double alpha, double beta, double gamma) {
    return synthesize(st.uB, constants_of_motion(st, alpha, beta, gamma), alpha, beta, gamma, -st.uC);
}

ExtremalControl synthesize_case3_with_root(const ExtremalState& st, double alpha, double beta, double gamma,
                                           int root_index) {
    return dispatch(st.uB, constants_of_motion(st, alpha, beta, gamma), alpha, beta, gamma, -st.uC, root_index);
}

}  // namespace su11
