#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "su11/algebra.hpp"
#include "su11/elliptic.hpp"

namespace su11 {

struct Costate {
    double sx = 0.0, sy = 0.0, sz = 0.0;
    double lambda0 = 1.0;

    AlgebraElement S() const { return {sx, sy, sz}; }
    static Costate from(const AlgebraElement& s, double lambda0 = 1.0) { return {s.x, s.y, s.z, lambda0}; }
};

struct ExtremalState {
    double uA = 0.0, uB = 0.0, uC = 0.0;
};

struct ConstantsOfMotion {
    double c1 = 0.0, c2 = 0.0;
};

// f(x) = (g/4) x^4 + a x^3 + (b - g c1) x^2 - 2 a c1 x + (g c1^2 - 2 b c1 - 2 c2)
struct QuarticForm {
    double alpha = 0, beta = 0, gamma = 0;
    ConstantsOfMotion consts;
    double coef[5] = {0, 0, 0, 0, 0};  // coef[k] multiplies x^k
    double c = 0.0;                    // constant term
    double g2 = 0.0, g3 = 0.0;         // invariants of the quartic (general-case formulas)
    std::vector<cplx> roots;           // 4 roots when gamma != 0, 3 when gamma == 0

    static QuarticForm make(const ConstantsOfMotion& k, double alpha, double beta, double gamma);
    int degree() const { return gamma != 0.0 ? 4 : (alpha != 0.0 ? 3 : 2); }
    double operator()(double x) const;
    cplx eval(cplx x, int derivative = 0) const;
};

enum class LawTag {
    Abnormal,
    Equilibrium,  // state sits on a repeated root: constant control
    Case1Weierstrass,
    Case1Constant,
    Case1Tanh,
    Case1Coth,
    Case1Rational,
    Case1Tan,
    Case1Zero,
    Case1Sech,
    Case1Sec,
    Case1Csch,
    Case2Weierstrass,
    Case2Csch2,
    Case2Sech2,
    Case2Rational,
    Case2Tan2,
    Case3Weierstrass,
    Case3Sin,
    Case3Exp,
    Case3TwoDouble,
    Case3Triple,
    Case3Quadruple,
};

std::string to_string(LawTag t);
int case_of(LawTag t);  // 0 for abnormal / equilibrium, else 1..3
bool is_weierstrass(LawTag t);

struct NoSolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Magnitude beyond which evaluate() reports a pole.
constexpr double kPoleMagnitude = 1e8;

class ExtremalControl {
public:
    LawTag tag = LawTag::Equilibrium;

    double alpha = 0, beta = 0, gamma = 0;
    ConstantsOfMotion consts;
    double u0 = 0.0;  // u(0)
    double v0 = 0.0;  // du/dt at 0

    // Weierstrass forms
    std::shared_ptr<const Weierstrass> wp;
    double g2 = 0.0, g3 = 0.0;
    cplx a = 0.0;
    cplx x0 = 0.0;  // chosen root (Case 3)

    // Elementary forms: u = sgn * amp * F(phase + dir * rate * t) (+ offset)
    double amp = 0.0, rate = 0.0, phase = 0.0, offset = 0.0;
    int dir = 1, sgn = 1;

    // Reciprocal form y = 1 / (u - x1): y'' = kappa y + mu / 2
    cplx x1 = 0.0, y0 = 0.0, yd0 = 0.0, kappa = 0.0, mu = 0.0;

    double evaluate(double t) const;
    // Pole times in [lo, hi], ascending.
    std::vector<double> poles(double lo, double hi) const;
    // Case 1 Weierstrass: times in (0, t_max] where u crosses zero and the branch sign flips.
    std::vector<double> sign_schedule(double t_max) const;
    nlohmann::json summary() const;

    // For the Case 1 sign tracking.
    bool has_crossings = false;
    double cross_base = 0.0, cross_period = 0.0;
    int sign_after0 = 1, sign_before0 = 1;
    double p = 0.0;  // beta - gamma c1
    cplx half_period = 0.0;     // h with wp(h) = p/3
    cplx root_k = 0.0, root_prod = 0.0;  // e_k = p/3 and (e_k - e_i)(e_k - e_j)

private:
    double eval_raw(double t) const;
    int case1_sign(double t) const;
};

double evaluate(const ExtremalControl& ctrl, double t);

struct AbnormalExtremal {
    double u;
    AlgebraElement direction;  // A + u B
};

std::optional<AbnormalExtremal> abnormal_control(const AlgebraElement& a, const AlgebraElement& b);
ExtremalControl abnormal_law(double u);
// Smallest T in (0, t_max] with exp(T (A + u B)) = X_f, if any.
std::optional<double> abnormal_reach_time(const AlgebraElement& a, const AlgebraElement& b, const GroupElement& xf,
                                          double t_max, double tol = 1e-8);

ExtremalState costate_init(const Costate& s, const AlgebraElement& a, const AlgebraElement& b);
ExtremalState transported_costate(const Costate& s, const AlgebraElement& a, const AlgebraElement& b,
                                  const GroupElement& x);
// Inverse of costate_init (requires A, B, [A,B] to be a basis).
Costate costate_from_state(const ExtremalState& st, const AlgebraElement& a, const AlgebraElement& b);

ConstantsOfMotion constants_of_motion(const ExtremalState& st, double alpha, double beta, double gamma);
ExtremalState extremal_ode_rhs(const ExtremalState& st, double alpha, double beta, double gamma);
// Classical RK4 on the reduced system; returns states at t = k * step, k = 0..n.
std::vector<ExtremalState> extremal_flow(const ExtremalState& st, double alpha, double beta, double gamma, double step,
                                         int n);

// `initial_rate` selects the sign of du/dt at 0 (= -uC(0)); its magnitude comes from f(uB0).
ExtremalControl synthesize(double uB0, const ConstantsOfMotion& consts, double alpha, double beta, double gamma,
                           std::optional<double> initial_rate = std::nullopt);
ExtremalControl synthesize(const ExtremalState& st, double alpha, double beta, double gamma);
// Case 3 with an explicit root choice for x0 (index into QuarticForm::roots).
ExtremalControl synthesize_case3_with_root(const ExtremalState& st, double alpha, double beta, double gamma,
                                           int root_index);

double hamiltonian(const Costate& s, double u, const GroupElement& x, const AlgebraElement& a,
                   const AlgebraElement& b);

}  // namespace su11
