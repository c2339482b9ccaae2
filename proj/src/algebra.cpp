#include "su11/algebra.hpp"

#include <cmath>
#include <numbers>

namespace su11 {

namespace {

constexpr cplx I1{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

// Map an angle into (-2pi, 2pi] by multiples of 4pi.
double wrap_4pi(double a) {
    a = std::fmod(a, 4.0 * kPi);
    if (a <= -2.0 * kPi) a += 4.0 * kPi;
    if (a > 2.0 * kPi) a -= 4.0 * kPi;
    return a;
}

}  // namespace

// K_x = 1/2 [[0,-i],[i,0]], K_y = 1/2 [[0,-1],[-1,0]], K_z = 1/2 [[-i,0],[0,i]]
Mat2 AlgebraElement::matrix() const {
    Mat2 m;
    m(0, 0) = -0.5 * I1 * z;
    m(1, 1) = 0.5 * I1 * z;
    m(0, 1) = 0.5 * (-I1 * x - y);
    m(1, 0) = 0.5 * (I1 * x - y);
    return m;
}

AlgebraElement AlgebraElement::from_matrix(const Mat2& m) {
    // inner(M, K) recovers each coefficient
    return {inner(m, Kx.matrix()), inner(m, Ky.matrix()), inner(m, Kz.matrix())};
}

double AlgebraElement::norm() const { return std::sqrt(x * x + y * y + z * z); }

const Mat2& eta() {
    static const Mat2 e = (Mat2() << 1.0, 0.0, 0.0, -1.0).finished();
    return e;
}

GroupElement::GroupElement() : m_(Mat2::Identity()) {}

GroupElement::GroupElement(const Mat2& m, double tol) : m_(m) {
    if (!m.allFinite()) throw InvariantError("group element has non-finite entries");
    double err = invariant_error();
    if (err > tol)
        throw InvariantError("not in SU(1,1): invariant error " + std::to_string(err));
}

GroupElement GroupElement::unchecked(const Mat2& m) {
    GroupElement g;
    g.m_ = m;
    return g;
}

GroupElement GroupElement::inverse() const { return unchecked(eta() * m_.adjoint() * eta()); }

double GroupElement::invariant_error() const {
    double e = std::abs(m_.determinant() - 1.0);
    Mat2 d = m_.adjoint() * eta() * m_ - eta();
    return std::max(e, d.cwiseAbs().maxCoeff());
}

std::string to_string(AlgebraType t) {
    switch (t) {
        case AlgebraType::Elliptic: return "elliptic";
        case AlgebraType::Hyperbolic: return "hyperbolic";
        case AlgebraType::Parabolic: return "parabolic";
    }
    return "?";
}

double inner(const Mat2& m, const Mat2& n) { return 2.0 * (m * n.adjoint()).trace().real(); }
double inner(const AlgebraElement& m, const AlgebraElement& n) {
    return m.x * n.x + m.y * n.y + m.z * n.z;
}

double inner_dagger(const Mat2& m, const Mat2& n) { return 2.0 * (m * n).trace().real(); }
double inner_dagger(const AlgebraElement& m, const AlgebraElement& n) {
    return m.x * n.x + m.y * n.y - m.z * n.z;
}

// [Kx,Ky] = -Kz, [Ky,Kz] = Kx, [Kz,Kx] = Ky
AlgebraElement commutator(const AlgebraElement& m, const AlgebraElement& n) {
    return {m.y * n.z - m.z * n.y, m.z * n.x - m.x * n.z, -(m.x * n.y - m.y * n.x)};
}

AlgebraType classify(const AlgebraElement& m, double tol) {
    double q = inner_dagger(m, m);
    if (q < -tol) return AlgebraType::Elliptic;
    if (q > tol) return AlgebraType::Hyperbolic;
    return AlgebraType::Parabolic;
}

// M^2 = d I with d = Tr(M^2)/2 = inner_dagger(M,M)/4.
Mat2 expm_matrix(const AlgebraElement& m) {
    double d = 0.25 * inner_dagger(m, m);
    double c, s;  // cosh(sqrt d), sinh(sqrt d)/sqrt d
    if (std::abs(d) < 1e-8) {
        c = 1.0 + d / 2.0 + d * d / 24.0;
        s = 1.0 + d / 6.0 + d * d / 120.0;
    } else if (d > 0) {
        double r = std::sqrt(d);
        c = std::cosh(r);
        s = std::sinh(r) / r;
    } else {
        double r = std::sqrt(-d);
        c = std::cos(r);
        s = std::sin(r) / r;
    }
    return c * Mat2::Identity() + s * m.matrix();
}

GroupElement expm(const AlgebraElement& m) { return GroupElement::unchecked(expm_matrix(m)); }

// exp(a1 Kz) exp(b Ky) exp(a2 Kz) =
//   [[ e^{-i(a1+a2)/2} ch, -e^{-i(a1-a2)/2} sh ], [ -e^{i(a1-a2)/2} sh, e^{i(a1+a2)/2} ch ]]
// with ch = cosh(b/2), sh = sinh(b/2).
CartanCoordinates cartan_decompose(const GroupElement& x) {
    double err = x.invariant_error();
    if (!(err <= 1e-8 * std::max(1.0, x.matrix().cwiseAbs2().sum())))
        throw InvariantError("cartan_decompose: input is not in SU(1,1)");
    const Mat2& m = x.matrix();
    CartanCoordinates c;
    double sh = std::abs(m(0, 1));
    c.b = 2.0 * std::asinh(sh);
    double sigma = -2.0 * std::arg(m(0, 0));
    if (sh < 1e-14) {
        c.a1 = wrap_4pi(sigma);
        c.a2 = 0.0;
        c.b = 0.0;
        return c;
    }
    double delta = -2.0 * std::arg(-m(0, 1));
    c.a1 = wrap_4pi(0.5 * (sigma + delta));
    c.a2 = wrap_4pi(0.5 * (sigma - delta));
    // sigma and delta are each fixed mod 4pi, so (a1, a2) may be off by a joint 2pi shift,
    // which flips the sign of the product.
    if (frobenius_distance(cartan_reconstruct(c), x) > frobenius_distance(cartan_reconstruct(c), -x)) {
        c.a1 = wrap_4pi(c.a1 + 2.0 * kPi);
    }
    return c;
}

GroupElement cartan_reconstruct(const CartanCoordinates& c) {
    return expm(c.a1 * Kz) * expm(c.b * Ky) * expm(c.a2 * Kz);
}

AlgebraElement conjugate(const GroupElement& p, const AlgebraElement& m) {
    return AlgebraElement::from_matrix(p.matrix() * m.matrix() * p.inverse().matrix());
}

double frobenius_distance(const Mat2& x, const Mat2& y) { return (x - y).norm(); }
double frobenius_distance(const GroupElement& x, const GroupElement& y) {
    return frobenius_distance(x.matrix(), y.matrix());
}

void to_json(nlohmann::json& j, const AlgebraElement& m) { j = nlohmann::json::array({m.x, m.y, m.z}); }

void from_json(const nlohmann::json& j, AlgebraElement& m) {
    if (!j.is_array() || j.size() != 3) throw std::invalid_argument("algebra element must be [x, y, z]");
    m = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void to_json(nlohmann::json& j, const GroupElement& g) {
    j = nlohmann::json::array();
    for (int r = 0; r < 2; ++r) {
        auto row = nlohmann::json::array();
        for (int c = 0; c < 2; ++c) row.push_back({g(r, c).real(), g(r, c).imag()});
        j.push_back(row);
    }
}

void from_json(const nlohmann::json& j, GroupElement& g) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("group element must be 2x2");
    Mat2 m;
    for (int r = 0; r < 2; ++r) {
        if (!j[r].is_array() || j[r].size() != 2) throw std::invalid_argument("group element must be 2x2");
        for (int c = 0; c < 2; ++c) m(r, c) = cplx(j[r][c][0].get<double>(), j[r][c][1].get<double>());
    }
    g = GroupElement(m);
}

}  // namespace su11
