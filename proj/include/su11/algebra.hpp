#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace su11 {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

// Coefficients on (K_x, K_y, K_z).
struct AlgebraElement {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Mat2 matrix() const;
    // Projects a traceless 2x2 matrix onto the basis (inverse of matrix()).
    static AlgebraElement from_matrix(const Mat2& m);

    double norm() const;

    AlgebraElement operator+(const AlgebraElement& o) const { return {x + o.x, y + o.y, z + o.z}; }
    AlgebraElement operator-(const AlgebraElement& o) const { return {x - o.x, y - o.y, z - o.z}; }
    AlgebraElement operator-() const { return {-x, -y, -z}; }
    AlgebraElement operator*(double s) const { return {s * x, s * y, s * z}; }
    friend AlgebraElement operator*(double s, const AlgebraElement& m) { return m * s; }
};

inline const AlgebraElement Kx{1.0, 0.0, 0.0};
inline const AlgebraElement Ky{0.0, 1.0, 0.0};
inline const AlgebraElement Kz{0.0, 0.0, 1.0};

const Mat2& eta();

struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 2x2 pseudo-unitary unimodular matrix.
class GroupElement {
public:
    GroupElement();  // identity
    // Checks det = 1 and X°ηX = η to `tol`; throws InvariantError otherwise.
    explicit GroupElement(const Mat2& m, double tol = 1e-10);
    static GroupElement unchecked(const Mat2& m);

    const Mat2& matrix() const { return m_; }
    cplx operator()(int i, int j) const { return m_(i, j); }

    // X^{-1} = η X° η for X in SU(1,1).
    GroupElement inverse() const;
    GroupElement operator*(const GroupElement& o) const { return unchecked(m_ * o.m_); }
    GroupElement operator-() const { return unchecked(-m_); }

    // max(|det X - 1|, max_ij |(X°ηX - η)_ij|)
    double invariant_error() const;

private:
    Mat2 m_;
};

struct CartanCoordinates {
    double a1 = 0.0;
    double b = 0.0;
    double a2 = 0.0;
};

enum class AlgebraType { Elliptic, Hyperbolic, Parabolic };
std::string to_string(AlgebraType t);

// 2 Tr(M N°)
double inner(const Mat2& m, const Mat2& n);
double inner(const AlgebraElement& m, const AlgebraElement& n);
// 2 Tr(M N)
double inner_dagger(const Mat2& m, const Mat2& n);
double inner_dagger(const AlgebraElement& m, const AlgebraElement& n);

AlgebraElement commutator(const AlgebraElement& m, const AlgebraElement& n);

constexpr double kClassifyTol = 1e-12;
AlgebraType classify(const AlgebraElement& m, double tol = kClassifyTol);

Mat2 expm_matrix(const AlgebraElement& m);
GroupElement expm(const AlgebraElement& m);

// X = exp(a1 Kz) exp(b Ky) exp(a2 Kz). Throws InvariantError on non-group input.
CartanCoordinates cartan_decompose(const GroupElement& x);
GroupElement cartan_reconstruct(const CartanCoordinates& c);

// P M P^{-1}
AlgebraElement conjugate(const GroupElement& p, const AlgebraElement& m);

double frobenius_distance(const Mat2& x, const Mat2& y);
double frobenius_distance(const GroupElement& x, const GroupElement& y);

void to_json(nlohmann::json& j, const AlgebraElement& m);
void from_json(const nlohmann::json& j, AlgebraElement& m);
void to_json(nlohmann::json& j, const GroupElement& g);
void from_json(const nlohmann::json& j, GroupElement& g);

}  // namespace su11
