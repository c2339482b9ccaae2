#include "su11/controllability.hpp"

#include <algorithm>
#include <cmath>

namespace su11 {

namespace {

bool is_zero(double v) { return std::abs(v) <= kBoundaryBand; }

double disc(double alpha, double beta, double gamma) { return alpha * alpha - beta * gamma; }

bool disc_zero(double alpha, double beta, double gamma) {
    double scale = std::max({1.0, alpha * alpha, std::abs(beta * gamma)});
    return std::abs(disc(alpha, beta, gamma)) <= kBoundaryBand * scale;
}

}  // namespace

SystemSpec SystemSpec::make(const AlgebraElement& a, const AlgebraElement& b) {
    auto inv = scalar_invariants(a, b);
    return {a, b, inv.alpha, inv.beta, inv.gamma};
}

ScalarInvariants scalar_invariants(const AlgebraElement& a, const AlgebraElement& b) {
    return {inner_dagger(a, b), inner_dagger(a, a), inner_dagger(b, b)};
}

std::string to_string(TableRow r) {
    switch (r) {
        case TableRow::Dependent: return "dependent";
        case TableRow::A0_GNeg_B0: return "α=0, γ<0, β=0";
        case TableRow::A0_GNeg_BNonzero: return "α=0, γ<0, β≠0";
        case TableRow::A0_G0: return "α=0, γ=0";
        case TableRow::A0_GPos_BNeg: return "α=0, γ>0, β<0";
        case TableRow::A0_GPos_BNonneg: return "α=0, γ>0, β≥0";
        case TableRow::ANonzero_GNonpos: return "α≠0, γ≤0";
        case TableRow::ANonzero_GPos_BNonpos: return "α≠0, γ>0, β≤0";
        case TableRow::ANonzero_GPos_BPos_DiscNonpos: return "α≠0, γ>0, β>0, α²−βγ≤0";
        case TableRow::ANonzero_GPos_BPos_DiscPos: return "α≠0, γ>0, β>0, α²−βγ>0";
    }
    return "?";
}

bool row_controllable(TableRow r) {
    switch (r) {
        case TableRow::A0_GNeg_BNonzero:
        case TableRow::A0_GPos_BNeg:
        case TableRow::ANonzero_GNonpos:
        case TableRow::ANonzero_GPos_BNonpos:
        case TableRow::ANonzero_GPos_BPos_DiscPos: return true;
        default: return false;
    }
}

NegativitySet negativity_set_nonempty(double alpha, double beta, double gamma) {
    NegativitySet out;
    if (is_zero(gamma)) {
        if (!is_zero(alpha)) {
            out.nonempty = true;
            out.witness_u = -(beta + 1.0) / (2.0 * alpha);  // q = -1
        } else if (beta < -kBoundaryBand) {
            out.nonempty = true;
            out.witness_u = 0.0;
        }
        return out;
    }
    double vertex = -alpha / gamma;
    double qv = beta - alpha * alpha / gamma;  // q(vertex)
    if (gamma > 0) {
        if (disc(alpha, beta, gamma) > 0 && !disc_zero(alpha, beta, gamma)) {
            out.nonempty = true;
            out.witness_u = vertex;
        }
        return out;
    }
    // concave parabola: step past the larger root
    out.nonempty = true;
    out.witness_u = vertex + std::sqrt(std::max(0.0, qv) / -gamma) + 1.0;
    return out;
}

TableRow table_row(double alpha, double beta, double gamma) {
    if (is_zero(alpha)) {
        if (is_zero(gamma)) return TableRow::A0_G0;
        if (gamma < 0) return is_zero(beta) ? TableRow::A0_GNeg_B0 : TableRow::A0_GNeg_BNonzero;
        return (beta < 0 && !is_zero(beta)) ? TableRow::A0_GPos_BNeg : TableRow::A0_GPos_BNonneg;
    }
    if (gamma < 0 || is_zero(gamma)) return TableRow::ANonzero_GNonpos;
    if (beta < 0 || is_zero(beta)) return TableRow::ANonzero_GPos_BNonpos;
    if (disc(alpha, beta, gamma) > 0 && !disc_zero(alpha, beta, gamma))
        return TableRow::ANonzero_GPos_BPos_DiscPos;
    return TableRow::ANonzero_GPos_BPos_DiscNonpos;
}

bool linearly_dependent(const AlgebraElement& a, const AlgebraElement& b, double tol) {
    double m1 = a.x * b.y - a.y * b.x;
    double m2 = a.x * b.z - a.z * b.x;
    double m3 = a.y * b.z - a.z * b.y;
    double largest = std::max({std::abs(m1), std::abs(m2), std::abs(m3)});
    return largest <= tol * std::max(1e-300, a.norm() * b.norm());
}

ControllabilityVerdict is_controllable(const AlgebraElement& a, const AlgebraElement& b) {
    ControllabilityVerdict v;
    auto inv = scalar_invariants(a, b);
    v.alpha = inv.alpha;
    v.beta = inv.beta;
    v.gamma = inv.gamma;
    auto neg = negativity_set_nonempty(v.alpha, v.beta, v.gamma);
    v.witness_u = neg.witness_u;

    auto near = [](double x) { return x != 0.0 && std::abs(x) <= 1e3 * kBoundaryBand; };
    v.near_boundary = near(v.alpha) || near(v.beta) || near(v.gamma) ||
                      (disc(v.alpha, v.beta, v.gamma) != 0.0 &&
                       std::abs(disc(v.alpha, v.beta, v.gamma)) <=
                           1e3 * kBoundaryBand * std::max({1.0, v.alpha * v.alpha, std::abs(v.beta * v.gamma)}));

    if (linearly_dependent(a, b)) {
        v.reason = TableRow::Dependent;
        v.controllable = false;
        return v;
    }
    v.reason = table_row(v.alpha, v.beta, v.gamma);
    v.controllable = row_controllable(v.reason);
    return v;
}

}  // namespace su11
