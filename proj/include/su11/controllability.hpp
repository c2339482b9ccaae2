#pragma once

#include <optional>
#include <string>

#include "su11/algebra.hpp"

namespace su11 {

struct SystemSpec {
    AlgebraElement A;  // drift
    AlgebraElement B;  // control direction
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;

    static SystemSpec make(const AlgebraElement& a, const AlgebraElement& b);
};

struct ScalarInvariants {
    double alpha, beta, gamma;
};

ScalarInvariants scalar_invariants(const AlgebraElement& a, const AlgebraElement& b);

// Rows of the controllability table, plus the dependence verdict.
enum class TableRow {
    Dependent,
    A0_GNeg_B0,
    A0_GNeg_BNonzero,
    A0_G0,
    A0_GPos_BNeg,
    A0_GPos_BNonneg,
    ANonzero_GNonpos,
    ANonzero_GPos_BNonpos,
    ANonzero_GPos_BPos_DiscNonpos,
    ANonzero_GPos_BPos_DiscPos,
};

std::string to_string(TableRow r);
bool row_controllable(TableRow r);

struct NegativitySet {
    bool nonempty = false;
    std::optional<double> witness_u;
};

constexpr double kBoundaryBand = 1e-12;

// Is {u : gamma u^2 + 2 alpha u + beta < 0} nonempty?
NegativitySet negativity_set_nonempty(double alpha, double beta, double gamma);

TableRow table_row(double alpha, double beta, double gamma);

struct ControllabilityVerdict {
    bool controllable = false;
    TableRow reason = TableRow::Dependent;
    std::optional<double> witness_u;
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    // Some invariant lies within the equality band of a table boundary.
    bool near_boundary = false;
};

bool linearly_dependent(const AlgebraElement& a, const AlgebraElement& b, double tol = 1e-12);

ControllabilityVerdict is_controllable(const AlgebraElement& a, const AlgebraElement& b);

}  // namespace su11
