#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "su11/algebra.hpp"
#include "su11/synthesis.hpp"

namespace su11 {

constexpr double kDefaultStep = 1e-3;

// A control u(t) with optional switch times (the integrator grid is snapped to them) and an optional
// pole locator used to reject windows containing a singularity.
struct ControlLaw {
    std::function<double(double)> u;
    std::vector<double> switch_times;
    std::function<std::vector<double>(double, double)> poles;

    static ControlLaw constant(double value);
    static ControlLaw from(const ExtremalControl& law);
    static ControlLaw from(std::function<double(double)> f);
};

// Samples at a switch time appear twice (left and right limits, same time and state), so the
// trapezoid rule over the rows is exact across discontinuities.
struct Trajectory {
    std::vector<double> times;
    std::vector<GroupElement> states;
    std::vector<double> controls;
    std::vector<double> cost_to_date;
    std::optional<std::vector<double>> distance_to_target;

    const GroupElement& terminal() const { return states.back(); }
    double cost() const { return cost_to_date.back(); }
    size_t size() const { return times.size(); }
};

// dX/dt = (A + u B) X, X(0) = I; one step is X <- exp(h (A + u(t + h/2) B)) X.
Trajectory propagate(const AlgebraElement& a, const AlgebraElement& b, const ControlLaw& law, double T,
                     double step = kDefaultStep);
// Terminal state only (no sample storage).
GroupElement propagate_terminal(const AlgebraElement& a, const AlgebraElement& b, const ControlLaw& law, double T,
                                double step = kDefaultStep);

double cost(const Trajectory& traj);

// Trapezoid on (t, u) rows, the same rule that produces Trajectory::cost_to_date.
double trapezoid_cost(const std::vector<double>& t, const std::vector<double>& u);

// Piecewise constant law: 0 on [0, t1 + 2 pi n1), c/sqrt(2) for t2, then 0 for t1 + 2 pi n2.
struct BaselineLaw {
    double c = 0.0, t1 = 0.0, t2 = 0.0;
    int n1 = 1, n2 = 1;

    double on_time() const;
    double off_time() const;
    double total_time() const;
    double u(double t) const;
    ControlLaw law() const;
};

struct BaselineResult {
    BaselineLaw law;
    double J = 0.0;
};

// Requires c > 1 and n1 + n2 even (odd parity lands on -X_f); throws std::domain_error otherwise.
BaselineResult baseline(double c, int n1, int n2);
// Closed-form cost c^2 t2 / 2, valid for c > 1.
double baseline_cost(double c);
// lim_{c -> 1+} of baseline_cost.
double baseline_cost_limit();
// The system and target the baseline is built for: A = Kz, B = -Kx + Ky, X_f = exp(-2Kx + 2Ky).
AlgebraElement baseline_drift();
AlgebraElement baseline_control();
GroupElement baseline_target();

// Fills traj.distance_to_target and returns it.
std::vector<double> distance_series(Trajectory& traj, const GroupElement& xf);

// Columns t,u,X11_re,X11_im,X12_re,X12_im,X21_re,X21_im,X22_re,X22_im,dist,cost (dist empty when unset).
void write_csv(std::ostream& os, const Trajectory& traj);

struct CsvRows {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;  // NaN for empty cells
};
CsvRows read_csv(std::istream& is);

// Step-halving check of the terminal state: |X_h - X_{h/2}| and |X_{h/2} - X_{h/4}|.
struct RichardsonReport {
    GroupElement coarse, fine, finest;
    double err_coarse = 0.0, err_fine = 0.0;
    double ratio = 0.0;           // err_coarse / err_fine, about 4 for a second-order scheme
    GroupElement extrapolated;    // (4 fine - coarse) / 3, not re-projected onto the group
};
RichardsonReport richardson(const AlgebraElement& a, const AlgebraElement& b, const ControlLaw& law, double T,
                            double step = kDefaultStep);

}  // namespace su11
