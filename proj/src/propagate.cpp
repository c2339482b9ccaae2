#include "su11/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace su11 {

namespace {

constexpr double kPi = std::numbers::pi;

// Segment boundaries: 0, the switch times inside (0, T), T.
std::vector<double> segment_bounds(const ControlLaw& law, double T) {
    std::vector<double> b{0.0};
    std::vector<double> sw = law.switch_times;
    std::sort(sw.begin(), sw.end());
    for (double s : sw)
        if (s > b.back() + 1e-14 * std::max(1.0, T) && s < T - 1e-14 * std::max(1.0, T)) b.push_back(s);
    b.push_back(T);
    return b;
}

void check_poles(const ControlLaw& law, double T) {
    if (!law.poles) return;
    auto p = law.poles(0.0, T);
    if (!p.empty())
        throw PoleError("control law has a pole in the propagation window at t = " + std::to_string(p.front()));
}

// Walks the snapped grid; `visit(t, u_left_or_right, X, is_boundary_left)` receives every sample.
template <class Visit>
GroupElement walk(const AlgebraElement& a, const AlgebraElement& b, const ControlLaw& law, double T, double step,
                  Visit&& visit) {
    if (!(T >= 0.0)) throw std::invalid_argument("propagate: T must be nonnegative");
    if (!(step > 0.0)) throw std::invalid_argument("propagate: step must be positive");
    check_poles(law, T);
    auto bounds = segment_bounds(law, T);
    Mat2 x = Mat2::Identity();
    for (size_t k = 0; k + 1 < bounds.size(); ++k) {
        double s0 = bounds[k], s1 = bounds[k + 1];
        double len = s1 - s0;
        int n = std::max(1, static_cast<int>(std::ceil(len / step - 1e-9)));
        double h = len / n;
        double nudge = 1e-9 * h;
        // right limit at the segment start
        visit(s0, law.u(s0 + (k == 0 ? 0.0 : nudge)), x, false);
        for (int i = 0; i < n; ++i) {
            double t = s0 + i * h;
            double um = law.u(t + 0.5 * h);
            x = expm_matrix(h * (a + um * b)) * x;
            double tn = (i + 1 == n) ? s1 : s0 + (i + 1) * h;
            bool last = i + 1 == n;
            double un = law.u(last ? tn - (k + 2 == bounds.size() ? 0.0 : nudge) : tn);
            visit(tn, un, x, last && k + 2 < bounds.size());
        }
    }
    return GroupElement::unchecked(x);
}

}  // namespace

ControlLaw ControlLaw::constant(double value) {
    ControlLaw l;
    l.u = [value](double) { return value; };
    return l;
}

ControlLaw ControlLaw::from(const ExtremalControl& law) {
    ControlLaw l;
    auto shared = std::make_shared<ExtremalControl>(law);
    l.u = [shared](double t) { return shared->evaluate(t); };
    l.poles = [shared](double lo, double hi) { return shared->poles(lo, hi); };
    return l;
}

ControlLaw ControlLaw::from(std::function<double(double)> f) {
    ControlLaw l;
    l.u = std::move(f);
    return l;
}

Trajectory propagate(const AlgebraElement& a, const AlgebraElement& b, const ControlLaw& law, double T, double step) {
    Trajectory tr;
    size_t est = static_cast<size_t>(T / step) + law.switch_times.size() * 2 + 4;
    tr.times.reserve(est);
    tr.states.reserve(est);
    tr.controls.reserve(est);
    tr.cost_to_date.reserve(est);
    if (T == 0.0) {
        tr.times.push_back(0.0);
        tr.states.emplace_back();
        tr.controls.push_back(law.u(0.0));
        tr.cost_to_date.push_back(0.0);
        return tr;
    }
    double acc = 0.0;
    walk(a, b, law, T, step, [&](double t, double u, const Mat2& x, bool) {
        if (!tr.times.empty()) acc += 0.5 * (t - tr.times.back()) * (u * u + tr.controls.back() * tr.controls.back());
        tr.times.push_back(t);
        tr.states.push_back(GroupElement::unchecked(x));
        tr.controls.push_back(u);
        tr.cost_to_date.push_back(acc);
    });
    return tr;
}

GroupElement propagate_terminal(const AlgebraElement& a, const AlgebraElement& b, const ControlLaw& law, double T,
                                double step) {
    if (T == 0.0) return GroupElement();
    return walk(a, b, law, T, step, [](double, double, const Mat2&, bool) {});
}

double cost(const Trajectory& traj) { return traj.cost_to_date.empty() ? 0.0 : traj.cost_to_date.back(); }

double trapezoid_cost(const std::vector<double>& t, const std::vector<double>& u) {
    double acc = 0.0;
    for (size_t i = 1; i < t.size() && i < u.size(); ++i) acc += 0.5 * (t[i] - t[i - 1]) * (u[i] * u[i] + u[i - 1] * u[i - 1]);
    return acc;
}

// ---------------------------------------------------------------- baseline

namespace {

double coth_sqrt2() { return 1.0 / std::tanh(std::sqrt(2.0)); }

double baseline_t1(double c) {
    double k = coth_sqrt2();
    double arg = -c * k - std::sqrt(c * c * k * k - 1.0);
    // arccot with range (0, pi)
    double v = std::atan(1.0 / arg);
    if (v <= 0) v += kPi;
    return 2.0 * v;
}

double baseline_t2(double c) {
    double k = coth_sqrt2();
    double r = std::sqrt(c * c - 1.0);
    return 2.0 / r * std::atanh(r / std::sqrt(c * c * k * k - 1.0));
}

}  // namespace

double BaselineLaw::on_time() const { return t1 + 2.0 * kPi * n1; }
double BaselineLaw::off_time() const { return on_time() + t2; }
double BaselineLaw::total_time() const { return off_time() + t1 + 2.0 * kPi * n2; }

double BaselineLaw::u(double t) const { return (t >= on_time() && t < off_time()) ? c / std::sqrt(2.0) : 0.0; }

ControlLaw BaselineLaw::law() const {
    ControlLaw l;
    BaselineLaw self = *this;
    l.u = [self](double t) { return self.u(t); };
    l.switch_times = {on_time(), off_time()};
    return l;
}

double baseline_cost(double c) {
    if (!(c > 1.0)) throw std::domain_error("baseline: c must exceed 1");
    return 0.5 * c * c * baseline_t2(c);
}

double baseline_cost_limit() {
    double k = coth_sqrt2();
    return 1.0 / std::sqrt(k * k - 1.0);
}

BaselineResult baseline(double c, int n1, int n2) {
    if (!(c > 1.0)) throw std::domain_error("baseline: c must exceed 1");
    if (n1 < 0 || n2 < 0) throw std::domain_error("baseline: n1, n2 must be nonnegative");
    if ((n1 + n2) % 2 != 0)
        throw std::domain_error("baseline: n1 + n2 must be even (odd parity reaches -X_f, since exp(2 pi Kz) = -I)");
    BaselineLaw l{c, baseline_t1(c), baseline_t2(c), n1, n2};
    return {l, baseline_cost(c)};
}

AlgebraElement baseline_drift() { return {0.0, 0.0, 1.0}; }
AlgebraElement baseline_control() { return {-1.0, 1.0, 0.0}; }
GroupElement baseline_target() { return expm(AlgebraElement{-2.0, 2.0, 0.0}); }

// ---------------------------------------------------------------- series, csv

std::vector<double> distance_series(Trajectory& traj, const GroupElement& xf) {
    std::vector<double> d;
    d.reserve(traj.states.size());
    for (const auto& x : traj.states) d.push_back(frobenius_distance(x, xf));
    traj.distance_to_target = d;
    return d;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,u,X11_re,X11_im,X12_re,X12_im,X21_re,X21_im,X22_re,X22_im,dist,cost\n";
    std::ostringstream line;
    line << std::setprecision(17);
    for (size_t i = 0; i < traj.size(); ++i) {
        line.str("");
        const Mat2& m = traj.states[i].matrix();
        line << traj.times[i] << ',' << traj.controls[i];
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) line << ',' << m(r, c).real() << ',' << m(r, c).imag();
        line << ',';
        if (traj.distance_to_target) line << (*traj.distance_to_target)[i];
        line << ',' << traj.cost_to_date[i] << '\n';
        os << line.str();
    }
}

CsvRows read_csv(std::istream& is) {
    CsvRows out;
    std::string line;
    if (!std::getline(is, line)) return out;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.header.push_back(cell);
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            row.push_back(cell.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(cell));
        if (!line.empty() && line.back() == ',') row.push_back(std::numeric_limits<double>::quiet_NaN());
        out.rows.push_back(std::move(row));
    }
    return out;
}

RichardsonReport richardson(const AlgebraElement& a, const AlgebraElement& b, const ControlLaw& law, double T,
                            double step) {
    RichardsonReport r;
    r.coarse = propagate_terminal(a, b, law, T, step);
    r.fine = propagate_terminal(a, b, law, T, step / 2);
    r.finest = propagate_terminal(a, b, law, T, step / 4);
    // successive differences: (3/4) C h^2 and (3/16) C h^2 for a second-order scheme
    r.err_coarse = frobenius_distance(r.coarse, r.fine);
    r.err_fine = frobenius_distance(r.fine, r.finest);
    r.ratio = r.err_fine > 0 ? r.err_coarse / r.err_fine : std::numeric_limits<double>::infinity();
    r.extrapolated = GroupElement::unchecked((4.0 * r.fine.matrix() - r.coarse.matrix()) / 3.0);
    return r;
}

}  // namespace su11
