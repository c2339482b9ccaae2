#include "su11/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>

namespace su11 {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kLaurentTerms = 24;

cplx cubic(cplx t, double g2, double g3) { return 4.0 * t * t * t - g2 * t - g3; }
cplx cubic_d(cplx t, double g2) { return 12.0 * t * t - g2; }

cplx polish(cplx t, double g2, double g3) {
    for (int i = 0; i < 4; ++i) {
        cplx d = cubic_d(t, g2);
        if (std::abs(d) < 1e-14 * (1.0 + std::abs(g2))) break;
        cplx step = cubic(t, g2, g3) / d;
        t -= step;
        if (std::abs(step) <= 1e-16 * (1.0 + std::abs(t))) break;
    }
    return t;
}

}  // namespace

WeierstrassInvariants WeierstrassInvariants::make(double g2, double g3) {
    WeierstrassInvariants inv;
    inv.g2 = g2;
    inv.g3 = g3;
    inv.discriminant = g2 * g2 * g2 - 27.0 * g3 * g3;
    // t^3 + p t + q = 0
    double p = -g2 / 4.0, q = -g3 / 4.0;
    if (inv.discriminant >= 0.0 && p < 0.0) {
        double r = 2.0 * std::sqrt(-p / 3.0);
        double arg = std::clamp((3.0 * q / (2.0 * p)) * std::sqrt(-3.0 / p), -1.0, 1.0);
        double phi = std::acos(arg) / 3.0;
        std::array<double, 3> t{r * std::cos(phi), r * std::cos(phi - 2.0 * kPi / 3.0),
                                r * std::cos(phi - 4.0 * kPi / 3.0)};
        std::sort(t.begin(), t.end(), std::greater<>());
        for (int k = 0; k < 3; ++k) inv.roots[k] = cplx(polish(t[k], g2, g3).real(), 0.0);
    } else {
        double s = std::sqrt(std::max(0.0, q * q / 4.0 + p * p * p / 27.0));
        double real = std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s);
        real = polish(real, g2, g3).real();
        double im = 0.5 * std::sqrt(std::max(0.0, 3.0 * real * real + 4.0 * p));
        cplx e1 = polish(cplx(-real / 2.0, im), g2, g3);
        e1 = cplx(-real / 2.0, std::abs(e1.imag()));  // keep the exact conjugate structure
        inv.roots = {e1, cplx(real, 0.0), std::conj(e1)};
    }
    return inv;
}

bool WeierstrassInvariants::degenerate(double band) const {
    double scale = std::max(std::abs(g2 * g2 * g2), 27.0 * g3 * g3);
    if (scale == 0.0) return true;
    return std::abs(discriminant) <= band * scale;
}

cplx carlson_rf(cplx x, cplx y, cplx z) {
    constexpr double kTol = 1e-3;
    cplx ave;
    for (int it = 0; it < 200; ++it) {
        cplx sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z);
        cplx lam = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        ave = (x + y + z) / 3.0;
        double d = std::max({std::abs((ave - x) / ave), std::abs((ave - y) / ave), std::abs((ave - z) / ave)});
        if (d < kTol) break;
    }
    cplx dx = (ave - x) / ave, dy = (ave - y) / ave, dz = (ave - z) / ave;
    cplx e2 = dx * dy - dz * dz, e3 = dx * dy * dz;
    return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / std::sqrt(ave);
}

Weierstrass::Weierstrass(double g2, double g3, double pole_radius)
    : inv_(WeierstrassInvariants::make(g2, g3)), pole_radius_(pole_radius) {
    if (!std::isfinite(g2) || !std::isfinite(g3)) throw std::invalid_argument("non-finite invariants");
    if (inv_.degenerate()) throw DegenerateLatticeError("Weierstrass lattice degenerates (discriminant ~ 0)");
    const auto& e = inv_.roots;
    if (inv_.discriminant > 0) {
        double e1 = e[0].real(), e2 = e[1].real(), e3 = e[2].real();
        lat_.omega1 = carlson_rf(0.0, e1 - e2, e1 - e3).real();
        lat_.omega2 = cplx(0.0, carlson_rf(e1 - e3, e2 - e3, 0.0).real());
    } else {
        lat_.omega1 = carlson_rf(e[1] - e[0], 0.0, e[1] - e[2]).real();
        lat_.omega2 = carlson_rf(0.0, e[0] - e[1], e[0] - e[2]);
        if (lat_.omega2.imag() < 0) lat_.omega2 = -lat_.omega2;
    }
    cplx p1 = 2.0 * lat_.omega1, p2 = 2.0 * lat_.omega2;
    rho_ = std::min({std::abs(p1), std::abs(p2), std::abs(p1 + p2), std::abs(p1 - p2)});

    laurent_.assign(kLaurentTerms + 1, 0.0);
    laurent_[2] = g2 / 20.0;
    laurent_[3] = g3 / 28.0;
    for (int k = 4; k <= kLaurentTerms; ++k) {
        double s = 0.0;
        for (int m = 2; m <= k - 2; ++m) s += laurent_[m] * laurent_[k - m];
        laurent_[k] = 3.0 * s / ((2.0 * k + 1.0) * (k - 3.0));
    }
}

std::pair<double, double> Weierstrass::coords(cplx z) const {
    cplx p1 = 2.0 * lat_.omega1, p2 = 2.0 * lat_.omega2;
    double det = p1.real() * p2.imag() - p2.real() * p1.imag();
    double s = (z.real() * p2.imag() - p2.real() * z.imag()) / det;
    double r = (p1.real() * z.imag() - z.real() * p1.imag()) / det;
    return {s, r};
}

cplx Weierstrass::reduce(cplx z) const {
    auto [s, r] = coords(z);
    z -= std::round(s) * 2.0 * lat_.omega1 + std::round(r) * 2.0 * lat_.omega2;
    // the nearest lattice point may be a neighbour of the rounded one in a skewed basis
    cplx best = z;
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j) {
            cplx c = z - (double(i) * 2.0 * lat_.omega1 + double(j) * 2.0 * lat_.omega2);
            if (std::abs(c) < std::abs(best) - 1e-15) best = c;
        }
    return best;
}

double Weierstrass::lattice_distance(cplx z) const { return std::abs(reduce(z)); }

bool Weierstrass::congruent(cplx z, cplx y, double tol) const {
    return lattice_distance(z - y) <= tol * std::max(1.0, rho_);
}

std::pair<cplx, cplx> Weierstrass::series_double(cplx z) const {
    int n = 0;
    double r0 = rho_ / 3.0;
    double mag = std::abs(z);
    while (mag > r0) {
        mag *= 0.5;
        ++n;
    }
    cplx s = std::ldexp(1.0, -n) * z;
    cplx s2 = s * s;
    cplx x = 1.0 / s2, y = -2.0 / (s2 * s);
    cplx pw = s2;  // s^{2k-2}
    for (int k = 2; k <= kLaurentTerms; ++k) {
        x += laurent_[k] * pw;
        y += (2.0 * k - 2.0) * laurent_[k] * pw / s;
        pw *= s2;
    }
    for (int j = 0; j < n; ++j) {
        cplx lam = (12.0 * x * x - inv_.g2) / (2.0 * y);
        cplx x2 = 0.25 * lam * lam - 2.0 * x;
        cplx y2 = -lam * (x2 - x) - y;
        x = x2;
        y = y2;
    }
    return {x, y};
}

std::pair<cplx, cplx> Weierstrass::wp_both(cplx z, bool check_pole) const {
    cplx zr = reduce(z);
    if (check_pole && std::abs(zr) < pole_radius_ * rho_)
        throw PoleError("wp: argument within pole radius of a lattice point");
    if (zr == cplx(0.0)) {
        double inf = std::numeric_limits<double>::infinity();
        return {cplx(inf, 0.0), cplx(inf, 0.0)};
    }
    return series_double(zr);
}

cplx Weierstrass::half_period_for(cplx e) const {
    std::array<cplx, 3> h{lat_.omega1, lat_.omega2, lat_.omega1 + lat_.omega2};
    cplx best = h[0];
    double bd = std::numeric_limits<double>::infinity();
    for (auto c : h) {
        double d = std::abs(wp_both(c, false).first - e);
        if (d < bd) {
            bd = d;
            best = c;
        }
    }
    return best;
}

namespace {

bool on_negative_axis(cplx v) { return v.imag() == 0.0 && v.real() < 0.0; }

}  // namespace

cplx Weierstrass::inverse(cplx w, std::optional<cplx> hint) const {
    if (std::isnan(w.real()) || std::isnan(w.imag())) throw std::invalid_argument("wp_inverse: NaN argument");
    const auto& e = inv_.roots;
    double scale = 1.0 + std::abs(w) + std::abs(e[0]) + std::abs(e[1]);
    cplx z;
    if (std::isinf(w.real()) || std::isinf(w.imag())) {
        z = 0.0;
    } else {
        cplx x = w - e[0], y = w - e[1], u = w - e[2];
        if (on_negative_axis(x) || on_negative_axis(y) || on_negative_axis(u)) {
            cplx eps(0.0, 1e-30 * scale);
            x += eps;
            y += eps;
            u += eps;
        }
        z = carlson_rf(x, y, u);
        // Newton polish
        for (int it = 0; it < 8; ++it) {
            auto [f, fp] = wp_both(z, false);
            cplx r = f - w;
            if (std::abs(r) <= 1e-15 * (1.0 + std::abs(w))) break;
            if (std::abs(fp) < 1e-6 * std::sqrt(1.0 + std::abs(w))) break;  // near a half-period
            z -= r / fp;
        }
        auto [f, fp] = wp_both(z, false);
        if (!(std::abs(f - w) <= 1e-9 * std::max(1.0, std::abs(w)))) {
            // fall back to a grid search over the fundamental parallelogram
            double best = std::numeric_limits<double>::infinity();
            const int n = 40;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    cplx c = (i + 0.5) / n * 2.0 * lat_.omega1 + (j + 0.5) / n * 2.0 * lat_.omega2;
                    double d = std::abs(wp_both(c, false).first - w);
                    if (d < best) {
                        best = d;
                        z = c;
                    }
                }
            for (int it = 0; it < 50; ++it) {
                auto [g, gp] = wp_both(z, false);
                if (std::abs(gp) == 0.0) break;
                cplx step = (g - w) / gp;
                z -= step;
                if (std::abs(step) < 1e-15 * rho_) break;
            }
        }
    }

    // choose the representative
    std::vector<cplx> reps;
    for (cplx base : {reduce(z), reduce(-z)})
        for (int i = -1; i <= 1; ++i)
            for (int j = -1; j <= 1; ++j)
                reps.push_back(base + double(i) * 2.0 * lat_.omega1 + double(j) * 2.0 * lat_.omega2);
    if (hint) {
        return *std::min_element(reps.begin(), reps.end(), [&](cplx a, cplx b) {
            return std::abs(a - *hint) < std::abs(b - *hint);
        });
    }
    // only the two centred representatives are eligible for the default rule
    cplx a = reduce(z), b = reduce(-z);
    double tol = 1e-12 * rho_;
    auto better = [&](cplx p, cplx q) {
        if (std::abs(std::abs(p.imag()) - std::abs(q.imag())) > tol) return std::abs(p.imag()) < std::abs(q.imag());
        if (std::abs(std::abs(p.real()) - std::abs(q.real())) > tol) return std::abs(p.real()) < std::abs(q.real());
        if (std::abs(p.real() - q.real()) > tol) return p.real() > q.real();
        return p.imag() >= q.imag();
    };
    return better(a, b) ? a : b;
}

cplx Weierstrass::inverse_with_slope(cplx w, cplx slope) const {
    cplx z = inverse(w);
    if (std::isinf(w.real())) return 0.0;
    cplx d = wp_both(z, false).second;
    if (std::abs(d - slope) > std::abs(-d - slope)) z = reduce(-z);
    return z;
}

std::vector<double> Weierstrass::real_congruences(cplx d, double lo, double hi, double tol) const {
    std::vector<double> out;
    cplx p1 = 2.0 * lat_.omega1, p2 = 2.0 * lat_.omega2;
    double n = -d.imag() / p2.imag();
    double nr = std::round(n);
    if (std::abs(n - nr) * std::abs(p2.imag()) > tol * std::max(1.0, rho_)) return out;
    double base = d.real() + nr * p2.real();
    double per = p1.real();
    double m0 = std::ceil((lo - base) / per - 1e-12);
    for (double m = m0;; m += 1.0) {
        double t = base + m * per;
        if (t > hi) break;
        if (t >= lo) out.push_back(t);
    }
    return out;
}

cplx wp(cplx z, const WeierstrassInvariants& inv) { return Weierstrass(inv.g2, inv.g3).wp(z); }
cplx wp_prime(cplx z, const WeierstrassInvariants& inv) { return Weierstrass(inv.g2, inv.g3).wp_prime(z); }
cplx wp_inverse(cplx w, const WeierstrassInvariants& inv, std::optional<cplx> hint) {
    return Weierstrass(inv.g2, inv.g3).inverse(w, hint);
}
LatticeData half_periods(const WeierstrassInvariants& inv) { return Weierstrass(inv.g2, inv.g3).lattice(); }

void dump_wp_csv(std::ostream& os, const Weierstrass& w, int n) {
    os << "z_re,z_im,wp_re,wp_im\n";
    os << std::setprecision(17);
    const auto& lat = w.lattice();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            cplx z = (double(i) + 0.5) / n * 2.0 * lat.omega1 + (double(j) + 0.5) / n * 2.0 * lat.omega2;
            z = w.reduce(z);
            cplx v = w.wp_both(z, false).first;
            os << z.real() << ',' << z.imag() << ',' << v.real() << ',' << v.imag() << '\n';
        }
}

}  // namespace su11
