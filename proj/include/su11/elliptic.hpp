#pragma once

#include <array>
#include <complex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace su11 {

using cplx = std::complex<double>;

struct PoleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateLatticeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr double kDegenerateBand = 1e-10;

// Roots of 4t^3 - g2 t - g3. Three real roots: e1 > e2 > e3. One real root: e2 is real and
// e1 = conj(e3) with Im e1 > 0.
struct WeierstrassInvariants {
    double g2 = 0.0;
    double g3 = 0.0;
    double discriminant = 0.0;  // g2^3 - 27 g3^2
    std::array<cplx, 3> roots{};

    static WeierstrassInvariants make(double g2, double g3);
    // |discriminant| within the relative band of max(|g2|^3, 27 g3^2).
    bool degenerate(double band = kDegenerateBand) const;
};

// omega1 is the real half-period; Im(omega2 / omega1) > 0.
struct LatticeData {
    cplx omega1;
    cplx omega2;
};

// Carlson's symmetric integral R_F(x, y, z) for complex arguments off the negative real axis.
cplx carlson_rf(cplx x, cplx y, cplx z);

class Weierstrass {
public:
    // Throws DegenerateLatticeError when the discriminant is inside the band.
    Weierstrass(double g2, double g3, double pole_radius = 1e-4);

    const WeierstrassInvariants& invariants() const { return inv_; }
    const LatticeData& lattice() const { return lat_; }
    double pole_radius() const { return pole_radius_; }
    // Length of the shortest nonzero period.
    double shortest_period() const { return rho_; }

    cplx wp(cplx z) const { return wp_both(z).first; }
    cplx wp_prime(cplx z) const { return wp_both(z).second; }
    // (wp, wp') with a pole check; `check_pole = false` evaluates right up to the lattice point.
    std::pair<cplx, cplx> wp_both(cplx z, bool check_pole = true) const;

    // Some z with wp(z) = w; representative nearest `hint`, else smallest |Im z| then |Re z|.
    cplx inverse(cplx w, std::optional<cplx> hint = std::nullopt) const;
    // The solution of wp(z) = w whose derivative matches `slope` in sign (z vs -z).
    cplx inverse_with_slope(cplx w, cplx slope) const;

    // Representative of z in the centred fundamental parallelogram.
    cplx reduce(cplx z) const;
    // Distance from z to the nearest lattice point.
    double lattice_distance(cplx z) const;
    // Is z - y a period (to `tol`)?
    bool congruent(cplx z, cplx y, double tol = 1e-7) const;
    // Real t in [lo, hi] with t = d modulo the lattice, ascending.
    std::vector<double> real_congruences(cplx d, double lo, double hi, double tol = 1e-7) const;
    // The half-period h in {omega1, omega2, omega1 + omega2} with wp(h) closest to e.
    cplx half_period_for(cplx e) const;

private:
    std::pair<cplx, cplx> series_double(cplx z) const;
    std::pair<double, double> coords(cplx z) const;  // z = s 2w1 + r 2w2

    WeierstrassInvariants inv_;
    LatticeData lat_;
    double pole_radius_;
    double rho_ = 0.0;
    std::vector<double> laurent_;  // c_k for k = 2..K
};

// Free-function surface; each call builds the lattice.
cplx wp(cplx z, const WeierstrassInvariants& inv);
cplx wp_prime(cplx z, const WeierstrassInvariants& inv);
cplx wp_inverse(cplx w, const WeierstrassInvariants& inv, std::optional<cplx> branch_hint = std::nullopt);
LatticeData half_periods(const WeierstrassInvariants& inv);

// CSV rows z_re,z_im,wp_re,wp_im over a grid on the fundamental parallelogram.
void dump_wp_csv(std::ostream& os, const Weierstrass& w, int n_per_side);

}  // namespace su11
