#include "llob/pde.hpp"

#include <algorithm>
#include <cmath>

namespace llob::pde {

namespace {

constexpr double kCfl = 0.4;

/// Bracketing cell [i, i+1] of p located by comparisons (mirror-exact).
int bracket_index(const std::vector<double>& x, double p, int hint) {
    const int n = static_cast<int>(x.size()) - 1;
    int i = std::clamp(hint, 0, n - 1);
    while (i > 0 && p < x[i]) --i;
    while (i < n - 1 && p >= x[i + 1]) ++i;
    return i;
}

/// Zero of the line through (xa, fa), (xb, fb); weighted form negates exactly
/// under (x, f) -> (-x, -f).
double line_zero(double xa, double fa, double xb, double fb) {
    return (xa * fb - xb * fa) / (fb - fa);
}

struct Crossing {
    double z = 0.0;
    double dist = 0.0;
    bool found = false;
};

Crossing scan_cells(const std::vector<double>& x, const std::vector<double>& rho, int lo,
                    int hi, double p_prev) {
    Crossing best;
    for (int i = lo; i <= hi; ++i) {
        const double a = rho[i], b = rho[i + 1];
        if (a == b || a * b > 0.0) {
            continue;
        }
        const double z = line_zero(x[i], a, x[i + 1], b);
        const double dist = std::abs(z - p_prev);
        if (!best.found || dist < best.dist) {
            best = {z, dist, true};
        }
    }
    return best;
}

/// Zero crossing of rho nearest to p_prev; expanding window around the
/// previous price, widened once to the exact radius so the result equals a
/// full scan.
double find_price(const Grid& grid, const std::vector<double>& rho, double p_prev) {
    const std::vector<double>& x = grid.nodes();
    const int n = grid.n_cells();
    const int i0 = bracket_index(x, p_prev, static_cast<int>((p_prev - x[0]) / grid.dx()));
    for (int r = 8;; r *= 4) {
        const int lo = std::max(0, i0 - r);
        const int hi = std::min(n - 1, i0 + r);
        const bool full = (lo == 0 && hi == n - 1);
        Crossing best = scan_cells(x, rho, lo, hi, p_prev);
        if (best.found) {
            const int need = static_cast<int>(best.dist / grid.dx()) + 2;
            if (full || need <= r) {
                return best.z;
            }
            const Crossing wider = scan_cells(x, rho, std::max(0, i0 - need),
                                              std::min(n - 1, i0 + need), p_prev);
            return wider.z;
        }
        if (full) {
            throw SolverError("price escaped domain");
        }
    }
}

}  // namespace

Grid::Grid(double x_min, double x_max, int n_cells)
    : x_min_(x_min), x_max_(x_max), n_(n_cells) {
    if (!(x_min < 0.0) || !(x_max > 0.0)) {
        throw ConfigError("grid must satisfy x_min < 0 < x_max");
    }
    if (n_cells < 100) {
        throw ConfigError("grid needs n_cells >= 100");
    }
    dx_ = (x_max - x_min) / n_cells;
    nodes_.resize(n_ + 1);
    if (x_min == -x_max) {
        // mirror-exact pairs x[n-i] == -x[i]
        for (int i = 0; i <= n_ / 2; ++i) {
            const double xi = x_min + i * dx_;
            nodes_[i] = xi;
            nodes_[n_ - i] = -xi;
        }
        if (n_ % 2 == 0) {
            nodes_[n_ / 2] = 0.0;
        }
    } else {
        for (int i = 0; i < n_; ++i) {
            nodes_[i] = x_min + i * dx_;
        }
        nodes_[n_] = x_max;
    }
}

Grid Grid::from_json(const nlohmann::json& j) {
    for (const char* key : {"x_min", "x_max", "n_cells"}) {
        if (!j.contains(key)) {
            throw ConfigError(std::string("grid: missing key \"") + key + "\"");
        }
    }
    return Grid(j.at("x_min").get<double>(), j.at("x_max").get<double>(),
                j.at("n_cells").get<int>());
}

Coeffs::Coeffs(double D_, double nu_, double lam_) : D(D_), nu(nu_), lam(lam_) {
    if (!(D > 0.0) || nu < 0.0 || lam < 0.0) {
        throw ConfigError("coefficients require D > 0, nu >= 0, lam >= 0");
    }
}

double stationary_density(const Coeffs& c, double y) {
    if (c.lam == 0.0 || y == 0.0) {
        return 0.0;
    }
    if (c.nu == 0.0) {
        throw ConfigError("stationary profile undefined for nu = 0 with lam > 0");
    }
    const double mag = (c.lam / c.nu) * (1.0 - std::exp(-std::abs(y) * std::sqrt(c.nu / c.D)));
    return y > 0.0 ? mag : -mag;
}

BookState init_stationary(const BookParams& params, const Grid& grid) {
    const double ell = params.decay_length();
    if (-grid.x_min() < 8.0 * ell || grid.x_max() < 8.0 * ell) {
        throw ConfigError("grid too small: needs >= 8 decay lengths sqrt(D/nu) each side");
    }
    BookState s;
    s.grid = &grid;
    const Coeffs c(params);
    s.rho.resize(grid.n_cells() + 1);
    for (int i = 0; i <= grid.n_cells(); ++i) {
        s.rho[i] = stationary_density(c, -grid.nodes()[i]);  // y = p - x, p = 0
    }
    s.price = 0.0;
    s.time = 0.0;
    s.bc_lo = s.rho.front();
    s.bc_hi = s.rho.back();
    return s;
}

void step(BookState& state, const Coeffs& coeffs, double m_t, double dt, Boundary bc) {
    const Grid& grid = *state.grid;
    const std::vector<double>& x = grid.nodes();
    const int n = grid.n_cells();
    const double dx = grid.dx();
    if (!(dt > 0.0) || dt > kCfl * dx * dx / coeffs.D * (1.0 + 1e-8)) {
        throw ConfigError("step: dt violates the stability bound 0.4 dx^2 / D");
    }
    const double c = coeffs.D * dt / (dx * dx);
    const double p = state.price;
    std::vector<double>& rho = state.rho;
    thread_local std::vector<double> next;
    next.resize(n + 1);

    for (int i = 1; i < n; ++i) {
        const double lap = rho[i + 1] - 2.0 * rho[i] + rho[i - 1];
        // cell average of sign(p - x) over [x_i - dx/2, x_i + dx/2]
        const double ramp = std::clamp(2.0 * (p - x[i]) / dx, -1.0, 1.0);
        next[i] = rho[i] + c * lap + dt * (coeffs.lam * ramp - coeffs.nu * rho[i]);
    }
    if (bc == Boundary::dirichlet) {
        next[0] = state.bc_lo;
        next[n] = state.bc_hi;
    } else {
        // zero-flux ghosts rho[-1] = rho[0], rho[n+1] = rho[n]
        next[0] = rho[0] + c * (rho[1] - rho[0]) +
                  dt * (coeffs.lam * std::clamp(2.0 * (p - x[0]) / dx, -1.0, 1.0) -
                        coeffs.nu * rho[0]);
        next[n] = rho[n] + c * (rho[n - 1] - rho[n]) +
                  dt * (coeffs.lam * std::clamp(2.0 * (p - x[n]) / dx, -1.0, 1.0) -
                        coeffs.nu * rho[n]);
    }
    if (m_t != 0.0) {
        const int i = bracket_index(x, p, static_cast<int>((p - x[0]) / dx));
        const double wl = (x[i + 1] - p) / dx;
        const double wr = (p - x[i]) / dx;
        next[i] += m_t * dt * wl / dx;
        next[i + 1] += m_t * dt * wr / dx;
    }
    rho.swap(next);
    state.price = find_price(grid, rho, p);
    state.time += dt;
}

Trajectory run_metaorder(const BookParams& params, const MetaorderSpec& spec,
                         const Grid& grid, double dt_max) {
    const Coeffs coeffs(params);
    const double dx = grid.dx();
    const double dt_cfl = kCfl * dx * dx / params.D();
    if (dt_max <= 0.0 || dt_max > dt_cfl) {
        dt_max = dt_cfl;
    }
    const double T = spec.T();
    const double m = spec.sign() * spec.m();

    Trajectory out;
    if (params.nu() * T > 0.1) {
        out.warnings.push_back("nu*T > 0.1: outside the slow-book regime of the scaling law");
    }
    BookState state = init_stationary(params, grid);
    out.t.push_back(0.0);
    out.price.push_back(state.price);

    // geometric startup ramp capped by dt_max; resolves y ~ sqrt(t)
    double dt = std::min(dt_max, params.L() * dx * dx / (8.0 * spec.m()));
    double t = 0.0;
    while (t < T) {
        double h = std::min(dt, T - t);
        if (T - t - h < 1e-9 * h) {
            h = T - t;
        }
        if (!(h > 0.0)) {
            break;
        }
        step(state, coeffs, m, h);
        t += h;
        out.t.push_back(t);
        out.price.push_back(state.price);
        dt = std::min(dt * 1.05, dt_max);
    }
    out.impact = spec.sign() * (out.price.back() - out.price.front());
    return out;
}

double total_mass(const BookState& state) {
    double sum = 0.0, comp = 0.0;
    for (double v : state.rho) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum * state.grid->dx();
}

}  // namespace llob::pde
