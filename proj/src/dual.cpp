#include "llob/dual.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace llob::dual {

namespace {

constexpr double kCfl = 0.4;

int bracket_index(const std::vector<double>& x, double p, int hint) {
    const int n = static_cast<int>(x.size()) - 1;
    int i = std::clamp(hint, 0, n - 1);
    while (i > 0 && p < x[i]) --i;
    while (i < n - 1 && p >= x[i + 1]) ++i;
    return i;
}

double line_zero(double xa, double fa, double xb, double fb) {
    return (xa * fb - xb * fa) / (fb - fa);
}

/// Zero crossing nearest p_prev within an expanding index window; nullopt if
/// the array has no crossing at all.
std::optional<double> zero_near(const std::vector<double>& x, const std::vector<double>& rho,
                                double p_prev, int i0) {
    const int n = static_cast<int>(x.size()) - 1;
    for (int r = 8;; r *= 4) {
        const int lo = std::max(0, i0 - r);
        const int hi = std::min(n - 1, i0 + r);
        double best = 0.0, best_dist = 0.0;
        bool found = false;
        for (int i = lo; i <= hi; ++i) {
            const double a = rho[i], b = rho[i + 1];
            if (a == b || a * b > 0.0) {
                continue;
            }
            const double z = line_zero(x[i], a, x[i + 1], b);
            const double dist = std::abs(z - p_prev);
            if (!found || dist < best_dist) {
                best = z;
                best_dist = dist;
                found = true;
            }
        }
        const bool full = (lo == 0 && hi == n - 1);
        if (found) {
            return best;
        }
        if (full) {
            return std::nullopt;
        }
    }
}

struct Book {
    pde::Coeffs coeffs;
    std::vector<double> rho;
    double bc_lo = 0.0, bc_hi = 0.0;
};

/// Euler update of one book without the metaorder source.
void advance(Book& b, const pde::Grid& grid, double p, double dt) {
    const std::vector<double>& x = grid.nodes();
    const int n = grid.n_cells();
    const double dx = grid.dx();
    const double c = b.coeffs.D * dt / (dx * dx);
    thread_local std::vector<double> next;
    next.resize(n + 1);
    for (int i = 1; i < n; ++i) {
        const double lap = b.rho[i + 1] - 2.0 * b.rho[i] + b.rho[i - 1];
        const double ramp = std::clamp(2.0 * (p - x[i]) / dx, -1.0, 1.0);
        next[i] = b.rho[i] + c * lap + dt * (b.coeffs.lam * ramp - b.coeffs.nu * b.rho[i]);
    }
    next[0] = b.bc_lo;
    next[n] = b.bc_hi;
    b.rho.swap(next);
}

bool is_empty_book(const Book& b) {
    if (b.coeffs.lam != 0.0) {
        return false;
    }
    return std::all_of(b.rho.begin(), b.rho.end(), [](double v) { return v == 0.0; });
}

}  // namespace

std::vector<std::string> DualBookParams::regime_warnings(double T) const {
    std::vector<std::string> w;
    if (slow.J() / fast.J() > 0.1) {
        w.push_back("J_s/J_f > 0.1: slow book not subdominant");
    }
    if (slow.nu() * T > 0.1) {
        w.push_back("nu_s*T > 0.1: slow book not persistent over the execution");
    }
    if (fast.nu() * T < 10.0) {
        w.push_back("nu_f*T < 10: fast book not fully renewing over the execution");
    }
    return w;
}

DualBookParams DualBookParams::from_json(const nlohmann::json& j) {
    if (!j.contains("slow") || !j.contains("fast")) {
        throw ConfigError("dual book parameters need keys \"slow\" and \"fast\"");
    }
    return DualBookParams{BookParams::from_json(j.at("slow")),
                          BookParams::from_json(j.at("fast"))};
}

CrossoverQuantities crossover(const DualBookParams& params) {
    const double eta_star = params.slow.J() / params.fast.J();
    const double T_dagger =
        (1.0 / params.fast.nu()) / (eta_star * eta_star) * (params.slow.D() / params.fast.D());
    return {eta_star, T_dagger};
}

DualImpactResult impact_dual(const DualBookParams& params, const MetaorderSpec& spec,
                             const ScalingTable& table) {
    const CrossoverQuantities c = crossover(params);
    DualImpactResult out;
    out.eta = participation_rate(spec, params.fast.J());
    out.eta_star = c.eta_star;
    out.T_dagger = c.T_dagger;
    out.warnings = params.regime_warnings(spec.T());
    const double scale = std::sqrt(params.slow.D() * spec.Q() / params.slow.J());
    if (spec.T() >= c.T_dagger) {
        out.impact = spec.sign() * scale * table(out.eta / c.eta_star);
    } else {
        const double shift = c.eta_star * c.T_dagger / spec.T();
        out.impact =
            spec.sign() * std::sqrt(spec.T() / c.T_dagger) * scale * table(out.eta / shift);
    }
    return out;
}

pde::Trajectory run_dual_pde_raw(const pde::Coeffs& slow, const pde::Coeffs& fast, double Q,
                                 double T, int sign, const pde::Grid& grid, double dt_max,
                                 double startup_L) {
    if (!(Q >= 0.0) || !(T > 0.0) || (sign != 1 && sign != -1)) {
        throw ConfigError("run_dual_pde: invalid metaorder");
    }
    const std::vector<double>& x = grid.nodes();
    const int n = grid.n_cells();
    const double dx = grid.dx();
    const double dt_cfl = kCfl * dx * dx / std::max(slow.D, fast.D);
    if (dt_max <= 0.0 || dt_max > dt_cfl) {
        dt_max = dt_cfl;
    }
    const double m = sign * Q / T;

    Book bs{slow, {}, 0.0, 0.0};
    Book bf{fast, {}, 0.0, 0.0};
    for (Book* b : {&bs, &bf}) {
        b->rho.resize(n + 1);
        for (int i = 0; i <= n; ++i) {
            b->rho[i] = pde::stationary_density(b->coeffs, -x[i]);
        }
        b->bc_lo = b->rho.front();
        b->bc_hi = b->rho.back();
    }

    pde::Trajectory out;
    double p = 0.0;
    out.t.push_back(0.0);
    out.price.push_back(p);
    const bool bs_empty = is_empty_book(bs);
    const bool bf_empty = is_empty_book(bf);

    double dt = dt_max;
    if (m != 0.0) {
        dt = std::min(dt_max, startup_L * dx * dx / (8.0 * std::abs(m)));
    }
    double t = 0.0;
    thread_local std::vector<double> total;
    while (t < T) {
        double h = std::min(dt, T - t);
        if (T - t - h < 1e-9 * h) {
            h = T - t;
        }
        if (!(h > 0.0)) {
            break;
        }
        advance(bs, grid, p, h);
        advance(bf, grid, p, h);

        const int i = bracket_index(x, p, static_cast<int>((p - x[0]) / dx));
        if (m != 0.0) {
            const double dl = m * h * (x[i + 1] - p) / (dx * dx);
            const double dr = m * h * (p - x[i]) / (dx * dx);
            const double s0 = bs.rho[i], s1 = bs.rho[i + 1];
            const double f0 = bf.rho[i], f1 = bf.rho[i + 1];
            // split fraction w to the slow book chosen so both books cross
            // zero at the same point
            const auto zeros = [&](double w) {
                bs.rho[i] = s0 + w * dl;
                bs.rho[i + 1] = s1 + w * dr;
                bf.rho[i] = f0 + (1.0 - w) * dl;
                bf.rho[i + 1] = f1 + (1.0 - w) * dr;
                const auto zs = zero_near(x, bs.rho, p, i);
                const auto zf = zero_near(x, bf.rho, p, i);
                bs.rho[i] = s0;
                bs.rho[i + 1] = s1;
                bf.rho[i] = f0;
                bf.rho[i + 1] = f1;
                return std::make_pair(zs, zf);
            };
            double w = 0.5;
            if (bs_empty) {
                w = 0.0;
            } else if (bf_empty) {
                w = 1.0;
            } else {
                const auto [zs0, zf0] = zeros(0.0);
                const auto [zs1, zf1] = zeros(1.0);
                if (!zs0 || !zs1 || !zf0 || !zf1) {
                    // a book lost its crossing: give everything to the other
                    w = (!zs0 || !zs1) ? 0.0 : 1.0;
                } else {
                    const double g0 = *zs0 - *zf0;
                    const double g1 = *zs1 - *zf1;
                    if (g0 == 0.0) {
                        w = 0.0;
                    } else if (g1 == 0.0) {
                        w = 1.0;
                    } else if (g0 * g1 > 0.0) {
                        w = std::abs(g0) < std::abs(g1) ? 0.0 : 1.0;
                    } else {
                        double lo = 0.0, hi = 1.0;
                        w = -1.0;
                        for (int it = 0; it < 60; ++it) {
                            const double mid = 0.5 * (lo + hi);
                            const auto [zs, zf] = zeros(mid);
                            if (!zs || !zf) {
                                break;
                            }
                            const double g = *zs - *zf;
                            if (g == 0.0) {
                                w = mid;  // exact balance (identical books)
                                break;
                            }
                            if (g * g0 > 0.0) {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        if (w < 0.0) {
                            w = 0.5 * (lo + hi);
                        }
                    }
                }
            }
            bs.rho[i] = s0 + w * dl;
            bs.rho[i + 1] = s1 + w * dr;
            bf.rho[i] = f0 + (1.0 - w) * dl;
            bf.rho[i + 1] = f1 + (1.0 - w) * dr;
        }
        total.resize(n + 1);
        for (int k = 0; k <= n; ++k) {
            total[k] = bs.rho[k] + bf.rho[k];
        }
        const auto pz = zero_near(x, total, p, i);
        if (!pz) {
            throw SolverError("price escaped domain");
        }
        p = *pz;
        t += h;
        out.t.push_back(t);
        out.price.push_back(p);
        dt = std::min(dt * 1.05, dt_max);
    }
    out.impact = sign * (out.price.back() - out.price.front());
    return out;
}

pde::Trajectory run_dual_pde(const DualBookParams& params, const MetaorderSpec& spec,
                             const pde::Grid& grid, double dt_max) {
    const double ell = std::max(params.slow.decay_length(), params.fast.decay_length());
    if (-grid.x_min() < 8.0 * ell || grid.x_max() < 8.0 * ell) {
        throw ConfigError("grid too small: needs >= 8 decay lengths of the wider book");
    }
    pde::Trajectory out = run_dual_pde_raw(
        pde::Coeffs(params.slow), pde::Coeffs(params.fast), spec.Q(), spec.T(), spec.sign(),
        grid, dt_max, params.slow.L() + params.fast.L());
    auto warn = params.regime_warnings(spec.T());
    out.warnings.insert(out.warnings.end(), warn.begin(), warn.end());
    return out;
}

}  // namespace llob::dual
