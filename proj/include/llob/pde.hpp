#pragma once

#include <string>
#include <vector>

#include "llob/core.hpp"

namespace llob::pde {

/// Uniform node grid over [x_min, x_max] with n_cells cells (n_cells+1 nodes).
/// Symmetric grids (x_min == -x_max) are built with bitwise-mirrored node
/// coordinates so that buy/sell runs mirror exactly.
class Grid {
public:
    Grid(double x_min, double x_max, int n_cells);

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    int n_cells() const { return n_; }
    double dx() const { return dx_; }
    const std::vector<double>& nodes() const { return nodes_; }

    static Grid from_json(const nlohmann::json& j);

private:
    double x_min_, x_max_, dx_;
    int n_;
    std::vector<double> nodes_;
};

/// Raw reaction-diffusion coefficients. Unlike BookParams, zero nu/lam are
/// allowed (degenerate books used in conservation and reduction tests).
struct Coeffs {
    double D;
    double nu;
    double lam;

    Coeffs(double D_, double nu_, double lam_);
    explicit Coeffs(const BookParams& p) : Coeffs(p.D(), p.nu(), p.lam()) {}
};

enum class Boundary { dirichlet, reflecting };

/// Discretized signed latent-order density plus the current transaction price.
struct BookState {
    const Grid* grid = nullptr;
    std::vector<double> rho;
    double price = 0.0;
    double time = 0.0;
    double bc_lo = 0.0, bc_hi = 0.0;  // pinned end values for Dirichlet runs
};

/// Exact stationary profile rho_st(y) = (lam/nu) sign(y) (1 - exp(-|y| sqrt(nu/D)))
/// with y = p - x; odd in y bitwise.
double stationary_density(const Coeffs& c, double y);

/// Stationary book centered at price 0. Rejects grids spanning fewer than
/// 8 decay lengths sqrt(D/nu) on each side.
BookState init_stationary(const BookParams& params, const Grid& grid);

/// One explicit Euler step of
///   d rho/dt = D rho_xx - nu rho + lam sign(p - x) + m_t delta(x - p),
/// then the price is relocated to the zero crossing nearest the previous
/// price. The sign field is cell-averaged across the crossing cell and the
/// point source is split over the bracketing nodes.
/// Requires dt <= 0.4 dx^2 / D.
void step(BookState& state, const Coeffs& coeffs, double m_t, double dt,
          Boundary bc = Boundary::dirichlet);

struct Trajectory {
    std::vector<double> t;
    std::vector<double> price;
    double impact = 0.0;  ///< sign * (p(T) - p(0))
    std::vector<std::string> warnings;
};

/// Runs a metaorder from the stationary book. dt_max <= 0 selects the CFL
/// step 0.4 dx^2 / D; the first steps are ramped up geometrically from
/// L dx^2 / (8 |m|) so the sqrt(t) launch of the price is resolved.
Trajectory run_metaorder(const BookParams& params, const MetaorderSpec& spec,
                         const Grid& grid, double dt_max = 0.0);

/// Signed mass integral sum(rho) * dx.
double total_mass(const BookState& state);

}  // namespace llob::pde
