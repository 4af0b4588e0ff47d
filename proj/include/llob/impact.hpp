#pragma once

#include <vector>

#include "llob/core.hpp"

namespace llob {

/// Discretized solution of the self-consistent impact trajectory
///   y(t) = (m/L) * int_0^t ds / sqrt(4 pi D (t-s)) * exp(-(y(t)-y(s))^2 / (4 D (t-s)))
/// on a sqrt(t)-uniform grid.
struct TrajectorySolution {
    std::vector<double> times;
    std::vector<double> y;
    bool converged = false;
    int iterations = 0;  ///< max per-node iteration count

    double impact() const { return y.empty() ? 0.0 : y.back(); }
};

/// Solves the trajectory equation by time marching. Each node is resolved by
/// damped fixed-point iteration (damping 0.5) with a bracketed fallback on the
/// monotone branch y >= y(t_{k-1}).
///
/// Quadrature: product integration with the 1/sqrt kernel integrated exactly
/// per sub-interval and the Gaussian factor held at the interval midpoint; the
/// final sub-interval integrates the Gaussian in closed form for a
/// secant-linearized y(s), which matches the midpoint rule when resolved and
/// remains exact in the steep-front limit.
TrajectorySolution solve_trajectory(const BookParams& params, const MetaorderSpec& spec,
                                    int n_steps = 800, double tol = 1e-9);

/// Dimensionless form used by the scaling function: D = L = T = 1, m = eta.
TrajectorySolution solve_trajectory_nondim(double eta, int n_steps, double tol);

/// Crossover scaling function F(eta) = y(1)/sqrt(eta) in nondimensional units.
/// F ~ sqrt(eta/pi) for eta << 1 and -> sqrt(2) for eta >> 1.
double scaling_function(double eta, int n_steps = 800, double tol = 1e-9);

/// Memoized F(eta) on a log-spaced grid with monotone (PCHIP) log-log
/// interpolation. Built once, then read-only.
class ScalingTable {
public:
    ScalingTable(int n_points = 200, double eta_min = 1e-6, double eta_max = 1e6,
                 int n_steps = 400, double tol = 1e-9);

    double operator()(double eta) const;

    double eta_min() const { return eta_lo_; }
    double eta_max() const { return eta_hi_; }

    /// Process-wide shared table with default parameters.
    static const ScalingTable& shared();

private:
    double eta_lo_, eta_hi_;
    std::vector<double> log_eta_;
    std::vector<double> log_f_;
    std::vector<double> slope_;  // PCHIP derivatives d(logF)/d(log eta)
};

/// Theoretical impact I = sign * sqrt(D Q / J) * F(Q/(J T)).
double impact(const BookParams& params, const MetaorderSpec& spec,
              const ScalingTable& table = ScalingTable::shared());

}  // namespace llob
