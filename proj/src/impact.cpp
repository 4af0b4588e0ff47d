#include "llob/impact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace llob {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kExpCutoff = 50.0;  // exp(-50) ~ 2e-22, below any tolerance here
constexpr int kMaxFixedPoint = 200;
constexpr int kMaxBisect = 200;

/// One node's right-hand side: (m/L) * [far-field product sum + self term].
class NodeRhs {
public:
    NodeRhs(const std::vector<double>& t, const std::vector<double>& y, int k,
            double amp, double diff)
        : t_(t), y_(y), k_(k), amp_(amp), diff_(diff) {
        t_k_ = t_[k];
        dt_last_ = t_[k] - t_[k - 1];
        w_.resize(k_ - 1);
        tmid_.resize(k_ - 1);
        ymid_.resize(k_ - 1);
        const double inv_sqrt_pid = 1.0 / std::sqrt(kPi * diff_);
        for (int j = 0; j + 1 < k_; ++j) {
            w_[j] = (std::sqrt(t_k_ - t_[j]) - std::sqrt(t_k_ - t_[j + 1])) * inv_sqrt_pid;
            tmid_[j] = 0.5 * (t_[j] + t_[j + 1]);
            ymid_[j] = 0.5 * (y_[j] + y_[j + 1]);
        }
    }

    double operator()(double yk) const {
        double sum = 0.0;
        for (size_t j = 0; j + 1 < static_cast<size_t>(k_); ++j) {
            const double d = yk - ymid_[j];
            const double arg = d * d / (4.0 * diff_ * (t_k_ - tmid_[j]));
            if (arg < kExpCutoff) {
                sum += w_[j] * std::exp(-arg);
            }
        }
        sum += self_term(yk);
        return amp_ * sum;
    }

private:
    // Integral over the final sub-interval with y(s) linearized by the secant:
    // int_0^d exp(-a s) / sqrt(4 pi D s) ds = erf(sqrt(a d)) / (2 sqrt(a D)).
    double self_term(double yk) const {
        const double slope = (yk - y_[k_ - 1]) / dt_last_;
        const double a = slope * slope / (4.0 * diff_);
        const double ad = a * dt_last_;
        if (ad < 1e-8) {
            return std::sqrt(dt_last_ / (kPi * diff_)) * (1.0 - ad / 3.0);
        }
        return std::erf(std::sqrt(ad)) / (2.0 * std::sqrt(a * diff_));
    }

    const std::vector<double>& t_;
    const std::vector<double>& y_;
    int k_;
    double amp_, diff_, t_k_, dt_last_;
    std::vector<double>& w_ = buf_w();
    std::vector<double>& tmid_ = buf_tmid();
    std::vector<double>& ymid_ = buf_ymid();

    static std::vector<double>& buf_w() { thread_local std::vector<double> v; return v; }
    static std::vector<double>& buf_tmid() { thread_local std::vector<double> v; return v; }
    static std::vector<double>& buf_ymid() { thread_local std::vector<double> v; return v; }
};

struct NodeSolve {
    double y;
    bool converged;
    int iterations;
};

/// Damped fixed point with early divergence detection, then bisection on the
/// monotone branch [y_prev, inf).
NodeSolve solve_node(const NodeRhs& rhs, double y_prev, double y_guess, double tol) {
    double yk = std::max(y_guess, y_prev);
    double res_prev = std::numeric_limits<double>::infinity();
    int grow = 0;
    for (int it = 0; it < kMaxFixedPoint; ++it) {
        const double f = rhs(yk);
        const double ynew = std::max(0.5 * yk + 0.5 * f, y_prev);
        const double res = std::abs(ynew - yk);
        if (res <= tol * std::max(std::abs(ynew), 1e-300)) {
            return {ynew, true, it + 1};
        }
        grow = (res >= res_prev) ? grow + 1 : 0;
        res_prev = res;
        yk = ynew;
        if (grow >= 8) {
            break;  // diverging or cycling; hand over to the bracketed solve
        }
    }
    // h(y) = y - rhs(y): h(y_prev) <= 0 on the physical branch, h -> +inf.
    double lo = y_prev;
    if (lo - rhs(lo) >= 0.0) {
        return {lo, true, kMaxFixedPoint};
    }
    double step = std::max(yk - y_prev, 1e-12 * std::max(y_prev, 1.0));
    double hi = lo + step;
    while (hi - rhs(hi) < 0.0) {
        step *= 2.0;
        hi = lo + step;
        if (!(hi < 1e300)) {
            return {yk, false, kMaxFixedPoint};
        }
    }
    for (int it = 0; it < kMaxBisect; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid - rhs(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= tol * std::max(hi, 1e-300)) {
            break;
        }
    }
    return {0.5 * (lo + hi), true, kMaxFixedPoint};
}

TrajectorySolution solve_impl(double m, double L, double D, double T, int n_steps, double tol) {
    if (n_steps < 50) {
        throw ConfigError("solve_trajectory: n_steps must be >= 50");
    }
    if (!(tol > 0.0) || tol > 1e-4) {
        throw ConfigError("solve_trajectory: tol must lie in (0, 1e-4]");
    }
    TrajectorySolution out;
    const int n = n_steps;
    out.times.resize(n + 1);
    out.y.assign(n + 1, 0.0);
    for (int k = 0; k <= n; ++k) {
        const double f = static_cast<double>(k) / n;
        out.times[k] = T * f * f;  // sqrt(t)-uniform nodes
    }
    out.converged = true;
    if (m == 0.0) {
        return out;  // y == 0
    }
    const double amp = m / L;
    for (int k = 1; k <= n; ++k) {
        const NodeRhs rhs(out.times, out.y, k, amp, D);
        const double guess =
            (k >= 2) ? out.y[k - 1] + (out.y[k - 1] - out.y[k - 2]) : out.y[k - 1];
        const NodeSolve s = solve_node(rhs, out.y[k - 1], guess, tol);
        if (!std::isfinite(s.y)) {
            throw SolverError("solve_trajectory: non-finite iterate");
        }
        out.y[k] = s.y;
        out.converged = out.converged && s.converged;
        out.iterations = std::max(out.iterations, s.iterations);
    }
    return out;
}

}  // namespace

TrajectorySolution solve_trajectory(const BookParams& params, const MetaorderSpec& spec,
                                    int n_steps, double tol) {
    return solve_impl(spec.m(), params.L(), params.D(), spec.T(), n_steps, tol);
}

TrajectorySolution solve_trajectory_nondim(double eta, int n_steps, double tol) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) {
        throw ConfigError("eta must be non-negative and finite");
    }
    return solve_impl(eta, 1.0, 1.0, 1.0, n_steps, tol);
}

double scaling_function(double eta, int n_steps, double tol) {
    if (!(eta > 0.0)) {
        throw ConfigError("scaling_function: eta must be positive");
    }
    const TrajectorySolution sol = solve_trajectory_nondim(eta, n_steps, tol);
    return sol.impact() / std::sqrt(eta);
}

ScalingTable::ScalingTable(int n_points, double eta_min, double eta_max, int n_steps,
                           double tol)
    : eta_lo_(eta_min), eta_hi_(eta_max) {
    if (n_points < 4 || !(eta_min > 0.0) || !(eta_max > eta_min)) {
        throw ConfigError("ScalingTable: invalid grid");
    }
    log_eta_.resize(n_points);
    log_f_.resize(n_points);
    const double llo = std::log(eta_min), lhi = std::log(eta_max);
    std::vector<double> f(n_points);
    for (int i = 0; i < n_points; ++i) {
        log_eta_[i] = llo + (lhi - llo) * i / (n_points - 1);
        f[i] = scaling_function(std::exp(log_eta_[i]), n_steps, tol);
    }
    // running max: F is monotone; sub-tolerance plateau wiggles are flattened
    for (int i = 1; i < n_points; ++i) {
        f[i] = std::max(f[i], f[i - 1]);
    }
    for (int i = 0; i < n_points; ++i) {
        log_f_[i] = std::log(f[i]);
    }
    // Fritsch-Carlson monotone slopes in log-log space
    slope_.assign(n_points, 0.0);
    std::vector<double> sec(n_points - 1);
    for (int i = 0; i + 1 < n_points; ++i) {
        sec[i] = (log_f_[i + 1] - log_f_[i]) / (log_eta_[i + 1] - log_eta_[i]);
    }
    slope_[0] = sec.front();
    slope_[n_points - 1] = sec.back();
    for (int i = 1; i + 1 < n_points; ++i) {
        if (sec[i - 1] * sec[i] <= 0.0) {
            slope_[i] = 0.0;
        } else {
            slope_[i] = 2.0 * sec[i - 1] * sec[i] / (sec[i - 1] + sec[i]);  // harmonic mean
        }
    }
}

double ScalingTable::operator()(double eta) const {
    if (!(eta > 0.0)) {
        throw ConfigError("ScalingTable: eta must be positive");
    }
    if (eta <= eta_lo_) {
        return std::sqrt(eta / kPi);  // exact small-eta asymptote
    }
    if (eta >= eta_hi_) {
        return std::exp(log_f_.back());  // plateau
    }
    const double le = std::log(eta);
    const auto it = std::upper_bound(log_eta_.begin(), log_eta_.end(), le);
    const size_t i = static_cast<size_t>(std::distance(log_eta_.begin(), it)) - 1;
    const double h = log_eta_[i + 1] - log_eta_[i];
    const double u = (le - log_eta_[i]) / h;
    const double u2 = u * u, u3 = u2 * u;
    const double v = (2 * u3 - 3 * u2 + 1) * log_f_[i] + (u3 - 2 * u2 + u) * h * slope_[i] +
                     (-2 * u3 + 3 * u2) * log_f_[i + 1] + (u3 - u2) * h * slope_[i + 1];
    return std::exp(v);
}

const ScalingTable& ScalingTable::shared() {
    static const ScalingTable table;
    return table;
}

double impact(const BookParams& params, const MetaorderSpec& spec, const ScalingTable& table) {
    const double eta = participation_rate(spec, params.J());
    return spec.sign() * std::sqrt(params.D() * spec.Q() / params.J()) * table(eta);
}

}  // namespace llob
