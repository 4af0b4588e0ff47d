#include "llob/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace llob::analysis {

namespace {

struct FitData {
    std::vector<double> log_eta;
    std::vector<double> log_f;
    std::vector<double> weight;  // 1 / relative variance
};

FitData usable_bins(const ScalingCurve& curve) {
    FitData d;
    for (const Bin& b : curve.bins) {
        if (b.count < 2 || !(b.F_hat > 0.0) || !(b.se > 0.0)) {
            continue;
        }
        const double rel = b.se / b.F_hat;
        d.log_eta.push_back(std::log(b.eta_mean));
        d.log_f.push_back(std::log(b.F_hat));
        d.weight.push_back(1.0 / (rel * rel));
    }
    return d;
}

/// Objective at log(eta_star); amplitude solved in closed form.
double objective(const FitData& d, const ScalingTable& table, double log_es,
                 double* log_amp_out = nullptr) {
    const std::size_t n = d.log_eta.size();
    thread_local std::vector<double> log_F;
    log_F.resize(n);
    double wsum = 0.0, wres = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        log_F[i] = std::log(table(std::exp(d.log_eta[i] - log_es)));
        wsum += d.weight[i];
        wres += d.weight[i] * (d.log_f[i] - log_F[i]);
    }
    const double log_amp = wres / wsum;
    if (log_amp_out) {
        *log_amp_out = log_amp;
    }
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = d.log_f[i] - log_amp - log_F[i];
        obj += d.weight[i] * r * r;
    }
    return obj;
}

struct Ols {
    double slope = 0.0, intercept = 0.0, slope_se = 0.0;
};

Ols ols(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    Ols out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    if (n > 2) {
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - out.intercept - out.slope * x[i];
            ss += r * r;
        }
        out.slope_se = std::sqrt(ss / (n - 2) / sxx);
    }
    return out;
}

}  // namespace

int default_bins(std::size_t count) {
    const int scaled = static_cast<int>(std::lround(30.0 * std::sqrt(count / 1e6)));
    return std::max(8, scaled);
}

ScalingCurve bin_scaling(std::span<const data::RescaledMetaorder> rows, int n_bins) {
    if (n_bins < 2) {
        throw ConfigError("bin_scaling: n_bins must be >= 2");
    }
    if (rows.size() < static_cast<std::size_t>(n_bins)) {
        throw StatError("insufficient data: fewer records than bins");
    }
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rows[a].eta < rows[b].eta; });

    ScalingCurve curve;
    const std::size_t n = rows.size();
    for (int b = 0; b < n_bins; ++b) {
        const std::size_t lo = (static_cast<std::size_t>(b) * n) / n_bins;
        const std::size_t hi = (static_cast<std::size_t>(b) + 1) * n / n_bins;
        Bin bin;
        bin.count = hi - lo;
        double eta_sum = 0.0, f_sum = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            const auto& r = rows[order[k]];
            eta_sum += r.eta;
            f_sum += r.impact_obs / std::sqrt(r.phi);
        }
        bin.eta_mean = eta_sum / bin.count;
        bin.F_hat = f_sum / bin.count;
        double m2 = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            const auto& r = rows[order[k]];
            const double d = r.impact_obs / std::sqrt(r.phi) - bin.F_hat;
            m2 += d * d;
        }
        // population second moment: duplication invariance of the stderr law
        const double sd = std::sqrt(m2 / bin.count);
        bin.se = sd / std::sqrt(static_cast<double>(bin.count));
        bin.degenerate = (bin.count < 2) || !(bin.se > 0.0);
        curve.bins.push_back(bin);
    }
    return curve;
}

std::optional<FitResult> fit_eta_star(const ScalingCurve& curve, const ScalingTable& table) {
    const FitData d = usable_bins(curve);
    if (d.log_eta.size() < 5) {
        throw StatError("fit_eta_star: needs >= 5 usable bins");
    }
    const auto [lo_it, hi_it] = std::minmax_element(d.log_eta.begin(), d.log_eta.end());
    if (*hi_it - *lo_it < 2.0 * std::log(10.0)) {
        throw StatError("fit_eta_star: bins span under two decades of eta");
    }
    // data-anchored scan grid: one decade beyond the data range on each side
    const double g_lo = *lo_it - std::log(10.0);
    const double g_hi = *hi_it + std::log(10.0);
    const int n_grid = 121;
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_grid; ++i) {
        const double les = g_lo + (g_hi - g_lo) * i / (n_grid - 1);
        const double v = objective(d, table, les);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    if (best == 0 || best == n_grid - 1) {
        return std::nullopt;  // crossover not identified
    }
    double a = g_lo + (g_hi - g_lo) * (best - 1) / (n_grid - 1);
    double b = g_lo + (g_hi - g_lo) * (best + 1) / (n_grid - 1);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), e = a + gr * (b - a);
    double fc = objective(d, table, c), fe = objective(d, table, e);
    for (int it = 0; it < 90; ++it) {
        if (fc < fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - gr * (b - a);
            fc = objective(d, table, c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + gr * (b - a);
            fe = objective(d, table, e);
        }
    }
    const double les = 0.5 * (a + b);
    double log_amp = 0.0;
    const double val = objective(d, table, les, &log_amp);
    if (!std::isfinite(val) || !std::isfinite(log_amp)) {
        throw StatError("fit_eta_star: optimizer failed (non-finite objective)");
    }
    FitResult out;
    out.eta_star = std::exp(les);
    out.amplitude = std::exp(log_amp);
    out.bins_used = d.log_eta.size();
    out.residual = val / static_cast<double>(out.bins_used);
    return out;
}

std::pair<std::vector<data::RescaledMetaorder>, std::vector<data::RescaledMetaorder>>
split_by_duration(std::span<const data::RescaledMetaorder> rows, std::optional<double> T_split) {
    if (rows.empty()) {
        throw StatError("split_by_duration: no records");
    }
    double split = 0.0;
    if (T_split) {
        split = *T_split;
    } else {
        std::vector<double> t(rows.size());
        std::transform(rows.begin(), rows.end(), t.begin(),
                       [](const auto& r) { return r.T_vol; });
        const std::size_t mid = t.size() / 2;
        std::nth_element(t.begin(), t.begin() + mid, t.end());
        split = t[mid];
    }
    std::pair<std::vector<data::RescaledMetaorder>, std::vector<data::RescaledMetaorder>> out;
    for (const auto& r : rows) {
        (r.T_vol < split ? out.first : out.second).push_back(r);
    }
    return out;
}

EtaStarVsT eta_star_vs_T(std::span<const data::RescaledMetaorder> rows, int n_T_bins,
                         const ScalingTable& table) {
    if (n_T_bins < 3) {
        throw ConfigError("eta_star_vs_T: n_T_bins must be >= 3");
    }
    if (rows.size() < static_cast<std::size_t>(n_T_bins)) {
        throw StatError("insufficient data: fewer records than T bins");
    }
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return rows[a].T_vol < rows[b].T_vol;
    });

    EtaStarVsT out;
    const std::size_t n = rows.size();
    for (int b = 0; b < n_T_bins; ++b) {
        const std::size_t lo = (static_cast<std::size_t>(b) * n) / n_T_bins;
        const std::size_t hi = (static_cast<std::size_t>(b) + 1) * n / n_T_bins;
        std::vector<data::RescaledMetaorder> sub;
        sub.reserve(hi - lo);
        double t_sum = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            sub.push_back(rows[order[k]]);
            t_sum += rows[order[k]].T_vol;
        }
        EtaStarPoint pt;
        pt.T_mean = t_sum / sub.size();
        try {
            const auto fit = fit_eta_star(bin_scaling(sub, default_bins(sub.size())), table);
            if (fit) {
                pt.eta_star = fit->eta_star;
                pt.ok = true;
            }
        } catch (const StatError&) {
            // gap: per-bin failure must not take down the scan
        }
        out.points.push_back(pt);
    }
    std::vector<double> lx, ly;
    for (const auto& p : out.points) {
        if (p.ok) {
            lx.push_back(std::log(p.T_mean));
            ly.push_back(std::log(p.eta_star));
        }
    }
    if (lx.size() < 3) {
        throw StatError("eta_star_vs_T: fewer than 3 usable T bins");
    }
    const Ols fit = ols(lx, ly);
    out.slope = fit.slope;
    out.slope_se = fit.slope_se;
    return out;
}

BetaFit regress_T_exponent(std::span<const data::RescaledMetaorder> rows, Regime regime,
                           double eta_star) {
    if (!(eta_star > 0.0)) {
        throw ConfigError("regress_T_exponent: eta_star must be positive");
    }
    std::vector<double> lx, ly;
    double t_min = std::numeric_limits<double>::infinity(), t_max = 0.0;
    for (const auto& r : rows) {
        const bool above = r.eta >= eta_star;
        if ((regime == Regime::above_eta_star) != above) {
            continue;
        }
        if (!(r.impact_obs > 0.0)) {
            continue;  // log model: non-positive observations carry no weight
        }
        const double vol_term =
            (regime == Regime::above_eta_star) ? 0.5 * std::log(r.phi) : std::log(r.phi);
        lx.push_back(std::log(r.T_vol));
        ly.push_back(std::log(r.impact_obs) - vol_term);
        t_min = std::min(t_min, r.T_vol);
        t_max = std::max(t_max, r.T_vol);
    }
    if (lx.size() < 3 || t_max < 10.0 * (1.0 - 1e-9) * t_min) {
        throw StatError("regress_T_exponent: insufficient span (need >= one decade of T)");
    }
    const Ols fit = ols(lx, ly);
    BetaFit out;
    out.beta = -fit.slope;
    out.se = fit.slope_se;
    out.n_used = lx.size();
    return out;
}

}  // namespace llob::analysis
