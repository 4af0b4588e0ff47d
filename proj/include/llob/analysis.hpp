#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "llob/data.hpp"
#include "llob/impact.hpp"

namespace llob::analysis {

/// One evenly-populated eta bin of the empirical scaling curve.
struct Bin {
    double eta_mean = 0.0;
    double F_hat = 0.0;    ///< mean of impact_obs / sqrt(phi)
    double se = 0.0;       ///< sqrt(second central moment) / sqrt(count)
    std::size_t count = 0;
    bool degenerate = false;  ///< count < 2 or zero spread
};

struct FitResult {
    double eta_star = 0.0;
    double amplitude = 0.0;  ///< A in A * F(eta/eta_star)
    double residual = 0.0;   ///< weighted objective per fitted bin
    std::size_t bins_used = 0;
};

struct ScalingCurve {
    std::vector<Bin> bins;
    std::optional<FitResult> fit;
};

/// Quantile bins by eta (counts equal within 1); per-bin conditional mean of
/// impact_obs/sqrt(phi) with its standard error. Throws StatError when there
/// are fewer records than bins.
ScalingCurve bin_scaling(std::span<const data::RescaledMetaorder> rows, int n_bins);

/// Weighted log-log least squares of A * F(eta/eta_star) against the binned
/// curve: coarse log-grid scan over eta_star (A closed-form per point), then
/// golden-section refinement. Returns nullopt when the optimum sits on the
/// scan boundary (crossover not identified). Throws StatError when fewer than
/// 5 usable bins or the bins span under two decades of eta.
std::optional<FitResult> fit_eta_star(const ScalingCurve& curve, const ScalingTable& table);

/// Partition at T_split (default: median T_vol). Records with T_vol below the
/// split go to `first`.
std::pair<std::vector<data::RescaledMetaorder>, std::vector<data::RescaledMetaorder>>
split_by_duration(std::span<const data::RescaledMetaorder> rows,
                  std::optional<double> T_split = std::nullopt);

struct EtaStarPoint {
    double T_mean = 0.0;
    double eta_star = 0.0;
    bool ok = false;
};

struct EtaStarVsT {
    std::vector<EtaStarPoint> points;  ///< one per T quantile bin (gaps flagged)
    double slope = 0.0;                ///< d log eta* / d log T
    double slope_se = 0.0;
};

/// Quantile-bins by T_vol, fits eta_star per bin, regresses log eta_star on
/// log T. Per-bin failures leave gaps; fewer than 3 usable points is an error.
EtaStarVsT eta_star_vs_T(std::span<const data::RescaledMetaorder> rows, int n_T_bins,
                         const ScalingTable& table);

enum class Regime { above_eta_star, below_eta_star };

struct BetaFit {
    double beta = 0.0;
    double se = 0.0;
    std::size_t n_used = 0;
};

/// Fits impact_obs = A sqrt(phi) T^-beta (above) or A phi T^-beta (below) by
/// least squares in logs over records in the given regime. Requires the
/// regime subset to span at least one decade of T_vol.
BetaFit regress_T_exponent(std::span<const data::RescaledMetaorder> rows, Regime regime,
                           double eta_star);

/// Subsample bin-count rule: max(8, round(30 * sqrt(count / 1e6))).
int default_bins(std::size_t count);

}  // namespace llob::analysis
