#pragma once

#include <string>
#include <vector>

#include "llob/core.hpp"
#include "llob/impact.hpp"
#include "llob/pde.hpp"

namespace llob::dual {

/// Two-timescale latent liquidity: a slow book that resists impact and a fast
/// book that dominates the transaction volume.
struct DualBookParams {
    BookParams slow;
    BookParams fast;

    /// Advisory checks of the asymptotic regime the crossover law assumes:
    /// J_s/J_f <= 0.1, nu_s*T <= 0.1, nu_f*T >= 10. Violations are warnings.
    std::vector<std::string> regime_warnings(double T) const;

    /// Reads {"slow": {...}, "fast": {...}} with per-book keys {D, nu, lam}.
    static DualBookParams from_json(const nlohmann::json& j);
};

struct CrossoverQuantities {
    double eta_star;   ///< J_s / J_f
    double T_dagger;   ///< nu_f^-1 * eta_star^-2 * D_s / D_f
};

CrossoverQuantities crossover(const DualBookParams& params);

struct DualImpactResult {
    double impact;
    double eta;       ///< Q / (J_f T)
    double eta_star;
    double T_dagger;
    std::vector<std::string> warnings;
};

/// Crossover impact law. For T >= Tdag: I = sqrt(D_s Q / J_s) F(eta/eta*);
/// for T < Tdag the same multiplied by sqrt(T/Tdag) with the crossover
/// shifted to eta* Tdag / T. Continuous at T = Tdag.
DualImpactResult impact_dual(const DualBookParams& params, const MetaorderSpec& spec,
                             const ScalingTable& table = ScalingTable::shared());

/// Two coupled books sharing one price (the zero of the summed density). The
/// metaorder flux is split each step so that both books' zero crossings
/// coincide at that shared price; a book with no liquidity receives nothing.
pde::Trajectory run_dual_pde(const DualBookParams& params, const MetaorderSpec& spec,
                             const pde::Grid& grid, double dt_max = 0.0);

/// Raw-coefficient variant (degenerate books allowed, e.g. lam = 0).
pde::Trajectory run_dual_pde_raw(const pde::Coeffs& slow, const pde::Coeffs& fast,
                                 double Q, double T, int sign, const pde::Grid& grid,
                                 double dt_max = 0.0, double startup_L = 1.0);

}  // namespace llob::dual
