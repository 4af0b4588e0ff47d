#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "llob/core.hpp"
#include "llob/dual.hpp"
#include "llob/impact.hpp"

namespace llob::data {

/// CSV schema, exact header order.
inline constexpr const char* kCsvHeader =
    "symbol,sign,Q,t_start,t_end,p_start,p_end,V_T,V_d,P_high,P_low,P_open";

/// One metaorder row: raw sizes, timestamps, prices and daily marks.
struct MetaorderRecord {
    std::string symbol;
    int sign = 1;
    double Q = 0.0;
    std::string t_start;  ///< ISO-8601, compared lexicographically
    std::string t_end;
    double p_start = 0.0;
    double p_end = 0.0;
    double V_T = 0.0;  ///< market volume during execution
    double V_d = 0.0;  ///< daily volume
    double P_high = 0.0, P_low = 0.0, P_open = 0.0;
};

enum class RejectReason {
    bad_sign,
    nonpositive_size,
    nonpositive_volume,
    volume_exceeds_daily,
    participation_above_one,
    bad_time_order,
    nonpositive_price,
    bad_daily_marks,
    zero_sigma,
};

const char* to_string(RejectReason r);

/// First violated invariant, or nullopt for a clean record.
std::optional<RejectReason> validate(const MetaorderRecord& rec);

/// Dimensionless view of a record: eta = Q/V_T, phi = Q/V_d, T_vol = V_T/V_d,
/// impact_obs = sign * (log p_end - log p_start) / sigma_d with
/// sigma_d = (P_high - P_low)/P_open.
struct RescaledMetaorder {
    double eta = 0.0;
    double phi = 0.0;
    double T_vol = 0.0;
    double impact_obs = 0.0;
};

/// Pre: validate(rec) passed.
RescaledMetaorder rescale(const MetaorderRecord& rec);

struct Reject {
    std::size_t line;  ///< 1-based line number in the input
    RejectReason reason;
};

struct IngestResult {
    std::vector<MetaorderRecord> records;
    std::vector<RescaledMetaorder> rescaled;  ///< parallel to records
    std::vector<Reject> rejects;
};

/// Parses the fixed-schema CSV. Malformed header or unparseable rows throw
/// ConfigError (listing offending lines); invariant-violating rows land in
/// rejects.
IngestResult read_csv(std::istream& in);

void write_csv(std::ostream& out, const std::vector<MetaorderRecord>& records);

/// Keeps records with phi >= phi_min (paper filter, default 1e-5).
std::vector<RescaledMetaorder> filter_min_size(const std::vector<RescaledMetaorder>& rows,
                                               double phi_min = 1e-5);

/// Direct crossover-law generator (no book parameters): impact
///   A sqrt(phi) F(eta/eta_eff) * (T/T_dagger)^amp_exponent  for T < T_dagger,
/// with eta_eff = eta_star (T_dagger/T)^exponent below T_dagger.
struct ScalingLaw {
    double amplitude = 0.4 / 1.4142135623730951;  ///< sqrt(D_s/J_s) scale
    double eta_star = 3.15e-3;
    double T_dagger = 0.0;  ///< 0 disables the shifted branch
    double exponent = 1.0;
    double amp_exponent = 0.5;
};

struct SynthConfig {
    std::variant<ScalingLaw, BookParams, dual::DualBookParams> params;
    std::size_t n = 0;
    double noise_sigma = 0.0;   ///< std dev of noise on impact_obs/sqrt(phi)
    std::uint64_t seed = 0;
    double Q_lo = 3e-4, Q_hi = 0.3;  ///< volume fraction range (V_d units)
    double T_lo = 0.02, T_hi = 1.0;  ///< volume-time duration range

    static SynthConfig from_json(const nlohmann::json& j);
};

/// Model-driven records in the repo unit convention (V_d-relative volumes,
/// sigma_d = 1): draws (Q, T) log-uniformly, resamples draws with eta > 1,
/// computes the theoretical impact and adds Gaussian noise of standard
/// deviation noise_sigma * sqrt(phi) to impact_obs. Deterministic per seed.
std::vector<MetaorderRecord> synth_generate(const SynthConfig& cfg,
                                            const ScalingTable& table = ScalingTable::shared());

}  // namespace llob::data
