#pragma once

#include <cmath>

#include "json.hpp"
#include "llob/errors.hpp"

namespace llob {

/// Derived liquidity quantities of a latent book: L is the slope of the
/// stationary density at the price, J = D*L the stationary transaction rate.
struct Liquidity {
    double L;
    double J;
};

/// Latent-book model parameters (price diffusivity D, cancellation rate nu,
/// deposition rate lam). Immutable after construction; constructor rejects
/// non-positive values.
class BookParams {
public:
    BookParams(double D, double nu, double lam);

    double D() const { return d_; }
    double nu() const { return nu_; }
    double lam() const { return lam_; }

    /// L = lam / sqrt(D*nu)
    double L() const { return lam_ / std::sqrt(d_ * nu_); }
    /// J = D*L
    double J() const { return d_ * L(); }
    /// Decay length of the stationary profile, sqrt(D/nu).
    double decay_length() const { return std::sqrt(d_ / nu_); }

    /// Reads {"D": .., "nu": .., "lam": ..}. Exact key names.
    static BookParams from_json(const nlohmann::json& j);

private:
    double d_, nu_, lam_;
};

Liquidity liquidity(const BookParams& params);

/// Execution instruction: total volume Q over duration T at constant rate
/// m = Q/T, sign +1 buy / -1 sell.
class MetaorderSpec {
public:
    MetaorderSpec(double Q, double T, int sign);

    double Q() const { return q_; }
    double T() const { return t_; }
    int sign() const { return sign_; }
    double m() const { return q_ / t_; }

    static MetaorderSpec from_json(const nlohmann::json& j);

private:
    double q_, t_;
    int sign_;
};

/// eta = Q/(J*T) = m/J
double participation_rate(const MetaorderSpec& spec, double J);

/// Dimensionless control variables of one metaorder.
struct Dimensionless {
    double eta;  ///< participation rate
    double phi;  ///< volume fraction of daily volume

    Dimensionless(double eta_, double phi_);
};

}  // namespace llob
