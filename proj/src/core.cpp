#include "llob/core.hpp"

namespace llob {

namespace {

double require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string(name) + " must be positive and finite");
    }
    return v;
}

}  // namespace

BookParams::BookParams(double D, double nu, double lam)
    : d_(require_positive(D, "D")),
      nu_(require_positive(nu, "nu")),
      lam_(require_positive(lam, "lam")) {}

BookParams BookParams::from_json(const nlohmann::json& j) {
    for (const char* key : {"D", "nu", "lam"}) {
        if (!j.contains(key)) {
            throw ConfigError(std::string("book parameters: missing key \"") + key + "\"");
        }
        if (!j.at(key).is_number()) {
            throw ConfigError(std::string("book parameters: key \"") + key + "\" must be a number");
        }
    }
    return BookParams(j.at("D").get<double>(), j.at("nu").get<double>(),
                      j.at("lam").get<double>());
}

Liquidity liquidity(const BookParams& params) {
    return Liquidity{params.L(), params.J()};
}

MetaorderSpec::MetaorderSpec(double Q, double T, int sign)
    : q_(require_positive(Q, "Q")), t_(require_positive(T, "T")), sign_(sign) {
    if (sign != 1 && sign != -1) {
        throw ConfigError("sign must be +1 or -1");
    }
}

MetaorderSpec MetaorderSpec::from_json(const nlohmann::json& j) {
    for (const char* key : {"Q", "T", "sign"}) {
        if (!j.contains(key)) {
            throw ConfigError(std::string("metaorder: missing key \"") + key + "\"");
        }
    }
    return MetaorderSpec(j.at("Q").get<double>(), j.at("T").get<double>(),
                         j.at("sign").get<int>());
}

double participation_rate(const MetaorderSpec& spec, double J) {
    if (!(J > 0.0)) {
        throw ConfigError("J must be positive");
    }
    return spec.m() / J;
}

Dimensionless::Dimensionless(double eta_, double phi_) : eta(eta_), phi(phi_) {
    require_positive(eta_, "eta");
    require_positive(phi_, "phi");
}

}  // namespace llob
