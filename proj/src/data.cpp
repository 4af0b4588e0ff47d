#include "llob/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace llob::data {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::string iso_time(double day_fraction) {
    // trading day mapped to 09:30:00 + fraction * 6.5 h
    const int secs = static_cast<int>(std::lround(day_fraction * 6.5 * 3600.0));
    const int total = 9 * 3600 + 30 * 60 + secs;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "2007-01-02T%02d:%02d:%02d", total / 3600,
                  (total / 60) % 60, total % 60);
    return buf;
}

}  // namespace

const char* to_string(RejectReason r) {
    switch (r) {
        case RejectReason::bad_sign: return "bad_sign";
        case RejectReason::nonpositive_size: return "nonpositive_size";
        case RejectReason::nonpositive_volume: return "nonpositive_volume";
        case RejectReason::volume_exceeds_daily: return "volume_exceeds_daily";
        case RejectReason::participation_above_one: return "participation_above_one";
        case RejectReason::bad_time_order: return "bad_time_order";
        case RejectReason::nonpositive_price: return "nonpositive_price";
        case RejectReason::bad_daily_marks: return "bad_daily_marks";
        case RejectReason::zero_sigma: return "zero_sigma";
    }
    return "unknown";
}

std::optional<RejectReason> validate(const MetaorderRecord& r) {
    if (r.sign != 1 && r.sign != -1) {
        return RejectReason::bad_sign;
    }
    if (!(r.Q > 0.0)) {
        return RejectReason::nonpositive_size;
    }
    if (!(r.V_T > 0.0) || !(r.V_d > 0.0)) {
        return RejectReason::nonpositive_volume;
    }
    if (r.V_T > r.V_d) {
        return RejectReason::volume_exceeds_daily;
    }
    if (r.Q > r.V_T) {
        return RejectReason::participation_above_one;
    }
    if (r.t_end <= r.t_start) {
        return RejectReason::bad_time_order;
    }
    if (!(r.p_start > 0.0) || !(r.p_end > 0.0) || !(r.P_high > 0.0) || !(r.P_low > 0.0) ||
        !(r.P_open > 0.0)) {
        return RejectReason::nonpositive_price;
    }
    if (r.P_high < r.P_open || r.P_open < r.P_low) {
        return RejectReason::bad_daily_marks;
    }
    if (r.P_high == r.P_low) {
        return RejectReason::zero_sigma;
    }
    return std::nullopt;
}

RescaledMetaorder rescale(const MetaorderRecord& r) {
    const double sigma_d = (r.P_high - r.P_low) / r.P_open;
    RescaledMetaorder out;
    out.eta = r.Q / r.V_T;
    out.phi = r.Q / r.V_d;
    out.T_vol = r.V_T / r.V_d;
    out.impact_obs = r.sign * (std::log(r.p_end) - std::log(r.p_start)) / sigma_d;
    return out;
}

IngestResult read_csv(std::istream& in) {
    IngestResult out;
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("empty input: missing CSV header");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kCsvHeader) {
        throw ConfigError(std::string("malformed CSV header; expected \"") + kCsvHeader + "\"");
    }
    std::vector<std::size_t> bad_lines;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv_line(line);
        MetaorderRecord r;
        double sign = 0.0;
        if (f.size() != 12 || !parse_double(f[1], sign) || !parse_double(f[2], r.Q) ||
            !parse_double(f[5], r.p_start) || !parse_double(f[6], r.p_end) ||
            !parse_double(f[7], r.V_T) || !parse_double(f[8], r.V_d) ||
            !parse_double(f[9], r.P_high) || !parse_double(f[10], r.P_low) ||
            !parse_double(f[11], r.P_open) || (sign != 1.0 && sign != -1.0)) {
            bad_lines.push_back(line_no);
            continue;
        }
        r.symbol = f[0];
        r.sign = static_cast<int>(sign);
        r.t_start = f[3];
        r.t_end = f[4];
        if (const auto why = validate(r)) {
            out.rejects.push_back({line_no, *why});
            continue;
        }
        out.records.push_back(r);
        out.rescaled.push_back(rescale(r));
    }
    if (!bad_lines.empty()) {
        std::string msg = "unparseable CSV rows at lines:";
        for (std::size_t i = 0; i < bad_lines.size() && i < 20; ++i) {
            msg += " " + std::to_string(bad_lines[i]);
        }
        if (bad_lines.size() > 20) {
            msg += " ... (" + std::to_string(bad_lines.size()) + " total)";
        }
        throw ConfigError(msg);
    }
    return out;
}

void write_csv(std::ostream& out, const std::vector<MetaorderRecord>& records) {
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.symbol << ',' << r.sign << ',' << fmt_double(r.Q) << ',' << r.t_start << ','
            << r.t_end << ',' << fmt_double(r.p_start) << ',' << fmt_double(r.p_end) << ','
            << fmt_double(r.V_T) << ',' << fmt_double(r.V_d) << ',' << fmt_double(r.P_high)
            << ',' << fmt_double(r.P_low) << ',' << fmt_double(r.P_open) << '\n';
    }
}

std::vector<RescaledMetaorder> filter_min_size(const std::vector<RescaledMetaorder>& rows,
                                               double phi_min) {
    if (phi_min < 0.0) {
        throw ConfigError("phi_min must be >= 0");
    }
    std::vector<RescaledMetaorder> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        if (r.phi >= phi_min) {
            out.push_back(r);
        }
    }
    return out;
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
    SynthConfig cfg;
    if (!j.contains("params")) {
        throw ConfigError("synth config: missing \"params\" block");
    }
    const auto& p = j.at("params");
    if (p.contains("scaling")) {
        const auto& s = p.at("scaling");
        ScalingLaw law;
        if (s.contains("plateau")) {
            law.amplitude = s.at("plateau").get<double>() / std::sqrt(2.0);
        }
        if (s.contains("amplitude")) {
            law.amplitude = s.at("amplitude").get<double>();
        }
        law.eta_star = s.value("eta_star", law.eta_star);
        law.T_dagger = s.value("T_dagger", 0.0);
        law.exponent = s.value("exponent", 1.0);
        law.amp_exponent = s.value("amp_exponent", 0.5 * law.exponent);
        if (!(law.amplitude > 0.0) || !(law.eta_star > 0.0)) {
            throw ConfigError("synth scaling law: amplitude and eta_star must be positive");
        }
        cfg.params = law;
    } else if (p.contains("slow")) {
        cfg.params = dual::DualBookParams::from_json(p);
    } else {
        cfg.params = BookParams::from_json(p);
    }
    if (!j.contains("n")) {
        throw ConfigError("synth config: missing \"n\"");
    }
    const long long n = j.at("n").get<long long>();
    if (n < 1) {
        throw ConfigError("synth config: n must be >= 1");
    }
    cfg.n = static_cast<std::size_t>(n);
    cfg.noise_sigma = j.value("noise_sigma", 0.0);
    if (cfg.noise_sigma < 0.0) {
        throw ConfigError("synth config: noise_sigma must be >= 0");
    }
    cfg.seed = j.value("seed", 0ULL);
    if (j.contains("Q_range")) {
        cfg.Q_lo = j.at("Q_range").at(0).get<double>();
        cfg.Q_hi = j.at("Q_range").at(1).get<double>();
    }
    if (j.contains("T_range")) {
        cfg.T_lo = j.at("T_range").at(0).get<double>();
        cfg.T_hi = j.at("T_range").at(1).get<double>();
    }
    if (!(cfg.Q_lo > 0.0) || cfg.Q_hi < cfg.Q_lo || !(cfg.T_lo > 0.0) ||
        cfg.T_hi < cfg.T_lo || cfg.T_hi > 1.0) {
        throw ConfigError("synth config: invalid Q_range/T_range (need 0 < lo <= hi, T_hi <= 1)");
    }
    return cfg;
}

std::vector<MetaorderRecord> synth_generate(const SynthConfig& cfg, const ScalingTable& table) {
    if (cfg.n < 1) {
        throw ConfigError("synth_generate: n must be >= 1");
    }
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double lq0 = std::log(cfg.Q_lo), lq1 = std::log(cfg.Q_hi);
    const double lt0 = std::log(cfg.T_lo), lt1 = std::log(cfg.T_hi);

    const auto theory = [&](double phi, double T_vol) -> double {
        if (std::holds_alternative<BookParams>(cfg.params)) {
            // unit convention: J = V_d/day = 1, Q in V_d units
            return impact(std::get<BookParams>(cfg.params), MetaorderSpec(phi, T_vol, 1),
                          table);
        }
        if (std::holds_alternative<dual::DualBookParams>(cfg.params)) {
            return dual::impact_dual(std::get<dual::DualBookParams>(cfg.params),
                                     MetaorderSpec(phi, T_vol, 1), table)
                .impact;
        }
        const auto& law = std::get<ScalingLaw>(cfg.params);
        const double eta = phi / T_vol;
        double eta_eff = law.eta_star;
        double amp_fac = 1.0;
        if (law.T_dagger > 0.0 && T_vol < law.T_dagger) {
            eta_eff = law.eta_star * std::pow(law.T_dagger / T_vol, law.exponent);
            amp_fac = std::pow(T_vol / law.T_dagger, law.amp_exponent);
        }
        return amp_fac * law.amplitude * std::sqrt(phi) * table(eta / eta_eff);
    };

    std::vector<MetaorderRecord> out;
    out.reserve(cfg.n);
    const double v_d_shares = 1e6;
    for (std::size_t i = 0; i < cfg.n; ++i) {
        double phi = 0.0, T_vol = 0.0;
        do {
            phi = std::exp(lq0 + (lq1 - lq0) * u01(rng));
            T_vol = std::exp(lt0 + (lt1 - lt0) * u01(rng));
        } while (phi > T_vol);  // enforce eta = Q/V_T <= 1
        const int sign = (u01(rng) < 0.5) ? 1 : -1;
        const double obs = theory(phi, T_vol) + cfg.noise_sigma * std::sqrt(phi) * gauss(rng);

        MetaorderRecord r;
        r.symbol = "SYN";
        r.sign = sign;
        r.Q = phi * v_d_shares;
        r.V_T = T_vol * v_d_shares;
        r.V_d = v_d_shares;
        r.t_start = iso_time(0.0);
        r.t_end = iso_time(T_vol);
        // daily marks chosen so sigma_d = (P_high - P_low)/P_open = 1
        r.P_open = 100.0;
        r.P_low = 50.0;
        r.P_high = 150.0;
        r.p_start = 100.0;
        r.p_end = 100.0 * std::exp(sign * obs);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace llob::data
