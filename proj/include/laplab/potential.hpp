#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "laplab/common.hpp"
#include "laplab/interp.hpp"

namespace laplab {

// Radial potential families. "soft_power" is the reference attractive decay
// -c0 <r>^-nu; "constant" is a flat test mode kept for closed-form oracles
// (it deliberately fails the decay assumptions and is never shipped as a
// passing preset).
enum class PotentialFamily { soft_power, sum_of_soft_powers, tabulated, constant };

enum class QFamily { none, soft_power_sr, slow_decay };

struct SoftPowerTerm {
    double c0 = 1.0; // may be negative to express a repulsive counterexample
    double nu = 1.0;
};

struct PotentialSpec {
    std::string name = "unnamed";
    PotentialFamily family = PotentialFamily::soft_power;
    std::vector<SoftPowerTerm> terms{SoftPowerTerm{}}; // first term for soft_power
    double v0 = 1.0;                                   // depth of the constant test mode

    std::vector<double> table_r, table_v; // tabulated family samples
    mutable std::optional<MonotoneCubic> table_interp;

    // Claimed assumption constants; the verifier tests them, it never trusts them.
    double nu = 1.0;       // decay exponent, in (0,2)
    double eps = 1.0;      // virial gap, in (0,2)
    double c_low = 1.0;    // lower bound constant for -V
    double C_up = 2.0;     // upper bound constant for |d^k V|
    double nu_prime = 2.0; // short-range exponent of q, in (nu, 2]
    double C_q = 0.0;      // claimed bound constant for |q|

    QFamily q_family = QFamily::none;
    double q_amp = 0.0; // signed amplitude of q

    int dim = 3;

    void validate() const {
        if (!(nu > 0.0 && nu < 2.0))
            throw std::invalid_argument("PotentialSpec: nu must lie in (0,2)");
        if (!(eps > 0.0 && eps < 2.0))
            throw std::invalid_argument("PotentialSpec: eps must lie in (0,2)");
        if (!(c_low > 0.0)) throw std::invalid_argument("PotentialSpec: c_low must be positive");
        if (!(C_up > 0.0)) throw std::invalid_argument("PotentialSpec: C_up must be positive");
        if (!(nu_prime > nu && nu_prime <= 2.0))
            throw std::invalid_argument("PotentialSpec: nu_prime must lie in (nu, 2]");
        if (C_q < 0.0) throw std::invalid_argument("PotentialSpec: C_q must be >= 0");
        if (dim < 1) throw std::invalid_argument("PotentialSpec: dim must be >= 1");
        if (family == PotentialFamily::soft_power && terms.size() != 1)
            throw std::invalid_argument("PotentialSpec: soft_power takes exactly one term");
        if (family == PotentialFamily::sum_of_soft_powers && terms.empty())
            throw std::invalid_argument("PotentialSpec: sum_of_soft_powers needs terms");
        if (family == PotentialFamily::tabulated) {
            if (table_r.size() != table_v.size() || table_r.size() < 4)
                throw std::invalid_argument("PotentialSpec: tabulated needs r/V samples (>= 4)");
        }
        for (const auto& t : terms)
            if (!(t.nu > 0.0 && t.nu < 2.0))
                throw std::invalid_argument("PotentialSpec: term nu must lie in (0,2)");
    }

    const MonotoneCubic& interp() const {
        if (!table_interp) table_interp.emplace(table_r, table_v);
        return *table_interp;
    }
};

struct PotentialValues {
    double V = 0.0;
    double dV = 0.0;  // dV/dr
    double d2V = 0.0; // d^2V/dr^2
    double q = 0.0;
    double dq = 0.0; // used by the asymptotic-phase boundary treatment
};

namespace detail {

inline void accum_soft_power(double c0, double nu, double r, PotentialValues& pv) {
    double u = 1.0 + r * r;
    double p = std::pow(u, -0.5 * nu);
    pv.V += -c0 * p;
    pv.dV += c0 * nu * r * p / u;
    pv.d2V += c0 * nu * (p / u) * (1.0 - (nu + 2.0) * r * r / u);
}

} // namespace detail

inline PotentialValues eval_potential(const PotentialSpec& spec, double r) {
    if (r < 0.0) throw std::domain_error("eval_potential: negative radius");
    PotentialValues pv;
    switch (spec.family) {
    case PotentialFamily::soft_power:
        detail::accum_soft_power(spec.terms[0].c0, spec.terms[0].nu, r, pv);
        break;
    case PotentialFamily::sum_of_soft_powers:
        for (const auto& t : spec.terms) detail::accum_soft_power(t.c0, t.nu, r, pv);
        break;
    case PotentialFamily::tabulated: {
        const MonotoneCubic& f = spec.interp();
        if (r > f.max_x())
            throw std::domain_error("eval_potential: radius beyond tabulated range");
        pv.V = f.eval(r);
        pv.dV = f.deriv(r);
        pv.d2V = f.deriv2(r);
        break;
    }
    case PotentialFamily::constant:
        pv.V = -spec.v0;
        break;
    }
    switch (spec.q_family) {
    case QFamily::none:
        break;
    case QFamily::soft_power_sr: {
        double e = 0.5 * (1.0 + 0.5 * spec.nu_prime);
        double u = 1.0 + r * r;
        double p = std::pow(u, -e);
        pv.q = spec.q_amp * p;
        pv.dq = -2.0 * e * spec.q_amp * r * p / u;
        break;
    }
    case QFamily::slow_decay: {
        double u = 1.0 + r * r;
        pv.q = spec.q_amp / std::sqrt(u);
        pv.dq = -spec.q_amp * r * std::pow(u, -1.5);
        break;
    }
    }
    return pv;
}

// ---- JSON presets -------------------------------------------------------

inline PotentialFamily family_from_string(const std::string& s) {
    if (s == "soft_power") return PotentialFamily::soft_power;
    if (s == "sum_of_soft_powers") return PotentialFamily::sum_of_soft_powers;
    if (s == "tabulated") return PotentialFamily::tabulated;
    if (s == "constant") return PotentialFamily::constant;
    throw std::invalid_argument("PotentialSpec: unknown family '" + s + "'");
}

inline std::string to_string(PotentialFamily f) {
    switch (f) {
    case PotentialFamily::soft_power: return "soft_power";
    case PotentialFamily::sum_of_soft_powers: return "sum_of_soft_powers";
    case PotentialFamily::tabulated: return "tabulated";
    case PotentialFamily::constant: return "constant";
    }
    return "?";
}

inline QFamily q_family_from_string(const std::string& s) {
    if (s == "none") return QFamily::none;
    if (s == "soft_power_sr") return QFamily::soft_power_sr;
    if (s == "slow_decay") return QFamily::slow_decay;
    throw std::invalid_argument("PotentialSpec: unknown q family '" + s + "'");
}

inline std::string to_string(QFamily f) {
    switch (f) {
    case QFamily::none: return "none";
    case QFamily::soft_power_sr: return "soft_power_sr";
    case QFamily::slow_decay: return "slow_decay";
    }
    return "?";
}

inline PotentialSpec spec_from_json(const nlohmann::json& j) {
    PotentialSpec s;
    s.name = j.value("name", std::string("unnamed"));
    s.family = family_from_string(j.at("family").get<std::string>());
    s.nu = j.value("nu", 1.0);
    s.eps = j.value("eps", 1.0);
    s.nu_prime = j.value("nu_prime", 2.0);
    s.dim = j.value("dim", 3);
    if (s.family == PotentialFamily::soft_power) {
        s.terms = {SoftPowerTerm{j.value("c0", 1.0), s.nu}};
    } else if (s.family == PotentialFamily::sum_of_soft_powers) {
        s.terms.clear();
        for (const auto& t : j.at("terms"))
            s.terms.push_back({t.at("c0").get<double>(), t.at("nu").get<double>()});
    } else if (s.family == PotentialFamily::tabulated) {
        s.table_r = j.at("r").get<std::vector<double>>();
        s.table_v = j.at("V").get<std::vector<double>>();
    } else if (s.family == PotentialFamily::constant) {
        s.v0 = j.value("v0", 1.0);
    }
    double c0 = s.terms.empty() ? 1.0 : s.terms[0].c0;
    s.c_low = j.value("c_low", std::max(c0, 1e-12));
    s.C_up = j.value("C_up", std::abs(c0) * std::max(1.0, s.nu * (s.nu + 1.0)));
    if (j.contains("q")) {
        const auto& q = j.at("q");
        s.q_family = q_family_from_string(q.value("family", std::string("none")));
        s.q_amp = q.value("amp", q.value("C", 0.0));
        s.C_q = q.value("C", std::abs(s.q_amp));
    }
    s.validate();
    return s;
}

inline nlohmann::ordered_json spec_to_json(const PotentialSpec& s) {
    nlohmann::ordered_json j;
    j["name"] = s.name;
    j["family"] = to_string(s.family);
    j["nu"] = s.nu;
    j["eps"] = s.eps;
    j["nu_prime"] = s.nu_prime;
    j["dim"] = s.dim;
    if (s.family == PotentialFamily::soft_power) j["c0"] = s.terms[0].c0;
    if (s.family == PotentialFamily::sum_of_soft_powers) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& t : s.terms) arr.push_back({{"c0", t.c0}, {"nu", t.nu}});
        j["terms"] = arr;
    }
    if (s.family == PotentialFamily::tabulated) {
        j["r"] = s.table_r;
        j["V"] = s.table_v;
    }
    if (s.family == PotentialFamily::constant) j["v0"] = s.v0;
    j["c_low"] = s.c_low;
    j["C_up"] = s.C_up;
    if (s.q_family != QFamily::none) {
        j["q"] = {{"family", to_string(s.q_family)}, {"amp", s.q_amp}, {"C", s.C_q}};
    }
    return j;
}

inline PotentialSpec load_preset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_preset: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        // Re-throw with the byte offset so the CLI can report line/column.
        throw std::invalid_argument("load_preset: parse error in '" + path + "': " + e.what());
    }
    return spec_from_json(j);
}

} // namespace laplab
