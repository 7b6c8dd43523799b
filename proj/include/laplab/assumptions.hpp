#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "laplab/potential.hpp"

namespace laplab {

// One decay/sign/virial inequality tested pointwise on a radial sample.
struct InequalityRecord {
    std::string id;
    bool pass = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_radius = 0.0; // where (claimed bound - actual) is smallest
    std::size_t violations = 0;

    void update(double margin, double r, double tol) {
        if (margin < worst_margin) {
            worst_margin = margin;
            worst_radius = r;
        }
        if (margin < -tol) {
            ++violations;
            pass = false;
        }
    }
};

struct AssumptionReport {
    std::string preset;
    std::vector<InequalityRecord> records;
    std::size_t points = 0;
    double rmax = 0.0;
    bool pass = true;

    const InequalityRecord& record(const std::string& id) const {
        for (const auto& rec : records)
            if (rec.id == id) return rec;
        throw std::invalid_argument("AssumptionReport: no record '" + id + "'");
    }
};

// Checks the claimed constants of `spec` on a log-graded sample of [0, rmax].
// Sign conventions put every inequality in the form margin >= 0.
inline AssumptionReport verify_assumptions(const PotentialSpec& spec, double rmax = 1e4,
                                           std::size_t points = 2048, double tol = 1e-9) {
    spec.validate();
    if (points < 1000) throw std::invalid_argument("verify_assumptions: need >= 1000 points");
    AssumptionReport rep;
    rep.preset = spec.name;
    rep.points = points;
    rep.rmax = rmax;
    rep.records = {
        {"derivative-decay"},      // |d^k V| <= C <r>^(-nu-k), k = 0,1,2, radially reduced
        {"attractive-lower-bound"}, // V <= -c <r>^(-nu)
        {"virial"},                // r V' <= -(2-eps) V
        {"short-range-q"},         // |q| <= C' <r>^(-1-nu'/2)
    };

    const double r_lo = 1e-3;
    for (std::size_t i = 0; i < points; ++i) {
        double r;
        if (i == 0)
            r = 0.0;
        else
            r = r_lo * std::pow(rmax / r_lo, double(i) / double(points - 1));
        PotentialValues pv = eval_potential(spec, r);
        double br = jbracket(r);

        double m0 = spec.C_up - std::abs(pv.V) * std::pow(br, spec.nu);
        double m1 = spec.C_up - std::abs(pv.dV) * std::pow(br, spec.nu + 1.0);
        double m2 = spec.C_up - std::abs(pv.d2V) * std::pow(br, spec.nu + 2.0);
        double md = std::min({m0, m1, m2});
        // The |x|-Hessian of a radial function also carries V'/r; near the
        // origin that tends to V''(0), which m2 already covers.
        if (r >= 0.1) {
            double mmix = spec.C_up - (std::abs(pv.dV) / r) * std::pow(br, spec.nu + 2.0);
            md = std::min(md, mmix);
        }
        rep.records[0].update(md, r, tol);

        rep.records[1].update(-pv.V * std::pow(br, spec.nu) - spec.c_low, r, tol);
        rep.records[2].update(-(2.0 - spec.eps) * pv.V - r * pv.dV, r, tol);
        rep.records[3].update(spec.C_q - std::abs(pv.q) * std::pow(br, 1.0 + 0.5 * spec.nu_prime),
                              r, tol);
    }
    for (const auto& rec : rep.records) rep.pass = rep.pass && rec.pass;
    return rep;
}

inline nlohmann::ordered_json to_json(const AssumptionReport& rep) {
    nlohmann::ordered_json j;
    j["preset"] = rep.preset;
    j["points"] = rep.points;
    j["rmax"] = rep.rmax;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& rec : rep.records) {
        arr.push_back({{"id", rec.id},
                       {"pass", rec.pass},
                       {"worst_margin", rec.worst_margin},
                       {"worst_radius", rec.worst_radius},
                       {"violations", rec.violations}});
    }
    j["inequalities"] = arr;
    j["pass"] = rep.pass;
    return j;
}

} // namespace laplab
