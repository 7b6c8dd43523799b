#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "laplab/experiments.hpp"
#include "laplab/field.hpp"
#include "laplab/grid.hpp"

namespace laplab {

// Shortest exact decimal form; every CSV number round-trips bit for bit.
inline std::string format_g17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---- partial-wave fields -----------------------------------------------------

// Column layout: r, then re_u<ell>, im_u<ell> per sector.
inline void write_field_csv(std::ostream& os, const PartialWaveField& f) {
    os << "r";
    for (int ell : f.ells) os << ",re_u" << ell << ",im_u" << ell;
    os << "\n";
    const auto& r = f.grid->r;
    for (std::size_t i = 0; i < r.size(); ++i) {
        os << format_g17(r[i]);
        for (std::size_t k = 0; k < f.sectors(); ++k)
            os << ',' << format_g17(f.u[k][i].real()) << ',' << format_g17(f.u[k][i].imag());
        os << "\n";
    }
}

inline nlohmann::ordered_json field_header(const PartialWaveField& f) {
    nlohmann::ordered_json h;
    h["dim"] = f.grid->dim;
    h["ells"] = f.ells;
    if (f.produced_at)
        h["z"] = {f.produced_at->real(), f.produced_at->imag()};
    else
        h["z"] = nullptr;
    h["grid"] = {{"nodes", f.grid->size()},
                 {"r_first", f.grid->front()},
                 {"r_last", f.grid->back()}};
    return h;
}

// Writes <stem>.csv plus <stem>.json carrying the metadata the CSV cannot.
inline void write_field(const std::string& stem, const PartialWaveField& f) {
    std::ofstream csv(stem + ".csv");
    if (!csv) throw std::runtime_error("write_field: cannot open " + stem + ".csv");
    write_field_csv(csv, f);
    std::ofstream js(stem + ".json");
    if (!js) throw std::runtime_error("write_field: cannot open " + stem + ".json");
    js << field_header(f).dump(2) << "\n";
}

inline PartialWaveField read_field(const std::string& stem) {
    std::ifstream js(stem + ".json");
    if (!js) throw std::runtime_error("read_field: cannot open " + stem + ".json");
    auto h = nlohmann::ordered_json::parse(js);
    std::ifstream csv(stem + ".csv");
    if (!csv) throw std::runtime_error("read_field: cannot open " + stem + ".csv");

    std::string line;
    if (!std::getline(csv, line)) throw std::runtime_error("read_field: empty CSV");
    std::vector<int> ells = h.at("ells").get<std::vector<int>>();

    RadialGrid g;
    g.dim = h.at("dim").get<int>();
    std::vector<std::vector<cplx>> u(ells.size());
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        g.r.push_back(std::stod(cell));
        for (std::size_t k = 0; k < ells.size(); ++k) {
            std::getline(row, cell, ',');
            double re = std::stod(cell);
            std::getline(row, cell, ',');
            u[k].emplace_back(re, std::stod(cell));
        }
    }
    g.validate();
    PartialWaveField f = PartialWaveField::zeros(share(std::move(g)), ells);
    f.u = std::move(u);
    if (h.contains("z") && !h.at("z").is_null())
        f.produced_at = cplx(h.at("z")[0].get<double>(), h.at("z")[1].get<double>());
    return f;
}

// ---- experiment reports --------------------------------------------------------

inline void write_report_json(const std::string& path, const ExperimentReport& rep,
                              bool with_timestamp = true) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_report_json: cannot open " + path);
    os << rep.to_json(with_timestamp).dump(2) << "\n";
}

// Flattens the record series into one CSV; columns follow first appearance.
inline void write_report_csv(std::ostream& os, const ExperimentReport& rep) {
    std::vector<std::string> cols;
    for (const auto& rec : rep.records)
        for (auto it = rec.begin(); it != rec.end(); ++it)
            if (std::find(cols.begin(), cols.end(), it.key()) == cols.end())
                cols.push_back(it.key());
    for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
    os << "\n";
    for (const auto& rec : rep.records) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) os << ',';
            if (!rec.contains(cols[c])) continue;
            const auto& v = rec.at(cols[c]);
            if (v.is_number_float())
                os << format_g17(v.get<double>());
            else if (v.is_number_integer())
                os << v.get<long long>();
            else if (v.is_boolean())
                os << (v.get<bool>() ? 1 : 0);
            else
                os << v.get<std::string>();
        }
        os << "\n";
    }
}

inline void write_report_csv(const std::string& path, const ExperimentReport& rep) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_report_csv: cannot open " + path);
    write_report_csv(os, rep);
}

} // namespace laplab
