#pragma once

#include <algorithm>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "invdp/approx.hpp"
#include "invdp/grid.hpp"
#include "invdp/restriction.hpp"
#include "invdp/sampled_data.hpp"

namespace invdp {

using nlohmann::json;

inline json to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

inline Vector vector_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + ": expected an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(what + ": expected an array of numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

inline json to_json(const Matrix& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(row);
    }
    return out;
}

inline Matrix matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a nonempty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        const Vector row = vector_from_json(j[r], what);
        if (static_cast<std::size_t>(row.size()) != cols) throw ConfigError(what + ": ragged matrix rows");
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

inline json to_json(const Box& box) { return json{{"type", "box"}, {"lo", to_json(box.lo)}, {"hi", to_json(box.hi)}}; }

inline Box box_from_json(const json& j, const std::string& what) {
    try {
        return Box(vector_from_json(j.at("lo"), what + ".lo"), vector_from_json(j.at("hi"), what + ".hi"));
    } catch (const json::exception& e) {
        throw ConfigError(what + ": " + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

inline json to_json(const CompactSet& set) {
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Box>) {
                return to_json(s);
            } else if constexpr (std::is_same_v<T, Ball>) {
                return json{{"type", "ball"}, {"center", to_json(s.center)}, {"radius", s.radius}};
            } else {
                json points = json::array();
                for (const auto& p : s.points()) points.push_back(to_json(p));
                return json{{"type", "sampled_closure"}, {"points", points}, {"margin", s.margin()}};
            }
        },
        set.shape());
}

inline CompactSet compact_set_from_json(const json& j, const std::string& what) {
    try {
        const std::string type = j.at("type").get<std::string>();
        if (type == "box") return CompactSet(box_from_json(j, what));
        if (type == "ball") {
            return CompactSet(Ball{vector_from_json(j.at("center"), what + ".center"), j.at("radius").get<double>()});
        }
        if (type == "sampled_closure") {
            std::vector<Vector> points;
            for (const auto& p : j.at("points")) points.push_back(vector_from_json(p, what + ".points"));
            return CompactSet(SampledClosure(std::move(points), j.at("margin").get<double>()));
        }
        throw ConfigError(what + ": unknown set type '" + type + "'");
    } catch (const json::exception& e) {
        throw ConfigError(what + ": " + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

inline json to_json(const LinearSystem& sys) { return json{{"A", to_json(sys.A)}, {"B", to_json(sys.B)}}; }

inline LinearSystem linear_system_from_json(const json& j, const std::string& what) {
    try {
        LinearSystem sys{matrix_from_json(j.at("A"), what + ".A"), matrix_from_json(j.at("B"), what + ".B")};
        sys.validate();
        return sys;
    } catch (const json::exception& e) {
        throw ConfigError(what + ": " + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

inline json to_json(const ZohConfig& cfg) {
    return json{{"sample_period", cfg.sample_period}, {"substeps", cfg.substeps}};
}

inline ZohConfig zoh_config_from_json(const json& j, const std::string& what) {
    ZohConfig cfg;
    try {
        cfg.sample_period = j.value("sample_period", cfg.sample_period);
        cfg.substeps = j.value("substeps", cfg.substeps);
        cfg.validate();
    } catch (const json::exception& e) {
        throw ConfigError(what + ": " + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(what + ": " + e.what());
    }
    return cfg;
}

inline json to_json(const GridValueFn& v) {
    return json{{"axes", v.axes()},
                {"values", v.values()},
                {"out_of_range", v.out_of_range() == OutOfRange::Clamp ? "clamp" : "error"}};
}

inline GridValueFn grid_from_json(const json& j) {
    try {
        const auto mode = j.value("out_of_range", std::string("clamp"));
        return GridValueFn(j.at("axes").get<std::vector<std::vector<double>>>(), j.at("values").get<std::vector<double>>(),
                           mode == "error" ? OutOfRange::Error : OutOfRange::Clamp);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("grid value function: ") + e.what());
    }
}

/// Inverse of write_grid_csv. Axes are recovered from the distinct node coordinates.
inline GridValueFn read_grid_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("grid CSV: missing header");
    const auto dims = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    if (dims == 0) throw ConfigError("grid CSV: header has no coordinate columns");
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != dims + 1) throw ConfigError("grid CSV: row has the wrong number of columns");
        rows.push_back(std::move(row));
    }
    std::vector<std::vector<double>> axes(dims);
    for (std::size_t d = 0; d < dims; ++d) {
        std::set<double> unique;
        for (const auto& r : rows) unique.insert(r[d]);
        axes[d].assign(unique.begin(), unique.end());
    }
    GridValueFn grid(axes);
    if (grid.size() != rows.size()) throw ConfigError("grid CSV: rows do not form a full rectangular grid");
    std::vector<double> values(rows.size());
    for (std::size_t n = 0; n < rows.size(); ++n) values[n] = rows[n][dims];
    grid.set_values(std::move(values));
    return grid;
}

}  // namespace invdp
