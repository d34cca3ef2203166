#pragma once

#include <pfl/error.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace pfl {

struct SliceAxis
{
    std::size_t index = 0; ///< parameter index varied along this axis
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 2; ///< grid points, including both endpoints

    double coordinate(std::size_t i) const
    {
        if (i + 1 == count)
            return max;
        return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
    }

    friend bool operator==(SliceAxis const&, SliceAxis const&) = default;
};

/// A 2- or 3-axis grid through parameter space; coordinates not on an axis
/// stay at base_point.
struct ParameterSlice
{
    std::vector<SliceAxis> axes;
    std::vector<double> base_point;

    std::size_t dimension() const { return axes.size(); }

    std::vector<std::size_t> resolution() const
    {
        std::vector<std::size_t> r;
        for (auto const& a : axes)
            r.push_back(a.count);
        return r;
    }

    std::size_t node_count() const
    {
        std::size_t n = 1;
        for (auto const& a : axes)
            n *= a.count;
        return n;
    }

    /// Grid multi-index of node p (row-major, axis 0 slowest).
    std::vector<std::size_t> node_index(std::size_t p) const
    {
        std::vector<std::size_t> idx(axes.size());
        for (std::size_t k = axes.size(); k-- > 0;) {
            idx[k] = p % axes[k].count;
            p /= axes[k].count;
        }
        return idx;
    }

    /// Full parameter vector at node p.
    std::vector<double> point(std::size_t p) const
    {
        std::vector<double> theta = base_point;
        auto const idx = node_index(p);
        for (std::size_t k = 0; k < axes.size(); ++k)
            theta[axes[k].index] = axes[k].coordinate(idx[k]);
        return theta;
    }

    void validate() const
    {
        if (axes.size() < 2 || axes.size() > 3)
            throw ConfigError("slice: need 2 or 3 axes, got " + std::to_string(axes.size()));
        for (std::size_t k = 0; k < axes.size(); ++k) {
            auto const& a = axes[k];
            if (a.index >= base_point.size())
                throw ConfigError("slice: axis " + std::to_string(k) + " index " +
                                  std::to_string(a.index) + " out of range");
            if (a.count < 2)
                throw ConfigError("slice: axis " + std::to_string(k) + " needs count >= 2");
            if (!(std::isfinite(a.min) && std::isfinite(a.max) && a.min < a.max))
                throw ConfigError("slice: axis " + std::to_string(k) + " needs finite min < max");
            for (std::size_t j = 0; j < k; ++j)
                if (axes[j].index == a.index)
                    throw ConfigError("slice: parameter index " + std::to_string(a.index) +
                                      " varied twice");
        }
    }

    friend bool operator==(ParameterSlice const&, ParameterSlice const&) = default;
};

/// Scalar values on the slice grid, row-major with axis 0 slowest.
struct ScalarField
{
    ParameterSlice slice;
    std::vector<double> values;

    std::vector<std::size_t> shape() const { return slice.resolution(); }

    /// Field given by fn(coordinates) on a synthetic slice.
    static ScalarField tabulate(std::vector<SliceAxis> axes,
                                std::function<double(std::vector<double> const&)> const& fn)
    {
        ScalarField f;
        f.slice.axes = std::move(axes);
        std::size_t max_index = 0;
        for (auto const& a : f.slice.axes)
            max_index = std::max(max_index, a.index);
        f.slice.base_point.assign(max_index + 1, 0.0);
        f.slice.validate();
        std::size_t const n = f.slice.node_count();
        f.values.resize(n);
        std::vector<double> coords(f.slice.axes.size());
        for (std::size_t p = 0; p < n; ++p) {
            auto const idx = f.slice.node_index(p);
            for (std::size_t k = 0; k < coords.size(); ++k)
                coords[k] = f.slice.axes[k].coordinate(idx[k]);
            f.values[p] = fn(coords);
        }
        return f;
    }
};

/// Field file: one JSON header line, then one value per line.
inline void write_field(std::ostream& os, ScalarField const& f)
{
    nlohmann::ordered_json hdr;
    hdr["axes"] = nlohmann::ordered_json::array();
    for (auto const& a : f.slice.axes)
        hdr["axes"].push_back({{"index", a.index}, {"min", a.min}, {"max", a.max}, {"count", a.count}});
    hdr["base_point"] = f.slice.base_point;
    os << hdr.dump() << '\n';
    for (double v : f.values)
        os << nlohmann::json(v).dump() << '\n';
}

inline ScalarField read_field(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line))
        throw ConfigError("field file: missing header line");
    ScalarField f;
    try {
        auto const hdr = nlohmann::json::parse(line);
        for (auto const& a : hdr.at("axes"))
            f.slice.axes.push_back({a.at("index").get<std::size_t>(), a.at("min").get<double>(),
                                    a.at("max").get<double>(), a.at("count").get<std::size_t>()});
        f.slice.base_point = hdr.at("base_point").get<std::vector<double>>();
    } catch (nlohmann::json::exception const& e) {
        throw ConfigError(std::string("field file: bad header: ") + e.what());
    }
    f.slice.validate();
    std::size_t const n = f.slice.node_count();
    f.values.reserve(n);
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::istringstream ss(line);
        double v;
        if (!(ss >> v))
            throw ConfigError("field file: bad value on data line " +
                              std::to_string(f.values.size() + 1));
        f.values.push_back(v);
    }
    if (f.values.size() != n)
        throw ConfigError("field file: expected " + std::to_string(n) + " values, got " +
                          std::to_string(f.values.size()));
    return f;
}

} // namespace pfl
