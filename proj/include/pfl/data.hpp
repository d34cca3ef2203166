#pragma once

// Plain-text dataset files: one sample per line, x_1..x_n0 then y,
// comma separated. A first line that does not parse as numbers is a header.

#include <pfl/error.hpp>
#include <pfl/network.hpp>

#include <charconv>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace pfl {

namespace detail {

inline bool parse_number(std::string_view s, double& out)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    if (s.empty())
        return false;
    auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

inline bool split_numbers(std::string const& line, std::vector<double>& out)
{
    out.clear();
    std::size_t start = 0;
    while (true) {
        std::size_t const comma = line.find(',', start);
        double v;
        if (!parse_number(std::string_view(line).substr(start, comma - start), v))
            return false;
        out.push_back(v);
        if (comma == std::string::npos)
            return true;
        start = comma + 1;
    }
}

} // namespace detail

inline Dataset read_dataset(std::istream& is, std::size_t n0, std::string const& name = "dataset")
{
    Dataset data;
    std::string line;
    std::vector<double> row;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        if (!detail::split_numbers(line, row)) {
            if (lineno == 1)
                continue;
            throw ConfigError(name + ":" + std::to_string(lineno) + ": not a numeric row");
        }
        if (row.size() != n0 + 1)
            throw ConfigError(name + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(n0 + 1) + " columns, got " + std::to_string(row.size()));
        Sample s;
        s.x.assign(row.begin(), row.end() - 1);
        s.y = row.back();
        data.push_back(std::move(s));
    }
    if (data.empty())
        throw ConfigError(name + ": no samples");
    return data;
}

inline Dataset read_dataset_file(std::string const& path, std::size_t n0)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open dataset file " + path);
    return read_dataset(in, n0, path);
}

} // namespace pfl
