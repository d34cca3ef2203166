#pragma once

#include <pfl/cubical.hpp>
#include <pfl/error.hpp>
#include <pfl/field.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <iterator>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

namespace pfl {

struct BettiVector
{
    /// b_0 .. b_d for a d-dimensional complex.
    std::vector<std::uint64_t> b;
    std::int64_t euler = 0;
    bool empty = false;

    std::uint64_t total() const { return std::accumulate(b.begin(), b.end(), std::uint64_t{0}); }

    std::int64_t alternating_sum() const
    {
        std::int64_t s = 0;
        for (std::size_t k = 0; k < b.size(); ++k)
            s += (k % 2 == 0 ? 1 : -1) * static_cast<std::int64_t>(b[k]);
        return s;
    }

    std::uint64_t at(std::size_t k) const { return k < b.size() ? b[k] : 0; }

    friend bool operator==(BettiVector const&, BettiVector const&) = default;
};

/// Sparse GF(2) column for boundary reduction; sorted row indices.
using Gf2Column = std::vector<std::uint32_t>;

/// Rank over GF(2) by left-to-right column reduction on the lowest (largest)
/// row index. Columns must be sorted ascending.
inline std::size_t gf2_rank(std::vector<Gf2Column> columns, std::size_t row_count)
{
    std::vector<std::int64_t> pivot_col(row_count, -1);
    std::size_t rank = 0;
    Gf2Column scratch;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        Gf2Column& col = columns[j];
        while (!col.empty()) {
            std::int64_t const p = pivot_col[col.back()];
            if (p < 0)
                break;
            Gf2Column const& other = columns[static_cast<std::size_t>(p)];
            scratch.clear();
            std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(),
                                          std::back_inserter(scratch));
            col.swap(scratch);
        }
        if (!col.empty()) {
            pivot_col[col.back()] = static_cast<std::int64_t>(j);
            ++rank;
        }
    }
    return rank;
}

/// Betti numbers over GF(2): b_k = dim ker d_k - rank d_{k+1}.
inline BettiVector betti_gf2(CubicalComplex const& complex)
{
    complex.check_closure();
    std::size_t const d = complex.dimension();
    BettiVector out;
    out.b.assign(d + 1, 0);
    out.euler = complex.euler_characteristic();
    if (complex.empty()) {
        out.empty = true;
        return out;
    }

    // Per-dimension cell lists and the position -> local row maps.
    std::vector<std::vector<CubicalComplex::cell_id>> cells(d + 1);
    for (std::size_t k = 0; k <= d; ++k)
        cells[k] = complex.cells(k);

    std::vector<std::size_t> rank(d + 2, 0); // rank[k] = rank of d_k
    std::vector<std::uint32_t> local(complex.position_count(), 0);
    for (std::size_t k = 1; k <= d; ++k) {
        for (std::size_t i = 0; i < cells[k - 1].size(); ++i)
            local[cells[k - 1][i]] = static_cast<std::uint32_t>(i);
        std::vector<Gf2Column> cols;
        cols.reserve(cells[k].size());
        for (auto id : cells[k]) {
            Gf2Column col;
            for (auto f : complex.boundary(id))
                col.push_back(local[f]);
            std::sort(col.begin(), col.end());
            cols.push_back(std::move(col));
        }
        rank[k] = gf2_rank(std::move(cols), cells[k - 1].size());
    }
    for (std::size_t k = 0; k <= d; ++k)
        out.b[k] = cells[k].size() - rank[k] - rank[k + 1];
    return out;
}

/// Disjoint-set forest with path halving and union by size.
class DisjointSets
{
public:
    explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1)
    {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b)
            return false;
        if (size_[a] < size_[b])
            std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

/// 2D fast path: b0 from union-find over edges, b1 = b0 - chi (b2 = 0 in
/// the plane).
inline BettiVector betti_fast2d(CubicalComplex const& complex)
{
    if (complex.dimension() != 2)
        throw std::invalid_argument("betti_fast2d: complex must be 2-dimensional");
    BettiVector out;
    out.b.assign(3, 0);
    out.euler = complex.euler_characteristic();
    if (complex.empty()) {
        out.empty = true;
        return out;
    }
    DisjointSets sets(complex.position_count());
    std::uint64_t components = complex.cell_counts()[0];
    for (auto e : complex.cells(1)) {
        auto const f = complex.boundary(e);
        if (sets.unite(f[0], f[1]))
            --components;
    }
    out.b[0] = components;
    out.b[1] = static_cast<std::uint64_t>(static_cast<std::int64_t>(components) - out.euler);
    return out;
}

enum class HomologyMethod { Gf2, Fast2d };

struct ThresholdBetti
{
    double threshold = 0.0;
    BettiVector betti;
    std::vector<std::size_t> cell_counts;
};

/// Betti vectors of the nested sublevel complexes at each threshold.
/// Thresholds are processed on up to `threads` workers; output order
/// matches the input.
inline std::vector<ThresholdBetti> sweep_betti(ScalarField const& field,
                                               std::vector<double> const& thresholds,
                                               HomologyMethod method = HomologyMethod::Gf2,
                                               unsigned threads = 1)
{
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        throw std::invalid_argument("sweep_betti: thresholds must be sorted ascending");
    std::vector<ThresholdBetti> out(thresholds.size());
    auto work = [&](std::size_t i) {
        CubicalComplex const c = sublevel_complex(field, thresholds[i]);
        out[i].threshold = thresholds[i];
        out[i].cell_counts = c.cell_counts();
        out[i].betti = (method == HomologyMethod::Fast2d && c.dimension() == 2) ? betti_fast2d(c)
                                                                                : betti_gf2(c);
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(thresholds.size())));
    if (threads <= 1) {
        for (std::size_t i = 0; i < thresholds.size(); ++i)
            work(i);
        return out;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t i = t; i < thresholds.size(); i += threads)
                        work(i);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
    }
    for (auto const& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

/// Evenly spaced quantiles of the field values (nearest-rank), sorted and
/// de-duplicated, merged with extra thresholds.
inline std::vector<double> default_thresholds(ScalarField const& field, std::size_t quantiles,
                                              std::vector<double> const& extra = {})
{
    std::vector<double> sorted = field.values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out = extra;
    if (!sorted.empty() && quantiles > 0) {
        for (std::size_t q = 1; q <= quantiles; ++q) {
            std::size_t const pos = (q * (sorted.size() - 1)) / quantiles;
            out.push_back(sorted[pos]);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace pfl
