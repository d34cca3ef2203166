#pragma once

// Cubical complexes on a rectangular vertex grid, stored implicitly on the
// doubled ("Khalimsky") grid: a grid with n_k vertices along axis k becomes
// 2 n_k - 1 positions, and a position's cell dimension is its number of odd
// coordinates. Cells are indexed row-major on that grid, axis 0 slowest.

#include <pfl/error.hpp>
#include <pfl/field.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pfl {

class CubicalComplex
{
public:
    using cell_id = std::size_t;

    CubicalComplex() = default;

    /// Empty complex on a vertex grid of the given shape.
    explicit CubicalComplex(std::vector<std::size_t> shape) : shape_(std::move(shape))
    {
        if (shape_.empty() || shape_.size() > 3)
            throw ComputeError("CubicalComplex: need 1 to 3 axes");
        ext_.resize(shape_.size());
        stride_.resize(shape_.size());
        std::size_t total = 1;
        for (std::size_t k = shape_.size(); k-- > 0;) {
            if (shape_[k] == 0)
                throw ComputeError("CubicalComplex: zero-length axis");
            ext_[k] = 2 * shape_[k] - 1;
            stride_[k] = total;
            total *= ext_[k];
        }
        in_.assign(total, 0);
    }

    /// Full-corner rule: a cell is present iff all of its corner vertices
    /// are. mask is row-major over the vertex grid.
    static CubicalComplex from_vertex_mask(std::vector<std::size_t> shape,
                                           std::span<std::uint8_t const> mask)
    {
        CubicalComplex c(std::move(shape));
        std::size_t nverts = 1;
        for (auto n : c.shape_)
            nverts *= n;
        if (mask.size() != nverts)
            throw ComputeError("CubicalComplex: mask size does not match grid");

        std::vector<std::size_t> v(c.dimension());
        for (std::size_t p = 0; p < nverts; ++p) {
            if (!mask[p])
                continue;
            std::size_t q = p;
            for (std::size_t k = c.dimension(); k-- > 0;) {
                v[k] = 2 * (q % c.shape_[k]);
                q /= c.shape_[k];
            }
            c.in_[c.index_of(v)] = 1;
        }
        // A cell is filled once both faces along its first odd axis are;
        // those faces have one dimension less, so fill by dimension.
        for (std::size_t dim = 1; dim <= c.dimension(); ++dim) {
            for (cell_id id = 0; id < c.in_.size(); ++id) {
                if (c.cell_dimension(id) != dim)
                    continue;
                std::size_t const k = c.first_odd_axis(id);
                c.in_[id] = c.in_[id - c.stride_[k]] && c.in_[id + c.stride_[k]];
            }
        }
        return c;
    }

    /// Arbitrary cell set; closure is not enforced (see check_closure).
    static CubicalComplex from_cells(std::vector<std::size_t> shape, std::span<cell_id const> cells)
    {
        CubicalComplex c(std::move(shape));
        for (auto id : cells) {
            if (id >= c.in_.size())
                throw ComputeError("CubicalComplex: cell id out of range");
            c.in_[id] = 1;
        }
        return c;
    }

    std::size_t dimension() const { return shape_.size(); }
    std::vector<std::size_t> const& shape() const { return shape_; }
    std::size_t position_count() const { return in_.size(); }

    bool contains(cell_id id) const { return id < in_.size() && in_[id]; }

    std::vector<std::size_t> coordinates(cell_id id) const
    {
        std::vector<std::size_t> x(dimension());
        for (std::size_t k = 0; k < dimension(); ++k) {
            x[k] = id / stride_[k];
            id %= stride_[k];
        }
        return x;
    }

    cell_id index_of(std::span<std::size_t const> x) const
    {
        cell_id id = 0;
        for (std::size_t k = 0; k < dimension(); ++k)
            id += x[k] * stride_[k];
        return id;
    }

    std::size_t cell_dimension(cell_id id) const
    {
        std::size_t d = 0;
        for (std::size_t k = 0; k < dimension(); ++k) {
            d += (id / stride_[k]) & 1u;
            id %= stride_[k];
        }
        return d;
    }

    /// Codimension-one faces (present or not) of a cell.
    std::vector<cell_id> boundary(cell_id id) const
    {
        std::vector<cell_id> faces;
        std::size_t rem = id;
        for (std::size_t k = 0; k < dimension(); ++k) {
            if ((rem / stride_[k]) & 1u) {
                faces.push_back(id - stride_[k]);
                faces.push_back(id + stride_[k]);
            }
            rem %= stride_[k];
        }
        return faces;
    }

    /// Present cells of dimension k in increasing id order.
    std::vector<cell_id> cells(std::size_t k) const
    {
        std::vector<cell_id> out;
        for (cell_id id = 0; id < in_.size(); ++id)
            if (in_[id] && cell_dimension(id) == k)
                out.push_back(id);
        return out;
    }

    /// Number of present cells per dimension 0..d.
    std::vector<std::size_t> cell_counts() const
    {
        std::vector<std::size_t> n(dimension() + 1, 0);
        for (cell_id id = 0; id < in_.size(); ++id)
            if (in_[id])
                ++n[cell_dimension(id)];
        return n;
    }

    std::int64_t euler_characteristic() const
    {
        auto const n = cell_counts();
        std::int64_t chi = 0;
        for (std::size_t k = 0; k < n.size(); ++k)
            chi += (k % 2 == 0 ? 1 : -1) * static_cast<std::int64_t>(n[k]);
        return chi;
    }

    bool empty() const
    {
        for (auto b : in_)
            if (b)
                return false;
        return true;
    }

    /// Throws if some present cell has a missing face.
    void check_closure() const
    {
        for (cell_id id = 0; id < in_.size(); ++id) {
            if (!in_[id])
                continue;
            for (auto f : boundary(id))
                if (!in_[f])
                    throw ComputeError("CubicalComplex: closure violated at cell " +
                                       std::to_string(id) + " (missing face " +
                                       std::to_string(f) + ")");
        }
    }

    bool is_subcomplex_of(CubicalComplex const& other) const
    {
        if (shape_ != other.shape_)
            return false;
        for (cell_id id = 0; id < in_.size(); ++id)
            if (in_[id] && !other.in_[id])
                return false;
        return true;
    }

    friend bool operator==(CubicalComplex const&, CubicalComplex const&) = default;

private:
    std::size_t first_odd_axis(cell_id id) const
    {
        for (std::size_t k = 0; k < dimension(); ++k) {
            if ((id / stride_[k]) & 1u)
                return k;
            id %= stride_[k];
        }
        return dimension();
    }

    std::vector<std::size_t> shape_;
    std::vector<std::size_t> ext_;
    std::vector<std::size_t> stride_;
    std::vector<std::uint8_t> in_;
};

/// Discretized S = {theta : L(theta) <= c}; ties are included.
inline CubicalComplex sublevel_complex(ScalarField const& field, double c)
{
    if (!std::isfinite(c))
        throw ComputeError("sublevel_complex: threshold must be finite");
    std::vector<std::uint8_t> mask(field.values.size());
    for (std::size_t p = 0; p < mask.size(); ++p)
        mask[p] = field.values[p] <= c ? 1 : 0;
    return CubicalComplex::from_vertex_mask(field.shape(), mask);
}

} // namespace pfl
