#pragma once

// Uniform-grid cell list. Particles are never reordered in memory; the grid
// only stores index lists, and every query returns indices in ascending order
// so that downstream floating-point sums have a canonical order.

#include <rsph/error.hpp>
#include <rsph/parallel.hpp>
#include <rsph/vec2.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rsph {

class CellGrid {
public:
    struct Cell {
        std::int64_t cy;
        std::int64_t cx;
        std::uint32_t begin; // into sorted_
        std::uint32_t end;
    };

    CellGrid() = default;

    CellGrid(std::span<const Vec2> positions, double cell_size)
        : cell_size_(cell_size), inv_cell_(1.0 / cell_size),
          positions_(positions.begin(), positions.end()) {
        require(cell_size > 0.0, "cell size must be positive");
        const std::size_t n = positions_.size();
        std::vector<Key> keys(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& p = positions_[i];
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
                throw Error("non-finite position at particle " + std::to_string(i));
            }
            keys[i] = Key{coord(p.y), coord(p.x), static_cast<std::uint32_t>(i)};
        }
        std::sort(keys.begin(), keys.end());
        sorted_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            sorted_[i] = keys[i].index;
            if (i == 0 || keys[i].cy != keys[i - 1].cy || keys[i].cx != keys[i - 1].cx) {
                cells_.push_back(Cell{keys[i].cy, keys[i].cx, static_cast<std::uint32_t>(i), 0});
            }
            cells_.back().end = static_cast<std::uint32_t>(i + 1);
        }
    }

    double cell_size() const noexcept { return cell_size_; }
    std::size_t particle_count() const noexcept { return positions_.size(); }
    std::span<const Cell> cells() const noexcept { return cells_; }

    /// Indices in one cell, strictly ascending.
    std::span<const std::uint32_t> bucket(const Cell& c) const noexcept {
        return std::span<const std::uint32_t>(sorted_).subspan(c.begin, c.end - c.begin);
    }

    /// Appends every b != a with |r_a - r_b| < radius to out, ascending.
    void collect(std::size_t a, double radius, std::vector<std::uint32_t>& out) const {
        require(radius <= cell_size_, "neighbor radius exceeds cell size");
        const std::size_t first = out.size();
        const Vec2 pa = positions_[a];
        const std::int64_t cx = coord(pa.x);
        const std::int64_t cy = coord(pa.y);
        const double r2 = radius * radius;
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
            auto it = std::lower_bound(cells_.begin(), cells_.end(), std::pair{cy + dy, cx - 1},
                                       [](const Cell& c, const std::pair<std::int64_t, std::int64_t>& k) {
                                           return c.cy < k.first || (c.cy == k.first && c.cx < k.second);
                                       });
            for (; it != cells_.end() && it->cy == cy + dy && it->cx <= cx + 1; ++it) {
                for (std::uint32_t s = it->begin; s < it->end; ++s) {
                    const std::uint32_t b = sorted_[s];
                    if (b == a) {
                        continue;
                    }
                    const Vec2 d = pa - positions_[b];
                    if (dot(d, d) < r2) {
                        out.push_back(b);
                    }
                }
            }
        }
        std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end());
    }

private:
    struct Key {
        std::int64_t cy;
        std::int64_t cx;
        std::uint32_t index;
        friend auto operator<=>(const Key&, const Key&) = default;
    };

    std::int64_t coord(double v) const noexcept {
        return static_cast<std::int64_t>(std::floor(v * inv_cell_));
    }

    double cell_size_ = 1.0;
    double inv_cell_ = 1.0;
    std::vector<Vec2> positions_;
    std::vector<std::uint32_t> sorted_;
    std::vector<Cell> cells_;
};

inline CellGrid build(std::span<const Vec2> positions, double cell_size) {
    return CellGrid(positions, cell_size);
}

/// Neighbors of a within radius (exclusive), ascending, excluding a itself.
inline std::vector<std::uint32_t> neighbors_of(const CellGrid& g, std::size_t a, double radius) {
    std::vector<std::uint32_t> out;
    g.collect(a, radius, out);
    return out;
}

/// Compressed per-particle neighbor lists (CSR), each list ascending.
class NeighborList {
public:
    NeighborList() = default;

    NeighborList(const CellGrid& grid, double radius, WorkerPool* pool = nullptr) {
        const std::size_t n = grid.particle_count();
        offsets_.assign(n + 1, 0);
        const std::size_t chunks = pool ? pool->chunk_count(n) : 1;
        std::vector<std::vector<std::uint32_t>> parts(chunks);
        std::vector<std::vector<std::uint32_t>> counts(chunks);
        auto body = [&](std::size_t c, std::size_t begin, std::size_t end) {
            auto& part = parts[c];
            auto& cnt = counts[c];
            for (std::size_t a = begin; a < end; ++a) {
                const std::size_t before = part.size();
                grid.collect(a, radius, part);
                cnt.push_back(static_cast<std::uint32_t>(part.size() - before));
            }
        };
        if (pool) {
            pool->for_chunks(n, body);
        } else {
            body(0, 0, n);
        }
        std::size_t a = 0;
        for (std::size_t c = 0; c < chunks; ++c) {
            for (std::uint32_t k : counts[c]) {
                offsets_[a + 1] = offsets_[a] + k;
                ++a;
            }
            indices_.insert(indices_.end(), parts[c].begin(), parts[c].end());
        }
    }

    std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }

    std::span<const std::uint32_t> operator[](std::size_t a) const noexcept {
        return std::span<const std::uint32_t>(indices_).subspan(offsets_[a], offsets_[a + 1] - offsets_[a]);
    }

    std::size_t pair_count() const noexcept { return indices_.size(); }

private:
    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> indices_;
};

} // namespace rsph
