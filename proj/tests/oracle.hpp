#pragma once

// Brute-force reference tower for tests. Uses plain 64-bit indices, its own
// height and offset tables, single-step level walking and explicit level
// enumeration, so it shares no index logic with the engine.

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <algorithm>
#include <stdexcept>
#include <vector>

namespace oracle {

using Levels = std::set<std::int64_t>;

struct Tower {
    std::vector<std::vector<std::int64_t>> spacers;  // stage n -> s_{n,0..r_n-1}
    std::vector<std::int64_t> h;
    std::vector<mpz_class> width_den;

    Tower(const std::function<std::int64_t(std::size_t)>& cuts,
          const std::function<std::int64_t(std::size_t, std::int64_t)>& spacer, std::size_t stages)
    {
        h.push_back(1);
        width_den.push_back(1);
        for (std::size_t n = 0; n < stages; ++n) {
            const std::int64_t r = cuts(n);
            std::vector<std::int64_t> row;
            std::int64_t next = 0;
            for (std::int64_t j = 0; j < r; ++j) {
                row.push_back(spacer(n, j));
                next += h[n] + row.back();
            }
            spacers.push_back(row);
            h.push_back(next);
            width_den.push_back(width_den.back() * mpz_class(static_cast<long>(r)));
        }
    }

    std::size_t columns() const { return h.size(); }

    /// Level of column c containing level x of column k (k >= c), if any.
    std::optional<std::int64_t> coarsen(std::size_t k, std::int64_t x, std::size_t c) const
    {
        while (k > c) {
            const std::size_t p = k - 1;
            std::int64_t start = 0;
            std::optional<std::int64_t> found;
            for (std::int64_t s : spacers[p]) {
                if (x >= start && x < start + h[p]) {
                    found = x - start;
                    break;
                }
                start += h[p] + s;
            }
            if (!found)
                return std::nullopt;
            x = *found;
            k = p;
        }
        return x;
    }

    /// All levels of column k that lie inside the column-c set.
    Levels refine(std::size_t c, const Levels& set, std::size_t k) const
    {
        Levels out;
        for (std::int64_t x = 0; x < h[k]; ++x) {
            auto y = coarsen(k, x, c);
            if (y && set.count(*y))
                out.insert(x);
        }
        return out;
    }

    mpq_class measure(std::size_t k, std::size_t count) const
    {
        mpq_class m(mpz_class(static_cast<unsigned long>(count)), width_den[k]);
        m.canonicalize();
        return m;
    }

    mpq_class column_measure(std::size_t k) const { return measure(k, static_cast<std::size_t>(h[k])); }

    /// Index in column p+1 of copy j of level 0 of column p.
    std::int64_t offset(std::size_t p, std::int64_t j) const
    {
        std::int64_t o = j * h[p];
        for (std::int64_t z = 0; z < j; ++z)
            o += spacers[p][static_cast<std::size_t>(z)];
        return o;
    }

    /// Largest index of the column-c set refined to column k.
    std::int64_t top_index(std::size_t c, const Levels& set, std::size_t k) const
    {
        std::int64_t x = *set.rbegin();
        for (std::size_t p = c; p < k; ++p)
            x += offset(p, static_cast<std::int64_t>(spacers[p].size()) - 1);
        return x;
    }

    /// Mass of the cells of `start` (levels of column m0) by the number of
    /// exponents e with the cell inside T^e B. A cell (c, x) is split into its
    /// r_c copies in column c+1 while some exponent leaves it undecided.
    std::map<std::size_t, mpq_class> coverage(std::size_t m0, const std::vector<std::int64_t>& start, std::size_t cb,
                                              const Levels& b, const std::vector<std::int64_t>& exps) const
    {
        // for e >= 0, T^e B is a union of levels >= e from the column where B's top copy has room
        std::vector<std::size_t> resolved(exps.size(), 0);
        for (std::size_t n = 0; n < exps.size(); ++n) {
            if (exps[n] < 0 || b.empty())
                continue;
            std::size_t k = cb;
            while (top_index(cb, b, k) + exps[n] >= h[k]) {
                if (++k >= columns())
                    throw std::runtime_error("oracle tower too shallow for e=" + std::to_string(exps[n]) + " cb=" + std::to_string(cb) + " top=" + std::to_string(*b.rbegin()));
            }
            resolved[n] = k;
        }
        std::map<std::size_t, mpq_class> out;
        std::vector<std::pair<std::size_t, std::int64_t>> stack;
        for (auto x : start)
            stack.emplace_back(m0, x);
        while (!stack.empty()) {
            const auto [c, x] = stack.back();
            stack.pop_back();
            bool decided = c >= cb;
            std::size_t hits = 0;
            for (std::size_t n = 0; decided && n < exps.size(); ++n) {
                const std::int64_t e = exps[n];
                if (b.empty())
                    continue;
                const std::int64_t y = x - e;  // T^{-e} of the cell, when inside the column
                if (y >= 0 && y < h[c]) {
                    auto z = coarsen(c, y, cb);
                    hits += z && b.count(*z);
                } else if (e >= 0 && y < 0 && c >= resolved[n]) {
                    // below every level of T^e B
                } else {
                    decided = false;
                }
            }
            if (decided) {
                out[hits] += measure(c, 1);
                continue;
            }
            if (c + 1 >= columns())
                throw std::runtime_error("oracle tower too shallow at cell " + std::to_string(c) + ":" + std::to_string(x));
            for (std::int64_t j = 0; j < static_cast<std::int64_t>(spacers[c].size()); ++j)
                stack.emplace_back(c + 1, offset(c, j) + x);
        }
        return out;
    }

    /// mu(T^t A ∩ B) = mu(A ∩ T^{-t} B) over the cells of A.
    mpq_class correlation_raw(std::size_t ca, const Levels& a, std::size_t cb, const Levels& b, std::int64_t t) const
    {
        const auto cov = coverage(ca, std::vector<std::int64_t>(a.begin(), a.end()), cb, b, {-t});
        return cov.count(1) ? cov.at(1) : mpq_class(0);
    }

    /// ∫_{C_m} |weight * #{e : x in T^e B} - nu(B)| dnu; negative e counts x
    /// when T^{|e|} x lies in B.
    mpq_class average(std::size_t cb, const Levels& b, const std::vector<std::int64_t>& exps, const mpq_class& weight,
                      std::size_t m) const
    {
        std::vector<std::int64_t> start;
        for (std::int64_t x = 0; x < h[m]; ++x)
            start.push_back(x);
        const mpq_class cm = column_measure(m);
        const mpq_class nu_b = measure(cb, b.size()) / cm;
        mpq_class total = 0;
        for (const auto& [hits, mass] : coverage(m, start, cb, b, exps))
            total += abs(weight * static_cast<unsigned long>(hits) - nu_b) * mass;
        return total / cm;
    }

    /// sum_{i < h_p} |nu(T^a I_{p,i} ∩ B) - nu(I_{p,i}) nu(B)|, using
    /// mu(T^a I ∩ B) = mu(I ∩ T^{-a} B).
    mpq_class uniform_sum(std::int64_t a, std::size_t p, std::size_t cb, const Levels& b, std::size_t m) const
    {
        const mpq_class cm = column_measure(m);
        const mpq_class nu_b = measure(cb, b.size()) / cm;
        const mpq_class nu_level = measure(p, 1) / cm;
        mpq_class total = 0;
        for (std::int64_t i = 0; i < h[p]; ++i) {
            const auto cov = coverage(p, {i}, cb, b, {-a});
            const mpq_class raw = cov.count(1) ? cov.at(1) : mpq_class(0);
            total += abs(raw / cm - nu_level * nu_b);
        }
        return total;
    }
};

/// The staircase s_{n,j} = j with r_n = n + 2, materialized for `stages` stages.
inline Tower r23(std::size_t stages = 4)
{
    return Tower([](std::size_t n) { return static_cast<std::int64_t>(n) + 2; },
                 [](std::size_t, std::int64_t j) { return j; }, stages);
}

}  // namespace oracle
