#pragma once

// Exact model of the cutting-and-stacking tower: heights, widths, column and
// spacer measures, level sets and their images under powers of T.
//
// Measures are unnormalized with mu(C_0) = 1. A level of column n has width
// w_n = 1 / (r_0 r_1 ... r_{n-1}), so mu(C_n) = h_n w_n.

#include "rankone/numeric.hpp"
#include "rankone/spacer_rule.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace rankone {

class TowerModel {
public:
    /// Upper bound on the number of stages any tower materializes. Heights at
    /// least double per stage, so this is far past anything addressable.
    static constexpr std::size_t kMaxStages = 2048;

    explicit TowerModel(SpacerRule rule);
    TowerModel(const TowerModel&) = delete;
    TowerModel& operator=(const TowerModel&) = delete;
    ~TowerModel();

    const SpacerRule& rule() const { return rule_; }

    /// h_n, with h_0 = 1 and h_{n+1} = r_n h_n + sum_j s_{n,j}.
    const Int& height(std::size_t n) const;
    const Int& cuts(std::size_t n) const;
    /// sum_j s_{n,j}
    const Int& stage_sum(std::size_t n) const;
    /// W_n = r_0 ... r_{n-1}; a level of C_n has width 1/W_n.
    const Int& width_denominator(std::size_t n) const;
    Rational width(std::size_t n) const;
    const Rational& column_measure(std::size_t n) const;
    /// mu(S_n) = mu(C_{n+1}) - mu(C_n)
    const Rational& spacer_measure(std::size_t n) const;
    /// s-bar_n = (1/r_n) sum_j s_{n,j}
    const Rational& mean_spacer(std::size_t n) const;

    /// Index in C_{p+1} of sublevel j of level 0 of C_p: j h_p + s^{(j)}_{p,0}.
    Int sublevel_offset(std::size_t p, const Int& j) const;
    /// All r_p sublevel offsets of stage p (materialized once, then shared).
    const std::vector<Int>& offsets(std::size_t p) const;

    /// The unique p with h_p <= a < h_{p+1}; requires a >= 1.
    std::size_t stage_of(const Int& a) const;

    /// Precomputes stages 0..max_stage; afterwards reads up to that stage take no lock.
    void freeze(std::size_t max_stage) const;
    /// Number of stage records computed so far (stages 0..materialized()-1).
    std::size_t materialized() const { return ready_.load(std::memory_order_acquire); }

private:
    struct StageRecord;
    struct ColumnRecord;
    void ensure_stage(std::size_t n) const;
    void ensure_column(std::size_t n) const;

    SpacerRule rule_;
    mutable std::mutex mutex_;
    mutable std::atomic<std::size_t> ready_{0};
    std::unique_ptr<StageRecord[]> stages_;
    std::unique_ptr<ColumnRecord[]> columns_;
};

/// Half-open range [begin, end) of level indices in one column.
struct IndexRange {
    Int begin;
    Int end;
    Int size() const { return end - begin; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Finite union of levels of one column, stored as sorted disjoint ranges.
/// Adjacent ranges are merged, so equal sets in one column compare equal.
class LevelSet {
public:
    explicit LevelSet(std::size_t column = 0) : column_(column) {}

    /// Validates every range against [0, h_column); overlapping input ranges are united.
    static LevelSet from_ranges(const TowerModel& tower, std::size_t column, std::vector<IndexRange> ranges);
    static LevelSet level(const TowerModel& tower, std::size_t column, const Int& index);
    static LevelSet whole_column(const TowerModel& tower, std::size_t column);
    /// I_{p,i}^{[j]} as a level of column p+1.
    static LevelSet sublevel(const TowerModel& tower, std::size_t p, const Int& i, const Int& j);

    /// Unchecked construction from ranges; sorts and merges.
    static LevelSet normalized(std::size_t column, std::vector<IndexRange> ranges);

    std::size_t column() const { return column_; }
    const std::vector<IndexRange>& ranges() const { return ranges_; }
    bool empty() const { return ranges_.empty(); }
    Int count() const;
    bool contains(const Int& index) const;
    Rational measure(const TowerModel& tower) const;

    friend bool operator==(const LevelSet&, const LevelSet&) = default;

private:
    std::size_t column_;
    std::vector<IndexRange> ranges_;
};

/// Position of a point: level i of column m, horizontal coordinate u in [0,1).
struct PointCoord {
    std::size_t column = 0;
    Int level;
    Rational u;
    friend bool operator==(const PointCoord&, const PointCoord&) = default;
};

/// Disjoint union of level sets living in different columns, at most one
/// part per column, sorted by column. Images under T^t keep each piece in the
/// column where its shift was resolved, so shallow bulk and deep fragments do
/// not force a common (expensive) refinement.
class MixedSet {
public:
    MixedSet() = default;
    explicit MixedSet(LevelSet single);
    /// Parts must be pairwise disjoint as sets; same-column parts are merged.
    static MixedSet from_parts(std::vector<LevelSet> parts);

    const std::vector<LevelSet>& parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }
    std::size_t deepest_column() const;
    Rational measure(const TowerModel& tower) const;
    /// The same set as one LevelSet in the deepest column (or `column` if deeper).
    LevelSet flatten(const TowerModel& tower, std::optional<std::size_t> column = std::nullopt) const;

private:
    std::vector<LevelSet> parts_;
};

struct Budget {
    std::size_t max_pieces = std::size_t{1} << 22;
    /// Columns below the input column that apply_power may descend.
    std::size_t max_depth = 8;
    /// Throw BudgetError instead of returning a partial image.
    bool strict = false;
};

struct PowerImage {
    MixedSet resolved;
    /// Measure of input not yet mapped; zero means the image is exact.
    Rational unresolved_mass;
    std::size_t pieces_used = 0;
    std::size_t deepest_column = 0;
    bool exact() const { return unresolved_mass == 0; }
};

class BudgetError : public ResourceError {
public:
    BudgetError(const std::string& what, PowerImage partial)
        : ResourceError(what), partial_(std::move(partial))
    {
    }
    const PowerImage& partial() const { return partial_; }

private:
    PowerImage partial_;
};

/// Same set expressed in column m >= A.column.
LevelSet refine(const TowerModel& tower, const LevelSet& a, std::size_t m);

/// Range of column-K levels with x -> x - shift mapping each level to the
/// column-d level that contains it.
struct MappedRange {
    IndexRange range;
    Int shift;
};

/// Coarsening of column-K ranges to column d <= K. Levels that are spacers
/// relative to C_d are dropped.
std::vector<MappedRange> coarsen_map(const TowerModel& tower, std::size_t column,
                                     const std::vector<IndexRange>& ranges, std::size_t d);

/// Subcolumn indices j_d, ..., j_{K-1} locating a column-K level inside its
/// column-d level, or nullopt when the level is a spacer relative to C_d.
struct LevelPath {
    Int level;             ///< index in column d
    std::vector<Int> sub;  ///< sub[c - d] = subcolumn index at stage c
};
std::optional<LevelPath> level_path(const TowerModel& tower, std::size_t column, const Int& index, std::size_t d);

/// T^t(A) for t >= 0. Exact when the budget suffices; otherwise the resolved
/// part plus a rigorous bound on the unmapped measure.
PowerImage apply_power(const TowerModel& tower, const LevelSet& a, const Int& t, const Budget& budget = {});

/// domain ∩ T^{-t}(B) for t >= 0, computed by mapping the domain forward and
/// pulling back the part that lands in B. Throws BudgetError if not exact.
MixedSet pullback(const TowerModel& tower, const LevelSet& domain, const LevelSet& b, const Int& t,
                  const Budget& budget = {});

/// Result lives in the deeper of the two columns.
LevelSet intersect(const TowerModel& tower, const LevelSet& a, const LevelSet& b);
Rational intersect_measure(const TowerModel& tower, const LevelSet& a, const LevelSet& b);
Rational intersect_measure(const TowerModel& tower, const MixedSet& a, const LevelSet& b);
LevelSet unite(const TowerModel& tower, const LevelSet& a, const LevelSet& b);

/// One step of T. Refines through column tops using u; throws ResourceError
/// after max_depth refinements.
PointCoord point_step(const TowerModel& tower, const PointCoord& x, std::size_t max_depth = 64);
/// T^t of a point; equal to t successive point_step calls.
PointCoord point_advance(const TowerModel& tower, const PointCoord& x, const Int& t, std::size_t max_depth = 64);
/// Level index of x in column c, or nullopt when x lies in a spacer added after c.
std::optional<Int> locate(const TowerModel& tower, const PointCoord& x, std::size_t column);

/// Points with level uniform on Z_{h_m} and u uniform on the grid k/2^62,
/// reproducible from the seed (std::mt19937_64 raw output).
std::vector<PointCoord> sample_points(const TowerModel& tower, std::size_t column, std::size_t count,
                                      std::uint64_t seed);

struct FiniteMeasureSum {
    Rational sum;             ///< sum_{n<N} s-bar_n / h_n
    Rational column_measure;  ///< prod_{n<N} (1 + s-bar_n / h_n) = mu(C_N)
};

FiniteMeasureSum finite_measure_partial_sum(const TowerModel& tower, std::size_t n_stages);

}  // namespace rankone
