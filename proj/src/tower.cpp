#include "rankone/tower.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace rankone {

struct TowerModel::StageRecord {
    Int cuts;
    Int sum;
    Rational mean;
    Rational spacer_measure;
    mutable std::once_flag offsets_once;
    mutable std::vector<Int> offsets;
};

struct TowerModel::ColumnRecord {
    Int height;
    Int width_den;
    Rational measure;
};

TowerModel::TowerModel(SpacerRule rule)
    : rule_(std::move(rule)),
      stages_(std::make_unique<StageRecord[]>(kMaxStages)),
      columns_(std::make_unique<ColumnRecord[]>(kMaxStages + 1))
{
    columns_[0].height = 1;
    columns_[0].width_den = 1;
    columns_[0].measure = 1;
}

TowerModel::~TowerModel() = default;

void TowerModel::ensure_stage(std::size_t n) const
{
    if (n < ready_.load(std::memory_order_acquire))
        return;
    if (n >= kMaxStages)
        throw DomainError("stage " + std::to_string(n) + " beyond the supported maximum");
    std::lock_guard lock(mutex_);
    std::size_t k = ready_.load(std::memory_order_relaxed);
    while (k <= n) {
        StageRecord& s = stages_[k];
        const ColumnRecord& c = columns_[k];
        ColumnRecord& next = columns_[k + 1];
        s.cuts = rule_.cuts(k);
        s.sum = rule_.stage_sum(k);
        s.mean = Rational(s.sum, s.cuts);
        s.mean.canonicalize();
        next.height = s.cuts * c.height + s.sum;
        next.width_den = c.width_den * s.cuts;
        next.measure = Rational(next.height, next.width_den);
        next.measure.canonicalize();
        s.spacer_measure = next.measure - c.measure;
        ++k;
        ready_.store(k, std::memory_order_release);
    }
}

void TowerModel::ensure_column(std::size_t n) const
{
    if (n > 0)
        ensure_stage(n - 1);
}

const Int& TowerModel::height(std::size_t n) const
{
    ensure_column(n);
    return columns_[n].height;
}

const Int& TowerModel::cuts(std::size_t n) const
{
    ensure_stage(n);
    return stages_[n].cuts;
}

const Int& TowerModel::stage_sum(std::size_t n) const
{
    ensure_stage(n);
    return stages_[n].sum;
}

const Int& TowerModel::width_denominator(std::size_t n) const
{
    ensure_column(n);
    return columns_[n].width_den;
}

Rational TowerModel::width(std::size_t n) const { return Rational(Int(1), width_denominator(n)); }

const Rational& TowerModel::column_measure(std::size_t n) const
{
    ensure_column(n);
    return columns_[n].measure;
}

const Rational& TowerModel::spacer_measure(std::size_t n) const
{
    ensure_stage(n);
    return stages_[n].spacer_measure;
}

const Rational& TowerModel::mean_spacer(std::size_t n) const
{
    ensure_stage(n);
    return stages_[n].mean;
}

const std::vector<Int>& TowerModel::offsets(std::size_t p) const
{
    ensure_stage(p);
    const StageRecord& s = stages_[p];
    std::call_once(s.offsets_once, [&] {
        const auto values = rule_.stage(p);
        const Int& h = columns_[p].height;
        std::vector<Int> out;
        out.reserve(values.size());
        Int off = 0;
        for (const auto& v : values) {
            out.push_back(off);
            off += h + v;
        }
        s.offsets = std::move(out);
    });
    return s.offsets;
}

Int TowerModel::sublevel_offset(std::size_t p, const Int& j) const
{
    const Int& r = cuts(p);
    if (j < 0 || j >= r)
        throw DomainError("sublevel index " + j.get_str() + " outside Z_" + r.get_str() + " at stage " +
                          std::to_string(p));
    if (r <= Int(static_cast<unsigned long>(kMaxMaterializedCuts)))
        return offsets(p)[j.get_ui()];
    return j * height(p) + rule_.prefix_sum(p, j);
}

std::size_t TowerModel::stage_of(const Int& a) const
{
    if (a < 1)
        throw DomainError("stage_of needs a >= 1, got " + a.get_str());
    std::size_t p = 0;
    while (height(p + 1) <= a)
        ++p;
    return p;
}

void TowerModel::freeze(std::size_t max_stage) const { ensure_stage(max_stage); }

// ---------------------------------------------------------------------------
// LevelSet

LevelSet LevelSet::normalized(std::size_t column, std::vector<IndexRange> ranges)
{
    std::erase_if(ranges, [](const IndexRange& r) { return r.end <= r.begin; });
    auto by_begin = [](const IndexRange& x, const IndexRange& y) { return x.begin < y.begin; };
    if (!std::is_sorted(ranges.begin(), ranges.end(), by_begin))
        std::sort(ranges.begin(), ranges.end(), by_begin);
    LevelSet out(column);
    for (auto& r : ranges) {
        if (!out.ranges_.empty() && r.begin <= out.ranges_.back().end) {
            if (r.end > out.ranges_.back().end)
                out.ranges_.back().end = r.end;
        } else {
            out.ranges_.push_back(std::move(r));
        }
    }
    return out;
}

LevelSet LevelSet::from_ranges(const TowerModel& tower, std::size_t column, std::vector<IndexRange> ranges)
{
    const Int& h = tower.height(column);
    for (const auto& r : ranges)
        if (r.begin < 0 || r.end > h || r.end < r.begin)
            throw DomainError("range [" + r.begin.get_str() + ", " + r.end.get_str() + ") not within [0, " +
                              h.get_str() + ") of column " + std::to_string(column));
    return normalized(column, std::move(ranges));
}

LevelSet LevelSet::level(const TowerModel& tower, std::size_t column, const Int& index)
{
    return from_ranges(tower, column, {IndexRange{index, index + 1}});
}

LevelSet LevelSet::whole_column(const TowerModel& tower, std::size_t column)
{
    return from_ranges(tower, column, {IndexRange{0, tower.height(column)}});
}

LevelSet LevelSet::sublevel(const TowerModel& tower, std::size_t p, const Int& i, const Int& j)
{
    if (i < 0 || i >= tower.height(p))
        throw DomainError("level " + i.get_str() + " outside column " + std::to_string(p));
    return level(tower, p + 1, tower.sublevel_offset(p, j) + i);
}

Int LevelSet::count() const
{
    Int n = 0;
    for (const auto& r : ranges_)
        n += r.size();
    return n;
}

bool LevelSet::contains(const Int& index) const
{
    auto it = std::upper_bound(ranges_.begin(), ranges_.end(), index,
                               [](const Int& v, const IndexRange& r) { return v < r.begin; });
    if (it == ranges_.begin())
        return false;
    --it;
    return index < it->end;
}

Rational LevelSet::measure(const TowerModel& tower) const
{
    Rational m(count(), tower.width_denominator(column_));
    m.canonicalize();
    return m;
}

// ---------------------------------------------------------------------------
// refinement and coarsening

namespace {

// Refines ranges of column c one column down, appending to out (sorted output).
void refine_once(const TowerModel& tower, std::size_t c, const std::vector<IndexRange>& in,
                 std::vector<IndexRange>& out)
{
    const auto& offs = tower.offsets(c);
    for (const auto& off : offs)
        for (const auto& r : in) {
            IndexRange next{off + r.begin, off + r.end};
            if (!out.empty() && out.back().end == next.begin)
                out.back().end = std::move(next.end);
            else
                out.push_back(std::move(next));
        }
}

std::vector<IndexRange> refine_ranges(const TowerModel& tower, std::size_t from, std::vector<IndexRange> ranges,
                                      std::size_t to)
{
    for (std::size_t c = from; c < to; ++c) {
        std::vector<IndexRange> next;
        refine_once(tower, c, ranges, next);
        ranges = std::move(next);
    }
    return ranges;
}

// Calls f(lo, hi) for every nonempty [lo, hi) = [begin, end) ∩ range over the sorted ranges.
template <class F>
void for_overlaps(const std::vector<IndexRange>& ranges, const Int& begin, const Int& end, F&& f)
{
    auto it = std::upper_bound(ranges.begin(), ranges.end(), begin,
                               [](const Int& v, const IndexRange& r) { return v < r.end; });
    for (; it != ranges.end() && it->begin < end; ++it) {
        const Int& lo = std::max(it->begin, begin);
        const Int& hi = std::min(it->end, end);
        if (lo < hi)
            f(lo, hi);
    }
}

}  // namespace

LevelSet refine(const TowerModel& tower, const LevelSet& a, std::size_t m)
{
    if (m < a.column())
        throw DomainError("cannot refine column " + std::to_string(a.column()) + " to coarser column " +
                          std::to_string(m));
    if (m == a.column())
        return a;
    return LevelSet::normalized(m, refine_ranges(tower, a.column(), a.ranges(), m));
}

std::vector<MappedRange> coarsen_map(const TowerModel& tower, std::size_t column,
                                     const std::vector<IndexRange>& ranges, std::size_t d)
{
    if (d > column)
        throw DomainError("cannot coarsen column " + std::to_string(column) + " to finer column " +
                          std::to_string(d));
    // current-column range plus accumulated shift back to the original column
    std::vector<MappedRange> work;
    for (const auto& r : ranges)
        work.push_back({r, Int(0)});
    for (std::size_t c = column; c > d; --c) {
        const std::size_t p = c - 1;
        const auto& offs = tower.offsets(p);
        const Int& h = tower.height(p);
        std::vector<MappedRange> next;
        for (const auto& w : work) {
            auto it = std::upper_bound(offs.begin(), offs.end(), w.range.begin);
            if (it != offs.begin())
                --it;
            for (; it != offs.end() && *it < w.range.end; ++it) {
                const Int lo = std::max(w.range.begin, *it);
                const Int hi = std::min(w.range.end, Int(*it + h));
                if (lo < hi)
                    next.push_back({IndexRange{lo - *it, hi - *it}, w.shift + *it});
            }
        }
        work = std::move(next);
    }
    for (auto& w : work) {
        w.range.begin += w.shift;
        w.range.end += w.shift;
    }
    return work;
}

std::optional<LevelPath> level_path(const TowerModel& tower, std::size_t column, const Int& index, std::size_t d)
{
    if (d > column)
        throw DomainError("level_path needs d <= column");
    LevelPath out;
    out.sub.resize(column - d);
    Int x = index;
    for (std::size_t c = column; c > d; --c) {
        const std::size_t p = c - 1;
        const auto& offs = tower.offsets(p);
        auto it = std::upper_bound(offs.begin(), offs.end(), x);
        --it;
        x -= *it;
        if (x >= tower.height(p))
            return std::nullopt;
        out.sub[p - d] = Int(static_cast<unsigned long>(it - offs.begin()));
    }
    out.level = std::move(x);
    return out;
}

// ---------------------------------------------------------------------------
// mixed-column sets

MixedSet::MixedSet(LevelSet single)
{
    if (!single.empty())
        parts_.push_back(std::move(single));
}

MixedSet MixedSet::from_parts(std::vector<LevelSet> parts)
{
    std::map<std::size_t, std::vector<IndexRange>> by_column;
    for (auto& p : parts) {
        auto& v = by_column[p.column()];
        v.insert(v.end(), p.ranges().begin(), p.ranges().end());
    }
    MixedSet out;
    for (auto& [col, ranges] : by_column) {
        LevelSet part = LevelSet::normalized(col, std::move(ranges));
        if (!part.empty())
            out.parts_.push_back(std::move(part));
    }
    return out;
}

std::size_t MixedSet::deepest_column() const { return parts_.empty() ? 0 : parts_.back().column(); }

Rational MixedSet::measure(const TowerModel& tower) const
{
    Rational m = 0;
    for (const auto& p : parts_)
        m += p.measure(tower);
    return m;
}

LevelSet MixedSet::flatten(const TowerModel& tower, std::optional<std::size_t> column) const
{
    const std::size_t target = std::max(deepest_column(), column.value_or(0));
    std::vector<IndexRange> all;
    for (const auto& p : parts_) {
        auto refined = refine_ranges(tower, p.column(), p.ranges(), target);
        all.insert(all.end(), std::make_move_iterator(refined.begin()), std::make_move_iterator(refined.end()));
    }
    return LevelSet::normalized(target, std::move(all));
}

// ---------------------------------------------------------------------------
// images under powers of T

namespace {

struct Move {
    std::size_t column;
    IndexRange source;
};

struct MoveResult {
    std::vector<Move> moves;
    Rational unresolved_mass = 0;
    std::size_t pieces = 0;
    std::size_t deepest = 0;
};

// Splits the input into pieces on which T^t is a plain index shift within one column.
MoveResult power_moves(const TowerModel& tower, const LevelSet& a, const Int& t, const Budget& budget)
{
    if (t < 0)
        throw DomainError("apply_power needs t >= 0; use the adjoint route for negative powers");
    MoveResult out;
    std::size_t c = a.column();
    out.deepest = c;
    std::vector<IndexRange> carried = a.ranges();
    out.pieces = carried.size();
    const std::size_t last_column = a.column() + budget.max_depth;
    while (!carried.empty()) {
        const Int& h = tower.height(c);
        const Int limit = h - t;  // indices below this shift within the column
        std::vector<IndexRange> crossing;
        for (auto& r : carried) {
            if (r.end <= limit) {
                out.moves.push_back({c, std::move(r)});
            } else if (r.begin < limit) {
                out.moves.push_back({c, IndexRange{r.begin, limit}});
                crossing.push_back(IndexRange{limit, std::move(r.end)});
            } else {
                crossing.push_back(std::move(r));
            }
        }
        if (crossing.empty())
            break;
        bool over = c + 1 > last_column;
        if (!over) {
            const Int grown = tower.cuts(c) * Int(static_cast<unsigned long>(crossing.size()));
            over = grown + Int(static_cast<unsigned long>(out.pieces)) >
                   Int(static_cast<unsigned long>(budget.max_pieces));
        }
        if (over) {
            Int n = 0;
            for (const auto& r : crossing)
                n += r.size();
            out.unresolved_mass = Rational(n, tower.width_denominator(c));
            out.unresolved_mass.canonicalize();
            break;
        }
        carried.clear();
        refine_once(tower, c, crossing, carried);
        out.pieces += carried.size();
        ++c;
        out.deepest = c;
    }
    return out;
}

}  // namespace

PowerImage apply_power(const TowerModel& tower, const LevelSet& a, const Int& t, const Budget& budget)
{
    MoveResult mv = power_moves(tower, a, t, budget);
    std::vector<LevelSet> parts;
    std::map<std::size_t, std::vector<IndexRange>> by_column;
    for (auto& m : mv.moves)
        by_column[m.column].push_back(IndexRange{m.source.begin + t, m.source.end + t});
    for (auto& [col, ranges] : by_column)
        parts.push_back(LevelSet::normalized(col, std::move(ranges)));

    PowerImage image;
    image.resolved = MixedSet::from_parts(std::move(parts));
    image.unresolved_mass = mv.unresolved_mass;
    image.pieces_used = mv.pieces;
    image.deepest_column = mv.deepest;
    if (budget.strict && !image.exact())
        throw BudgetError("apply_power budget exhausted with unresolved mass " + to_text(image.unresolved_mass),
                          image);
    return image;
}

MixedSet pullback(const TowerModel& tower, const LevelSet& domain, const LevelSet& b, const Int& t,
                  const Budget& budget)
{
    MoveResult mv = power_moves(tower, domain, t, budget);
    if (mv.unresolved_mass != 0) {
        PowerImage partial;
        partial.unresolved_mass = mv.unresolved_mass;
        partial.pieces_used = mv.pieces;
        partial.deepest_column = mv.deepest;
        throw BudgetError("pullback budget exhausted with unresolved mass " + to_text(mv.unresolved_mass),
                          partial);
    }
    std::map<std::size_t, std::vector<IndexRange>> sources;
    for (const auto& m : mv.moves) {
        if (b.column() <= m.column) {
            auto& out = sources[m.column];
            const IndexRange image{m.source.begin + t, m.source.end + t};
            for (const auto& piece : coarsen_map(tower, m.column, {image}, b.column()))
                for_overlaps(b.ranges(), piece.range.begin - piece.shift, piece.range.end - piece.shift,
                             [&](const Int& lo, const Int& hi) {
                                 out.push_back(IndexRange{lo + piece.shift - t, hi + piece.shift - t});
                             });
        } else {
            // within-column shifts commute with refinement
            auto& out = sources[b.column()];
            for (const auto& p : refine_ranges(tower, m.column, {m.source}, b.column()))
                for_overlaps(b.ranges(), p.begin + t, p.end + t,
                             [&](const Int& lo, const Int& hi) { out.push_back(IndexRange{lo - t, hi - t}); });
        }
    }
    std::vector<LevelSet> parts;
    for (auto& [col, ranges] : sources)
        parts.push_back(LevelSet::normalized(col, std::move(ranges)));
    return MixedSet::from_parts(std::move(parts));
}

LevelSet intersect(const TowerModel& tower, const LevelSet& a, const LevelSet& b)
{
    const LevelSet& deep = a.column() >= b.column() ? a : b;
    const LevelSet& shallow = a.column() >= b.column() ? b : a;
    std::vector<IndexRange> out;
    for (const auto& piece : coarsen_map(tower, deep.column(), deep.ranges(), shallow.column()))
        for_overlaps(shallow.ranges(), piece.range.begin - piece.shift, piece.range.end - piece.shift,
                     [&](const Int& lo, const Int& hi) {
                         out.push_back(IndexRange{lo + piece.shift, hi + piece.shift});
                     });
    return LevelSet::normalized(deep.column(), std::move(out));
}

Rational intersect_measure(const TowerModel& tower, const LevelSet& a, const LevelSet& b)
{
    const LevelSet& deep = a.column() >= b.column() ? a : b;
    const LevelSet& shallow = a.column() >= b.column() ? b : a;
    Int n = 0;
    for (const auto& piece : coarsen_map(tower, deep.column(), deep.ranges(), shallow.column()))
        for_overlaps(shallow.ranges(), piece.range.begin - piece.shift, piece.range.end - piece.shift,
                     [&](const Int& lo, const Int& hi) { n += hi - lo; });
    Rational m(n, tower.width_denominator(deep.column()));
    m.canonicalize();
    return m;
}

Rational intersect_measure(const TowerModel& tower, const MixedSet& a, const LevelSet& b)
{
    Rational m = 0;
    for (const auto& p : a.parts())
        m += intersect_measure(tower, p, b);
    return m;
}

LevelSet unite(const TowerModel& tower, const LevelSet& a, const LevelSet& b)
{
    const std::size_t c = std::max(a.column(), b.column());
    auto x = refine(tower, a, c).ranges();
    const LevelSet y = refine(tower, b, c);
    x.insert(x.end(), y.ranges().begin(), y.ranges().end());
    return LevelSet::normalized(c, std::move(x));
}

// ---------------------------------------------------------------------------
// point orbit

namespace {

void check_point(const TowerModel& tower, const PointCoord& x)
{
    if (x.level < 0 || x.level >= tower.height(x.column))
        throw DomainError("point level " + x.level.get_str() + " outside column " + std::to_string(x.column));
    if (x.u < 0 || x.u >= 1)
        throw DomainError("point coordinate u=" + to_text(x.u) + " outside [0,1)");
}

// Moves x into column m+1 keeping its position; level index and u change.
void refine_point(const TowerModel& tower, PointCoord& x)
{
    const Int& r = tower.cuts(x.column);
    Rational scaled = x.u * Rational(r);
    Int j = floor_of(scaled);
    x.u = scaled - Rational(j);
    x.level += tower.sublevel_offset(x.column, j);
    ++x.column;
}

}  // namespace

PointCoord point_step(const TowerModel& tower, const PointCoord& x, std::size_t max_depth)
{
    return point_advance(tower, x, Int(1), max_depth);
}

PointCoord point_advance(const TowerModel& tower, const PointCoord& x, const Int& t, std::size_t max_depth)
{
    check_point(tower, x);
    if (t < 0)
        throw DomainError("point_advance needs t >= 0");
    PointCoord y = x;
    std::size_t depth = 0;
    while (y.level + t >= tower.height(y.column)) {
        if (depth == max_depth)
            throw ResourceError("point orbit needs more than " + std::to_string(max_depth) + " refinements");
        refine_point(tower, y);
        ++depth;
    }
    y.level += t;
    return y;
}

std::optional<Int> locate(const TowerModel& tower, const PointCoord& x, std::size_t column)
{
    check_point(tower, x);
    PointCoord y = x;
    while (y.column < column)
        refine_point(tower, y);
    while (y.column > column) {
        const std::size_t c = y.column - 1;
        const auto& offs = tower.offsets(c);
        auto it = std::upper_bound(offs.begin(), offs.end(), y.level);
        if (it == offs.begin())
            return std::nullopt;
        --it;
        Int rel = y.level - *it;
        if (rel >= tower.height(c))
            return std::nullopt;  // spacer above subcolumn j
        const auto j = static_cast<long>(it - offs.begin());
        y.u = (y.u + Rational(j)) / Rational(tower.cuts(c));
        y.level = rel;
        y.column = c;
    }
    return y.level;
}

namespace {

// Uniform on [0, bound) from raw generator words.
Int uniform_below(std::mt19937_64& gen, const Int& bound)
{
    if (bound.fits_ulong_p()) {
        const std::uint64_t range = bound.get_ui();
        const std::uint64_t rem = (~std::uint64_t{0} % range + 1) % range;
        for (;;) {
            const std::uint64_t w = gen();
            if (rem == 0 || w <= ~std::uint64_t{0} - rem)
                return Int(static_cast<unsigned long>(w % range));
        }
    }
    const std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
    const std::size_t words = (bits + 63) / 64;
    for (;;) {
        Int v = 0;
        for (std::size_t k = 0; k < words; ++k) {
            v <<= 64;
            v += Int(static_cast<unsigned long>(gen()));
        }
        mpz_fdiv_r_2exp(v.get_mpz_t(), v.get_mpz_t(), bits);
        if (v < bound)
            return v;
    }
}

}  // namespace

std::vector<PointCoord> sample_points(const TowerModel& tower, std::size_t column, std::size_t count,
                                      std::uint64_t seed)
{
    if (count < 1)
        throw DomainError("sample_points needs count >= 1");
    std::mt19937_64 gen(seed);
    const Int& h = tower.height(column);
    static const Int grid = pow_int(Int(2), 62);
    std::vector<PointCoord> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        PointCoord p;
        p.column = column;
        p.level = uniform_below(gen, h);
        p.u = Rational(Int(static_cast<unsigned long>(gen() >> 2)), grid);
        p.u.canonicalize();
        out.push_back(std::move(p));
    }
    return out;
}

FiniteMeasureSum finite_measure_partial_sum(const TowerModel& tower, std::size_t n_stages)
{
    if (n_stages < 1)
        throw DomainError("finite_measure_partial_sum needs N >= 1");
    FiniteMeasureSum out{Rational(0), Rational(1)};
    for (std::size_t n = 0; n < n_stages; ++n) {
        Rational ratio = tower.mean_spacer(n) / Rational(tower.height(n));
        out.sum += ratio;
        out.column_measure *= 1 + ratio;
    }
    return out;
}

}  // namespace rankone
