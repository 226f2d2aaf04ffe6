#include "rankone/ergodic.hpp"

#include <algorithm>
#include <map>

namespace rankone {

namespace {

Budget strict_copy(const Budget& budget)
{
    Budget b = budget;
    b.strict = true;
    return b;
}

void require_within(const LevelSet& b, std::size_t ref_column, const char* what)
{
    if (b.column() > ref_column)
        throw DomainError(std::string(what) + " lives in column " + std::to_string(b.column()) +
                          ", deeper than the reference column " + std::to_string(ref_column));
}

/// C_M ∩ T^e(B) for signed e.
MixedSet image_in_column(const TowerModel& tower, const LevelSet& b, const Int& e, std::size_t m,
                         const Budget& budget)
{
    if (e >= 0)
        return apply_power(tower, b, e, strict_copy(budget)).resolved;
    return pullback(tower, LevelSet::whole_column(tower, m), b, Int(-e), budget);
}

/// Coverage counts of a family of sets over C_M. A column-M level x with
/// horizontal coordinate u in [0, D) is a cell; a set covers a product of an
/// x-range and a u-range. D = W_K / W_M for the deepest column K involved.
class Coverage {
public:
    Coverage(const TowerModel& tower, std::size_t m, std::size_t deepest)
        : tower_(tower), m_(m), k_(std::max(m, deepest)),
          den_(tower.width_denominator(k_) / tower.width_denominator(m))
    {
    }

    const Int& den() const { return den_; }

    void add(const MixedSet& set)
    {
        for (const auto& part : set.parts()) {
            if (part.column() <= m_) {
                const LevelSet fine = refine(tower_, part, m_);
                for (const auto& r : fine.ranges())
                    pieces_.push_back({r.begin, r.end, Int(0), den_});
                continue;
            }
            const Int span = tower_.width_denominator(k_) / tower_.width_denominator(part.column());
            for (const auto& mr : coarsen_map(tower_, part.column(), part.ranges(), m_)) {
                const auto path = level_path(tower_, part.column(), mr.range.begin, m_);
                if (!path)
                    throw ConsistencyError("coarsened range has no path to the reference column");
                Int u0 = 0;
                for (std::size_t c = m_; c < part.column(); ++c)
                    u0 += path->sub[c - m_] * (tower_.width_denominator(k_) / tower_.width_denominator(c + 1));
                pieces_.push_back({mr.range.begin - mr.shift, mr.range.end - mr.shift, u0, u0 + span});
            }
        }
    }

    /// count -> area in units of (one level) x (1/D)
    std::map<std::size_t, Int> histogram() const
    {
        struct Event {
            Int x;
            bool open;
            std::size_t piece;
        };
        std::vector<Event> events;
        events.reserve(2 * pieces_.size());
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            events.push_back({pieces_[i].x0, true, i});
            events.push_back({pieces_[i].x1, false, i});
        }
        std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.x < b.x; });

        std::map<std::size_t, Int> hist;
        std::size_t base = 0;
        std::map<Int, long> deltas;
        Int prev = 0;
        auto flush = [&](const Int& upto) {
            if (upto <= prev)
                return;
            const Int len = upto - prev;
            if (deltas.empty()) {
                hist[base] += len * den_;
            } else {
                long cur = static_cast<long>(base);
                Int u = 0;
                for (const auto& [at, d] : deltas) {
                    if (at > u)
                        hist[static_cast<std::size_t>(cur)] += len * (at - u);
                    u = at;
                    cur += d;
                }
                if (den_ > u)
                    hist[static_cast<std::size_t>(cur)] += len * (den_ - u);
            }
            prev = upto;
        };
        auto bump = [&](const Int& at, long d) {
            auto it = deltas.emplace(at, 0).first;
            it->second += d;
            if (it->second == 0)
                deltas.erase(it);
        };
        for (const auto& ev : events) {
            flush(ev.x);
            const Piece& p = pieces_[ev.piece];
            const long d = ev.open ? 1 : -1;
            if (p.u0 == 0 && p.u1 == den_) {
                base = static_cast<std::size_t>(static_cast<long>(base) + d);
            } else {
                bump(p.u0, d);
                bump(p.u1, -d);
            }
        }
        flush(tower_.height(m_));
        return hist;
    }

private:
    struct Piece {
        Int x0, x1;
        Int u0, u1;
    };
    const TowerModel& tower_;
    std::size_t m_;
    std::size_t k_;
    Int den_;
    std::vector<Piece> pieces_;
};

AverageResult finish(const TowerModel& tower, std::size_t m, std::size_t deepest, const Rational& nu_b,
                     Rational value, std::size_t terms)
{
    AverageResult out;
    out.value = std::move(value);
    out.ref_column = m;
    out.tail_column = std::max(m + 1, deepest);
    const Rational& cm = tower.column_measure(m);
    const Rational growth = (tower.column_measure(out.tail_column) - cm) / cm;
    out.tail_bound = nu_b * growth;
    out.divergent = growth >= 1;
    out.terms = terms;
    return out;
}

Rational nu(const TowerModel& tower, const Rational& mass, std::size_t m) { return mass / tower.column_measure(m); }

}  // namespace

CorrelationRow correlation(const TowerModel& tower, const LevelSet& a, const LevelSet& b, const Int& t,
                           std::size_t ref_column, const Budget& budget)
{
    require_within(a, ref_column, "A");
    require_within(b, ref_column, "B");
    CorrelationRow row;
    row.t = t;
    if (t >= 0)
        row.raw = intersect_measure(tower, apply_power(tower, a, t, strict_copy(budget)).resolved, b);
    else
        row.raw = intersect_measure(tower, apply_power(tower, b, Int(-t), strict_copy(budget)).resolved, a);
    const Rational& ref = tower.column_measure(ref_column);
    row.normalized = row.raw / ref - (a.measure(tower) / ref) * (b.measure(tower) / ref);
    return row;
}

AverageResult weighted_average(const TowerModel& tower, const std::vector<Int>& exponents, const Rational& weight,
                               const LevelSet& b, std::size_t ref_column, const Budget& budget)
{
    require_within(b, ref_column, "B");
    const std::size_t m = ref_column;
    std::vector<MixedSet> images;
    images.reserve(exponents.size());
    std::size_t deepest = m;
    std::map<Int, std::size_t> seen;
    for (const auto& e : exponents) {
        auto [it, fresh] = seen.emplace(e, images.size());
        if (fresh) {
            images.push_back(image_in_column(tower, b, e, m, budget));
            if (!images.back().empty())
                deepest = std::max(deepest, images.back().deepest_column());
        } else {
            images.push_back(images[it->second]);
        }
    }
    Coverage cov(tower, m, deepest);
    for (const auto& img : images)
        cov.add(img);

    const Rational nu_b = nu(tower, b.measure(tower), m);
    Rational total = 0;
    for (const auto& [count, area] : cov.histogram()) {
        const Rational level = weight * Rational(Int(static_cast<unsigned long>(count))) - nu_b;
        total += abs_of(level) * Rational(area);
    }
    total /= Rational(cov.den() * tower.height(m));
    return finish(tower, m, deepest, nu_b, std::move(total), exponents.size());
}

AverageResult ergodic_average(const TowerModel& tower, const std::vector<Int>& exponents, const LevelSet& b,
                              std::size_t ref_column, const Budget& budget)
{
    if (exponents.empty())
        throw DomainError("ergodic average needs at least one exponent");
    return weighted_average(tower, exponents, ratio(1, Int(static_cast<unsigned long>(exponents.size()))), b,
                            ref_column, budget);
}

AverageResult dynseq_ergodic_average(const TowerModel& tower, std::size_t n, std::size_t k, const LevelSet& b,
                                     std::size_t ref_column, const Budget& budget)
{
    const auto sums = partial_sums(materialize_stage(tower.rule(), n), k);
    return ergodic_average(tower, sums.values, b, ref_column, budget);
}

std::string to_string(SliceNormalizer n)
{
    return n == SliceNormalizer::cut_count ? "cut_count" : "term_count";
}

std::vector<Int> slice_exponents(const TowerModel& tower, const Slicing& s)
{
    const DynStage stage = materialize_stage(tower.rule(), s.p);
    if (stage.r != s.r)
        throw DomainError("slicing was built for a different stage than tower stage " + std::to_string(s.p));
    const WindowSums sums(stage);
    std::vector<Int> out;
    for (std::size_t q = 0; q < s.Q; ++q)
        for (std::size_t j : s.gamma[q])
            out.push_back(sums.at(j, s.k - s.alpha[q]));
    return out;
}

AverageResult slice_ergodic_average(const TowerModel& tower, const Slicing& s, const LevelSet& b,
                                    std::size_t ref_column, SliceNormalizer normalizer, const Budget& budget)
{
    const std::vector<Int> exps = slice_exponents(tower, s);
    if (exps.empty())
        throw DomainError("slicing has no terms");
    const Int n = normalizer == SliceNormalizer::cut_count ? s.r : Int(static_cast<unsigned long>(exps.size()));
    return weighted_average(tower, exps, ratio(1, n), b, ref_column, budget);
}

UniformSum uniform_mixing_sum(const TowerModel& tower, const Int& a, const LevelSet& b, std::size_t ref_column,
                              const Budget& budget)
{
    if (a < 1)
        throw DomainError("uniform mixing sum needs a >= 1");
    require_within(b, ref_column, "B");
    UniformSum out;
    out.p = tower.stage_of(a);
    if (out.p > ref_column)
        throw DomainError("reference column " + std::to_string(ref_column) + " is shallower than the stage p=" +
                          std::to_string(out.p) + " of a=" + a.get_str());
    const std::size_t m = ref_column;
    const Rational nu_b = nu(tower, b.measure(tower), m);
    const Rational nu_level = nu(tower, tower.width(out.p), m);
    const Rational expected = nu_level * nu_b;
    const Budget strict = strict_copy(budget);
    Rational total = 0;
    std::size_t deepest = m;
    const std::size_t h = to_size(tower.height(out.p), "h_p");
    for (std::size_t i = 0; i < h; ++i) {
        const PowerImage img =
            apply_power(tower, LevelSet::level(tower, out.p, Int(static_cast<unsigned long>(i))), a, strict);
        deepest = std::max(deepest, img.deepest_column);
        total += abs_of(nu(tower, intersect_measure(tower, img.resolved, b), m) - expected);
    }
    out.result = finish(tower, m, deepest, nu_b, std::move(total), h);
    return out;
}

PowerProfile power_ergodic_profile(const TowerModel& tower, std::size_t n, const std::vector<Int>& strides,
                                   const LevelSet& b, std::size_t ref_column, const Budget& budget)
{
    if (n < 1)
        throw DomainError("power average needs n >= 1");
    if (strides.empty())
        throw DomainError("power profile needs at least one stride");
    PowerProfile out;
    for (const auto& k : strides) {
        std::vector<Int> exps;
        exps.reserve(n);
        for (std::size_t j = 0; j < n; ++j)
            exps.push_back(Int(static_cast<unsigned long>(j)) * k);
        AverageResult r = ergodic_average(tower, exps, b, ref_column, budget);
        if (out.rows.empty() || r.value > out.sup) {
            out.sup = r.value;
            out.argsup = k;
        }
        out.rows.emplace_back(k, std::move(r));
    }
    return out;
}

PowerProfile power_ergodic_profile(const TowerModel& tower, std::size_t n, std::size_t k_max, const LevelSet& b,
                                   std::size_t ref_column, const Budget& budget)
{
    if (k_max < 1)
        throw DomainError("power profile needs kMax >= 1");
    std::vector<Int> strides;
    for (std::size_t k = 1; k <= k_max; ++k)
        strides.emplace_back(static_cast<unsigned long>(k));
    return power_ergodic_profile(tower, n, strides, b, ref_column, budget);
}

AverageResult polynomial_average(const TowerModel& tower, const Polynomial& p, std::size_t n, const LevelSet& b,
                                 std::size_t ref_column, const Budget& budget)
{
    if (n < 1)
        throw DomainError("polynomial average needs n >= 1");
    if (!p.integer_valued())
        throw DomainError("polynomial does not map Z into Z");
    std::vector<Int> exps;
    exps.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
        exps.push_back(p.eval_int(Int(static_cast<unsigned long>(j))));
    return ergodic_average(tower, exps, b, ref_column, budget);
}

InequalityCheck block_lemma_check(const TowerModel& tower, std::size_t R, std::size_t L, std::size_t p,
                                  const LevelSet& b, std::size_t ref_column, const Budget& budget)
{
    if (R < 1 || L < 1 || p < 1)
        throw DomainError("block lemma needs R, L, p >= 1");
    std::vector<Int> full, strided;
    for (std::size_t j = 0; j < R; ++j)
        full.emplace_back(static_cast<unsigned long>(j));
    for (std::size_t j = 0; j < L; ++j)
        strided.emplace_back(static_cast<unsigned long>(j * p));
    InequalityCheck out;
    out.lhs = ergodic_average(tower, full, b, ref_column, budget).value;
    out.rhs = ergodic_average(tower, strided, b, ref_column, budget).value +
              ratio(Int(static_cast<unsigned long>(p * L)), Int(static_cast<unsigned long>(R)));
    out.holds = out.lhs <= out.rhs;
    out.boundary = ratio(Int(static_cast<unsigned long>(R - 1)), 2 * tower.height(ref_column));
    return out;
}

InequalityCheck fulltrick_check(const TowerModel& tower, std::size_t p, const std::vector<Int>& lambda,
                                const std::vector<FulltrickTerm>& gamma, const LevelSet& b, std::size_t ref_column,
                                const Budget& budget)
{
    if (gamma.empty())
        throw DomainError("fulltrick check needs a nonempty Gamma");
    if (b.column() > p)
        throw DomainError("B must be a union of levels of C_p");
    if (ref_column < p + 1)
        throw DomainError("reference column must contain the sublevels of C_p");
    const std::size_t m = ref_column;
    const Rational nu_b = nu(tower, b.measure(tower), m);
    const Rational nu_sub = nu(tower, tower.width(p + 1), m);
    const Budget strict = strict_copy(budget);
    const Rational inv_r = ratio(1, tower.cuts(p));

    InequalityCheck out;
    out.lhs = 0;
    for (const auto& i : lambda) {
        Rational inner = 0;
        for (const auto& term : gamma) {
            const LevelSet sub = LevelSet::sublevel(tower, p, i, term.g);
            Rational raw;
            if (term.f >= 0) {
                raw = intersect_measure(tower, apply_power(tower, sub, term.f, strict).resolved, b);
            } else {
                raw = intersect_measure(tower, apply_power(tower, b, Int(-term.f), strict).resolved, sub);
            }
            inner += nu(tower, raw, m) - nu_sub * nu_b;
        }
        out.lhs += abs_of(inner);
    }

    std::vector<Int> exps;
    Int sup_f = gamma.front().f;
    for (const auto& term : gamma) {
        exps.push_back(-term.f);
        sup_f = std::max(sup_f, term.f);
    }
    const Rational integral = weighted_average(tower, exps, inv_r, b, m, budget).value;
    out.rhs = integral + Rational(sup_f) / Rational(tower.height(p)) *
                             ratio(Int(static_cast<unsigned long>(gamma.size())), tower.cuts(p));
    out.holds = out.lhs <= out.rhs;
    return out;
}

InequalityCheck uniform_dominates_correlation(const TowerModel& tower, const Int& a, const LevelSet& a_set,
                                              const LevelSet& b, std::size_t ref_column, const Budget& budget)
{
    const UniformSum u = uniform_mixing_sum(tower, a, b, ref_column, budget);
    if (a_set.column() != u.p)
        throw DomainError("A must be a union of levels of C_p, p=" + std::to_string(u.p));
    const CorrelationRow c = correlation(tower, a_set, b, a, ref_column, budget);
    InequalityCheck out;
    out.lhs = abs_of(c.normalized);
    out.rhs = u.result.value;
    out.holds = out.lhs <= out.rhs;
    return out;
}

}  // namespace rankone
