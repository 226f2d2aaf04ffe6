#include "rankone/spacer_rule.hpp"

#include <map>
#include <mutex>
#include <numeric>

namespace rankone {

CutRule CutRule::affine(Int slope, Int offset)
{
    CutRule r;
    r.slope = std::move(slope);
    r.offset = std::move(offset);
    return r;
}

CutRule CutRule::constant(Int value) { return affine(0, std::move(value)); }

CutRule CutRule::listed(std::vector<Int> values, Int slope, Int offset)
{
    CutRule r = affine(std::move(slope), std::move(offset));
    r.table = std::move(values);
    return r;
}

Int CutRule::at(std::size_t n) const
{
    if (n < table.size())
        return table[n];
    return slope * Int(static_cast<unsigned long>(n)) + offset;
}

std::string CutRule::describe() const
{
    std::string s = slope.get_str() + "*n+" + offset.get_str();
    if (!table.empty()) {
        s += " after [";
        for (std::size_t i = 0; i < table.size(); ++i)
            s += (i ? "," : "") + table[i].get_str();
        s += "]";
    }
    return s;
}

std::string to_string(RuleKind kind)
{
    switch (kind) {
    case RuleKind::staircase: return "staircase";
    case RuleKind::polynomial: return "polynomial";
    case RuleKind::simple_polystair: return "simple_polystair";
    case RuleKind::ornstein: return "ornstein";
    case RuleKind::constant: return "constant";
    case RuleKind::table: return "table";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------

namespace detail {

Int RuleImpl::prefix_sum(std::size_t n, const Int& j) const
{
    const std::size_t count = to_size(j, "prefix length");
    Int total = 0;
    for (std::size_t z = 0; z < count; ++z)
        total += spacer(n, Int(static_cast<unsigned long>(z)));
    return total;
}

std::vector<Int> RuleImpl::stage(std::size_t n) const
{
    const Int r = cuts(n);
    if (r > Int(static_cast<unsigned long>(kMaxMaterializedCuts)))
        throw DomainError("stage " + std::to_string(n) + " has r_n = " + r.get_str() +
                          ", too many cuts to materialize");
    const std::size_t count = r.get_ui();
    std::vector<Int> values;
    values.reserve(count);
    for (std::size_t j = 0; j < count; ++j)
        values.push_back(spacer(n, Int(static_cast<unsigned long>(j))));
    return values;
}

namespace {

std::vector<std::string> bounded_note(const CutRule& cuts)
{
    if (cuts.bounded())
        return {"cut counts " + cuts.describe() + " do not tend to infinity; only finite stages are meaningful"};
    return {};
}

class StaircaseImpl final : public RuleImpl {
public:
    explicit StaircaseImpl(CutRule cuts) : cuts_(std::move(cuts)) {}
    RuleKind kind() const override { return RuleKind::staircase; }
    std::string describe() const override { return "staircase s=j, r=" + cuts_.describe(); }
    Int cuts(std::size_t n) const override { return cuts_.at(n); }
    Int spacer(std::size_t, const Int& j) const override { return j; }
    Int prefix_sum(std::size_t, const Int& j) const override { return j * (j - 1) / 2; }
    std::vector<std::string> notes() const override { return bounded_note(cuts_); }

private:
    CutRule cuts_;
};

class ConstantImpl final : public RuleImpl {
public:
    ConstantImpl(Int value, CutRule cuts) : value_(std::move(value)), cuts_(std::move(cuts)) {}
    RuleKind kind() const override { return RuleKind::constant; }
    std::string describe() const override
    {
        return "constant s=" + value_.get_str() + ", r=" + cuts_.describe();
    }
    Int cuts(std::size_t n) const override { return cuts_.at(n); }
    Int spacer(std::size_t, const Int&) const override { return value_; }
    Int prefix_sum(std::size_t, const Int& j) const override { return value_ * j; }
    std::vector<std::string> notes() const override { return bounded_note(cuts_); }

private:
    Int value_;
    CutRule cuts_;
};

class PolynomialImpl final : public RuleImpl {
public:
    PolynomialImpl(PolynomialSpec spec, CutRule cuts) : spec_(std::move(spec)), cuts_(std::move(cuts)) {}
    RuleKind kind() const override { return RuleKind::polynomial; }
    std::string describe() const override
    {
        return "polynomial degree " + std::to_string(spec_.degree) + ", r=" + cuts_.describe();
    }
    Int cuts(std::size_t n) const override { return cuts_.at(n); }
    Int spacer(std::size_t n, const Int& j) const override { return spec_.at(n).eval_int(j); }
    Int prefix_sum(std::size_t n, const Int& j) const override
    {
        Rational s = spec_.at(n).prefix_sum(j);
        if (s.get_den() != 1)
            throw ConstructionError("stage " + std::to_string(n) + ": polynomial spacers are not integers");
        return s.get_num();
    }
    std::vector<std::string> notes() const override { return bounded_note(cuts_); }

private:
    PolynomialSpec spec_;
    CutRule cuts_;
};

class TableImpl final : public RuleImpl {
public:
    explicit TableImpl(std::vector<std::vector<Int>> stages) : stages_(std::move(stages)) {}
    RuleKind kind() const override { return RuleKind::table; }
    std::string describe() const override
    {
        return "table of " + std::to_string(stages_.size()) + " stages";
    }
    Int cuts(std::size_t n) const override
    {
        return Int(static_cast<unsigned long>(row(n).size()));
    }
    Int spacer(std::size_t n, const Int& j) const override { return row(n)[j.get_ui()]; }
    std::vector<Int> stage(std::size_t n) const override { return row(n); }
    std::vector<std::string> notes() const override
    {
        return {"table rule defines only stages 0.." + std::to_string(stages_.size()) + "-1"};
    }

private:
    const std::vector<Int>& row(std::size_t n) const
    {
        if (n >= stages_.size())
            throw DomainError("table rule has no stage " + std::to_string(n));
        return stages_[n];
    }
    std::vector<std::vector<Int>> stages_;
};

class SimplePolystairImpl final : public RuleImpl {
public:
    SimplePolystairImpl(std::size_t degree, Rational delta) : degree_(degree), delta_(std::move(delta))
    {
        if (degree_ < 1)
            throw DomainError("simple polynomial staircase needs D >= 1");
        if (delta_ <= 0)
            throw DomainError("simple polynomial staircase needs delta > 0");
        // 1/(D + a/b) = b/(D*b + a)
        root_power_ = delta_.get_den().get_ui();
        root_index_ = Int(Int(static_cast<unsigned long>(degree_)) * delta_.get_den() + delta_.get_num()).get_ui();
        heights_.push_back(1);
    }
    RuleKind kind() const override { return RuleKind::simple_polystair; }
    std::string describe() const override
    {
        return "simple polynomial staircase D=" + std::to_string(degree_) + " delta=" + to_text(delta_);
    }
    Int cuts(std::size_t n) const override
    {
        std::lock_guard lock(mutex_);
        extend(n);
        return cuts_[n];
    }
    Int spacer(std::size_t, const Int& j) const override { return pow_int(j, static_cast<unsigned long>(degree_)); }
    Int prefix_sum(std::size_t, const Int& j) const override
    {
        return Polynomial::monomial(degree_).prefix_sum(j).get_num();
    }
    std::vector<std::string> notes() const override
    {
        std::lock_guard lock(mutex_);
        std::vector<std::string> out;
        for (std::size_t n : clamped_)
            out.push_back("stage " + std::to_string(n) + ": r_n clamped to 2 (formula gives " +
                          raw_[n].get_str() + ")");
        return out;
    }

private:
    // requires mutex_ held; makes cuts_[0..n] and heights_[0..n+1] available
    void extend(std::size_t n) const
    {
        while (cuts_.size() <= n) {
            const std::size_t k = cuts_.size();
            const Int& h = heights_[k];
            Int raw = floor_root(pow_int(h, root_power_), root_index_);
            raw_.push_back(raw);
            Int r = raw;
            if (r < 2) {
                r = 2;
                clamped_.push_back(k);
            }
            Int sum = Polynomial::monomial(degree_).prefix_sum(r).get_num();
            heights_.push_back(r * h + sum);
            cuts_.push_back(std::move(r));
        }
    }

    std::size_t degree_;
    Rational delta_;
    unsigned long root_power_ = 1;
    unsigned long root_index_ = 1;
    mutable std::mutex mutex_;
    mutable std::vector<Int> heights_;
    mutable std::vector<Int> cuts_;
    mutable std::vector<Int> raw_;
    mutable std::vector<std::size_t> clamped_;
};

class OrnsteinImpl final : public RuleImpl {
public:
    OrnsteinImpl(std::uint64_t seed, CutRule bound, CutRule cuts)
        : seed_(seed), bound_(std::move(bound)), cuts_(std::move(cuts))
    {
    }
    RuleKind kind() const override { return RuleKind::ornstein; }
    std::string describe() const override
    {
        return "ornstein (heuristic) seed=" + std::to_string(seed_) + " bound=" + bound_.describe() +
               ", r=" + cuts_.describe();
    }
    std::optional<std::uint64_t> seed() const override { return seed_; }
    Int cuts(std::size_t n) const override { return cuts_.at(n); }
    Int spacer(std::size_t n, const Int& j) const override
    {
        const Int b = bound_.at(n);
        if (b < 0)
            throw ConstructionError("stage " + std::to_string(n) + ": negative Ornstein bound");
        if (!b.fits_ulong_p())
            throw DomainError("stage " + std::to_string(n) + ": Ornstein bound exceeds 64 bits");
        return Int(static_cast<unsigned long>(keyed_uniform(seed_, n, j.get_ui(), b.get_ui())));
    }
    Int prefix_sum(std::size_t n, const Int& j) const override
    {
        const std::size_t count = to_size(j, "prefix length");
        std::lock_guard lock(mutex_);
        auto it = prefix_.find(n);
        if (it == prefix_.end()) {
            std::vector<Int> table{Int(0)};
            const auto values = RuleImpl::stage(n);
            for (const auto& v : values)
                table.push_back(table.back() + v);
            it = prefix_.emplace(n, std::move(table)).first;
        }
        return it->second.at(count);
    }
    std::vector<std::string> notes() const override
    {
        auto out = bounded_note(cuts_);
        out.push_back("Ornstein family is a heuristic reading of random spacer placement");
        return out;
    }

private:
    std::uint64_t seed_;
    CutRule bound_;
    CutRule cuts_;
    mutable std::mutex mutex_;
    mutable std::map<std::size_t, std::vector<Int>> prefix_;
};

}  // namespace
}  // namespace detail

// ---------------------------------------------------------------------------

SpacerRule::SpacerRule(std::shared_ptr<const detail::RuleImpl> impl) : impl_(std::move(impl))
{
    if (!impl_)
        throw DomainError("null spacer rule");
}

RuleKind SpacerRule::kind() const { return impl_->kind(); }
std::string SpacerRule::describe() const { return impl_->describe(); }
std::optional<std::uint64_t> SpacerRule::seed() const { return impl_->seed(); }
std::vector<std::string> SpacerRule::notes() const { return impl_->notes(); }

Int SpacerRule::cuts(std::size_t n) const
{
    Int r = impl_->cuts(n);
    if (r < 2)
        throw ConstructionError("stage " + std::to_string(n) + ": cut count r_n = " + r.get_str() +
                                " is below 2");
    return r;
}

Int SpacerRule::spacer(std::size_t n, const Int& j) const
{
    const Int r = cuts(n);
    if (j < 0 || j >= r)
        throw DomainError("stage " + std::to_string(n) + ": spacer index " + j.get_str() +
                          " outside Z_" + r.get_str());
    Int s = impl_->spacer(n, j);
    if (s < 0)
        throw ConstructionError("negative spacer count " + s.get_str() + " at (n, j) = (" + std::to_string(n) +
                                ", " + j.get_str() + ")");
    return s;
}

Int SpacerRule::prefix_sum(std::size_t n, const Int& j) const
{
    const Int r = cuts(n);
    if (j < 0 || j > r)
        throw DomainError("stage " + std::to_string(n) + ": prefix length " + j.get_str() +
                          " outside [0, " + r.get_str() + "]");
    if (kind() == RuleKind::polynomial && r <= Int(static_cast<unsigned long>(kMaxMaterializedCuts)))
        (void)stage(n);  // validates signs
    return impl_->prefix_sum(n, j);
}

std::vector<Int> SpacerRule::stage(std::size_t n) const
{
    const Int r = cuts(n);
    auto values = impl_->stage(n);
    if (Int(static_cast<unsigned long>(values.size())) != r)
        throw ConsistencyError("stage " + std::to_string(n) + " materialized with wrong length");
    for (std::size_t j = 0; j < values.size(); ++j)
        if (values[j] < 0)
            throw ConstructionError("negative spacer count " + values[j].get_str() + " at (n, j) = (" +
                                    std::to_string(n) + ", " + std::to_string(j) + ")");
    return values;
}

SpacerRule staircase_rule(CutRule cuts)
{
    return SpacerRule(std::make_shared<detail::StaircaseImpl>(std::move(cuts)));
}

SpacerRule polynomial_rule(PolynomialSpec spec, CutRule cuts)
{
    return SpacerRule(std::make_shared<detail::PolynomialImpl>(std::move(spec), std::move(cuts)));
}

SpacerRule constant_rule(Int value, CutRule cuts)
{
    return SpacerRule(std::make_shared<detail::ConstantImpl>(std::move(value), std::move(cuts)));
}

SpacerRule table_rule(std::vector<std::vector<Int>> stages)
{
    return SpacerRule(std::make_shared<detail::TableImpl>(std::move(stages)));
}

SpacerRule simple_polystair_rule(std::size_t degree, Rational delta)
{
    return SpacerRule(std::make_shared<detail::SimplePolystairImpl>(degree, std::move(delta)));
}

SpacerRule ornstein_rule(std::uint64_t seed, CutRule bound, CutRule cuts)
{
    return SpacerRule(std::make_shared<detail::OrnsteinImpl>(seed, std::move(bound), std::move(cuts)));
}

std::uint64_t splitmix64_mix(std::uint64_t x)
{
    std::uint64_t z = x + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t keyed_word(std::uint64_t seed, std::uint64_t n, std::uint64_t j, std::uint64_t attempt)
{
    const std::uint64_t k1 = splitmix64_mix(seed);
    const std::uint64_t k2 = splitmix64_mix(k1 ^ n);
    const std::uint64_t k3 = splitmix64_mix(k2 ^ j);
    return splitmix64_mix(k3 + attempt);
}

std::uint64_t keyed_uniform(std::uint64_t seed, std::uint64_t n, std::uint64_t j, std::uint64_t bound)
{
    if (bound == ~std::uint64_t{0})
        return keyed_word(seed, n, j, 0);
    const std::uint64_t range = bound + 1;
    // 2^64 mod range; accept words below the largest multiple of range
    const std::uint64_t rem = (~std::uint64_t{0} % range + 1) % range;
    for (std::uint64_t attempt = 0;; ++attempt) {
        const std::uint64_t w = keyed_word(seed, n, j, attempt);
        if (rem == 0 || w <= ~std::uint64_t{0} - rem)
            return w % range;
    }
}

}  // namespace rankone
