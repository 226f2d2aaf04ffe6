#include "rankone/dynseq.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace rankone {

DynStage materialize_stage(const SpacerRule& rule, std::size_t n)
{
    DynStage st;
    st.n = n;
    st.r = rule.cuts(n);
    st.values = rule.stage(n);
    return st;
}

PartialSumStage partial_sums(const DynStage& stage, std::size_t k)
{
    const std::size_t r = stage.values.size();
    if (k >= r)
        throw DomainError("window k=" + std::to_string(k) + " needs k < r_n=" + std::to_string(r));
    PartialSumStage out;
    out.n = stage.n;
    out.k = k;
    if (k == 0) {
        out.values.assign(r, Int(0));
        return out;
    }
    out.values.reserve(r - k);
    Int window = 0;
    for (std::size_t z = 0; z < k; ++z)
        window += stage.values[z];
    for (std::size_t j = 0; j + k < r; ++j) {
        out.values.push_back(window);
        window += stage.values[j + k];
        window -= stage.values[j];
    }
    return out;
}

Rational monotonicity_fraction(const DynStage& stage, const Int& threshold)
{
    if (threshold < 0)
        throw DomainError("monotonicity threshold must be >= 0");
    std::size_t below = 0;
    for (const auto& v : stage.values)
        if (abs(v) < threshold)
            ++below;
    return ratio(Int(static_cast<unsigned long>(below)), Int(static_cast<unsigned long>(stage.values.size())));
}

WindowSums::WindowSums(const DynStage& stage)
{
    prefix_.reserve(stage.values.size() + 1);
    prefix_.emplace_back(0);
    for (const auto& v : stage.values)
        prefix_.push_back(prefix_.back() + v);
}

Int WindowSums::at(std::size_t j, std::size_t w) const
{
    if (j + w > size())
        throw DomainError("window [" + std::to_string(j) + ", " + std::to_string(j + w) + ") exceeds Z_" +
                          std::to_string(size()));
    return prefix_[j + w] - prefix_[j];
}

std::string to_string(BreakRule rule)
{
    return rule == BreakRule::same_window ? "same_window" : "shifted_window";
}

std::size_t solve_alpha(const WindowSums& sums, const Int& h, std::size_t head, std::size_t k, const Int& m)
{
    const Int x = sums.at(head, k) - m;
    if (x <= 0)
        return 0;
    // f is strictly increasing with f(0) = 0 and f(k) >= x
    for (std::size_t a = 1; a <= k; ++a) {
        const Int f = Int(static_cast<unsigned long>(a)) * h + sums.at(head + k - a, a);
        if (x <= f)
            return a;
    }
    throw ConsistencyError("no alpha satisfies the slice conditions at head " + std::to_string(head));
}

namespace {

// f(b) = b h + s^{(b)}_{head+k-b}
Int alpha_f(const WindowSums& sums, const Int& h, std::size_t head, std::size_t k, std::size_t b)
{
    return Int(static_cast<unsigned long>(b)) * h + sums.at(head + k - b, b);
}

}  // namespace

Slicing build_slicing(const TowerModel& tower, std::size_t p, std::size_t k, const Int& m, const Rational& epsilon,
                      BreakRule rule)
{
    const DynStage stage = materialize_stage(tower.rule(), p);
    const std::size_t r = stage.values.size();
    if (k < 1 || k >= r)
        throw DomainError("build_slicing needs 1 <= k < r_p (k=" + std::to_string(k) + ", r=" + std::to_string(r) +
                          ")");
    const Int& h = tower.height(p);
    if (m < 0 || m >= h)
        throw DomainError("residual m=" + m.get_str() + " outside Z_" + h.get_str());
    if (epsilon <= 0)
        throw DomainError("epsilon must be positive");

    Slicing s;
    s.p = p;
    s.k = k;
    s.m = m;
    s.epsilon = epsilon;
    s.rule = rule;
    s.h = h;
    s.r = stage.r;
    s.values = partial_sums(stage, k).values;
    const std::size_t count = r - k;
    const WindowSums sums(stage);

    s.psi.resize(count);
    std::iota(s.psi.begin(), s.psi.end(), std::size_t{0});
    std::stable_sort(s.psi.begin(), s.psi.end(),
                     [&](std::size_t a, std::size_t b) { return s.values[a] < s.values[b]; });

    const Rational gap = epsilon * Rational(h);
    s.ell.push_back(0);
    for (;;) {
        const std::size_t lq = s.ell.back();
        const std::size_t head = s.psi[lq];
        const std::size_t a = solve_alpha(sums, h, head, k, m);
        s.alpha.push_back(a);
        const Int fa = alpha_f(sums, h, head, k, a);
        const Int b = fa - (s.values[head] - m);
        s.beta.push_back(b);
        s.beta_prime.push_back(b - stage.values[head + k - a]);

        std::size_t next = count;
        if (rule == BreakRule::same_window) {
            const Int& base = s.values[head];
            for (std::size_t l = lq + 1; l < count; ++l)
                if (Rational(s.values[s.psi[l]] - base) >= gap) {
                    next = l;
                    break;
                }
        } else {
            const Int base = sums.at(head, k - a);
            for (std::size_t l = lq + 1; l < count; ++l)
                if (Rational(sums.at(s.psi[l], k - a + 1) - base) >= gap) {
                    next = l;
                    break;
                }
        }
        s.ell.push_back(next);
        if (next == count)
            break;
    }
    s.Q = s.ell.size() - 1;

    // threshold sets on the k-window values
    s.gamma.assign(s.Q, {});
    for (std::size_t q = 0; q < s.Q; ++q) {
        s.lower.push_back(s.values[s.psi[s.ell[q]]]);
        if (q + 1 < s.Q)
            s.upper.emplace_back(s.values[s.psi[s.ell[q + 1]]]);
        else
            s.upper.emplace_back(std::nullopt);
    }
    for (std::size_t j = 0; j < count; ++j)
        for (std::size_t q = 0; q < s.Q; ++q)
            if (s.lower[q] <= s.values[j] && (!s.upper[q] || s.values[j] < *s.upper[q])) {
                s.gamma[q].push_back(j);
                break;
            }
    return s;
}

bool SlicingReport::all_passed() const
{
    return std::all_of(checks.begin(), checks.end(),
                       [](const SlicingCheck& c) { return c.passed || c.informational; });
}

const SlicingCheck* SlicingReport::find(const std::string& name) const
{
    for (const auto& c : checks)
        if (c.name == name)
            return &c;
    return nullptr;
}

SlicingReport validate_slicing(const Slicing& s, const TowerModel& tower)
{
    if (s.r != tower.cuts(s.p) || s.h != tower.height(s.p))
        throw DomainError("slicing was built for a different stage than tower stage " + std::to_string(s.p));
    const DynStage stage = materialize_stage(tower.rule(), s.p);
    const std::size_t r = stage.values.size();
    SlicingReport rep;
    auto add = [&](std::string name, bool ok, std::string detail, bool informational = false) {
        rep.checks.push_back({std::move(name), ok, informational, std::move(detail)});
    };

    // shape
    const bool window_ok = s.k >= 1 && s.k < r;
    const std::size_t count = window_ok ? r - s.k : 0;
    bool shape = window_ok && s.values.size() == count && s.psi.size() == count && s.Q >= 1 &&
                 s.ell.size() == s.Q + 1 && s.alpha.size() == s.Q && s.beta.size() == s.Q &&
                 s.beta_prime.size() == s.Q && s.gamma.size() == s.Q;
    if (shape)
        shape = partial_sums(stage, s.k).values == s.values;
    add("shape", shape, shape ? "" : "array lengths or partial sums do not match the stage");
    if (!shape)
        return rep;
    const WindowSums sums(stage);

    // psi sorts ascending with ties by index
    {
        std::vector<std::size_t> sorted = s.psi;
        std::sort(sorted.begin(), sorted.end());
        bool ok = true;
        for (std::size_t i = 0; i < count; ++i)
            ok = ok && sorted[i] == i;
        for (std::size_t i = 0; ok && i + 1 < count; ++i)
            ok = s.values[s.psi[i]] < s.values[s.psi[i + 1]] ||
                 (s.values[s.psi[i]] == s.values[s.psi[i + 1]] && s.psi[i] < s.psi[i + 1]);
        add("psi_sorted", ok, ok ? "" : "psi is not the stable ascending sort");
    }

    // breakpoints
    {
        bool ok = s.ell.front() == 0 && s.ell.back() == count;
        for (std::size_t q = 0; ok && q < s.Q; ++q)
            ok = s.ell[q] < s.ell[q + 1];
        add("breakpoints", ok, ok ? "" : "ell must increase from 0 to r-k");
    }

    // partition of Z_{r-k}
    {
        std::vector<int> seen(count, 0);
        std::ostringstream why;
        bool ok = true;
        for (std::size_t q = 0; q < s.Q; ++q)
            for (std::size_t j : s.gamma[q]) {
                if (j >= count) {
                    ok = false;
                    why << "index " << j << " outside Z_" << count << "; ";
                } else if (++seen[j] > 1) {
                    ok = false;
                    why << "index " << j << " in several slices; ";
                }
            }
        for (std::size_t j = 0; j < count; ++j)
            if (seen[j] == 0) {
                ok = false;
                why << "index " << j << " uncovered; ";
                break;
            }
        add("partition", ok, why.str());
    }

    // thresholds: stored bounds capture their slice, and slices are value intervals
    {
        bool ok = s.lower.size() == s.Q && s.upper.size() == s.Q;
        std::ostringstream why;
        for (std::size_t q = 0; ok && q < s.Q; ++q) {
            std::vector<char> member(count, 0);
            for (std::size_t j : s.gamma[q])
                if (j < count)
                    member[j] = 1;
            for (std::size_t j = 0; j < count; ++j) {
                const bool inside = s.lower[q] <= s.values[j] && (!s.upper[q] || s.values[j] < *s.upper[q]);
                if (inside && !member[j]) {
                    ok = false;
                    why << "slice " << q << " misses index " << j << " within its bounds; ";
                }
            }
            if (!s.gamma[q].empty()) {
                Int lo = s.values[s.gamma[q].front()], hi = lo;
                for (std::size_t j : s.gamma[q]) {
                    lo = std::min(lo, s.values[j]);
                    hi = std::max(hi, s.values[j]);
                }
                for (std::size_t j = 0; j < count; ++j)
                    if (!member[j] && lo <= s.values[j] && s.values[j] <= hi) {
                        ok = false;
                        why << "slice " << q << " skips index " << j << " inside its value range; ";
                    }
            }
        }
        if (s.lower.size() != s.Q || s.upper.size() != s.Q)
            why << "threshold bounds missing";
        add("thresholds", ok, why.str());
    }

    // alpha conditions i) and ii), beta ranges
    {
        bool ok_alpha = true, ok_beta = true;
        std::ostringstream why_a, why_b;
        for (std::size_t q = 0; q < s.Q; ++q) {
            const std::size_t head = s.psi[s.ell[q]];
            const std::size_t a = s.alpha[q];
            const Int x = s.values[head] - s.m;
            if (a > s.k) {
                ok_alpha = false;
                why_a << "q=" << q << ": alpha " << a << " > k; ";
                continue;
            }
            const bool cond_i = a == 0 || alpha_f(sums, s.h, head, s.k, a - 1) < x;
            const bool cond_ii = x <= alpha_f(sums, s.h, head, s.k, a);
            if (!cond_i || !cond_ii) {
                ok_alpha = false;
                why_a << "q=" << q << ": alpha=" << a << (cond_i ? "" : " violates i)") << (cond_ii ? "" : " violates ii)")
                      << "; ";
            }
            const Int& spacer = stage.values[head + s.k - a];
            const Int want_beta = alpha_f(sums, s.h, head, s.k, a) - x;
            const bool b_ok = s.beta[q] == want_beta && s.beta[q] >= 0 && s.beta[q] < s.h + spacer &&
                              s.beta_prime[q] == s.beta[q] - spacer && s.beta_prime[q] < s.h;
            if (!b_ok) {
                ok_beta = false;
                why_b << "q=" << q << ": beta=" << s.beta[q].get_str() << " beta'=" << s.beta_prime[q].get_str()
                      << "; ";
            }
        }
        add("alpha_conditions", ok_alpha, why_a.str());
        add("beta_ranges", ok_beta, why_b.str());
        add("alpha0_is_one", !s.alpha0_differs_from_one(),
            s.alpha0_differs_from_one() ? "alpha_0 = " + std::to_string(s.alpha[0]) + " from conditions i)/ii)" : "",
            true);
    }

    // slice diameter
    {
        const Rational gap = s.epsilon * Rational(s.h);
        bool ok = true;
        std::ostringstream why;
        for (std::size_t q = 0; q < s.Q; ++q) {
            if (s.gamma[q].empty())
                continue;
            Int lo = s.values[s.gamma[q].front()], hi = lo;
            for (std::size_t j : s.gamma[q]) {
                lo = std::min(lo, s.values[j]);
                hi = std::max(hi, s.values[j]);
            }
            if (Rational(hi - lo) >= gap) {
                ok = false;
                why << "q=" << q << ": diameter " << Int(hi - lo).get_str() << " >= eps*h; ";
            }
        }
        add("slice_diameter", ok, why.str());
    }

    // Q bounds: the estimate Q <= r mu(S)/(eps mu(C)) = (sum_j s_j)/(eps h) is recorded;
    // a single slice exceeds it whenever eps h > sum_j s_j, so Q <= 1 + estimate is enforced
    {
        const Rational estimate = Rational(tower.spacer_measure(s.p) * Rational(s.r)) /
                                  (s.epsilon * tower.column_measure(s.p));
        const Rational q(Int(static_cast<unsigned long>(s.Q)));
        const bool has_spacers = tower.spacer_measure(s.p) > 0;
        const std::string detail = "Q=" + std::to_string(s.Q) + " estimate=" + to_text(estimate);
        add("q_bound", !has_spacers || q <= estimate, detail, true);
        add("q_bound_plus_one", q <= 1 + estimate, detail);
    }
    return rep;
}

Rational epsilon_schedule(const TowerModel& tower, std::size_t n)
{
    const Rational sigma = tower.spacer_measure(n) / tower.column_measure(n);
    // smallest c / 2^32 with (c / 2^32)^2 >= sigma
    const Int scale = pow_int(Int(2), 64);
    const Rational scaled = sigma * Rational(scale);
    Int c = floor_root(ceil_of(scaled), 2);
    if (Rational(c * c) < scaled)
        c += 1;
    const Rational root = ratio(c, pow_int(Int(2), 32));
    const Rational floor_term = n == 0 ? Rational(1) : Rational(Int(1), Int(static_cast<unsigned long>(n)));
    return std::max(root, floor_term);
}

}  // namespace rankone
