#pragma once

// Run configuration read from a YAML file. Errors carry the line and the
// dotted field path of the offending entry.

#include "rankone/dynseq.hpp"
#include "rankone/ergodic.hpp"
#include "rankone/families.hpp"
#include "rankone/numeric.hpp"
#include "rankone/tower.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rankone::cli {

class ConfigError : public Error {
public:
    ConfigError(const std::string& field, int line, const std::string& message);
    const std::string& field() const { return field_; }
    int line() const { return line_; }

private:
    std::string field_;
    int line_;
};

struct FamilyConfig {
    std::string kind = "staircase";
    CutRule cuts = CutRule::affine(1, 2);
    std::optional<std::uint64_t> seed;
    // polynomial
    PolynomialSpec polynomial;
    // simple_polystair
    std::size_t degree = 1;
    Rational delta = 1;
    // ornstein
    CutRule bound = CutRule::constant(0);
    // constant
    Int value = 0;
    // table
    std::vector<std::vector<Int>> stages;
};

struct SetConfig {
    std::string name;
    std::size_t column = 0;
    /// Half-open ranges; empty together with whole == false is the empty set.
    std::vector<IndexRange> ranges;
    bool whole = false;
    /// The bottom floor(h_column / 2) levels.
    bool bottom_half = false;
    int line = 0;
};

struct Windows {
    std::size_t first = 1;
    std::size_t last = 2;
    std::vector<Int> residuals{Int(0)};
    /// Largest multiplier k sampled per window; unset samples every k.
    std::optional<std::size_t> max_k;
};

struct CorrelateConfig {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<Int> times;
    std::optional<Windows> windows;
};

struct ErgavgConfig {
    std::string set;
    std::vector<Int> exponents;
    /// Dynamical averages s^{(k)}_{n, .} for n in [first, last].
    std::optional<std::pair<std::size_t, std::size_t>> dynseq_stages;
    std::size_t k = 1;
};

struct SliceConfig {
    std::string set;
    std::size_t stage = 2;
    std::size_t k = 1;
    Int m = 0;
    /// Unset: epsilon_schedule(stage).
    std::optional<Rational> epsilon;
    BreakRule rule = BreakRule::shifted_window;
    std::string normalizer = "cut_count";
};

struct UniformConfig {
    std::string set;
    std::vector<Int> a;
};

struct PowerConfig {
    std::string set;
    std::size_t n = 8;
    std::size_t k_max = 8;
    std::vector<Int> strides;
};

struct PolyConfig {
    std::string set;
    std::vector<Rational> coefficients;
    std::size_t n = 8;
};

struct ValidateConfig {
    std::size_t l_max = 6;
};

struct DiagnoseConfig {
    std::string set;
    std::size_t k = 1;
    std::pair<std::size_t, std::size_t> dynseq_stages{1, 6};
    std::vector<Int> times;
};

struct RunConfig {
    std::string source;
    FamilyConfig family;
    std::size_t ref_column = 2;
    std::size_t first_stage = 0;
    std::size_t last_stage = 4;
    std::vector<SetConfig> sets;
    Budget budget;
    std::string format = "csv";
    std::optional<std::string> out_dir;

    std::optional<CorrelateConfig> correlate;
    std::optional<ErgavgConfig> ergavg;
    std::optional<SliceConfig> slice;
    std::optional<UniformConfig> uniform;
    std::optional<PowerConfig> power;
    std::optional<PolyConfig> poly;
    std::optional<ValidateConfig> validate;
    std::optional<DiagnoseConfig> diagnose;

    const SetConfig& set(const std::string& name) const;
};

/// Parses YAML text; `source` names the input in error messages.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

SpacerRule make_rule(const FamilyConfig& family);
/// Materializes a configured set; throws DomainError when it leaves its column.
LevelSet make_set(const TowerModel& tower, const SetConfig& set);

}  // namespace rankone::cli
