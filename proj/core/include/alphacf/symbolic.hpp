#pragma once

// Symbolic dynamics: by-excess expansions <a_1, a_2, ...> with runs of the
// digit 2 collapsed into single tokens, the reflection x -> 1 - x acting on
// those expansions, the admissible alphabets used to build the natural
// extension, and rank-n cylinders of T_alpha.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alphacf/interval.hpp"
#include "alphacf/maps.hpp"

namespace alphacf {

/// Either a maximal run of s digits 2 or a single digit a >= 3.
struct ByExcessToken {
  enum class Kind : std::uint8_t { Run2, Big };
  Kind kind = Kind::Big;
  int value = 3;

  static constexpr ByExcessToken run2(int s) noexcept { return {Kind::Run2, s}; }
  static constexpr ByExcessToken big(int a) noexcept { return {Kind::Big, a}; }
  bool is_run2() const noexcept { return kind == Kind::Run2; }
  bool is_big() const noexcept { return kind == Kind::Big; }
  friend bool operator==(const ByExcessToken&, const ByExcessToken&) = default;
};

using TokenList = std::vector<ByExcessToken>;

/// <tokens; y>. Without a remainder the tokens are a prefix followed by an
/// all-2 tail (tail value 1). An infinite remainder means tail value 0.
struct ByExcessSeq {
  TokenList tokens;
  std::optional<double> remainder;
  friend bool operator==(const ByExcessSeq&, const ByExcessSeq&) = default;
};

/// Raw digits (each >= 2) to canonical tokens.
TokenList compress_digits(std::span<const int> digits);
std::vector<int> expand_tokens(std::span<const ByExcessToken> tokens);
/// Merges adjacent runs; rejects digits < 2 and empty runs.
TokenList normalize(TokenList tokens);

/// First `depth` digits of x in (0, 1) under M_0; remainder = 1 / M_0^depth(x).
ByExcessSeq expand_by_excess(double x, int depth);
/// Same for x = p/q computed in exact integer arithmetic.
ByExcessSeq expand_by_excess_rational(std::int64_t p, std::int64_t q, int depth);

double eval_by_excess(const ByExcessSeq& seq);
double eval_tokens(std::span<const ByExcessToken> tokens, double tail);

enum class ReflectForm {
  /// Apply the rules until the remainder is 1 / (1 - 1/(y - 1)).
  Terminal,
  /// Stop as soon as every input token has been consumed; the remainder then
  /// still carries the last decremented token.
  Compact,
};

struct Reflection {
  ByExcessSeq seq;
  std::vector<int> rules;  // 1, 2 or 3 per step, in order of application
};

/// Expansion of 1 - eval(seq) by repeated application of the three
/// reflection rules, treating the remainder y > 2 as a final real digit.
Reflection reflect_traced(const ByExcessSeq& seq, ReflectForm form = ReflectForm::Terminal);
ByExcessSeq reflect(const ByExcessSeq& seq);

/// Text form `<2^3,5,2^1;y=2.75>`.
std::string format_by_excess(const ByExcessSeq& seq);
/// Parses the text form; a plain `2` is a run of length one. Throws
/// Error(ParseError) with the character offset.
ByExcessSeq parse_by_excess(std::string_view text);

/// One of the alphabets H^+, H^- or H^i (2 <= i <= r - 1).
struct AdmissibilityClass {
  enum class Tag : std::uint8_t { Plus, Minus, Inner };
  Tag tag = Tag::Minus;
  int r = 3;
  int i = 0;

  static AdmissibilityClass plus(int r) { return {Tag::Plus, r, 0}; }
  static AdmissibilityClass minus(int r) { return {Tag::Minus, r, 0}; }
  static AdmissibilityClass inner(int r, int i) { return {Tag::Inner, r, i}; }
};

bool is_admissible(std::span<const ByExcessToken> tokens, const AdmissibilityClass& cls);

/// Tokens allowed at `position` given the previous token.
TokenList allowed_tokens(const AdmissibilityClass& cls, std::size_t position,
                         const ByExcessToken* previous);

struct AdmissibleImages {
  /// V_h(base) for every admissible h of length <= depth ending in a Big token.
  std::vector<Interval> images;
  /// V_h(descendant_range) for every subtree that was cut off, by width or
  /// by depth; unexplored images can only lie there.
  std::vector<Interval> unexplored;
  std::size_t nodes = 0;
  std::size_t pruned = 0;
};

/// Walks the tree of admissible sequences. A node whose reachable range
/// V_h(descendant_range) is narrower than min_width is not expanded.
AdmissibleImages admissible_images(const AdmissibilityClass& cls, int depth, Interval base,
                                   Interval descendant_range, double min_width);

/// {x : T^i(x) in I_{d_i}, i < n}, or nullopt when narrower than 1e-14.
std::optional<Interval> cylinder_interval(const AlphaContext& ctx, std::span<const Digit> digits);

/// Image of a nonempty cylinder under T^n, following the branch formulas.
std::optional<Interval> cylinder_image(const AlphaContext& ctx, std::span<const Digit> digits);

bool is_full_cylinder(const AlphaContext& ctx, std::span<const Digit> digits);

struct DistortionReport {
  double ratio_sup;
  double bound;
  bool ok;
};

/// Max ratio |(T^n)'(y) / (T^n)'(x)| over sampled pairs in the cylinder,
/// against exp(4 / (1 - (1 - alpha)^2)).
DistortionReport distortion_check(const AlphaContext& ctx, std::span<const Digit> digits,
                                  int samples = 128, std::uint64_t seed = 0xA1FA);

double distortion_bound(double alpha);

}  // namespace alphacf
