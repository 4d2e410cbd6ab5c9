#include "alphacf/symbolic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>

#include "alphacf/error.hpp"
#include "alphacf/rng.hpp"

namespace alphacf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEmptyWidth = 1e-14;

void push_token(TokenList& out, ByExcessToken t) {
  if (t.is_run2() && !out.empty() && out.back().is_run2()) {
    out.back().value += t.value;
  } else {
    out.push_back(t);
  }
}

// 2x2 matrix acting as a Moebius map y -> (a y + b) / (c y + d).
struct Moebius {
  double a = 1, b = 0, c = 0, d = 1;

  Moebius operator*(const Moebius& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  double operator()(double y) const {
    if (std::isinf(y)) return a / c;
    return (a * y + b) / (c * y + d);
  }
};

Moebius v_branch(int digit) { return {0.0, 1.0, -1.0, static_cast<double>(digit)}; }

Moebius token_map(const ByExcessToken& t) {
  if (t.is_big()) return v_branch(t.value);
  Moebius m;
  const Moebius v2 = v_branch(2);
  for (int k = 0; k < t.value; ++k) m = m * v2;
  return m;
}

}  // namespace

TokenList compress_digits(std::span<const int> digits) {
  TokenList out;
  for (int a : digits) {
    if (a < 2) throw Error(ErrorCode::ParseError, fmt::format("by-excess digit {} < 2", a));
    push_token(out, a == 2 ? ByExcessToken::run2(1) : ByExcessToken::big(a));
  }
  return out;
}

std::vector<int> expand_tokens(std::span<const ByExcessToken> tokens) {
  std::vector<int> out;
  for (const auto& t : tokens) {
    if (t.is_big()) {
      out.push_back(t.value);
    } else {
      out.insert(out.end(), static_cast<std::size_t>(t.value), 2);
    }
  }
  return out;
}

TokenList normalize(TokenList tokens) {
  TokenList out;
  out.reserve(tokens.size());
  for (auto t : tokens) {
    if (t.is_run2() && t.value < 1) {
      throw Error(ErrorCode::ParseError, fmt::format("run of 2s with length {}", t.value));
    }
    if (t.is_big() && t.value < 2) {
      throw Error(ErrorCode::ParseError, fmt::format("by-excess digit {} < 2", t.value));
    }
    if (t.is_big() && t.value == 2) t = ByExcessToken::run2(1);
    push_token(out, t);
  }
  return out;
}

ByExcessSeq expand_by_excess(double x, int depth) {
  if (!(x > 0.0 && x < 1.0)) {
    throw Error(ErrorCode::OutOfDomain, fmt::format("expand_by_excess: x = {} not in (0, 1)", x));
  }
  if (depth < 1) throw Error(ErrorCode::OutOfDomain, "expand_by_excess: depth must be positive");
  TokenList tokens;
  for (int k = 0; k < depth; ++k) {
    const Step s = m_zero(x);
    push_token(tokens, s.digit.j == 2 ? ByExcessToken::run2(1) : ByExcessToken::big(s.digit.j));
    x = s.value;
  }
  return {std::move(tokens), 1.0 / x};
}

ByExcessSeq expand_by_excess_rational(std::int64_t p, std::int64_t q, int depth) {
  if (!(p > 0 && q > p)) {
    throw Error(ErrorCode::OutOfDomain, fmt::format("expand_by_excess_rational: {}/{}", p, q));
  }
  TokenList tokens;
  for (int k = 0; k < depth; ++k) {
    const std::int64_t a = q / p + 1;
    push_token(tokens, a == 2 ? ByExcessToken::run2(1) : ByExcessToken::big(static_cast<int>(a)));
    const std::int64_t next_p = a * p - q;
    q = p;
    p = next_p;
  }
  return {std::move(tokens), static_cast<double>(q) / static_cast<double>(p)};
}

double eval_tokens(std::span<const ByExcessToken> tokens, double tail) {
  double x = tail;
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    const int reps = it->is_run2() ? it->value : 1;
    const double a = it->is_run2() ? 2.0 : it->value;
    for (int k = 0; k < reps; ++k) {
      if (!(a - x > 0.0)) {
        throw Error(ErrorCode::DivergentRemainder,
                    fmt::format("digit {} minus tail {} is not positive", a, x));
      }
      x = 1.0 / (a - x);
    }
  }
  return x;
}

double eval_by_excess(const ByExcessSeq& seq) {
  double tail = 1.0;
  if (seq.remainder) {
    const double y = *seq.remainder;
    if (!(y >= 1.0)) {
      throw Error(ErrorCode::DivergentRemainder, fmt::format("remainder {} < 1", y));
    }
    tail = std::isinf(y) ? 0.0 : 1.0 / y;
  }
  return eval_tokens(seq.tokens, tail);
}

namespace {

// Working item of the reflection: an integer token or the real remainder
// playing the role of a last digit.
struct Item {
  ByExcessToken token;
  bool real = false;
  double y = 0.0;
};

bool acts_as_big(const Item& it) { return it.real || it.token.is_big(); }

// Replaces the head h by h - 1; a resulting 2 joins a following run.
void decrement_head(std::deque<Item>& w) {
  Item& head = w.front();
  if (head.real) {
    head.y -= 1.0;
    return;
  }
  if (head.token.value - 1 >= 3) {
    head.token.value -= 1;
    return;
  }
  head.token = ByExcessToken::run2(1);
  if (w.size() > 1 && !w[1].real && w[1].token.is_run2()) {
    w[1].token.value += 1;
    w.pop_front();
  }
}

double eval_items(const std::deque<Item>& w) {
  TokenList tokens;
  double tail = 1.0;
  for (const auto& it : w) {
    if (it.real) {
      tail = std::isinf(it.y) ? 0.0 : 1.0 / it.y;
    } else {
      tokens.push_back(it.token);
    }
  }
  return eval_tokens(tokens, tail);
}

}  // namespace

Reflection reflect_traced(const ByExcessSeq& seq, ReflectForm form) {
  if (!seq.remainder) {
    throw Error(ErrorCode::PatternExhausted,
                "reflection needs the remainder; the tokens end before a rule completes");
  }
  const double y = *seq.remainder;
  if (!(y >= 2.0)) {
    throw Error(ErrorCode::DivergentRemainder, fmt::format("reflection needs remainder y >= 2, got {}", y));
  }
  std::deque<Item> w;
  for (const auto& t : normalize(seq.tokens)) w.push_back({t, false, 0.0});
  w.push_back({{}, true, y});

  Reflection out;
  TokenList& emitted = out.seq.tokens;
  for (;;) {
    if (w.size() == 1) {
      // Terminal shape 1 / (1 - 1/(y - 1)); y = 2 gives an infinite remainder.
      const double z = 1.0 / w.front().y;
      out.seq.remainder = z >= 1.0 ? kInf : 1.0 / (1.0 - z);
      break;
    }
    if (form == ReflectForm::Compact && !out.rules.empty() && w.size() <= 2) {
      out.seq.remainder = 1.0 / (1.0 - eval_items(w));
      break;
    }
    const Item first = w[0];
    if (first.token.is_run2()) {
      // Rule 3: <2^n, h2, ...> with h2 >= 3
      emitted.push_back(ByExcessToken::big(first.token.value + 2));
      w.pop_front();
      out.rules.push_back(3);
    } else if (acts_as_big(w[1])) {
      // Rule 1: <h1, h2, ...> with h1, h2 >= 3
      push_token(emitted, ByExcessToken::run2(first.token.value - 2));
      emitted.push_back(ByExcessToken::big(3));
      w.pop_front();
      out.rules.push_back(1);
    } else {
      // Rule 2: <h1, 2^n, h3, ...>; a run is always followed by a digit >= 3
      const int n = w[1].token.value;
      push_token(emitted, ByExcessToken::run2(first.token.value - 2));
      emitted.push_back(ByExcessToken::big(n + 3));
      w.pop_front();
      w.pop_front();
      out.rules.push_back(2);
    }
    decrement_head(w);
  }
  return out;
}

ByExcessSeq reflect(const ByExcessSeq& seq) { return reflect_traced(seq).seq; }

std::string format_by_excess(const ByExcessSeq& seq) {
  std::string s = "<";
  for (std::size_t k = 0; k < seq.tokens.size(); ++k) {
    if (k) s += ',';
    const auto& t = seq.tokens[k];
    s += t.is_run2() ? fmt::format("2^{}", t.value) : fmt::format("{}", t.value);
  }
  if (seq.remainder) s += fmt::format(";y={}", *seq.remainder);
  s += '>';
  return s;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ByExcessSeq run() {
    ByExcessSeq seq;
    skip_space();
    expect('<');
    skip_space();
    TokenList raw;
    if (peek() != ';' && peek() != '>') {
      for (;;) {
        raw.push_back(token());
        skip_space();
        if (peek() != ',') break;
        ++pos_;
        skip_space();
      }
    }
    if (peek() == ';') {
      ++pos_;
      skip_space();
      expect('y');
      skip_space();
      expect('=');
      skip_space();
      seq.remainder = real();
      skip_space();
    }
    expect('>');
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
    try {
      seq.tokens = normalize(std::move(raw));
    } catch (const Error& e) {
      fail(e.what());
    }
    return seq;
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(std::string_view why) const {
    throw Error(ErrorCode::ParseError, fmt::format("at offset {}: {}", pos_, why));
  }

  void expect(char c) {
    if (peek() != c) fail(fmt::format("expected '{}'", c));
    ++pos_;
  }

  int integer() {
    int v = 0;
    const char* begin = text_.data() + pos_;
    const auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), v);
    if (ec != std::errc() || ptr == begin) fail("expected an integer");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return v;
  }

  ByExcessToken token() {
    const int a = integer();
    if (peek() == '^') {
      if (a != 2) fail("only the digit 2 takes a run length");
      ++pos_;
      const int s = integer();
      if (s < 1) fail("run length must be positive");
      return ByExcessToken::run2(s);
    }
    if (a < 2) fail("digits must be >= 2");
    return a == 2 ? ByExcessToken::run2(1) : ByExcessToken::big(a);
  }

  double real() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '>' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    const std::string_view word = text_.substr(start, pos_ - start);
    if (word == "inf") return kInf;
    const auto slash = word.find('/');
    try {
      std::size_t used = 0;
      if (slash != std::string_view::npos) {
        const std::string num(word.substr(0, slash));
        const std::string den(word.substr(slash + 1));
        std::size_t u2 = 0;
        const double n = std::stod(num, &used);
        const double d = std::stod(den, &u2);
        if (used != num.size() || u2 != den.size()) throw std::invalid_argument("");
        return n / d;
      }
      const std::string s(word);
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      pos_ = start;
      fail("expected a real remainder");
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

ByExcessSeq parse_by_excess(std::string_view text) { return Parser(text).run(); }

namespace {

struct Bounds {
  int max_run;
  int min_big;
  int max_big;
};

Bounds bounds_at(const AdmissibilityClass& cls, std::size_t position) {
  const int r = cls.r;
  if (position == 0) {
    switch (cls.tag) {
      case AdmissibilityClass::Tag::Plus:
        return {r - 1, 3, r};
      case AdmissibilityClass::Tag::Minus:
        return {r - 2, 3, r + 1};
      case AdmissibilityClass::Tag::Inner:
        return {r - 1 - cls.i, 3, r + 1};
    }
  }
  return {r - 2, 3, r + 1};
}

}  // namespace

bool is_admissible(std::span<const ByExcessToken> tokens, const AdmissibilityClass& cls) {
  if (cls.tag == AdmissibilityClass::Tag::Inner && (cls.i < 2 || cls.i > cls.r - 1)) return false;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const auto& t = tokens[k];
    const Bounds b = bounds_at(cls, k);
    if (t.is_run2()) {
      if (t.value < 1 || t.value > b.max_run) return false;
      if (k > 0 && tokens[k - 1].is_run2()) return false;
    } else if (t.value < b.min_big || t.value > b.max_big) {
      return false;
    }
  }
  return true;
}

TokenList allowed_tokens(const AdmissibilityClass& cls, std::size_t position,
                         const ByExcessToken* previous) {
  const Bounds b = bounds_at(cls, position);
  TokenList out;
  if (previous == nullptr || !previous->is_run2()) {
    for (int s = 1; s <= b.max_run; ++s) out.push_back(ByExcessToken::run2(s));
  }
  for (int a = b.min_big; a <= b.max_big; ++a) out.push_back(ByExcessToken::big(a));
  return out;
}

AdmissibleImages admissible_images(const AdmissibilityClass& cls, int depth, Interval base,
                                   Interval descendant_range, double min_width) {
  AdmissibleImages res;
  if (depth < 1) return res;

  // Allowed tokens only depend on (position == 0, previous is a run).
  const TokenList first = allowed_tokens(cls, 0, nullptr);
  const ByExcessToken some_big = ByExcessToken::big(3);
  const ByExcessToken some_run = ByExcessToken::run2(1);
  const TokenList after_big = allowed_tokens(cls, 1, &some_big);
  const TokenList after_run = allowed_tokens(cls, 1, &some_run);
  std::vector<Moebius> first_maps, big_maps, run_maps;
  for (const auto& t : first) first_maps.push_back(token_map(t));
  for (const auto& t : after_big) big_maps.push_back(token_map(t));
  for (const auto& t : after_run) run_maps.push_back(token_map(t));

  auto visit = [&](auto&& self, const Moebius& m, const ByExcessToken& last, int level) -> void {
    ++res.nodes;
    if (last.is_big()) res.images.push_back({m(base.lo), m(base.hi)});
    const double reach_lo = m(descendant_range.lo);
    const double reach_hi = m(descendant_range.hi);
    if (level == depth || reach_hi - reach_lo < min_width) {
      if (level < depth) ++res.pruned;
      res.unexplored.push_back({reach_lo, reach_hi});
      return;
    }
    const TokenList& next = last.is_run2() ? after_run : after_big;
    const auto& maps = last.is_run2() ? run_maps : big_maps;
    for (std::size_t k = 0; k < next.size(); ++k) self(self, m * maps[k], next[k], level + 1);
  };
  for (std::size_t k = 0; k < first.size(); ++k) visit(visit, first_maps[k], first[k], 1);
  return res;
}

namespace {

// Forward branch with a fixed digit: s/x - j.
double forward_branch(Digit d, double x) { return sign_value(d.sign) / x - d.j; }

}  // namespace

std::optional<Interval> cylinder_interval(const AlphaContext& ctx, std::span<const Digit> digits) {
  if (digits.empty()) return ctx.interval();
  std::optional<Interval> cur;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    const auto cyl = rank_one_cylinder(ctx, *it);
    if (!cyl) return std::nullopt;
    if (!cur) {
      cur = cyl;
      continue;
    }
    const double s = sign_value(it->sign);
    double p = s / (it->j + cur->lo);
    double q = s / (it->j + cur->hi);
    if (p > q) std::swap(p, q);
    const Interval next{std::max(p, cyl->lo), std::min(q, cyl->hi)};
    if (next.width() < kEmptyWidth) return std::nullopt;
    cur = next;
  }
  return cur;
}

std::optional<Interval> cylinder_image(const AlphaContext& ctx, std::span<const Digit> digits) {
  const auto cyl = cylinder_interval(ctx, digits);
  if (!cyl) return std::nullopt;
  double p = cyl->lo;
  double q = cyl->hi;
  for (const Digit& d : digits) {
    p = forward_branch(d, p);
    q = forward_branch(d, q);
  }
  if (p > q) std::swap(p, q);
  return Interval{p, q};
}

bool is_full_cylinder(const AlphaContext& ctx, std::span<const Digit> digits) {
  const auto img = cylinder_image(ctx, digits);
  if (!img) return false;
  return std::abs(img->lo - ctx.lo()) <= 1e-10 && std::abs(img->hi - ctx.hi()) <= 1e-10;
}

double distortion_bound(double alpha) {
  const double q = 1.0 - alpha;
  return std::exp(4.0 / (1.0 - q * q));
}

DistortionReport distortion_check(const AlphaContext& ctx, std::span<const Digit> digits,
                                  int samples, std::uint64_t seed) {
  const auto cyl = cylinder_interval(ctx, digits);
  if (!cyl) throw Error(ErrorCode::EmptyCylinder, "distortion_check on an empty cylinder");
  samples = std::max(samples, 100);
  // log |(T^n)'(x)| = -2 sum log |x_k|
  auto log_derivative = [&](double x) {
    double acc = 0.0;
    for (const Digit& d : digits) {
      acc -= 2.0 * std::log(std::abs(x));
      x = forward_branch(d, x);
    }
    return acc;
  };
  Stream rng(seed, 0);
  double lo = kInf;
  double hi = -kInf;
  for (int k = 0; k < samples; ++k) {
    const double v = log_derivative(rng.uniform(cyl->lo, cyl->hi));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double ratio = std::exp(hi - lo);
  const double bound = distortion_bound(ctx.alpha());
  return {ratio, bound, ratio <= bound};
}

}  // namespace alphacf
