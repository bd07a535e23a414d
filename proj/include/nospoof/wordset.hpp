// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The nospoof Authors
/** @file
    Fixed-width unsigned-word interval sets with exact set algebra.

    An IntervalSet is the symbolic representation used for every set of
    addresses in the certifier: a sorted sequence of inclusive, pairwise
    disjoint, non-adjacent intervals over the [0, 2^width) universe.
    The canonical form is unique, so structural equality is set equality.
*/

#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nospoof {

constexpr int kMinWidth = 1;
constexpr int kMaxWidth = 32;

/// Largest value representable at `width` bits.
constexpr std::uint64_t universe_max(int width) {
  return (std::uint64_t{1} << width) - 1;
}

/// An unsigned value tagged with its bit width. Values are checked on
/// construction: value < 2^width and 1 <= width <= 32.
struct Word {
  std::uint64_t value = 0;
  int width = kMaxWidth;

  Word() = default;
  Word(std::uint64_t value, int width);

  bool operator==(const Word&) const = default;
};

/// Inclusive interval [lo, hi]. Width is carried by the owning set.
struct Interval {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  bool operator==(const Interval&) const = default;
};

/// CIDR block base/prefix_len at a given width. Host bits of base must be
/// zero.
struct Cidr {
  std::uint64_t base = 0;
  int prefix_len = 0;
  int width = kMaxWidth;

  Cidr() = default;
  Cidr(std::uint64_t base, int prefix_len, int width);

  std::uint64_t first() const { return base; }
  std::uint64_t last() const {
    return base + (universe_max(width) >> prefix_len);
  }

  /// Parses "a.b.c.d/n" (width 32 only), "<int>/n", or a bare address
  /// (implied full prefix). Returns nullopt on any malformed input.
  static std::optional<Cidr> parse(std::string_view text, int width);

  /// Renders dotted quad at width 32, "<int>/n" otherwise.
  std::string to_string() const;

  bool operator==(const Cidr&) const = default;
};

/// Canonical set of inclusive intervals over the width-universe.
///
/// Invariants: intervals sorted strictly ascending by lo, pairwise disjoint
/// and non-adjacent (hi + 1 < next lo). Every operation returns canonical
/// results; values are immutable after construction and safe to share
/// across threads.
class IntervalSet {
public:
  /// Empty set over the 32-bit universe.
  IntervalSet() : width_(kMaxWidth) {}
  /// Empty set over the width-universe.
  explicit IntervalSet(int width);

  static IntervalSet empty_set(int width) { return IntervalSet(width); }
  static IntervalSet universe(int width);
  static IntervalSet single(Word w);
  static IntervalSet from_cidr(const Cidr& c);
  /// Builds the canonical set of arbitrary (possibly overlapping,
  /// unsorted) intervals. Bounds must fit the width.
  static IntervalSet from_intervals(int width, std::vector<Interval> ivs);
  static IntervalSet from_intervals(int width,
                                    std::initializer_list<Interval> ivs);

  int width() const { return width_; }
  const std::vector<Interval>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  bool is_universe() const;
  /// Number of elements (fits in uint64 for width <= 32).
  std::uint64_t size() const;

  bool contains(std::uint64_t value) const;

  IntervalSet complement() const;

  IntervalSet operator|(const IntervalSet& other) const;
  IntervalSet operator&(const IntervalSet& other) const;
  IntervalSet operator-(const IntervalSet& other) const;
  IntervalSet operator~() const { return complement(); }

  bool operator==(const IntervalSet&) const = default;

  /// Minimal sorted CIDR decomposition (greedy largest aligned block).
  std::vector<Cidr> to_cidr_list() const;

  /// Comma-joined CIDR rendering.
  std::string to_string() const;

private:
  void check_same_width(const IntervalSet& other) const;

  int width_;
  std::vector<Interval> intervals_;
};

inline bool is_empty(const IntervalSet& a) { return a.empty(); }

/// True when the word is an element of the set. Widths must agree.
bool member(Word x, const IntervalSet& a);

/// True when every element of a is in b. Widths must agree.
bool is_subset(const IntervalSet& a, const IntervalSet& b);

}  // namespace nospoof
