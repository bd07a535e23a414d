// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The nospoof Authors

#include "nospoof/wordset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <sstream>
#include <stdexcept>

namespace nospoof {

namespace {

void check_width(int width) {
  if (width < kMinWidth || width > kMaxWidth) {
    throw std::invalid_argument("width out of range: " +
                                std::to_string(width));
  }
}

}  // namespace

Word::Word(std::uint64_t value, int width) : value(value), width(width) {
  check_width(width);
  if (value > universe_max(width)) {
    throw std::invalid_argument("word value does not fit width");
  }
}

Cidr::Cidr(std::uint64_t base, int prefix_len, int width)
    : base(base), prefix_len(prefix_len), width(width) {
  check_width(width);
  if (prefix_len < 0 || prefix_len > width) {
    throw std::invalid_argument("prefix length out of range");
  }
  if (base > universe_max(width)) {
    throw std::invalid_argument("cidr base does not fit width");
  }
  if ((base & (universe_max(width) >> prefix_len)) != 0) {
    throw std::invalid_argument("cidr base has host bits set");
  }
}

namespace {

bool parse_u64(std::string_view text, std::uint64_t& out) {
  if (text.empty()) return false;
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

// Dotted quad without prefix. Strict: four decimal octets, each <= 255.
bool parse_dotted(std::string_view text, std::uint64_t& out) {
  std::uint64_t addr = 0;
  int octets = 0;
  while (octets < 4) {
    auto dot = text.find('.');
    std::string_view part =
        (octets == 3) ? text : text.substr(0, dot);
    if (octets < 3 && dot == std::string_view::npos) return false;
    if (octets == 3 && text.find('.') != std::string_view::npos) return false;
    std::uint64_t octet = 0;
    if (!parse_u64(part, octet) || octet > 255) return false;
    addr = (addr << 8) | octet;
    ++octets;
    if (octets < 4) text.remove_prefix(dot + 1);
  }
  out = addr;
  return true;
}

}  // namespace

std::optional<Cidr> Cidr::parse(std::string_view text, int width) {
  check_width(width);
  std::string_view addr_part = text;
  int prefix_len = width;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    addr_part = text.substr(0, slash);
    std::uint64_t n = 0;
    if (!parse_u64(text.substr(slash + 1), n) ||
        n > static_cast<std::uint64_t>(width)) {
      return std::nullopt;
    }
    prefix_len = static_cast<int>(n);
  }
  std::uint64_t base = 0;
  if (addr_part.find('.') != std::string_view::npos) {
    if (width != 32 || !parse_dotted(addr_part, base)) return std::nullopt;
  } else if (!parse_u64(addr_part, base) || base > universe_max(width)) {
    return std::nullopt;
  }
  if ((base & (universe_max(width) >> prefix_len)) != 0) return std::nullopt;
  return Cidr(base, prefix_len, width);
}

std::string Cidr::to_string() const {
  std::ostringstream out;
  if (width == 32) {
    out << ((base >> 24) & 0xff) << '.' << ((base >> 16) & 0xff) << '.'
        << ((base >> 8) & 0xff) << '.' << (base & 0xff);
  } else {
    out << base;
  }
  out << '/' << prefix_len;
  return out.str();
}

IntervalSet::IntervalSet(int width) : width_(width) { check_width(width); }

IntervalSet IntervalSet::universe(int width) {
  IntervalSet s(width);
  s.intervals_.push_back({0, universe_max(width)});
  return s;
}

IntervalSet IntervalSet::single(Word w) {
  IntervalSet s(w.width);
  s.intervals_.push_back({w.value, w.value});
  return s;
}

IntervalSet IntervalSet::from_cidr(const Cidr& c) {
  IntervalSet s(c.width);
  s.intervals_.push_back({c.first(), c.last()});
  return s;
}

IntervalSet IntervalSet::from_intervals(int width, std::vector<Interval> ivs) {
  check_width(width);
  for (const Interval& iv : ivs) {
    if (iv.lo > iv.hi || iv.hi > universe_max(width)) {
      throw std::invalid_argument("interval out of range");
    }
  }
  std::sort(ivs.begin(), ivs.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  IntervalSet s(width);
  for (const Interval& iv : ivs) {
    if (!s.intervals_.empty() && iv.lo <= s.intervals_.back().hi + 1) {
      s.intervals_.back().hi = std::max(s.intervals_.back().hi, iv.hi);
    } else {
      s.intervals_.push_back(iv);
    }
  }
  return s;
}

IntervalSet IntervalSet::from_intervals(int width,
                                        std::initializer_list<Interval> ivs) {
  return from_intervals(width, std::vector<Interval>(ivs));
}

bool IntervalSet::is_universe() const {
  return intervals_.size() == 1 && intervals_[0].lo == 0 &&
         intervals_[0].hi == universe_max(width_);
}

std::uint64_t IntervalSet::size() const {
  std::uint64_t n = 0;
  for (const Interval& iv : intervals_) n += iv.hi - iv.lo + 1;
  return n;
}

bool IntervalSet::contains(std::uint64_t value) const {
  auto it = std::upper_bound(
      intervals_.begin(), intervals_.end(), value,
      [](std::uint64_t v, const Interval& iv) { return v < iv.lo; });
  return it != intervals_.begin() && value <= std::prev(it)->hi;
}

void IntervalSet::check_same_width(const IntervalSet& other) const {
  if (width_ != other.width_) {
    throw std::invalid_argument("interval set width mismatch");
  }
}

IntervalSet IntervalSet::complement() const {
  IntervalSet out(width_);
  std::uint64_t next = 0;
  for (const Interval& iv : intervals_) {
    if (iv.lo > next) out.intervals_.push_back({next, iv.lo - 1});
    next = iv.hi + 1;  // may step past the universe on the last interval
  }
  if (next <= universe_max(width_)) {
    out.intervals_.push_back({next, universe_max(width_)});
  }
  return out;
}

IntervalSet IntervalSet::operator|(const IntervalSet& other) const {
  check_same_width(other);
  std::vector<Interval> merged;
  merged.reserve(intervals_.size() + other.intervals_.size());
  std::merge(intervals_.begin(), intervals_.end(), other.intervals_.begin(),
             other.intervals_.end(), std::back_inserter(merged),
             [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  IntervalSet out(width_);
  for (const Interval& iv : merged) {
    if (!out.intervals_.empty() && iv.lo <= out.intervals_.back().hi + 1) {
      out.intervals_.back().hi = std::max(out.intervals_.back().hi, iv.hi);
    } else {
      out.intervals_.push_back(iv);
    }
  }
  return out;
}

IntervalSet IntervalSet::operator&(const IntervalSet& other) const {
  check_same_width(other);
  IntervalSet out(width_);
  std::size_t i = 0, j = 0;
  while (i < intervals_.size() && j < other.intervals_.size()) {
    const Interval& a = intervals_[i];
    const Interval& b = other.intervals_[j];
    std::uint64_t lo = std::max(a.lo, b.lo);
    std::uint64_t hi = std::min(a.hi, b.hi);
    if (lo <= hi) out.intervals_.push_back({lo, hi});
    if (a.hi < b.hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

IntervalSet IntervalSet::operator-(const IntervalSet& other) const {
  return *this & other.complement();
}

std::vector<Cidr> IntervalSet::to_cidr_list() const {
  std::vector<Cidr> out;
  for (const Interval& iv : intervals_) {
    std::uint64_t lo = iv.lo;
    // hi+1 as the exclusive end never overflows uint64 at width <= 32.
    const std::uint64_t end = iv.hi + 1;
    while (lo < end) {
      int align = lo == 0 ? width_ : std::min(std::countr_zero(lo), width_);
      int span = std::bit_width(end - lo) - 1;
      int block = std::min(align, span);
      out.push_back(Cidr(lo, width_ - block, width_));
      lo += std::uint64_t{1} << block;
    }
  }
  return out;
}

std::string IntervalSet::to_string() const {
  std::string out;
  for (const Cidr& c : to_cidr_list()) {
    if (!out.empty()) out += ",";
    out += c.to_string();
  }
  return out;
}

bool member(Word x, const IntervalSet& a) {
  if (x.width != a.width()) {
    throw std::invalid_argument("member: width mismatch");
  }
  return a.contains(x.value);
}

bool is_subset(const IntervalSet& a, const IntervalSet& b) {
  if (a.width() != b.width()) {
    throw std::invalid_argument("is_subset: width mismatch");
  }
  const auto& bs = b.intervals();
  std::size_t j = 0;
  for (const Interval& iv : a.intervals()) {
    while (j < bs.size() && bs[j].hi < iv.lo) ++j;
    if (j == bs.size() || bs[j].lo > iv.lo || iv.hi > bs[j].hi) return false;
  }
  return true;
}

}  // namespace nospoof
