#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "threadlab/corpus.hpp"

namespace threadlab {

// Who-commented-in-what-order encoding of a comment thread. Code 0 is the
// original poster; code j >= 1 is the j-th distinct non-poster commenter in
// arrival order. Example: poster Mary, comments by Mary, Don, Pat, Don, Pat
// encode to 0,1,2,1,2.
struct ArrivalPattern {
  std::vector<std::int32_t> codes;

  std::size_t size() const { return codes.size(); }
  bool operator==(const ArrivalPattern&) const = default;

  // "1,0,1,0,1"-style key.
  std::string to_string() const;

  // True iff codes obey the numbering discipline: each code j >= 1 first
  // appears only after 1..j-1 have all appeared.
  bool valid() const;
};

// Order-erased pattern: ID code -> occurrence count.
struct PatternBin {
  std::map<std::int32_t, std::int64_t> counts;

  bool operator==(const PatternBin&) const = default;
  // "#0:2 #1:3"-style key, codes ascending.
  std::string to_string() const;
};

struct PatternStatsRow {
  std::string key;          // pattern or bin key
  double reentry_rate = 0;  // of ID code 1; 0 when no eligible threads
  double occurrence_share = 0;
  std::int64_t n_threads = 0;   // threads carrying this key
  std::int64_t n_eligible = 0;  // of those, prefix contains code 1
};

struct PatternStats {
  std::size_t prefix_len = 0;
  bool binned = false;
  std::vector<PatternStatsRow> rows;  // sorted by rate desc

  void to_csv(const std::string& path) const;
};

ArrivalPattern encode_arrival_pattern(const Thread& thread);

// First k codes. Throws std::out_of_range when k > pattern length.
ArrivalPattern prefix(const ArrivalPattern& pattern, std::size_t k);

// Number of distinct participants. With include_poster, code 0 counts as
// present even when it never occurs (the poster authored the post), so the
// result ranges over 1..k+1. Without it, distinct non-zero codes only.
std::int64_t distinct_participants(const ArrivalPattern& pattern,
                                   bool include_poster);

// True iff id_code occurs at any position > prefix_len. Throws
// std::invalid_argument when id_code does not occur within the prefix.
bool reentry_label(const ArrivalPattern& pattern, std::size_t prefix_len,
                   std::int32_t id_code);

PatternBin pattern_bin(const ArrivalPattern& pattern);

// Re-entry rate of ID code 1 and occurrence share per length-prefix_len
// pattern (or bin). Shares are over all threads of length >= prefix_len;
// rates over the subset whose prefix contains code 1. Rows sorted by rate
// descending, ties by share descending then key. Throws when no thread
// qualifies.
PatternStats pattern_reentry_stats(const Corpus& corpus,
                                   std::size_t prefix_len, bool binned);

}  // namespace threadlab
