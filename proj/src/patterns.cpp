#include "threadlab/patterns.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "threadlab/util.hpp"

namespace threadlab {

std::string ArrivalPattern::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(codes[i]);
  }
  return out;
}

bool ArrivalPattern::valid() const {
  std::int32_t seen_max = 0;
  for (std::int32_t c : codes) {
    if (c < 0) return false;
    if (c > seen_max + 1) return false;
    if (c == seen_max + 1) seen_max = c;
  }
  return true;
}

std::string PatternBin::to_string() const {
  std::string out;
  for (const auto& [code, count] : counts) {
    if (!out.empty()) out += ' ';
    out += '#' + std::to_string(code) + ':' + std::to_string(count);
  }
  return out;
}

ArrivalPattern encode_arrival_pattern(const Thread& thread) {
  ArrivalPattern pattern;
  pattern.codes.reserve(thread.comments.size());
  std::unordered_map<std::string, std::int32_t> code_of;
  std::int32_t next_code = 1;
  for (const Comment& c : thread.comments) {
    if (c.author_id == thread.poster_id) {
      pattern.codes.push_back(0);
      continue;
    }
    auto [it, inserted] = code_of.try_emplace(c.author_id, next_code);
    if (inserted) ++next_code;
    pattern.codes.push_back(it->second);
  }
  return pattern;
}

ArrivalPattern prefix(const ArrivalPattern& pattern, std::size_t k) {
  if (k > pattern.codes.size()) {
    throw std::out_of_range("prefix: k (" + std::to_string(k) +
                            ") exceeds pattern length (" +
                            std::to_string(pattern.codes.size()) + ")");
  }
  ArrivalPattern out;
  out.codes.assign(pattern.codes.begin(), pattern.codes.begin() + k);
  return out;
}

std::int64_t distinct_participants(const ArrivalPattern& pattern,
                                   bool include_poster) {
  // valid patterns number new commenters consecutively, so the max code is
  // the count of distinct non-poster commenters
  std::int32_t max_code = 0;
  for (std::int32_t c : pattern.codes) max_code = std::max(max_code, c);
  return include_poster ? max_code + 1 : max_code;
}

bool reentry_label(const ArrivalPattern& pattern, std::size_t prefix_len,
                   std::int32_t id_code) {
  std::size_t upto = std::min(prefix_len, pattern.codes.size());
  bool in_prefix = false;
  for (std::size_t i = 0; i < upto; ++i) {
    if (pattern.codes[i] == id_code) {
      in_prefix = true;
      break;
    }
  }
  if (!in_prefix) {
    throw std::invalid_argument("reentry_label: id_code " +
                                std::to_string(id_code) +
                                " absent from prefix");
  }
  for (std::size_t i = prefix_len; i < pattern.codes.size(); ++i) {
    if (pattern.codes[i] == id_code) return true;
  }
  return false;
}

PatternBin pattern_bin(const ArrivalPattern& pattern) {
  PatternBin bin;
  for (std::int32_t c : pattern.codes) ++bin.counts[c];
  return bin;
}

PatternStats pattern_reentry_stats(const Corpus& corpus,
                                   std::size_t prefix_len, bool binned) {
  if (prefix_len < 2) {
    throw std::invalid_argument("pattern_reentry_stats: prefix_len must be >= 2");
  }
  struct Acc {
    std::int64_t n_threads = 0;
    std::int64_t n_eligible = 0;
    std::int64_t n_reenter = 0;
  };
  std::map<std::string, Acc> acc;
  std::int64_t total = 0;
  for (const Thread& t : corpus.threads) {
    if (t.length() < prefix_len) continue;
    ArrivalPattern full = encode_arrival_pattern(t);
    ArrivalPattern pre = prefix(full, prefix_len);
    std::string key = binned ? pattern_bin(pre).to_string() : pre.to_string();
    Acc& a = acc[key];
    ++a.n_threads;
    ++total;
    bool has_one = std::find(pre.codes.begin(), pre.codes.end(), 1) !=
                   pre.codes.end();
    if (has_one) {
      ++a.n_eligible;
      if (reentry_label(full, prefix_len, 1)) ++a.n_reenter;
    }
  }
  if (total == 0) {
    throw std::runtime_error(
        "pattern_reentry_stats: no threads of length >= " +
        std::to_string(prefix_len));
  }
  PatternStats stats;
  stats.prefix_len = prefix_len;
  stats.binned = binned;
  for (const auto& [key, a] : acc) {
    PatternStatsRow row;
    row.key = key;
    row.n_threads = a.n_threads;
    row.n_eligible = a.n_eligible;
    row.reentry_rate = a.n_eligible > 0
                           ? static_cast<double>(a.n_reenter) / a.n_eligible
                           : 0.0;
    row.occurrence_share = static_cast<double>(a.n_threads) / total;
    stats.rows.push_back(std::move(row));
  }
  std::sort(stats.rows.begin(), stats.rows.end(),
            [](const PatternStatsRow& a, const PatternStatsRow& b) {
              if (a.reentry_rate != b.reentry_rate)
                return a.reentry_rate > b.reentry_rate;
              if (a.occurrence_share != b.occurrence_share)
                return a.occurrence_share > b.occurrence_share;
              return a.key < b.key;
            });
  return stats;
}

void PatternStats::to_csv(const std::string& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "key,reentry_rate,occurrence_share\n";
  for (const PatternStatsRow& row : rows) {
    f << '"' << row.key << "\"," << fmt_double(row.reentry_rate) << ','
      << fmt_double(row.occurrence_share) << '\n';
  }
  if (!f) throw std::runtime_error("write failed on " + path);
}

}  // namespace threadlab
