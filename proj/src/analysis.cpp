#include "threadlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "threadlab/patterns.hpp"
#include "threadlab/util.hpp"

namespace threadlab {

namespace {

std::int64_t prefix_distinct(const Thread& th, std::int64_t k) {
  std::set<std::string_view> seen;
  seen.insert(th.poster_id);
  for (std::int64_t i = 0; i < k; ++i) {
    seen.insert(th.comments[static_cast<std::size_t>(i)].author_id);
  }
  return static_cast<std::int64_t>(seen.size());
}

// distinct-participant count for every prefix length 1..len
std::vector<std::int64_t> cumulative_distinct(const Thread& th) {
  std::vector<std::int64_t> out;
  out.reserve(th.comments.size());
  std::set<std::string_view> seen;
  seen.insert(th.poster_id);
  for (const auto& c : th.comments) {
    seen.insert(c.author_id);
    out.push_back(static_cast<std::int64_t>(seen.size()));
  }
  return out;
}

double t_critical_975(std::int64_t df) {
  static const double table[] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045};
  if (df < 1) return 0.0;
  if (df <= 29) return table[df - 1];
  return 1.96;
}

}  // namespace

double delta_u(const std::vector<const Thread*>& user_threads,
               std::int64_t k) {
  if (user_threads.empty()) {
    throw std::invalid_argument("delta_u: no threads given");
  }
  if (k < 0) throw std::invalid_argument("delta_u: negative prefix length");
  std::int64_t sum = 0;
  for (const Thread* th : user_threads) {
    if (static_cast<std::int64_t>(th->length()) < k) {
      throw std::invalid_argument("delta_u: thread '" + th->thread_id +
                                  "' is shorter than k=" + std::to_string(k));
    }
    sum += prefix_distinct(*th, k);
  }
  return static_cast<double>(sum) / static_cast<double>(user_threads.size());
}

Density density_Delta_k(const Corpus& corpus, std::int64_t k) {
  if (k < 1) throw std::invalid_argument("prefix length k must be >= 1");
  std::map<std::string_view, std::pair<std::int64_t, std::int64_t>> acc;
  for (const auto& th : corpus.threads) {
    if (static_cast<std::int64_t>(th.length()) < k) continue;
    auto& [sum, cnt] = acc[th.poster_id];
    sum += prefix_distinct(th, k);
    cnt += 1;
  }
  if (acc.empty()) {
    throw std::runtime_error("no poster has a thread of length >= " +
                             std::to_string(k));
  }
  std::map<std::int64_t, std::int64_t> hist;
  for (const auto& [poster, sc] : acc) {
    // Integer division is the exact floor of the mean.
    hist[sc.first / sc.second] += 1;
  }
  return Density::from_counts(hist);
}

HeatMap heatmap(const Corpus& corpus, std::int64_t k_max) {
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  struct PerThread {
    std::string_view poster;
    std::vector<std::int64_t> cum;
  };
  std::vector<PerThread> pre;
  pre.reserve(corpus.threads.size());
  for (const auto& th : corpus.threads) {
    pre.push_back({th.poster_id, cumulative_distinct(th)});
  }

  HeatMap hm;
  hm.k_max = k_max;
  hm.columns.resize(static_cast<std::size_t>(k_max));
  for (std::int64_t k = 1; k <= k_max; ++k) {
    std::map<std::string_view, std::pair<std::int64_t, std::int64_t>> acc;
    for (const auto& pt : pre) {
      if (static_cast<std::int64_t>(pt.cum.size()) < k) continue;
      auto& [sum, cnt] = acc[pt.poster];
      sum += pt.cum[static_cast<std::size_t>(k - 1)];
      cnt += 1;
    }
    if (acc.empty()) continue;
    std::map<std::int64_t, std::int64_t> hist;
    for (const auto& [poster, sc] : acc) hist[sc.first / sc.second] += 1;
    hm.columns[static_cast<std::size_t>(k - 1)] = Density::from_counts(hist);
  }
  return hm;
}

void HeatMap::to_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "k,d,mass\n";
  for (std::int64_t k = 1; k <= k_max; ++k) {
    const auto& col = columns[static_cast<std::size_t>(k - 1)];
    if (!col) continue;
    for (const auto& [d, mass] : col->items()) {
      out << k << ',' << d << ',' << fmt_double(mass) << "\n";
    }
  }
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

double quantile_mass(const Density& density, double p, double q,
                     std::int64_t k) {
  if (!(p >= 0.0) || !(q <= 1.0) || !(p <= q)) {
    throw std::invalid_argument("need 0 <= p <= q <= 1");
  }
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  const double lo = p * static_cast<double>(k);
  const double hi = q * static_cast<double>(k);
  double sum = 0.0;
  for (const auto& [d, mass] : density.items()) {
    const double dd = static_cast<double>(d);
    if (dd >= lo && dd <= hi) sum += mass;
  }
  return sum;
}

namespace {

struct Run {
  std::size_t start;
  double val;
};

std::vector<Run> value_runs(const std::vector<double>& v) {
  std::vector<Run> runs;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (runs.empty() || runs.back().val != v[i]) runs.push_back({i, v[i]});
  }
  return runs;
}

}  // namespace

std::vector<Mode> modes(const Density& density, double min_prominence) {
  if (!(min_prominence >= 0.0)) {
    throw std::invalid_argument("min_prominence must be >= 0");
  }
  const std::vector<double> v = density.dense();
  const std::int64_t offset = density.min_support();
  const std::vector<Run> runs = value_runs(v);

  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const double left = i > 0 ? runs[i - 1].val : 0.0;
    const double right = i + 1 < runs.size() ? runs[i + 1].val : 0.0;
    if (runs[i].val > left && runs[i].val > right) peaks.push_back(i);
  }

  std::vector<Mode> out;
  for (std::size_t j = 0; j < peaks.size(); ++j) {
    double left_valley = 0.0;   // beyond the support mass is zero
    double right_valley = 0.0;
    if (j > 0) {
      left_valley = runs[peaks[j]].val;
      for (std::size_t r = peaks[j - 1] + 1; r < peaks[j]; ++r) {
        left_valley = std::min(left_valley, runs[r].val);
      }
    }
    if (j + 1 < peaks.size()) {
      right_valley = runs[peaks[j]].val;
      for (std::size_t r = peaks[j] + 1; r < peaks[j + 1]; ++r) {
        right_valley = std::min(right_valley, runs[r].val);
      }
    }
    const double prom =
        runs[peaks[j]].val - std::max(left_valley, right_valley);
    if (prom >= min_prominence) {
      out.push_back({offset + static_cast<std::int64_t>(runs[peaks[j]].start),
                     runs[peaks[j]].val, prom});
    }
  }
  return out;
}

double mc_min_prominence(double p_hat, std::size_t sample_size) {
  if (sample_size == 0) throw std::invalid_argument("sample_size must be > 0");
  const double noise =
      3.0 * std::sqrt(p_hat * (1.0 - p_hat) /
                      static_cast<double>(sample_size));
  return std::max(0.005, noise);
}

std::vector<Mode> modes_mc(const Density& density, std::size_t sample_size) {
  std::vector<Mode> all = modes(density, 0.0);
  std::vector<Mode> out;
  for (const Mode& m : all) {
    if (m.prominence >= mc_min_prominence(m.mass, sample_size)) {
      out.push_back(m);
    }
  }
  return out;
}

bool is_unimodal(const Density& density, double eps) {
  const std::vector<double> v = density.dense();
  std::size_t peak = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[peak]) peak = i;
  }
  for (std::size_t i = 0; i < peak; ++i) {
    if (v[i] > v[i + 1] + eps) return false;
  }
  for (std::size_t i = peak; i + 1 < v.size(); ++i) {
    if (v[i + 1] > v[i] + eps) return false;
  }
  return true;
}

Density smooth_ma3(const Density& density) {
  std::map<std::int64_t, double> out;
  for (std::int64_t d = density.min_support() - 1;
       d <= density.max_support() + 1; ++d) {
    const double m =
        (density.mass(d - 1) + density.mass(d) + density.mass(d + 1)) / 3.0;
    if (m > 0.0) out[d] = m;
  }
  return Density(out);
}

double bimodality_gap(const Density& density, std::int64_t k) {
  return quantile_mass(density, 0.0, 0.25, k) +
         quantile_mass(density, 0.75, 1.0, k) -
         quantile_mass(density, 0.25, 0.5, k) -
         quantile_mass(density, 0.5, 0.75, k);
}

namespace {

struct GroupedValue {
  std::int64_t sort_key;
  std::string label;
  std::string_view user;
  double value;
};

std::pair<std::int64_t, std::string> bucket_of(
    const std::vector<double>& edges, double v) {
  if (edges.empty()) {
    throw std::invalid_argument("bucket edges required for this grouping");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw std::invalid_argument("bucket edges must be strictly increasing");
    }
  }
  if (v < edges.front()) return {0, "<" + fmt_double(edges.front())};
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (v < edges[i + 1]) {
      return {static_cast<std::int64_t>(i) + 1,
              "[" + fmt_double(edges[i]) + "," + fmt_double(edges[i + 1]) +
                  ")"};
    }
  }
  return {static_cast<std::int64_t>(edges.size()),
          ">=" + fmt_double(edges.back())};
}

}  // namespace

ConditionalMeanTable conditional_mean_length(const Corpus& corpus,
                                             const GroupingSpec& grouping,
                                             std::int64_t min_threads_per_user) {
  if (corpus.threads.empty()) throw std::invalid_argument("empty corpus");
  if (min_threads_per_user < 1) {
    throw std::invalid_argument("min_threads_per_user must be >= 1");
  }
  if (grouping.kind == GroupingSpec::Kind::PostDistinctiveness &&
      grouping.lm == nullptr) {
    throw std::invalid_argument(
        "post-distinctiveness grouping needs a language model");
  }

  std::optional<FirstCommenterIndex> fc_index;
  if (grouping.kind == GroupingSpec::Kind::FirstCommenterDistinctiveness) {
    fc_index.emplace(corpus);
  }

  std::vector<GroupedValue> entries;
  for (const auto& th : corpus.threads) {
    // Group key.
    std::int64_t sort_key = 0;
    std::string label;
    switch (grouping.kind) {
      case GroupingSpec::Kind::LinksFirstK: {
        if (grouping.k < 1) {
          throw std::invalid_argument("grouping k must be >= 1");
        }
        std::vector<std::string_view> firsts;
        if (grouping.entity == GroupingSpec::Entity::Comments) {
          for (const auto& c : th.comments) {
            if (c.author_id == th.poster_id) continue;
            if (std::find(firsts.begin(), firsts.end(), c.author_id) ==
                firsts.end()) {
              firsts.push_back(c.author_id);
            }
            if (static_cast<std::int64_t>(firsts.size()) == grouping.k) break;
          }
        } else {
          auto likes = th.post_likes;
          std::sort(likes.begin(), likes.end(),
                    [](const Like& a, const Like& b) {
                      return std::tie(a.time, a.user_id) <
                             std::tie(b.time, b.user_id);
                    });
          for (const auto& like : likes) {
            if (like.user_id == th.poster_id) continue;
            if (std::find(firsts.begin(), firsts.end(),
                          std::string_view(like.user_id)) == firsts.end()) {
              firsts.push_back(like.user_id);
            }
            if (static_cast<std::int64_t>(firsts.size()) == grouping.k) break;
          }
        }
        if (static_cast<std::int64_t>(firsts.size()) < grouping.k) continue;
        std::int64_t edges = 0;
        for (std::size_t a = 0; a < firsts.size(); ++a) {
          for (std::size_t b = a + 1; b < firsts.size(); ++b) {
            if (corpus.graph.has_edge(std::string(firsts[a]),
                                      std::string(firsts[b]))) {
              edges += 1;
            }
          }
        }
        sort_key = edges;
        label = std::to_string(edges) + " edges";
        break;
      }
      case GroupingSpec::Kind::PatternPrefix: {
        if (grouping.k < 1) {
          throw std::invalid_argument("grouping k must be >= 1");
        }
        if (static_cast<std::int64_t>(th.length()) < grouping.k) continue;
        const ArrivalPattern pat =
            prefix(encode_arrival_pattern(th), grouping.k);
        sort_key = 0;
        label = pat.to_string();
        break;
      }
      case GroupingSpec::Kind::FirstCommentLag: {
        if (th.comments.empty()) continue;
        const double lag =
            static_cast<double>(th.comments.front().time - th.post_time);
        std::tie(sort_key, label) = bucket_of(grouping.bucket_edges, lag);
        break;
      }
      case GroupingSpec::Kind::PostDistinctiveness: {
        const auto tokens = tokenize(th.post_text);
        if (static_cast<std::int64_t>(tokens.size()) < grouping.min_words) {
          continue;
        }
        const double v = post_distinctiveness(th.post_text, *grouping.lm);
        std::tie(sort_key, label) = bucket_of(grouping.bucket_edges, v);
        break;
      }
      case GroupingSpec::Kind::FirstCommenterDistinctiveness: {
        if (th.comments.empty()) continue;
        if (fc_index->commented_thread_count(th.poster_id) <
            grouping.min_posts) {
          continue;
        }
        const double v = fc_index->distinctiveness(
            th.poster_id, th.comments.front().author_id, grouping.min_posts);
        std::tie(sort_key, label) = bucket_of(grouping.bucket_edges, v);
        break;
      }
    }

    // Measured value.
    double value = 0.0;
    if (grouping.measure == GroupingSpec::Measure::ThreadLength) {
      value = static_cast<double>(th.length());
    } else {
      if (th.comments.empty()) continue;
      const std::string& first = th.comments.front().author_id;
      bool again = false;
      for (std::size_t i = 1; i < th.comments.size(); ++i) {
        if (th.comments[i].author_id == first) {
          again = true;
          break;
        }
      }
      value = again ? 1.0 : 0.0;
    }
    entries.push_back({sort_key, std::move(label), th.poster_id, value});
  }

  if (entries.empty()) {
    throw std::runtime_error("no thread matches the grouping");
  }

  std::map<std::pair<std::int64_t, std::string>,
           std::map<std::string_view, std::vector<double>>>
      groups;
  for (const auto& e : entries) {
    groups[{e.sort_key, e.label}][e.user].push_back(e.value);
  }

  ConditionalMeanTable table;
  for (const auto& [key, users] : groups) {
    std::vector<double> user_means;
    std::int64_t n_threads = 0;
    for (const auto& [user, values] : users) {
      if (static_cast<std::int64_t>(values.size()) < min_threads_per_user) {
        continue;
      }
      double sum = 0.0;
      for (double v : values) sum += v;
      user_means.push_back(sum / static_cast<double>(values.size()));
      n_threads += static_cast<std::int64_t>(values.size());
    }
    if (user_means.empty()) continue;

    const double n = static_cast<double>(user_means.size());
    double mean = 0.0;
    for (double v : user_means) mean += v;
    mean /= n;
    double ci = 0.0;
    if (user_means.size() > 1) {
      double var = 0.0;
      for (double v : user_means) var += (v - mean) * (v - mean);
      var /= (n - 1.0);
      ci = t_critical_975(static_cast<std::int64_t>(user_means.size()) - 1) *
           std::sqrt(var / n);
    }

    ConditionalMeanRow row;
    row.key = key.second;
    row.mean = mean;
    row.ci_half_width = ci;
    row.n_users = static_cast<std::int64_t>(user_means.size());
    row.n_threads = n_threads;
    row.sparse =
        row.n_users < 2 ||
        static_cast<double>(n_threads) <=
            grouping.sparse_share * static_cast<double>(entries.size());
    table.rows.push_back(std::move(row));
  }
  return table;
}

void ConditionalMeanTable::to_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "key,mean,ci_half_width,n_users,n_threads,sparse\n";
  for (const auto& row : rows) {
    out << '"' << row.key << "\"," << fmt_double(row.mean) << ','
        << fmt_double(row.ci_half_width) << ',' << row.n_users << ','
        << row.n_threads << ',' << (row.sparse ? 1 : 0) << "\n";
  }
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

const ConditionalMeanRow* ConditionalMeanTable::find(
    const std::string& key) const {
  for (const auto& row : rows) {
    if (row.key == key) return &row;
  }
  return nullptr;
}

}  // namespace threadlab
