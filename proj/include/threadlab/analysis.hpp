#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "threadlab/corpus.hpp"
#include "threadlab/density.hpp"
#include "threadlab/features.hpp"

namespace threadlab {

// Mean number of distinct participants (poster included) over the length-k
// prefixes of the given threads. Every thread must have length >= k.
double delta_u(const std::vector<const Thread*>& user_threads, std::int64_t k);

// Distribution of floor(delta_u(k)) over posters with at least one thread of
// length >= k; each qualifying poster contributes equal mass.
Density density_Delta_k(const Corpus& corpus, std::int64_t k);

struct HeatMap {
  std::int64_t k_max = 0;
  // columns[k-1] is the distribution at prefix length k; empty when no
  // poster qualifies.
  std::vector<std::optional<Density>> columns;

  void to_csv(const std::string& path) const;  // k,d,mass; missing k skipped
};

HeatMap heatmap(const Corpus& corpus, std::int64_t k_max);

// Sum of masses over integer d in [p*k, q*k]. Requires 0 <= p <= q <= 1.
double quantile_mass(const Density& density, double p, double q,
                     std::int64_t k);

struct Mode {
  std::int64_t d = 0;       // first support point of the peak plateau
  double mass = 0.0;
  double prominence = 0.0;  // drop to the higher adjacent valley
};

// Local maxima over the zero-filled support, plateaus merged, keeping peaks
// with prominence >= min_prominence; sorted by d.
std::vector<Mode> modes(const Density& density, double min_prominence);

// Monte Carlo variant: each candidate peak must clear
// max(0.005, 3*sqrt(mass*(1-mass)/sample_size)).
std::vector<Mode> modes_mc(const Density& density, std::size_t sample_size);
double mc_min_prominence(double p_hat, std::size_t sample_size);

// True iff mass is non-decreasing up to some point and non-increasing after,
// over the zero-filled support.
bool is_unimodal(const Density& density, double eps = 1e-12);

// Mass-preserving moving average of window 3 (support widens by one on each
// side); takes the sampling noise out of Monte Carlo densities before
// is_unimodal.
Density smooth_ma3(const Density& density);

// Sum of the two extreme quartile masses minus the two middle ones over
// [0, k]; grows as mass concentrates at both ends.
double bimodality_gap(const Density& density, std::int64_t k);

struct GroupingSpec {
  enum class Kind {
    LinksFirstK,       // edges among the first k distinct commenters/likers
    PatternPrefix,     // arrival-pattern prefix of length k
    FirstCommentLag,   // post -> first comment delay, bucketed
    PostDistinctiveness,
    FirstCommenterDistinctiveness,
  };
  Kind kind = Kind::LinksFirstK;

  enum class Entity { Comments, Likes };
  Entity entity = Entity::Comments;  // LinksFirstK only
  std::int64_t k = 2;                // LinksFirstK / PatternPrefix

  // Bucket edges for the real-valued groupings, strictly increasing;
  // values below the first edge and at/above the last get open-ended
  // buckets.
  std::vector<double> bucket_edges;

  enum class Measure { ThreadLength, FirstCommenterReentry };
  Measure measure = Measure::ThreadLength;

  const UnigramLM* lm = nullptr;  // PostDistinctiveness
  std::int64_t min_words = 8;     // PostDistinctiveness filter
  std::int64_t min_posts = 10;    // FirstCommenterDistinctiveness history

  // A group is flagged sparse when it holds at most this share of eligible
  // threads, or fewer than two users.
  double sparse_share = 0.01;
};

struct ConditionalMeanRow {
  std::string key;
  double mean = 0.0;
  double ci_half_width = 0.0;  // 95%, over user-level means
  std::int64_t n_users = 0;
  std::int64_t n_threads = 0;
  bool sparse = false;
};

struct ConditionalMeanTable {
  std::vector<ConditionalMeanRow> rows;

  void to_csv(const std::string& path) const;
  const ConditionalMeanRow* find(const std::string& key) const;
};

// Macro-averaged measure per group: the per-user mean comes first, then the
// across-user mean and confidence interval, so prolific users carry no extra
// weight. Users contribute to a group only with >= min_threads_per_user
// threads in it.
ConditionalMeanTable conditional_mean_length(const Corpus& corpus,
                                             const GroupingSpec& grouping,
                                             std::int64_t min_threads_per_user = 1);

}  // namespace threadlab
