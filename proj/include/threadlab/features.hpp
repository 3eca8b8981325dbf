#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "threadlab/corpus.hpp"

namespace threadlab {

// Lowercased alphanumeric runs; whitespace-delimited words starting with
// http://, https:// or www. collapse to the single token "<url>" before
// splitting.
std::vector<std::string> tokenize(std::string_view text);

// Maximum-likelihood unigram probabilities with a fixed probability floor
// for unseen tokens; in-vocabulary mass sums to 1 - oov_floor.
class UnigramLM {
 public:
  UnigramLM() = default;
  UnigramLM(std::map<std::string, double> probs, double oov_floor);

  double p(const std::string& token) const;
  double oov_floor() const { return oov_floor_; }
  const std::map<std::string, double>& probs() const { return probs_; }

  // Two columns token,probability; the floor is stored under the reserved
  // token "<oov>".
  void save_csv(const std::string& path) const;
  static UnigramLM load_csv(const std::string& path);

 private:
  std::map<std::string, double> probs_;
  double oov_floor_ = 0.0;
};

UnigramLM train_unigram_lm(const std::vector<std::string>& background_posts,
                           double oov_floor);

// Mean over tokens of ln(1/p(token)). Throws if the text has no tokens.
double post_distinctiveness(const std::string& text, const UnigramLM& lm);

// Who commented first on each poster's threads, over threads with >= 1
// comment.
class FirstCommenterIndex {
 public:
  explicit FirstCommenterIndex(const Corpus& corpus);

  std::int64_t commented_thread_count(const std::string& poster) const;

  // Fraction of the poster's commented threads whose first commenter is not
  // `commenter`. Throws if the poster has fewer than min_posts such threads.
  double distinctiveness(const std::string& poster,
                         const std::string& commenter,
                         std::int64_t min_posts = 10) const;

 private:
  std::map<std::string, std::map<std::string, std::int64_t>> first_counts_;
  std::map<std::string, std::int64_t> totals_;
};

double first_commenter_distinctiveness(const Corpus& corpus,
                                       const std::string& poster,
                                       const std::string& commenter,
                                       std::int64_t min_posts = 10);

using FeatureVector = std::map<std::string, double>;

struct FeatureOptions {
  // Graph, like and punctuation features; corpora without that metadata run
  // with this off.
  bool fb_features = true;

  // When set, adds post_distinctiveness (0 for posts with no tokens).
  const UnigramLM* lm = nullptr;

  // When set, adds first_commenter_distinctiveness; posters with fewer than
  // min_posts commented threads get the uninformative midpoint 0.5.
  const FirstCommenterIndex* first_commenters = nullptr;
  std::int64_t min_posts = 10;

  // Adds a 0/1 presence indicator post_term[w] for each listed term.
  std::vector<std::string> post_terms;
};

// Deterministic column order for extract_features output.
std::vector<std::string> feature_schema(std::int64_t prefix_len,
                                        const FeatureOptions& options);

// Everything is computed from the post and comments 1..prefix_len only.
// Comment-indexed names use 1-based indices ("time[3]"); index 0 is the
// post ("num_words[0]").
FeatureVector extract_features(const Thread& thread, std::int64_t prefix_len,
                               const SocialGraph& graph,
                               const FeatureOptions& options);

// Bag-of-words terms predictive of log thread length.
struct TermSelection {
  std::vector<std::pair<std::string, double>> terms;  // |coef| descending
};

struct ElasticNetFit {
  std::vector<double> beta;  // standardized-feature coefficients
  std::vector<double> objective_trace;  // one entry per sweep
  int sweeps = 0;
};

// Coordinate descent on (1/2n)||y - Xb||^2 + reg*(l1*|b|_1 + (1-l1)/2*|b|^2).
// Columns must be standardized and y centered. The objective never increases
// between sweeps; iteration stops when its relative change drops below tol.
ElasticNetFit elastic_net_fit(const std::vector<std::vector<double>>& columns,
                              const std::vector<double>& y, double reg_strength,
                              double l1_ratio, int max_sweeps = 1000,
                              double tol = 1e-6);

TermSelection select_terms_elastic_net(const std::vector<std::string>& posts,
                                       const std::vector<std::int64_t>& lengths,
                                       std::size_t max_terms, double l1_ratio,
                                       double reg_strength);

// 5-fold cross-validated mean squared error over a geometric grid descending
// from the smallest reg_strength that zeroes every coefficient; ties prefer
// the stronger penalty.
double choose_reg_strength_cv(const std::vector<std::string>& posts,
                              const std::vector<std::int64_t>& lengths,
                              double l1_ratio, std::uint64_t seed);

}  // namespace threadlab
