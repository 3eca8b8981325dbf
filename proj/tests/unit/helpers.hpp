#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "threadlab/corpus.hpp"
#include "threadlab/density.hpp"
#include "threadlab/patterns.hpp"
#include "threadlab/rng.hpp"

namespace testutil {

// Fresh empty directory under the system temp root; unique per call.
inline std::filesystem::path tmp_dir() {
  static int counter = 0;
  auto base = std::filesystem::temp_directory_path() /
              ("threadlab_test_" + std::to_string(++counter) + "_" +
               std::to_string(::getpid()));
  std::filesystem::remove_all(base);
  std::filesystem::create_directories(base);
  return base;
}

inline threadlab::Thread make_thread(
    std::string id, std::string poster,
    const std::vector<std::string>& comment_authors,
    std::int64_t post_time = 0, std::int64_t gap = 60) {
  threadlab::Thread t;
  t.thread_id = std::move(id);
  t.poster_id = std::move(poster);
  t.post_text = "post text";
  t.post_time = post_time;
  for (std::size_t i = 0; i < comment_authors.size(); ++i) {
    threadlab::Comment c;
    c.author_id = comment_authors[i];
    c.text = "comment " + std::to_string(i + 1);
    c.time = post_time + gap * static_cast<std::int64_t>(i + 1);
    t.comments.push_back(std::move(c));
  }
  return t;
}

// Random but always-valid thread: crooked author pool, strictly increasing
// times, occasional likes and punctuation.
inline threadlab::Thread random_thread(threadlab::Rng& rng, int index) {
  const std::size_t n_comments = rng.uniform_int(12);
  const std::size_t pool = 1 + rng.uniform_int(6);
  threadlab::Thread t;
  t.thread_id = "t" + std::to_string(index);
  t.poster_id = "u" + std::to_string(rng.uniform_int(4));
  t.post_text = rng.uniform01() < 0.3 ? "why? because!" : "plain post text";
  t.post_time = static_cast<std::int64_t>(rng.uniform_int(1000));
  std::int64_t time = t.post_time;
  for (std::size_t i = 0; i < n_comments; ++i) {
    threadlab::Comment c;
    c.author_id = rng.uniform01() < 0.25
                      ? t.poster_id
                      : "u" + std::to_string(rng.uniform_int(pool) + 10);
    c.text = "w" + std::to_string(rng.uniform_int(40));
    time += 1 + static_cast<std::int64_t>(rng.uniform_int(600));
    c.time = time;
    c.likes = static_cast<std::int64_t>(rng.uniform_int(4));
    t.comments.push_back(std::move(c));
    if (rng.uniform01() < 0.2) {
      t.post_likes.push_back(
          {"u" + std::to_string(rng.uniform_int(20) + 40),
           t.post_time + 1 + static_cast<std::int64_t>(rng.uniform_int(500))});
    }
  }
  return t;
}

inline threadlab::Corpus random_corpus(threadlab::Rng& rng, int n_threads) {
  threadlab::Corpus corpus;
  for (int i = 0; i < n_threads; ++i) {
    corpus.threads.push_back(random_thread(rng, i));
  }
  // Cover every participant, then sprinkle random friendships.
  for (const auto& t : corpus.threads) {
    corpus.graph.add_vertex(t.poster_id);
    for (const auto& c : t.comments) corpus.graph.add_vertex(c.author_id);
    for (const auto& l : t.post_likes) corpus.graph.add_vertex(l.user_id);
  }
  for (int e = 0; e < n_threads; ++e) {
    const std::string u = "u" + std::to_string(rng.uniform_int(16));
    const std::string v = "u" + std::to_string(rng.uniform_int(16));
    if (u != v && corpus.graph.has_vertex(u) && corpus.graph.has_vertex(v)) {
      corpus.graph.add_edge(u, v);
    }
  }
  return corpus;
}

// Plain real-arithmetic urn replay: walks a pattern and returns the weight
// map after the whole pattern, applying the published update rules directly.
// Independent of the log-space production implementation.
inline std::map<std::int32_t, double> replay_urn_weights(
    const threadlab::ArrivalPattern& pattern, double alpha) {
  std::map<std::int32_t, double> w = {{0, 1.0}, {1, 1.0}};
  for (std::size_t i = 1; i < pattern.codes.size(); ++i) {
    const std::int32_t c = pattern.codes[i];
    if (w.count(c)) {
      w[c] *= alpha;
    } else {
      for (auto& [code, weight] : w) weight /= alpha;
      w[c] = 1.0;
    }
  }
  return w;
}

// Step probabilities by direct arithmetic on a real-valued weight map.
inline std::map<std::int32_t, double> naive_step_probs(
    const std::map<std::int32_t, double>& w, std::int32_t current, double beta,
    std::int32_t new_code) {
  double denom = beta;
  for (const auto& [c, wt] : w) {
    if (c != current) denom += wt;
  }
  std::map<std::int32_t, double> probs;
  for (const auto& [c, wt] : w) {
    if (c != current) probs[c] = wt / denom;
  }
  probs[new_code] = beta / denom;
  return probs;
}

// Exact distinct-participant PMF by exhaustive enumeration of the 2^k
// new/re-entrant outcomes. Usable for k <= 20.
inline std::map<std::int64_t, double> brute_force_distinct_pmf(
    const std::vector<double>& p) {
  std::map<std::int64_t, double> pmf;
  const std::size_t k = p.size();
  for (std::uint64_t bits = 0; bits < (1ull << k); ++bits) {
    double prob = 1.0;
    std::int64_t news = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (bits & (1ull << j)) {
        prob *= p[j];
        ++news;
      } else {
        prob *= 1.0 - p[j];
      }
    }
    pmf[1 + news] += prob;
  }
  return pmf;
}

inline threadlab::Density binomial_density(int n, double p) {
  std::map<std::int64_t, double> mass;
  double logc = 0.0;  // log C(n, k), updated incrementally
  for (int k = 0; k <= n; ++k) {
    if (k > 0) logc += std::log(double(n - k + 1)) - std::log(double(k));
    const double m =
        std::exp(logc + k * std::log(p) + (n - k) * std::log1p(-p));
    if (m > 0) mass[k] = m;
  }
  return threadlab::Density(mass);
}

// O(n^2) AUC: fraction of (positive, negative) pairs ranked correctly, ties
// half credit.
inline double auc_reference(const std::vector<double>& scores,
                            const std::vector<int>& labels) {
  double wins = 0.0;
  std::int64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / static_cast<double>(pairs);
}

inline double tv_maps(const std::map<std::int64_t, double>& a,
                      const std::map<std::int64_t, double>& b) {
  std::map<std::int64_t, double> diff;
  for (const auto& [d, m] : a) diff[d] += m;
  for (const auto& [d, m] : b) diff[d] -= m;
  double s = 0.0;
  for (const auto& [d, m] : diff) s += std::abs(m);
  return 0.5 * s;
}

}  // namespace testutil
