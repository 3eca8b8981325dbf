#pragma once

#include <cstdint>
#include <string>

#include "threadlab/corpus.hpp"
#include "threadlab/genmodels.hpp"
#include "threadlab/rng.hpp"

namespace threadlab {

// Number of comments per generated thread.
struct LengthDist {
  enum class Kind { Fixed, UniformInt, Geometric };
  Kind kind = Kind::Fixed;
  std::int64_t fixed = 40;
  std::int64_t lo = 1, hi = 40;  // UniformInt, inclusive
  double mean = 6.0;             // Geometric (support 1, 2, ...)
  std::int64_t cap = 60;         // Geometric hard cap

  void validate() const;
  std::int64_t sample(Rng& rng) const;
  std::int64_t max_possible() const;

  // "fixed:40" | "uniform:3,60" | "geometric:6" | "geometric:6,120"
  static LengthDist parse(const std::string& text);
  std::string to_string() const;
};

struct SynthConfig {
  std::int64_t n_posters = 100;
  std::int64_t posts_per_poster = 10;
  ModelSpec model;
  LengthDist length;

  // Each poster has a private audience; non-poster ID codes map onto a
  // per-thread shuffle of it, so it must cover the longest possible thread.
  std::int64_t audience_size = 80;
  double p_edge = 0.1;  // edge probability within {poster} + audience

  double gap_mean_seconds = 600.0;
  // Mean inter-comment gap shrinks to gap_mean / (1 + coupling*(length-1)):
  // a positive coupling makes early-arrival speed carry information about
  // the final length.
  double gap_length_coupling = 0.0;

  std::int64_t vocab_size = 1000;
  double zipf_exponent = 1.1;
  std::int64_t post_words_min = 5, post_words_max = 20;
  std::int64_t comment_words_min = 2, comment_words_max = 12;
  double question_prob = 0.1;
  double exclaim_prob = 0.1;

  double post_like_rate = 2.0;     // Poisson mean per post
  double comment_like_rate = 0.5;  // Poisson mean per comment

  std::uint64_t master_seed = 1;

  void validate() const;
};

// Deterministic function of the config: thread i draws from substream
// (master_seed, i), poster g's friendships from substream
// (master_seed, n_threads + g).
Corpus generate_synthetic_corpus(const SynthConfig& config);

}  // namespace threadlab
