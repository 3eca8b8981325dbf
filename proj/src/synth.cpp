#include "threadlab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "threadlab/patterns.hpp"
#include "threadlab/util.hpp"

namespace threadlab {

void LengthDist::validate() const {
  switch (kind) {
    case Kind::Fixed:
      if (fixed < 1) throw std::invalid_argument("fixed length must be >= 1");
      break;
    case Kind::UniformInt:
      if (lo < 1 || hi < lo) {
        throw std::invalid_argument("uniform length needs 1 <= lo <= hi");
      }
      break;
    case Kind::Geometric:
      if (!(mean >= 1.0)) {
        throw std::invalid_argument("geometric length mean must be >= 1");
      }
      if (cap < 1) throw std::invalid_argument("length cap must be >= 1");
      break;
  }
}

std::int64_t LengthDist::sample(Rng& rng) const {
  switch (kind) {
    case Kind::Fixed:
      return fixed;
    case Kind::UniformInt:
      return lo + static_cast<std::int64_t>(
                      rng.uniform_int(static_cast<std::uint64_t>(hi - lo + 1)));
    case Kind::Geometric: {
      const double p = 1.0 / mean;
      if (p >= 1.0) return 1;
      const double u = rng.uniform01();
      const std::int64_t len =
          1 + static_cast<std::int64_t>(
                  std::floor(std::log1p(-u) / std::log1p(-p)));
      return std::min(len, cap);
    }
  }
  throw std::logic_error("unhandled length kind");
}

std::int64_t LengthDist::max_possible() const {
  switch (kind) {
    case Kind::Fixed:
      return fixed;
    case Kind::UniformInt:
      return hi;
    case Kind::Geometric:
      return cap;
  }
  throw std::logic_error("unhandled length kind");
}

LengthDist LengthDist::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("length spec '" + text +
                                "' (expected kind:args)");
  }
  const std::string kind = text.substr(0, colon);
  const auto args = split(text.substr(colon + 1), ',');
  LengthDist d;
  if (kind == "fixed" && args.size() == 1) {
    d.kind = Kind::Fixed;
    d.fixed = std::stoll(args[0]);
  } else if (kind == "uniform" && args.size() == 2) {
    d.kind = Kind::UniformInt;
    d.lo = std::stoll(args[0]);
    d.hi = std::stoll(args[1]);
  } else if (kind == "geometric" && (args.size() == 1 || args.size() == 2)) {
    d.kind = Kind::Geometric;
    d.mean = std::stod(args[0]);
    if (args.size() == 2) d.cap = std::stoll(args[1]);
  } else {
    throw std::invalid_argument(
        "length spec '" + text +
        "' (expected fixed:N, uniform:lo,hi or geometric:mean[,cap])");
  }
  d.validate();
  return d;
}

std::string LengthDist::to_string() const {
  switch (kind) {
    case Kind::Fixed:
      return "fixed:" + std::to_string(fixed);
    case Kind::UniformInt:
      return "uniform:" + std::to_string(lo) + "," + std::to_string(hi);
    case Kind::Geometric:
      return "geometric:" + fmt_double(mean) + "," + std::to_string(cap);
  }
  return "?";
}

void SynthConfig::validate() const {
  if (n_posters < 1) throw std::invalid_argument("n_posters must be >= 1");
  if (posts_per_poster < 1) {
    throw std::invalid_argument("posts_per_poster must be >= 1");
  }
  length.validate();
  if (audience_size < length.max_possible()) {
    throw std::invalid_argument(
        "audience_size " + std::to_string(audience_size) +
        " cannot cover threads of up to " +
        std::to_string(length.max_possible()) + " distinct commenters");
  }
  for (double pr : {p_edge, question_prob, exclaim_prob}) {
    if (!(pr >= 0.0) || !(pr <= 1.0)) {
      throw std::invalid_argument("probabilities must lie in [0, 1]");
    }
  }
  if (!(gap_mean_seconds > 0)) {
    throw std::invalid_argument("gap_mean_seconds must be positive");
  }
  if (!(gap_length_coupling >= 0)) {
    throw std::invalid_argument("gap_length_coupling must be >= 0");
  }
  if (vocab_size < 1) throw std::invalid_argument("vocab_size must be >= 1");
  if (!(zipf_exponent > 0)) {
    throw std::invalid_argument("zipf_exponent must be positive");
  }
  if (post_words_min < 1 || post_words_max < post_words_min ||
      comment_words_min < 1 || comment_words_max < comment_words_min) {
    throw std::invalid_argument("word count bounds need 1 <= min <= max");
  }
  if (!(post_like_rate >= 0) || !(comment_like_rate >= 0)) {
    throw std::invalid_argument("like rates must be >= 0");
  }
  try {
    (void)model.with_length(length.max_possible());
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("model cannot cover the length "
                                            "distribution: ") +
                                e.what());
  }
}

namespace {

std::string audience_member_id(std::int64_t poster, std::int64_t member) {
  return "u" + std::to_string(poster) + "_" + std::to_string(member);
}

std::string sample_text(Rng& rng, std::int64_t words_min,
                        std::int64_t words_max,
                        const std::vector<double>& zipf_cdf,
                        double question_prob, double exclaim_prob) {
  const std::int64_t n =
      words_min + static_cast<std::int64_t>(rng.uniform_int(
                      static_cast<std::uint64_t>(words_max - words_min + 1)));
  std::string out;
  for (std::int64_t w = 0; w < n; ++w) {
    if (w) out += ' ';
    out += 'w';
    out += std::to_string(rng.discrete_cdf(zipf_cdf));
  }
  if (rng.uniform01() < question_prob) {
    out += '?';
  } else if (rng.uniform01() < exclaim_prob) {
    out += '!';
  }
  return out;
}

}  // namespace

Corpus generate_synthetic_corpus(const SynthConfig& config) {
  config.validate();
  const std::int64_t n_threads = config.n_posters * config.posts_per_poster;

  std::vector<double> zipf_cdf(static_cast<std::size_t>(config.vocab_size));
  double acc = 0.0;
  for (std::size_t r = 0; r < zipf_cdf.size(); ++r) {
    acc += 1.0 / std::pow(static_cast<double>(r + 1), config.zipf_exponent);
    zipf_cdf[r] = acc;
  }

  Corpus corpus;
  corpus.population = "synthetic";
  corpus.threads.resize(static_cast<std::size_t>(n_threads));

  for (std::int64_t t = 0; t < n_threads; ++t) {
    Rng rng = Rng::substream(config.master_seed,
                             static_cast<std::uint64_t>(t));
    const std::int64_t poster = t / config.posts_per_poster;

    const std::int64_t len = config.length.sample(rng);
    const ArrivalPattern pat = draw_pattern(config.model, len, rng);

    // Fresh code -> participant mapping per thread.
    std::vector<std::int64_t> order(
        static_cast<std::size_t>(config.audience_size));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    Thread th;
    th.thread_id = "t" + std::to_string(t);
    th.poster_id = "p" + std::to_string(poster);
    th.post_time = t * 10'000'000;
    th.post_text = sample_text(rng, config.post_words_min,
                               config.post_words_max, zipf_cdf,
                               config.question_prob, config.exclaim_prob);

    const double gap_mean =
        config.gap_mean_seconds /
        (1.0 + config.gap_length_coupling * static_cast<double>(len - 1));
    std::int64_t prev = th.post_time;
    th.comments.reserve(static_cast<std::size_t>(len));
    for (std::int32_t code : pat.codes) {
      Comment c;
      c.author_id =
          code == 0
              ? th.poster_id
              : audience_member_id(
                    poster, order[static_cast<std::size_t>(code - 1)]);
      c.time = prev + 1 +
               static_cast<std::int64_t>(std::floor(rng.exponential(gap_mean)));
      c.text = sample_text(rng, config.comment_words_min,
                           config.comment_words_max, zipf_cdf,
                           config.question_prob, config.exclaim_prob);
      c.likes = static_cast<std::int64_t>(rng.poisson(config.comment_like_rate));
      prev = c.time;
      th.comments.push_back(std::move(c));
    }

    const std::int64_t n_likes =
        static_cast<std::int64_t>(rng.poisson(config.post_like_rate));
    const std::int64_t window = prev - th.post_time;
    for (std::int64_t l = 0; l < n_likes; ++l) {
      Like like;
      like.user_id = audience_member_id(
          poster, static_cast<std::int64_t>(rng.uniform_int(
                      static_cast<std::uint64_t>(config.audience_size))));
      like.time = th.post_time + 1 +
                  static_cast<std::int64_t>(
                      rng.uniform_int(static_cast<std::uint64_t>(window)));
      th.post_likes.push_back(std::move(like));
    }
    std::sort(th.post_likes.begin(), th.post_likes.end(),
              [](const Like& a, const Like& b) {
                return std::tie(a.time, a.user_id) < std::tie(b.time, b.user_id);
              });

    corpus.threads[static_cast<std::size_t>(t)] = std::move(th);
  }

  for (std::int64_t g = 0; g < config.n_posters; ++g) {
    Rng rng = Rng::substream(
        config.master_seed, static_cast<std::uint64_t>(n_threads + g));
    std::vector<std::string> pool;
    pool.push_back("p" + std::to_string(g));
    for (std::int64_t m = 0; m < config.audience_size; ++m) {
      pool.push_back(audience_member_id(g, m));
    }
    for (const auto& id : pool) corpus.graph.add_vertex(id);
    for (std::size_t a = 0; a < pool.size(); ++a) {
      for (std::size_t b = a + 1; b < pool.size(); ++b) {
        if (rng.uniform01() < config.p_edge) {
          corpus.graph.add_edge(pool[a], pool[b]);
        }
      }
    }
  }
  return corpus;
}

}  // namespace threadlab
