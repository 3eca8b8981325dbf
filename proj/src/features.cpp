#include "threadlab/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "threadlab/rng.hpp"
#include "threadlab/util.hpp"

namespace threadlab {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() &&
           std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    std::size_t start = i;
    while (i < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    if (i == start) break;
    std::string word = lowercase(text.substr(start, i - start));
    if (word.rfind("http://", 0) == 0 || word.rfind("https://", 0) == 0 ||
        word.rfind("www.", 0) == 0) {
      out.push_back("<url>");
      continue;
    }
    std::size_t j = 0;
    while (j < word.size()) {
      while (j < word.size() &&
             !std::isalnum(static_cast<unsigned char>(word[j]))) {
        ++j;
      }
      std::size_t run = j;
      while (j < word.size() &&
             std::isalnum(static_cast<unsigned char>(word[j]))) {
        ++j;
      }
      if (j > run) out.push_back(word.substr(run, j - run));
    }
  }
  return out;
}

UnigramLM::UnigramLM(std::map<std::string, double> probs, double oov_floor)
    : probs_(std::move(probs)), oov_floor_(oov_floor) {
  if (!(oov_floor_ >= 0.0) || !(oov_floor_ < 1.0)) {
    throw std::invalid_argument("oov floor must lie in [0, 1)");
  }
  double sum = oov_floor_;
  for (const auto& [tok, p] : probs_) {
    if (!(p > 0.0)) {
      throw std::invalid_argument("nonpositive probability for token '" + tok +
                                  "'");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("token probabilities plus oov floor sum to " +
                                fmt_double(sum) + ", expected 1");
  }
}

double UnigramLM::p(const std::string& token) const {
  auto it = probs_.find(token);
  return it == probs_.end() ? oov_floor_ : it->second;
}

void UnigramLM::save_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "token,probability\n";
  out << "<oov>," << fmt_double(oov_floor_) << "\n";
  for (const auto& [tok, p] : probs_) {
    out << tok << ',' << fmt_double(p) << "\n";
  }
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

UnigramLM UnigramLM::load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": empty language-model file");
  }
  std::map<std::string, double> probs;
  double oov = 0.0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected token,probability");
    }
    const std::string tok = line.substr(0, comma);
    const double p = std::stod(line.substr(comma + 1));
    if (tok == "<oov>") {
      oov = p;
    } else {
      probs[tok] = p;
    }
  }
  return UnigramLM(std::move(probs), oov);
}

UnigramLM train_unigram_lm(const std::vector<std::string>& background_posts,
                           double oov_floor) {
  if (!(oov_floor >= 0.0) || !(oov_floor < 1.0)) {
    throw std::invalid_argument("oov floor must lie in [0, 1)");
  }
  std::map<std::string, std::int64_t> counts;
  std::int64_t total = 0;
  for (const auto& post : background_posts) {
    for (auto& tok : tokenize(post)) {
      counts[tok] += 1;
      total += 1;
    }
  }
  if (total == 0) {
    throw std::invalid_argument("background corpus has no tokens");
  }
  std::map<std::string, double> probs;
  for (const auto& [tok, c] : counts) {
    probs[tok] = (1.0 - oov_floor) * static_cast<double>(c) /
                 static_cast<double>(total);
  }
  return UnigramLM(std::move(probs), oov_floor);
}

double post_distinctiveness(const std::string& text, const UnigramLM& lm) {
  const auto tokens = tokenize(text);
  if (tokens.empty()) {
    throw std::invalid_argument("text has no tokens");
  }
  double sum = 0.0;
  for (const auto& tok : tokens) {
    sum += std::log(1.0 / lm.p(tok));
  }
  return sum / static_cast<double>(tokens.size());
}

FirstCommenterIndex::FirstCommenterIndex(const Corpus& corpus) {
  for (const auto& th : corpus.threads) {
    if (th.comments.empty()) continue;
    totals_[th.poster_id] += 1;
    first_counts_[th.poster_id][th.comments.front().author_id] += 1;
  }
}

std::int64_t FirstCommenterIndex::commented_thread_count(
    const std::string& poster) const {
  auto it = totals_.find(poster);
  return it == totals_.end() ? 0 : it->second;
}

double FirstCommenterIndex::distinctiveness(const std::string& poster,
                                            const std::string& commenter,
                                            std::int64_t min_posts) const {
  const std::int64_t total = commented_thread_count(poster);
  if (total < min_posts) {
    throw std::invalid_argument("poster '" + poster + "' has " +
                                std::to_string(total) +
                                " commented threads; need at least " +
                                std::to_string(min_posts));
  }
  std::int64_t first = 0;
  auto it = first_counts_.find(poster);
  if (it != first_counts_.end()) {
    auto jt = it->second.find(commenter);
    if (jt != it->second.end()) first = jt->second;
  }
  return 1.0 - static_cast<double>(first) / static_cast<double>(total);
}

double first_commenter_distinctiveness(const Corpus& corpus,
                                       const std::string& poster,
                                       const std::string& commenter,
                                       std::int64_t min_posts) {
  return FirstCommenterIndex(corpus).distinctiveness(poster, commenter,
                                                     min_posts);
}

namespace {

std::string idx(const std::string& base, std::int64_t i) {
  return base + "[" + std::to_string(i) + "]";
}

}  // namespace

std::vector<std::string> feature_schema(std::int64_t prefix_len,
                                        const FeatureOptions& options) {
  if (prefix_len < 0) throw std::invalid_argument("prefix_len must be >= 0");
  std::vector<std::string> names;
  names.push_back("num_words[0]");
  names.push_back("num_chars[0]");
  if (options.fb_features) {
    names.push_back("question[0]");
    names.push_back("exclaim[0]");
  }
  if (options.lm) names.push_back("post_distinctiveness");
  if (options.first_commenters && prefix_len >= 1) {
    names.push_back("first_commenter_distinctiveness");
  }
  for (const auto& term : options.post_terms) {
    names.push_back("post_term[" + term + "]");
  }
  for (std::int64_t i = 1; i <= prefix_len; ++i) {
    names.push_back(idx("id_code", i));
    names.push_back(idx("uniq_comm", i));
    names.push_back(idx("time", i));
    names.push_back(idx("num_words", i));
    names.push_back(idx("num_chars", i));
    if (options.fb_features) {
      names.push_back(idx("question", i));
      names.push_back(idx("exclaim", i));
      names.push_back(idx("edges_prev", i));
      names.push_back(idx("mutual_poster", i));
      names.push_back(idx("likes", i));
      names.push_back(idx("comment_likes", i));
    }
  }
  return names;
}

FeatureVector extract_features(const Thread& thread, std::int64_t prefix_len,
                               const SocialGraph& graph,
                               const FeatureOptions& options) {
  if (prefix_len < 0) throw std::invalid_argument("prefix_len must be >= 0");
  if (prefix_len > static_cast<std::int64_t>(thread.length())) {
    throw std::out_of_range("prefix " + std::to_string(prefix_len) +
                            " exceeds thread length " +
                            std::to_string(thread.length()));
  }

  FeatureVector f;
  const auto post_tokens = tokenize(thread.post_text);
  f["num_words[0]"] = static_cast<double>(post_tokens.size());
  f["num_chars[0]"] = static_cast<double>(thread.post_text.size());
  if (options.fb_features) {
    f["question[0]"] =
        thread.post_text.find('?') != std::string::npos ? 1.0 : 0.0;
    f["exclaim[0]"] =
        thread.post_text.find('!') != std::string::npos ? 1.0 : 0.0;
  }
  if (options.lm) {
    f["post_distinctiveness"] =
        post_tokens.empty() ? 0.0 : post_distinctiveness(thread.post_text,
                                                         *options.lm);
  }
  if (options.first_commenters && prefix_len >= 1) {
    const std::string& first = thread.comments.front().author_id;
    const auto& fc = *options.first_commenters;
    f["first_commenter_distinctiveness"] =
        fc.commented_thread_count(thread.poster_id) >= options.min_posts
            ? fc.distinctiveness(thread.poster_id, first, options.min_posts)
            : 0.5;
  }
  if (!options.post_terms.empty()) {
    const std::set<std::string> present(post_tokens.begin(),
                                        post_tokens.end());
    for (const auto& term : options.post_terms) {
      f["post_term[" + term + "]"] = present.count(term) ? 1.0 : 0.0;
    }
  }

  const auto require_vertex = [&](const std::string& id) {
    if (!graph.has_vertex(id)) {
      throw std::invalid_argument("participant '" + id +
                                  "' missing from the social graph");
    }
  };
  if (options.fb_features && prefix_len >= 1) require_vertex(thread.poster_id);

  std::map<std::string, std::int32_t> code_of;  // prefix-only codec
  code_of[thread.poster_id] = 0;
  std::int32_t next_code = 1;
  std::int32_t max_code = 0;
  std::vector<const std::string*> prior;  // distinct participants seen
  prior.push_back(&thread.poster_id);
  std::int64_t comment_like_sum = 0;

  for (std::int64_t i = 1; i <= prefix_len; ++i) {
    const Comment& c = thread.comments[static_cast<std::size_t>(i - 1)];
    auto [it, inserted] = code_of.try_emplace(c.author_id, next_code);
    if (inserted) next_code += 1;
    const std::int32_t code = it->second;
    max_code = std::max(max_code, code);

    f[idx("id_code", i)] = code;
    f[idx("uniq_comm", i)] = max_code;
    f[idx("time", i)] = static_cast<double>(c.time - thread.post_time);
    f[idx("num_words", i)] = static_cast<double>(tokenize(c.text).size());
    f[idx("num_chars", i)] = static_cast<double>(c.text.size());

    if (options.fb_features) {
      require_vertex(c.author_id);
      f[idx("question", i)] =
          c.text.find('?') != std::string::npos ? 1.0 : 0.0;
      f[idx("exclaim", i)] = c.text.find('!') != std::string::npos ? 1.0 : 0.0;

      std::int64_t edges = 0;
      for (const std::string* p : prior) {
        if (*p != c.author_id && graph.has_edge(c.author_id, *p)) edges += 1;
      }
      f[idx("edges_prev", i)] = static_cast<double>(edges);

      std::int64_t mutual = 0;
      const auto* na = graph.neighbors(c.author_id);
      const auto* np = graph.neighbors(thread.poster_id);
      if (na && np) {
        // Iterate the smaller set.
        if (na->size() > np->size()) std::swap(na, np);
        for (const auto& x : *na) mutual += np->count(x);
      }
      f[idx("mutual_poster", i)] = static_cast<double>(mutual);

      std::int64_t likes = 0;
      for (const auto& like : thread.post_likes) {
        if (like.time < c.time) likes += 1;
      }
      f[idx("likes", i)] = static_cast<double>(likes);
      f[idx("comment_likes", i)] = static_cast<double>(comment_like_sum);
    }

    if (inserted) prior.push_back(&it->first);
    comment_like_sum += c.likes;
  }
  return f;
}

ElasticNetFit elastic_net_fit(const std::vector<std::vector<double>>& columns,
                              const std::vector<double>& y, double reg_strength,
                              double l1_ratio, int max_sweeps, double tol) {
  if (!(reg_strength >= 0.0)) {
    throw std::invalid_argument("reg_strength must be >= 0");
  }
  if (!(l1_ratio >= 0.0) || !(l1_ratio <= 1.0)) {
    throw std::invalid_argument("l1_ratio must lie in [0, 1]");
  }
  const std::size_t n = y.size();
  if (n == 0) throw std::invalid_argument("empty target vector");
  for (const auto& col : columns) {
    if (col.size() != n) {
      throw std::invalid_argument("design column length mismatch");
    }
  }
  const std::size_t m = columns.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> xx(m, 0.0);  // (1/n) column squared norms
  for (std::size_t j = 0; j < m; ++j) {
    for (double v : columns[j]) xx[j] += v * v;
    xx[j] *= inv_n;
  }

  ElasticNetFit fit;
  fit.beta.assign(m, 0.0);
  std::vector<double> r = y;  // residual y - X*beta

  const auto objective = [&] {
    double sq = 0.0;
    for (double v : r) sq += v * v;
    double l1 = 0.0, l2 = 0.0;
    for (double b : fit.beta) {
      l1 += std::abs(b);
      l2 += b * b;
    }
    return 0.5 * inv_n * sq +
           reg_strength * (l1_ratio * l1 + 0.5 * (1.0 - l1_ratio) * l2);
  };

  double prev_obj = objective();
  fit.objective_trace.push_back(prev_obj);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (std::size_t j = 0; j < m; ++j) {
      if (xx[j] == 0.0) continue;
      const auto& x = columns[j];
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += x[i] * r[i];
      const double z = inv_n * dot + fit.beta[j] * xx[j];
      const double thresh = reg_strength * l1_ratio;
      double nb = 0.0;
      if (z > thresh) {
        nb = (z - thresh) / (xx[j] + reg_strength * (1.0 - l1_ratio));
      } else if (z < -thresh) {
        nb = (z + thresh) / (xx[j] + reg_strength * (1.0 - l1_ratio));
      }
      if (nb != fit.beta[j]) {
        const double delta = fit.beta[j] - nb;
        for (std::size_t i = 0; i < n; ++i) r[i] += x[i] * delta;
        fit.beta[j] = nb;
      }
    }
    const double obj = objective();
    fit.objective_trace.push_back(obj);
    fit.sweeps = sweep + 1;
    if (obj > prev_obj + 1e-10 * std::max(1.0, std::abs(prev_obj))) {
      throw std::logic_error("elastic-net objective increased in a sweep");
    }
    if (prev_obj - obj < tol * std::max(1.0, std::abs(prev_obj))) break;
    prev_obj = obj;
  }
  return fit;
}

namespace {

struct Design {
  std::vector<std::string> vocab;
  std::vector<std::vector<double>> counts;  // [term][post]
};

Design build_design(const std::vector<std::string>& posts) {
  std::map<std::string, std::size_t> index;
  for (const auto& post : posts) {
    for (auto& tok : tokenize(post)) index.emplace(tok, 0);
  }
  Design d;
  d.vocab.reserve(index.size());
  for (auto& [tok, slot] : index) {
    slot = d.vocab.size();
    d.vocab.push_back(tok);
  }
  d.counts.assign(d.vocab.size(),
                  std::vector<double>(posts.size(), 0.0));
  for (std::size_t row = 0; row < posts.size(); ++row) {
    for (auto& tok : tokenize(posts[row])) {
      d.counts[index[tok]][row] += 1.0;
    }
  }
  return d;
}

// Population mean/sd standardization; constant columns get sd 0 and are left
// all-zero so the fit ignores them.
void standardize(std::vector<double>& col, double& mean, double& sd) {
  const double n = static_cast<double>(col.size());
  mean = 0.0;
  for (double v : col) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : col) var += (v - mean) * (v - mean);
  var /= n;
  sd = std::sqrt(var);
  for (double& v : col) v = sd > 0 ? (v - mean) / sd : 0.0;
}

void check_regression_inputs(const std::vector<std::string>& posts,
                             const std::vector<std::int64_t>& lengths) {
  if (posts.size() != lengths.size() || posts.empty()) {
    throw std::invalid_argument("posts and lengths must align and be non-empty");
  }
  for (std::int64_t len : lengths) {
    if (len < 1) throw std::invalid_argument("thread lengths must be >= 1");
  }
  const auto [lo, hi] = std::minmax_element(lengths.begin(), lengths.end());
  if (*lo == *hi) {
    throw std::invalid_argument("degenerate targets: all lengths equal");
  }
}

}  // namespace

TermSelection select_terms_elastic_net(const std::vector<std::string>& posts,
                                       const std::vector<std::int64_t>& lengths,
                                       std::size_t max_terms, double l1_ratio,
                                       double reg_strength) {
  check_regression_inputs(posts, lengths);
  Design d = build_design(posts);

  std::vector<double> y(lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    y[i] = std::log(static_cast<double>(lengths[i]));
  }
  double ymean = 0.0, ysd = 0.0;
  standardize(y, ymean, ysd);
  for (double& v : y) v *= ysd;  // center only

  std::vector<double> means(d.vocab.size()), sds(d.vocab.size());
  for (std::size_t j = 0; j < d.counts.size(); ++j) {
    standardize(d.counts[j], means[j], sds[j]);
  }

  ElasticNetFit fit = elastic_net_fit(d.counts, y, reg_strength, l1_ratio);

  std::vector<std::pair<std::string, double>> nonzero;
  for (std::size_t j = 0; j < fit.beta.size(); ++j) {
    if (std::abs(fit.beta[j]) > 1e-12) {
      nonzero.emplace_back(d.vocab[j], fit.beta[j]);
    }
  }
  std::sort(nonzero.begin(), nonzero.end(), [](const auto& a, const auto& b) {
    if (std::abs(a.second) != std::abs(b.second)) {
      return std::abs(a.second) > std::abs(b.second);
    }
    return a.first < b.first;
  });
  if (nonzero.size() > max_terms) nonzero.resize(max_terms);
  return TermSelection{std::move(nonzero)};
}

double choose_reg_strength_cv(const std::vector<std::string>& posts,
                              const std::vector<std::int64_t>& lengths,
                              double l1_ratio, std::uint64_t seed) {
  check_regression_inputs(posts, lengths);
  const std::size_t n = posts.size();
  const std::size_t n_folds = std::min<std::size_t>(5, n);

  Design full = build_design(posts);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = std::log(static_cast<double>(lengths[i]));
  }

  // Smallest penalty that zeroes every coefficient, from the KKT condition
  // at beta = 0 on the standardized full design.
  double lambda_max = 0.0;
  {
    std::vector<double> yc = y;
    double ym = 0, ys = 0;
    standardize(yc, ym, ys);
    for (double& v : yc) v *= ys;
    for (auto col : full.counts) {
      double m = 0, s = 0;
      standardize(col, m, s);
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += col[i] * yc[i];
      lambda_max = std::max(lambda_max, std::abs(dot) / static_cast<double>(n));
    }
    lambda_max /= std::max(l1_ratio, 1e-3);
  }
  if (lambda_max <= 0) return 1e-3;

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = Rng::substream(seed, 0);
  rng.shuffle(perm);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[perm[i]] = i % n_folds;

  double best_lambda = lambda_max;
  double best_mse = std::numeric_limits<double>::infinity();
  for (int g = 0; g < 10; ++g) {
    const double lambda = lambda_max * std::pow(0.7, g);
    double total_sq = 0.0;
    std::size_t total_cnt = 0;
    for (std::size_t fold = 0; fold < n_folds; ++fold) {
      std::vector<std::size_t> tr, va;
      for (std::size_t i = 0; i < n; ++i) {
        (fold_of[i] == fold ? va : tr).push_back(i);
      }
      std::vector<std::vector<double>> cols(full.counts.size());
      std::vector<double> cm(cols.size()), cs(cols.size());
      for (std::size_t j = 0; j < cols.size(); ++j) {
        cols[j].reserve(tr.size());
        for (std::size_t i : tr) cols[j].push_back(full.counts[j][i]);
        standardize(cols[j], cm[j], cs[j]);
      }
      std::vector<double> ytr;
      ytr.reserve(tr.size());
      double ymean = 0.0;
      for (std::size_t i : tr) {
        ytr.push_back(y[i]);
        ymean += y[i];
      }
      ymean /= static_cast<double>(tr.size());
      for (double& v : ytr) v -= ymean;

      ElasticNetFit fit = elastic_net_fit(cols, ytr, lambda, l1_ratio);
      for (std::size_t i : va) {
        double pred = ymean;
        for (std::size_t j = 0; j < cols.size(); ++j) {
          if (fit.beta[j] == 0.0 || cs[j] == 0.0) continue;
          pred += fit.beta[j] * (full.counts[j][i] - cm[j]) / cs[j];
        }
        total_sq += (pred - y[i]) * (pred - y[i]);
        total_cnt += 1;
      }
    }
    const double mse = total_sq / static_cast<double>(total_cnt);
    if (mse < best_mse - 1e-12) {
      best_mse = mse;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace threadlab
