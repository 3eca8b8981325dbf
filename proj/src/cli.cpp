#include "threadlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "threadlab/analysis.hpp"
#include "threadlab/corpus.hpp"
#include "threadlab/features.hpp"
#include "threadlab/genmodels.hpp"
#include "threadlab/learn.hpp"
#include "threadlab/patterns.hpp"
#include "threadlab/synth.hpp"
#include "threadlab/util.hpp"

namespace threadlab {
namespace {

namespace fs = std::filesystem;

using KvList = std::vector<std::pair<std::string, std::string>>;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out.flush()) throw std::runtime_error("write failed: " + path.string());
}

// key=value lines, loadable back through --config.
void write_config_echo(const fs::path& out_dir, const KvList& kv) {
  std::string text;
  for (const auto& [key, value] : kv) {
    text += key;
    text += '=';
    text += value;
    text += '\n';
  }
  write_file(out_dir / "config_echo.txt", text);
}

// Rejects values the given spec parser cannot digest, so bad model strings
// fail as usage errors instead of surfacing later at run time.
CLI::Validator parses_as(void (*probe)(const std::string&),
                         const std::string& label) {
  return CLI::Validator(
      [probe](std::string& value) -> std::string {
        try {
          probe(value);
          return {};
        } catch (const std::exception& e) {
          return e.what();
        }
      },
      label);
}

struct CommonArgs {
  std::string out = ".";
  std::uint64_t seed = 1;
  int jobs = 1;

  void add(CLI::App* sub) {
    sub->add_option("--out", out, "Output directory, created if missing");
    sub->add_option("--seed", seed, "Master seed; all randomness derives from it");
    sub->add_option("--jobs", jobs, "Thread cap; outputs never depend on it")
        ->check(CLI::PositiveNumber);
    sub->set_config("--config", "", "key=value file; command-line flags win");
  }

  fs::path prepare() const {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
  }

  // jobs and out stay out of the echo: outputs must not vary with either.
  void echo(KvList& kv) const {
    kv.emplace_back("seed", std::to_string(seed));
  }
};

struct CorpusArgs {
  std::string threads_path;
  std::string edges_path;

  void add(CLI::App* sub) {
    sub->add_option("--threads", threads_path, "Thread JSONL file")->required();
    sub->add_option("--edges", edges_path, "Friendship edge CSV file")
        ->required();
  }

  Corpus load() const {
    Corpus corpus = load_corpus(threads_path, edges_path);
    std::cerr << "loaded " << corpus.threads.size() << " threads, "
              << corpus.graph.vertex_count() << " participants, "
              << corpus.graph.edge_count() << " edges\n";
    return corpus;
  }

  void echo(KvList& kv) const {
    kv.emplace_back("threads", threads_path);
    kv.emplace_back("edges", edges_path);
  }
};

struct ModelArgs {
  std::string model = "urn";
  double alpha = 2.0;
  double beta = 1.0;
  std::string p = "uniform:0.5";
  std::string theta = "uniform";

  void add(CLI::App* sub, bool model_required) {
    auto* opt = sub->add_option("--model", model, "urn | classf")
                    ->check(CLI::IsMember({"urn", "classf"}));
    if (model_required) opt->required();
    sub->add_option("--alpha", alpha, "Urn reinforcement factor, >= 1");
    sub->add_option("--beta", beta, "Urn new-entrant weight, > 0");
    sub->add_option("--p", p,
                    "Class-F new-entrant probabilities: uniform:x | crp:c | "
                    "comma list")
        ->check(parses_as(
            +[](const std::string& s) { (void)PSpec::parse(s); }, "PSPEC"));
    sub->add_option("--theta", theta, "uniform | rich | recency")
        ->check(parses_as(
            +[](const std::string& s) { (void)ThetaRule::parse(s); },
            "THETA"));
  }

  ModelSpec spec() const {
    ModelSpec s;
    s.family = model == "urn" ? ModelSpec::Family::Urn
                              : ModelSpec::Family::ClassF;
    s.alpha = alpha;
    s.beta = beta;
    s.p = PSpec::parse(p);
    s.theta = ThetaRule::parse(theta);
    return s;
  }

  void echo(KvList& kv) const {
    kv.emplace_back("model", model);
    kv.emplace_back("alpha", fmt_double(alpha));
    kv.emplace_back("beta", fmt_double(beta));
    kv.emplace_back("p", p);
    kv.emplace_back("theta", theta);
  }
};

std::string modes_json(const std::vector<Mode>& found) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : found) {
    arr.push_back(
        {{"d", m.d}, {"mass", m.mass}, {"prominence", m.prominence}});
  }
  nlohmann::json root;
  root["modes"] = std::move(arr);
  return root.dump() + "\n";
}

std::vector<double> parse_edge_list(const std::string& text) {
  std::vector<double> edges;
  for (const auto& item : split(text, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      edges.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad bucket edge '" + item + "'");
    }
  }
  return edges;
}

// n_buckets - 1 interior edges; collapses to one catch-all bucket when the
// values are (nearly) constant.
std::vector<double> log_spaced_edges(const std::vector<double>& values,
                                     std::int64_t n_buckets) {
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = std::max(*lo_it, 1.0);
  const double hi = *hi_it;
  std::vector<double> edges;
  if (hi > lo) {
    for (std::int64_t i = 1; i < n_buckets; ++i) {
      const double e = lo * std::pow(hi / lo, static_cast<double>(i) /
                                                  static_cast<double>(n_buckets));
      if (edges.empty() ? e > lo : e > edges.back()) edges.push_back(e);
    }
  }
  if (edges.empty()) edges.push_back(hi + 1.0);
  return edges;
}

std::vector<double> linear_spaced_edges(const std::vector<double>& values,
                                        std::int64_t n_buckets) {
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::vector<double> edges;
  if (hi > lo) {
    for (std::int64_t i = 1; i < n_buckets; ++i) {
      const double e = lo + (hi - lo) * static_cast<double>(i) /
                                static_cast<double>(n_buckets);
      if (edges.empty() ? e > lo : e > edges.back()) edges.push_back(e);
    }
  }
  if (edges.empty()) edges.push_back(hi + 1.0);
  return edges;
}

struct SimulateArgs {
  CommonArgs common;
  ModelArgs model;
  std::int64_t k = 0;
  std::int64_t runs = 50000;
  bool exact = false;
  std::int64_t corpus_threads = 0;
};

void cmd_simulate(const SimulateArgs& a) {
  if (a.exact && a.model.model != "classf") {
    throw CLI::ValidationError("--exact",
                               "exact densities exist only for --model classf");
  }
  const fs::path out = a.common.prepare();
  const ModelSpec spec = a.model.spec();

  KvList kv;
  a.model.echo(kv);
  kv.emplace_back("k", std::to_string(a.k));
  kv.emplace_back("runs", std::to_string(a.runs));
  kv.emplace_back("exact", a.exact ? "true" : "false");
  kv.emplace_back("corpus-threads", std::to_string(a.corpus_threads));
  a.common.echo(kv);
  write_config_echo(out, kv);

  Density density;
  std::vector<Mode> found;
  std::string density_name;
  if (a.exact) {
    density = exact_distinct_distribution_classF(spec.p.materialize(a.k));
    found = modes(density, 1e-9);
    density_name = "exact_density.csv";
  } else {
    density = ensemble_density(spec.with_length(a.k),
                               static_cast<std::size_t>(a.runs), a.common.seed,
                               a.common.jobs);
    found = modes_mc(density, static_cast<std::size_t>(a.runs));
    density_name = "density.csv";
  }
  density.to_csv((out / density_name).string());
  write_file(out / "modes.json", modes_json(found));

  if (a.corpus_threads > 0) {
    SynthConfig sc;
    sc.n_posters = a.corpus_threads;
    sc.posts_per_poster = 1;
    sc.model = spec;
    sc.length.kind = LengthDist::Kind::Fixed;
    sc.length.fixed = a.k;
    sc.audience_size = a.k;
    sc.master_seed = a.common.seed;
    const Corpus corpus = generate_synthetic_corpus(sc);
    save_corpus(corpus, (out / "threads.jsonl").string(),
                (out / "edges.csv").string());
    std::cerr << "wrote " << corpus.threads.size() << "-thread corpus\n";
  }

  std::cout << "simulate: " << density_name << " has "
            << density.items().size() << " support points, " << found.size()
            << (found.size() == 1 ? " mode" : " modes") << "\n";
}

struct HeatmapArgs {
  CommonArgs common;
  CorpusArgs corpus;
  std::int64_t kmax = 50;
};

void cmd_heatmap(const HeatmapArgs& a) {
  const fs::path out = a.common.prepare();
  KvList kv;
  a.corpus.echo(kv);
  kv.emplace_back("kmax", std::to_string(a.kmax));
  a.common.echo(kv);
  write_config_echo(out, kv);

  const Corpus corpus = a.corpus.load();
  const HeatMap hm = heatmap(corpus, a.kmax);
  hm.to_csv((out / "heatmap.csv").string());
  std::int64_t populated = 0;
  for (const auto& col : hm.columns) populated += col.has_value();
  std::cout << "analyze heatmap: " << populated << " of " << a.kmax
            << " prefix columns populated\n";
}

struct PatternStatsArgs {
  CommonArgs common;
  CorpusArgs corpus;
  std::int64_t prefix = 5;
  bool binned = false;
  bool mean_length = false;
  std::int64_t min_threads_per_user = 1;
};

void cmd_pattern_stats(const PatternStatsArgs& a) {
  const fs::path out = a.common.prepare();
  KvList kv;
  a.corpus.echo(kv);
  kv.emplace_back("prefix", std::to_string(a.prefix));
  kv.emplace_back("binned", a.binned ? "true" : "false");
  kv.emplace_back("mean-length", a.mean_length ? "true" : "false");
  kv.emplace_back("min-threads-per-user",
                  std::to_string(a.min_threads_per_user));
  a.common.echo(kv);
  write_config_echo(out, kv);

  const Corpus corpus = a.corpus.load();
  const PatternStats stats = pattern_reentry_stats(
      corpus, static_cast<std::size_t>(a.prefix), a.binned);
  stats.to_csv((out / "pattern_stats.csv").string());
  if (a.mean_length) {
    GroupingSpec grouping;
    grouping.kind = GroupingSpec::Kind::PatternPrefix;
    grouping.k = a.prefix;
    grouping.measure = GroupingSpec::Measure::ThreadLength;
    conditional_mean_length(corpus, grouping, a.min_threads_per_user)
        .to_csv((out / "pattern_mean_length.csv").string());
  }
  std::cout << "analyze pattern-stats: " << stats.rows.size()
            << (a.binned ? " bins" : " patterns") << " at prefix " << a.prefix
            << "\n";
}

struct LinksArgs {
  CommonArgs common;
  CorpusArgs corpus;
  std::int64_t k = 2;
  std::string entity = "comments";
  std::int64_t min_threads_per_user = 1;
};

void cmd_length_vs_links(const LinksArgs& a) {
  const fs::path out = a.common.prepare();
  KvList kv;
  a.corpus.echo(kv);
  kv.emplace_back("k", std::to_string(a.k));
  kv.emplace_back("entity", a.entity);
  kv.emplace_back("min-threads-per-user",
                  std::to_string(a.min_threads_per_user));
  a.common.echo(kv);
  write_config_echo(out, kv);

  const Corpus corpus = a.corpus.load();
  GroupingSpec grouping;
  grouping.kind = GroupingSpec::Kind::LinksFirstK;
  grouping.k = a.k;
  grouping.entity = a.entity == "likes" ? GroupingSpec::Entity::Likes
                                        : GroupingSpec::Entity::Comments;
  const ConditionalMeanTable table =
      conditional_mean_length(corpus, grouping, a.min_threads_per_user);
  table.to_csv((out / "length_vs_links.csv").string());
  std::cout << "analyze length-vs-links: " << table.rows.size()
            << " edge-count groups over first-" << a.k << " " << a.entity
            << "\n";
}

struct LagArgs {
  CommonArgs common;
  CorpusArgs corpus;
  std::int64_t buckets = 20;
  std::string bucket_edges;
  std::int64_t min_threads_per_user = 1;
};

void cmd_length_vs_lag(const LagArgs& a) {
  const fs::path out = a.common.prepare();
  KvList kv;
  a.corpus.echo(kv);
  kv.emplace_back("buckets", std::to_string(a.buckets));
  if (!a.bucket_edges.empty()) kv.emplace_back("bucket-edges", a.bucket_edges);
  kv.emplace_back("min-threads-per-user",
                  std::to_string(a.min_threads_per_user));
  a.common.echo(kv);
  write_config_echo(out, kv);

  const Corpus corpus = a.corpus.load();
  GroupingSpec grouping;
  grouping.kind = GroupingSpec::Kind::FirstCommentLag;
  if (!a.bucket_edges.empty()) {
    grouping.bucket_edges = parse_edge_list(a.bucket_edges);
  } else {
    std::vector<double> lags;
    for (const auto& th : corpus.threads) {
      if (th.comments.empty()) continue;
      lags.push_back(
          static_cast<double>(th.comments.front().time - th.post_time));
    }
    if (lags.empty()) throw std::runtime_error("no thread has a comment");
    grouping.bucket_edges = log_spaced_edges(lags, a.buckets);
  }
  const ConditionalMeanTable table =
      conditional_mean_length(corpus, grouping, a.min_threads_per_user);
  table.to_csv((out / "length_vs_lag.csv").string());
  std::cout << "analyze length-vs-lag: " << table.rows.size()
            << " lag buckets\n";
}

struct DistinctArgs {
  CommonArgs common;
  CorpusArgs corpus;
  std::string kind = "post";
  std::string measure;  // empty picks the kind's natural measure
  std::int64_t buckets = 10;
  std::string bucket_edges;
  std::string lm_path;
  double oov_floor = 1e-4;
  std::int64_t min_words = 8;
  std::int64_t min_posts = 10;
  std::int64_t min_threads_per_user = 1;
};

void cmd_distinctiveness(const DistinctArgs& a) {
  const fs::path out = a.common.prepare();
  KvList kv;
  a.corpus.echo(kv);
  kv.emplace_back("kind", a.kind);
  if (!a.measure.empty()) kv.emplace_back("measure", a.measure);
  kv.emplace_back("buckets", std::to_string(a.buckets));
  if (!a.bucket_edges.empty()) kv.emplace_back("bucket-edges", a.bucket_edges);
  if (!a.lm_path.empty()) kv.emplace_back("lm", a.lm_path);
  kv.emplace_back("oov-floor", fmt_double(a.oov_floor));
  kv.emplace_back("min-words", std::to_string(a.min_words));
  kv.emplace_back("min-posts", std::to_string(a.min_posts));
  kv.emplace_back("min-threads-per-user",
                  std::to_string(a.min_threads_per_user));
  a.common.echo(kv);
  write_config_echo(out, kv);

  const Corpus corpus = a.corpus.load();
  GroupingSpec grouping;
  grouping.min_words = a.min_words;
  grouping.min_posts = a.min_posts;

  std::optional<UnigramLM> lm;
  if (a.kind == "post") {
    grouping.kind = GroupingSpec::Kind::PostDistinctiveness;
    if (!a.lm_path.empty()) {
      lm = UnigramLM::load_csv(a.lm_path);
    } else {
      std::vector<std::string> posts;
      posts.reserve(corpus.threads.size());
      for (const auto& th : corpus.threads) posts.push_back(th.post_text);
      lm = train_unigram_lm(posts, a.oov_floor);
      lm->save_csv((out / "lm.csv").string());
      std::cerr << "trained unigram LM on " << posts.size() << " posts ("
                << lm->probs().size() << " tokens)\n";
    }
    grouping.lm = &*lm;
  } else {
    grouping.kind = GroupingSpec::Kind::FirstCommenterDistinctiveness;
  }

  const std::string measure =
      !a.measure.empty() ? a.measure : (a.kind == "post" ? "length" : "reentry");
  grouping.measure = measure == "reentry"
                         ? GroupingSpec::Measure::FirstCommenterReentry
                         : GroupingSpec::Measure::ThreadLength;

  if (!a.bucket_edges.empty()) {
    grouping.bucket_edges = parse_edge_list(a.bucket_edges);
  } else if (a.kind == "post") {
    std::vector<double> scores;
    for (const auto& th : corpus.threads) {
      if (static_cast<std::int64_t>(tokenize(th.post_text).size()) <
          a.min_words) {
        continue;
      }
      scores.push_back(post_distinctiveness(th.post_text, *lm));
    }
    if (scores.empty()) {
      throw std::runtime_error("no post has at least " +
                               std::to_string(a.min_words) + " tokens");
    }
    grouping.bucket_edges = linear_spaced_edges(scores, a.buckets);
  } else {
    // The score is a fraction, so even cuts of [0, 1] need no data pass.
    for (std::int64_t i = 1; i < a.buckets; ++i) {
      grouping.bucket_edges.push_back(static_cast<double>(i) /
                                      static_cast<double>(a.buckets));
    }
    if (grouping.bucket_edges.empty()) grouping.bucket_edges.push_back(1.0);
  }

  const ConditionalMeanTable table =
      conditional_mean_length(corpus, grouping, a.min_threads_per_user);
  table.to_csv((out / "distinctiveness.csv").string());
  std::cout << "analyze distinctiveness: " << table.rows.size() << " " << a.kind
            << " buckets (" << measure << ")\n";
}

struct MakeCorpusArgs {
  CommonArgs common;
  ModelArgs model;
  std::string length = "geometric:6";
  std::int64_t posters = 100;
  std::int64_t posts_per_poster = 10;
  std::int64_t audience = 80;
  double p_edge = 0.1;
  double gap_mean = 600.0;
  double gap_coupling = 0.0;
  std::int64_t vocab = 1000;
  double zipf = 1.1;
  std::int64_t post_words_min = 5;
  std::int64_t post_words_max = 20;
  std::int64_t comment_words_min = 2;
  std::int64_t comment_words_max = 12;
  double question_prob = 0.1;
  double exclaim_prob = 0.1;
  double post_like_rate = 2.0;
  double comment_like_rate = 0.5;
};

void cmd_make_corpus(const MakeCorpusArgs& a) {
  const fs::path out = a.common.prepare();
  KvList kv;
  a.model.echo(kv);
  kv.emplace_back("length", a.length);
  kv.emplace_back("posters", std::to_string(a.posters));
  kv.emplace_back("posts-per-poster", std::to_string(a.posts_per_poster));
  kv.emplace_back("audience", std::to_string(a.audience));
  kv.emplace_back("p-edge", fmt_double(a.p_edge));
  kv.emplace_back("gap-mean", fmt_double(a.gap_mean));
  kv.emplace_back("gap-coupling", fmt_double(a.gap_coupling));
  kv.emplace_back("vocab", std::to_string(a.vocab));
  kv.emplace_back("zipf", fmt_double(a.zipf));
  kv.emplace_back("post-words-min", std::to_string(a.post_words_min));
  kv.emplace_back("post-words-max", std::to_string(a.post_words_max));
  kv.emplace_back("comment-words-min", std::to_string(a.comment_words_min));
  kv.emplace_back("comment-words-max", std::to_string(a.comment_words_max));
  kv.emplace_back("question-prob", fmt_double(a.question_prob));
  kv.emplace_back("exclaim-prob", fmt_double(a.exclaim_prob));
  kv.emplace_back("post-like-rate", fmt_double(a.post_like_rate));
  kv.emplace_back("comment-like-rate", fmt_double(a.comment_like_rate));
  a.common.echo(kv);
  write_config_echo(out, kv);

  SynthConfig sc;
  sc.n_posters = a.posters;
  sc.posts_per_poster = a.posts_per_poster;
  sc.model = a.model.spec();
  sc.length = LengthDist::parse(a.length);
  sc.audience_size = a.audience;
  sc.p_edge = a.p_edge;
  sc.gap_mean_seconds = a.gap_mean;
  sc.gap_length_coupling = a.gap_coupling;
  sc.vocab_size = a.vocab;
  sc.zipf_exponent = a.zipf;
  sc.post_words_min = a.post_words_min;
  sc.post_words_max = a.post_words_max;
  sc.comment_words_min = a.comment_words_min;
  sc.comment_words_max = a.comment_words_max;
  sc.question_prob = a.question_prob;
  sc.exclaim_prob = a.exclaim_prob;
  sc.post_like_rate = a.post_like_rate;
  sc.comment_like_rate = a.comment_like_rate;
  sc.master_seed = a.common.seed;

  const Corpus corpus = generate_synthetic_corpus(sc);
  save_corpus(corpus, (out / "threads.jsonl").string(),
              (out / "edges.csv").string());
  std::cout << "make-corpus: " << corpus.threads.size() << " threads, "
            << corpus.graph.vertex_count() << " participants, "
            << corpus.graph.edge_count() << " edges\n";
}

struct TaskArgs {
  std::string task = "length";
  std::int64_t prefix = 5;
  std::int64_t threshold = 8;
  std::int32_t target_code = 1;
  bool no_fb = false;
  std::string lm_path;
  bool first_commenter = false;
  std::int64_t min_posts = 10;
  std::string post_terms;

  void add(CLI::App* sub) {
    sub->add_option("--task", task, "length | reentry")
        ->check(CLI::IsMember({"length", "reentry"}));
    sub->add_option("--prefix", prefix, "Observed comment count")
        ->check(CLI::PositiveNumber);
    sub->add_option("--threshold", threshold,
                    "length task: positive when final length >= this")
        ->check(CLI::PositiveNumber);
    sub->add_option("--target-code", target_code,
                    "reentry task: ID code whose return is predicted")
        ->check(CLI::NonNegativeNumber);
    sub->add_flag("--no-fb", no_fb,
                  "Drop graph, like and punctuation features");
    sub->add_option("--lm", lm_path,
                    "Unigram LM CSV; adds the post-distinctiveness feature");
    sub->add_flag("--first-commenter", first_commenter,
                  "Add the first-commenter-distinctiveness feature");
    sub->add_option("--min-posts", min_posts,
                    "History floor for first-commenter distinctiveness")
        ->check(CLI::PositiveNumber);
    sub->add_option("--post-terms", post_terms,
                    "Comma-separated post terms added as 0/1 indicators");
  }

  void echo(KvList& kv) const {
    kv.emplace_back("task", task);
    kv.emplace_back("prefix", std::to_string(prefix));
    kv.emplace_back("threshold", std::to_string(threshold));
    kv.emplace_back("target-code", std::to_string(target_code));
    kv.emplace_back("no-fb", no_fb ? "true" : "false");
    if (!lm_path.empty()) kv.emplace_back("lm", lm_path);
    kv.emplace_back("first-commenter", first_commenter ? "true" : "false");
    kv.emplace_back("min-posts", std::to_string(min_posts));
    if (!post_terms.empty()) kv.emplace_back("post-terms", post_terms);
  }
};

// Owns the optional LM / first-commenter index the FeatureOptions point at.
struct FeatureBundle {
  std::optional<UnigramLM> lm;
  std::optional<FirstCommenterIndex> first_commenters;
  FeatureOptions options;
};

void wire_features(const TaskArgs& task, const Corpus& corpus,
                   FeatureBundle& bundle) {
  bundle.options.fb_features = !task.no_fb;
  bundle.options.min_posts = task.min_posts;
  if (!task.lm_path.empty()) {
    bundle.lm = UnigramLM::load_csv(task.lm_path);
    bundle.options.lm = &*bundle.lm;
  }
  if (task.first_commenter) {
    bundle.first_commenters.emplace(corpus);
    bundle.options.first_commenters = &*bundle.first_commenters;
  }
  if (!task.post_terms.empty()) {
    bundle.options.post_terms = split(task.post_terms, ',');
  }
}

Dataset build_task_dataset(const Corpus& corpus, const TaskArgs& task,
                           const FeatureOptions& options) {
  if (task.task == "length") {
    LengthTaskConfig cfg;
    cfg.prefix_len = task.prefix;
    cfg.length_threshold = task.threshold;
    cfg.features = options;
    return build_length_dataset(corpus, cfg);
  }
  ReentryTaskConfig cfg;
  cfg.prefix_len = task.prefix;
  cfg.target_code = task.target_code;
  cfg.features = options;
  return build_reentry_dataset(corpus, cfg);
}

std::string metrics_json(const MetricsReport& metrics, const KvList& kv) {
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [key, value] : kv) cfg[key] = value;
  nlohmann::json root;
  root["metrics"] = nlohmann::json::parse(metrics.to_json());
  root["config"] = std::move(cfg);
  return root.dump() + "\n";
}

std::string metrics_line(const MetricsReport& m) {
  std::ostringstream os;
  os << "acc=" << fmt_double(m.acc) << " auc=" << fmt_double(m.auc)
     << " rmse=" << fmt_double(m.rmse) << " apr=" << fmt_double(m.apr)
     << " cxe=" << fmt_double(m.cxe);
  return os.str();
}

struct ExtractArgs {
  CommonArgs common;
  CorpusArgs corpus;
  TaskArgs task;
};

void cmd_extract_features(const ExtractArgs& a) {
  const fs::path out = a.common.prepare();
  KvList kv;
  a.corpus.echo(kv);
  a.task.echo(kv);
  a.common.echo(kv);
  write_config_echo(out, kv);

  const Corpus corpus = a.corpus.load();
  FeatureBundle bundle;
  wire_features(a.task, corpus, bundle);
  const Dataset dataset = build_task_dataset(corpus, a.task, bundle.options);
  dataset.to_csv((out / "dataset.csv").string());
  std::cout << "extract-features: " << dataset.n_rows() << " rows, "
            << dataset.feature_names.size() << " features\n";
}

struct TrainArgs {
  CommonArgs common;
  CorpusArgs corpus;
  TaskArgs task;
  std::int64_t trees = 60;
  std::int64_t max_depth = 12;
  std::int64_t min_leaf = 10;
  double test_fraction = 0.25;
  double decision_threshold = 0.5;
};

void cmd_train(const TrainArgs& a) {
  const fs::path out = a.common.prepare();
  KvList kv;
  a.corpus.echo(kv);
  a.task.echo(kv);
  kv.emplace_back("trees", std::to_string(a.trees));
  kv.emplace_back("max-depth", std::to_string(a.max_depth));
  kv.emplace_back("min-leaf", std::to_string(a.min_leaf));
  kv.emplace_back("test-fraction", fmt_double(a.test_fraction));
  kv.emplace_back("decision-threshold", fmt_double(a.decision_threshold));
  a.common.echo(kv);
  write_config_echo(out, kv);

  const Corpus corpus = a.corpus.load();
  FeatureBundle bundle;
  wire_features(a.task, corpus, bundle);
  const Dataset full = build_task_dataset(corpus, a.task, bundle.options);
  const auto [train_set, test_set] =
      split_dataset(full, a.common.seed, a.test_fraction);
  std::cerr << "split " << full.n_rows() << " rows into "
            << train_set.n_rows() << " train / " << test_set.n_rows()
            << " test\n";

  const TreeParams params{a.max_depth, a.min_leaf};
  const TreeEnsemble ensemble = train_bagged_trees(
      train_set, a.trees, params, a.common.seed, a.common.jobs);
  ensemble.save((out / "model.json").string());

  const std::vector<double> scores = predict_dataset(ensemble, test_set);
  const MetricsReport metrics =
      evaluate(scores, test_set.labels, a.decision_threshold);
  metrics.save_csv((out / "metrics.csv").string());
  write_file(out / "metrics.json", metrics_json(metrics, kv));
  std::cout << "train: test " << metrics_line(metrics) << "\n";
}

struct EvaluateArgs {
  CommonArgs common;
  CorpusArgs corpus;
  TaskArgs task;
  std::string model_path;
  std::string baseline;
  double decision_threshold = 0.5;
};

void cmd_evaluate(const EvaluateArgs& a) {
  if (a.model_path.empty() == a.baseline.empty()) {
    throw CLI::ValidationError("pass exactly one of --model or --baseline");
  }
  const fs::path out = a.common.prepare();
  KvList kv;
  a.corpus.echo(kv);
  a.task.echo(kv);
  if (!a.model_path.empty()) kv.emplace_back("model", a.model_path);
  if (!a.baseline.empty()) kv.emplace_back("baseline", a.baseline);
  kv.emplace_back("decision-threshold", fmt_double(a.decision_threshold));
  a.common.echo(kv);
  write_config_echo(out, kv);

  const Corpus corpus = a.corpus.load();
  FeatureBundle bundle;
  wire_features(a.task, corpus, bundle);
  const Dataset dataset = build_task_dataset(corpus, a.task, bundle.options);

  std::vector<double> scores;
  if (!a.baseline.empty()) {
    const double q = positive_bias_baseline(dataset.labels);
    scores.assign(dataset.n_rows(), q);
    std::cerr << "positive-bias baseline scores every row " << fmt_double(q)
              << "\n";
  } else {
    const TreeEnsemble ensemble = TreeEnsemble::load(a.model_path);
    scores = predict_dataset(ensemble, dataset);
  }
  const MetricsReport metrics =
      evaluate(scores, dataset.labels, a.decision_threshold);
  metrics.save_csv((out / "metrics.csv").string());
  write_file(out / "metrics.json", metrics_json(metrics, kv));
  std::cout << "evaluate: " << metrics_line(metrics) << "\n";
}

struct SelectArgs {
  CommonArgs common;
  CorpusArgs corpus;
  TaskArgs task;
  std::int64_t max_steps = 10;
  std::int64_t inner_trees = 20;
  std::int64_t final_trees = 60;
  std::int64_t max_depth = 12;
  std::int64_t min_leaf = 10;
  double validation_fraction = 0.25;
  double epsilon = 1e-4;
};

void cmd_select_features(const SelectArgs& a) {
  const fs::path out = a.common.prepare();
  KvList kv;
  a.corpus.echo(kv);
  a.task.echo(kv);
  kv.emplace_back("max-steps", std::to_string(a.max_steps));
  kv.emplace_back("inner-trees", std::to_string(a.inner_trees));
  kv.emplace_back("final-trees", std::to_string(a.final_trees));
  kv.emplace_back("max-depth", std::to_string(a.max_depth));
  kv.emplace_back("min-leaf", std::to_string(a.min_leaf));
  kv.emplace_back("validation-fraction", fmt_double(a.validation_fraction));
  kv.emplace_back("epsilon", fmt_double(a.epsilon));
  a.common.echo(kv);
  write_config_echo(out, kv);

  const Corpus corpus = a.corpus.load();
  FeatureBundle bundle;
  wire_features(a.task, corpus, bundle);
  const Dataset full = build_task_dataset(corpus, a.task, bundle.options);
  const auto [train_set, validation_set] =
      split_dataset(full, a.common.seed, a.validation_fraction);

  SelectionConfig cfg;
  cfg.inner_trees = a.inner_trees;
  cfg.final_trees = a.final_trees;
  cfg.tree_params = TreeParams{a.max_depth, a.min_leaf};
  cfg.seed = a.common.seed;
  cfg.epsilon = a.epsilon;
  cfg.jobs = a.common.jobs;

  const std::vector<SelectionStep> steps = stepwise_forward_selection(
      train_set, validation_set, full.feature_names, a.max_steps, cfg);
  std::string csv = "feature,auc\n";
  for (const auto& step : steps) {
    csv += step.feature;
    csv += ',';
    csv += fmt_double(step.auc);
    csv += '\n';
  }
  write_file(out / "selection.csv", csv);
  std::cout << "select-features: " << steps.size()
            << " features, final auc=" << fmt_double(steps.back().auc) << "\n";
}

struct CvArgs {
  CommonArgs common;
  CorpusArgs corpus;
  TaskArgs task;
  std::int64_t folds = 5;
  std::int64_t trees = 60;
  std::int64_t max_depth = 12;
  std::int64_t min_leaf = 10;
  double decision_threshold = 0.5;
};

void cmd_cross_validate(const CvArgs& a) {
  const fs::path out = a.common.prepare();
  KvList kv;
  a.corpus.echo(kv);
  a.task.echo(kv);
  kv.emplace_back("folds", std::to_string(a.folds));
  kv.emplace_back("trees", std::to_string(a.trees));
  kv.emplace_back("max-depth", std::to_string(a.max_depth));
  kv.emplace_back("min-leaf", std::to_string(a.min_leaf));
  kv.emplace_back("decision-threshold", fmt_double(a.decision_threshold));
  a.common.echo(kv);
  write_config_echo(out, kv);

  const Corpus corpus = a.corpus.load();
  FeatureBundle bundle;
  wire_features(a.task, corpus, bundle);
  const Dataset dataset = build_task_dataset(corpus, a.task, bundle.options);

  CvConfig cfg;
  cfg.n_trees = a.trees;
  cfg.tree_params = TreeParams{a.max_depth, a.min_leaf};
  cfg.seed = a.common.seed;
  cfg.threshold = a.decision_threshold;
  cfg.jobs = a.common.jobs;

  const MetricsReport metrics = cross_validate(dataset, a.folds, cfg);
  metrics.save_csv((out / "metrics.csv").string());
  write_file(out / "metrics.json", metrics_json(metrics, kv));
  std::cout << "cross-validate: " << a.folds << "-fold "
            << metrics_line(metrics) << "\n";
}

// CLI11 only reads config files attached to the app it parses, never ones on
// subcommands, so key=value files are expanded into --key=value tokens up
// front. Keys already given on the command line are skipped: flags win.
std::vector<std::string> expand_config_args(
    const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      break;
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);

  const auto trim = [](std::string s) {
    const auto from = s.find_first_not_of(" \t\r");
    const auto to = s.find_last_not_of(" \t\r");
    return from == std::string::npos ? std::string()
                                     : s.substr(from, to - from + 1);
  };

  std::vector<std::string> expanded = args;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty() || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config") continue;
    const std::string flag = "--" + key;
    bool given = false;
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        given = true;
        break;
      }
    }
    if (!given) expanded.push_back(flag + "=" + value);
  }
  return expanded;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{
      "Thread dynamics workbench: synthetic conversation corpora, "
      "arrival-pattern analysis and growth prediction"};
  app.name("threadlab");
  app.require_subcommand(1);

  SimulateArgs sim;
  {
    auto* sub = app.add_subcommand(
        "simulate",
        "Sample a growth model and write its distinct-participant density");
    sim.model.add(sub, /*model_required=*/true);
    sub->add_option("--k", sim.k, "Comments per simulated thread")
        ->required()
        ->check(CLI::PositiveNumber);
    sub->add_option("--runs", sim.runs, "Monte Carlo sample count")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--exact", sim.exact,
                  "Write the exact class-F distribution instead of sampling");
    sub->add_option("--corpus-threads", sim.corpus_threads,
                    "Also emit a synthetic corpus with this many threads")
        ->check(CLI::NonNegativeNumber);
    sim.common.add(sub);
    sub->callback([&sim] { cmd_simulate(sim); });
  }

  auto* analyze = app.add_subcommand("analyze", "Corpus analysis tables");
  analyze->require_subcommand(1);

  HeatmapArgs heat;
  {
    auto* sub = analyze->add_subcommand(
        "heatmap", "Distinct-participant distribution per prefix length");
    heat.corpus.add(sub);
    sub->add_option("--kmax", heat.kmax, "Largest prefix length")
        ->check(CLI::PositiveNumber);
    heat.common.add(sub);
    sub->callback([&heat] { cmd_heatmap(heat); });
  }

  PatternStatsArgs pstats;
  {
    auto* sub = analyze->add_subcommand(
        "pattern-stats", "Re-entry rate and share per arrival-pattern prefix");
    pstats.corpus.add(sub);
    sub->add_option("--prefix", pstats.prefix, "Pattern prefix length")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--binned", pstats.binned,
                  "Group by occurrence counts instead of exact order");
    sub->add_flag("--mean-length", pstats.mean_length,
                  "Also write mean final length per pattern");
    sub->add_option("--min-threads-per-user", pstats.min_threads_per_user,
                    "Per-user floor for the mean-length table")
        ->check(CLI::PositiveNumber);
    pstats.common.add(sub);
    sub->callback([&pstats] { cmd_pattern_stats(pstats); });
  }

  LinksArgs links;
  {
    auto* sub = analyze->add_subcommand(
        "length-vs-links",
        "Mean final length by friendship edges among early participants");
    links.corpus.add(sub);
    sub->add_option("--k", links.k, "How many first distinct participants")
        ->check(CLI::PositiveNumber);
    sub->add_option("--entity", links.entity, "comments | likes")
        ->check(CLI::IsMember({"comments", "likes"}));
    sub->add_option("--min-threads-per-user", links.min_threads_per_user)
        ->check(CLI::PositiveNumber);
    links.common.add(sub);
    sub->callback([&links] { cmd_length_vs_links(links); });
  }

  LagArgs lag;
  {
    auto* sub = analyze->add_subcommand(
        "length-vs-lag", "Mean final length by post-to-first-comment delay");
    lag.corpus.add(sub);
    sub->add_option("--buckets", lag.buckets,
                    "Log-spaced lag bucket count (data-driven edges)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--bucket-edges", lag.bucket_edges,
                    "Comma-separated explicit bucket edges");
    sub->add_option("--min-threads-per-user", lag.min_threads_per_user)
        ->check(CLI::PositiveNumber);
    lag.common.add(sub);
    sub->callback([&lag] { cmd_length_vs_lag(lag); });
  }

  DistinctArgs dist;
  {
    auto* sub = analyze->add_subcommand(
        "distinctiveness",
        "Outcomes grouped by post text or first-commenter distinctiveness");
    dist.corpus.add(sub);
    sub->add_option("--kind", dist.kind, "post | first-commenter")
        ->check(CLI::IsMember({"post", "first-commenter"}));
    sub->add_option("--measure", dist.measure,
                    "length | reentry (default depends on --kind)")
        ->check(CLI::IsMember({"length", "reentry"}));
    sub->add_option("--buckets", dist.buckets, "Bucket count")
        ->check(CLI::PositiveNumber);
    sub->add_option("--bucket-edges", dist.bucket_edges,
                    "Comma-separated explicit bucket edges");
    sub->add_option("--lm", dist.lm_path,
                    "Unigram LM CSV (default: train on the corpus posts)");
    sub->add_option("--oov-floor", dist.oov_floor,
                    "Unseen-token probability for a freshly trained LM");
    sub->add_option("--min-words", dist.min_words,
                    "Posts with fewer tokens are skipped")
        ->check(CLI::PositiveNumber);
    sub->add_option("--min-posts", dist.min_posts,
                    "History floor for first-commenter distinctiveness")
        ->check(CLI::PositiveNumber);
    sub->add_option("--min-threads-per-user", dist.min_threads_per_user)
        ->check(CLI::PositiveNumber);
    dist.common.add(sub);
    sub->callback([&dist] { cmd_distinctiveness(dist); });
  }

  MakeCorpusArgs mk;
  {
    auto* sub = app.add_subcommand(
        "make-corpus", "Generate a synthetic corpus with a friendship graph");
    mk.model.add(sub, /*model_required=*/false);
    sub->add_option("--length", mk.length,
                    "Length distribution: fixed:n | uniform:lo,hi | "
                    "geometric:mean[,cap]")
        ->check(parses_as(
            +[](const std::string& s) { (void)LengthDist::parse(s); },
            "LENGTH"));
    sub->add_option("--posters", mk.posters, "Number of posters")
        ->check(CLI::PositiveNumber);
    sub->add_option("--posts-per-poster", mk.posts_per_poster)
        ->check(CLI::PositiveNumber);
    sub->add_option("--audience", mk.audience,
                    "Potential commenters per poster")
        ->check(CLI::PositiveNumber);
    sub->add_option("--p-edge", mk.p_edge,
                    "Friendship probability within a poster's circle")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--gap-mean", mk.gap_mean,
                    "Mean seconds between consecutive comments")
        ->check(CLI::PositiveNumber);
    sub->add_option("--gap-coupling", mk.gap_coupling,
                    "How strongly long threads speed up (0 = independent)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--vocab", mk.vocab, "Vocabulary size")
        ->check(CLI::PositiveNumber);
    sub->add_option("--zipf", mk.zipf, "Word-frequency decay exponent")
        ->check(CLI::PositiveNumber);
    sub->add_option("--post-words-min", mk.post_words_min)
        ->check(CLI::PositiveNumber);
    sub->add_option("--post-words-max", mk.post_words_max)
        ->check(CLI::PositiveNumber);
    sub->add_option("--comment-words-min", mk.comment_words_min)
        ->check(CLI::PositiveNumber);
    sub->add_option("--comment-words-max", mk.comment_words_max)
        ->check(CLI::PositiveNumber);
    sub->add_option("--question-prob", mk.question_prob)
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--exclaim-prob", mk.exclaim_prob)
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--post-like-rate", mk.post_like_rate,
                    "Poisson mean likes per post")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--comment-like-rate", mk.comment_like_rate,
                    "Poisson mean likes per comment")
        ->check(CLI::NonNegativeNumber);
    mk.common.add(sub);
    sub->callback([&mk] { cmd_make_corpus(mk); });
  }

  ExtractArgs ext;
  {
    auto* sub = app.add_subcommand(
        "extract-features", "Write the per-thread feature matrix as CSV");
    ext.corpus.add(sub);
    ext.task.add(sub);
    ext.common.add(sub);
    sub->callback([&ext] { cmd_extract_features(ext); });
  }

  TrainArgs tr;
  {
    auto* sub = app.add_subcommand(
        "train", "Fit bagged trees on a split and report held-out metrics");
    tr.corpus.add(sub);
    tr.task.add(sub);
    sub->add_option("--trees", tr.trees)->check(CLI::PositiveNumber);
    sub->add_option("--max-depth", tr.max_depth)->check(CLI::PositiveNumber);
    sub->add_option("--min-leaf", tr.min_leaf)->check(CLI::PositiveNumber);
    sub->add_option("--test-fraction", tr.test_fraction)
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--decision-threshold", tr.decision_threshold)
        ->check(CLI::Range(0.0, 1.0));
    tr.common.add(sub);
    sub->callback([&tr] { cmd_train(tr); });
  }

  EvaluateArgs ev;
  {
    auto* sub = app.add_subcommand(
        "evaluate", "Score a saved model or a baseline on a corpus task");
    ev.corpus.add(sub);
    ev.task.add(sub);
    sub->add_option("--model", ev.model_path, "Trained ensemble JSON");
    sub->add_option("--baseline", ev.baseline, "positive-bias")
        ->check(CLI::IsMember({"positive-bias"}));
    sub->add_option("--decision-threshold", ev.decision_threshold)
        ->check(CLI::Range(0.0, 1.0));
    ev.common.add(sub);
    sub->callback([&ev] { cmd_evaluate(ev); });
  }

  SelectArgs sel;
  {
    auto* sub = app.add_subcommand(
        "select-features",
        "Greedy forward feature selection by validation AUC");
    sel.corpus.add(sub);
    sel.task.add(sub);
    sub->add_option("--max-steps", sel.max_steps)->check(CLI::PositiveNumber);
    sub->add_option("--inner-trees", sel.inner_trees,
                    "Ensemble size during candidate scans")
        ->check(CLI::PositiveNumber);
    sub->add_option("--final-trees", sel.final_trees,
                    "Ensemble size for the reported AUCs")
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-depth", sel.max_depth)->check(CLI::PositiveNumber);
    sub->add_option("--min-leaf", sel.min_leaf)->check(CLI::PositiveNumber);
    sub->add_option("--validation-fraction", sel.validation_fraction)
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--epsilon", sel.epsilon,
                    "Minimum AUC gain to keep adding features")
        ->check(CLI::NonNegativeNumber);
    sel.common.add(sub);
    sub->callback([&sel] { cmd_select_features(sel); });
  }

  CvArgs cv;
  {
    auto* sub = app.add_subcommand(
        "cross-validate", "K-fold metrics with folds assigned per thread");
    cv.corpus.add(sub);
    cv.task.add(sub);
    sub->add_option("--folds", cv.folds)->check(CLI::Range(2, 1000000));
    sub->add_option("--trees", cv.trees)->check(CLI::PositiveNumber);
    sub->add_option("--max-depth", cv.max_depth)->check(CLI::PositiveNumber);
    sub->add_option("--min-leaf", cv.min_leaf)->check(CLI::PositiveNumber);
    sub->add_option("--decision-threshold", cv.decision_threshold)
        ->check(CLI::Range(0.0, 1.0));
    cv.common.add(sub);
    sub->callback([&cv] { cmd_cross_validate(cv); });
  }

  try {
    const std::vector<std::string> expanded = expand_config_args(args);
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace threadlab
