#include "threadlab/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "threadlab/patterns.hpp"
#include "threadlab/rng.hpp"
#include "threadlab/util.hpp"

namespace threadlab {

std::size_t Dataset::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < feature_names.size(); ++j) {
    if (feature_names[j] == name) return j;
  }
  throw std::invalid_argument("unknown feature '" + name + "'");
}

Dataset Dataset::select_columns(const std::vector<std::string>& names) const {
  Dataset out;
  out.feature_names = names;
  out.columns.reserve(names.size());
  for (const auto& name : names) {
    out.columns.push_back(columns[column_index(name)]);
  }
  out.labels = labels;
  out.ids = ids;
  return out;
}

void Dataset::to_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t j = 0; j < feature_names.size(); ++j) {
    if (j) out << ',';
    out << feature_names[j];
  }
  out << (feature_names.empty() ? "label" : ",label") << "\n";
  for (std::size_t i = 0; i < n_rows(); ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j) out << ',';
      out << fmt_double(columns[j][i]);
    }
    out << (columns.empty() ? "" : ",") << labels[i] << "\n";
  }
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

namespace {

void append_row(Dataset& d, const std::vector<std::string>& schema,
                const FeatureVector& fv, int label,
                Dataset::InstanceId id) {
  for (std::size_t j = 0; j < schema.size(); ++j) {
    auto it = fv.find(schema[j]);
    if (it == fv.end()) {
      throw std::logic_error("feature '" + schema[j] +
                             "' missing from extraction output");
    }
    d.columns[j].push_back(it->second);
  }
  d.labels.push_back(label);
  d.ids.push_back(std::move(id));
}

Dataset subset_rows(const Dataset& d, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.feature_names = d.feature_names;
  out.columns.assign(d.columns.size(), {});
  for (std::size_t j = 0; j < d.columns.size(); ++j) {
    out.columns[j].reserve(rows.size());
    for (std::size_t i : rows) out.columns[j].push_back(d.columns[j][i]);
  }
  out.labels.reserve(rows.size());
  out.ids.reserve(rows.size());
  for (std::size_t i : rows) {
    out.labels.push_back(d.labels[i]);
    out.ids.push_back(d.ids[i]);
  }
  return out;
}

}  // namespace

Dataset build_length_dataset(const Corpus& corpus,
                             const LengthTaskConfig& config) {
  if (config.prefix_len < 1) {
    throw std::invalid_argument("prefix_len must be >= 1");
  }
  const auto schema = feature_schema(config.prefix_len, config.features);
  Dataset d;
  d.feature_names = schema;
  d.columns.assign(schema.size(), {});
  for (const auto& th : corpus.threads) {
    const auto len = static_cast<std::int64_t>(th.length());
    if (len < config.prefix_len) continue;
    const FeatureVector fv = extract_features(th, config.prefix_len,
                                              corpus.graph, config.features);
    const int label = len >= config.length_threshold ? 1 : 0;
    append_row(d, schema, fv, label, {th.thread_id, -1});
  }
  if (d.labels.empty()) {
    throw std::runtime_error("no thread has length >= " +
                             std::to_string(config.prefix_len));
  }
  return d;
}

Dataset build_reentry_dataset(const Corpus& corpus,
                              const ReentryTaskConfig& config) {
  if (config.prefix_len < 1) {
    throw std::invalid_argument("prefix_len must be >= 1");
  }
  const auto schema = feature_schema(config.prefix_len, config.features);
  Dataset d;
  d.feature_names = schema;
  d.columns.assign(schema.size(), {});
  for (const auto& th : corpus.threads) {
    if (static_cast<std::int64_t>(th.length()) < config.prefix_len) continue;
    const ArrivalPattern pat = encode_arrival_pattern(th);
    const auto begin = pat.codes.begin();
    const auto end = begin + static_cast<std::ptrdiff_t>(config.prefix_len);
    if (std::find(begin, end, config.target_code) == end) continue;
    const bool again = reentry_label(pat, config.prefix_len,
                                     config.target_code);
    const FeatureVector fv = extract_features(th, config.prefix_len,
                                              corpus.graph, config.features);
    append_row(d, schema, fv, again ? 1 : 0,
               {th.thread_id, config.target_code});
  }
  if (d.labels.empty()) {
    throw std::runtime_error(
        "no qualifying thread: need length >= " +
        std::to_string(config.prefix_len) + " with code " +
        std::to_string(config.target_code) + " in the prefix");
  }
  return d;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset,
                                          std::uint64_t seed,
                                          double test_fraction) {
  const std::size_t n = dataset.n_rows();
  if (!(test_fraction > 0.0) || !(test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = Rng::substream(seed, 0);
  rng.shuffle(perm);
  const std::size_t n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test == n) {
    throw std::invalid_argument("split would leave an empty set (n=" +
                                std::to_string(n) + ")");
  }
  std::vector<std::size_t> test(perm.begin(),
                                perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_test),
                                 perm.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {subset_rows(dataset, train), subset_rows(dataset, test)};
}

double DecisionTree::predict(const std::vector<double>& row) const {
  std::size_t at = 0;
  while (nodes[at].feature >= 0) {
    const TreeNode& nd = nodes[at];
    at = static_cast<std::size_t>(
        row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                  : nd.right);
  }
  return nodes[at].leaf_value;
}

namespace {

double gini(std::int64_t pos, std::int64_t n) {
  const double p = static_cast<double>(pos) / static_cast<double>(n);
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TreeParams& params)
      : data_(data), params_(params) {}

  DecisionTree build(std::vector<std::size_t> rows) {
    DecisionTree tree;
    grow(tree, std::move(rows), 0);
    return tree;
  }

 private:
  std::int32_t grow(DecisionTree& tree, std::vector<std::size_t> rows,
                    std::int64_t depth) {
    const std::int64_t n = static_cast<std::int64_t>(rows.size());
    std::int64_t pos = 0;
    for (std::size_t i : rows) pos += data_.labels[i];

    const std::int32_t self = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[static_cast<std::size_t>(self)].leaf_value =
        static_cast<double>(pos) / static_cast<double>(n);

    if (pos == 0 || pos == n || depth >= params_.max_depth ||
        n < 2 * params_.min_leaf) {
      return self;
    }

    const double parent_impurity = gini(pos, n);
    double best_gain = 1e-12;
    std::int32_t best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> vals(rows.size());
    for (std::size_t f = 0; f < data_.columns.size(); ++f) {
      const auto& col = data_.columns[f];
      for (std::size_t i = 0; i < rows.size(); ++i) {
        vals[i] = {col[rows[i]], data_.labels[rows[i]]};
      }
      std::sort(vals.begin(), vals.end());
      std::int64_t pos_left = 0;
      for (std::int64_t i = 0; i + 1 < n; ++i) {
        pos_left += vals[static_cast<std::size_t>(i)].second;
        const double a = vals[static_cast<std::size_t>(i)].first;
        const double b = vals[static_cast<std::size_t>(i + 1)].first;
        if (!(a < b)) continue;
        const std::int64_t nl = i + 1;
        const std::int64_t nr = n - nl;
        if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
        const double gain =
            parent_impurity -
            (static_cast<double>(nl) / static_cast<double>(n)) *
                gini(pos_left, nl) -
            (static_cast<double>(nr) / static_cast<double>(n)) *
                gini(pos - pos_left, nr);
        if (gain > best_gain) {
          double thr = a + (b - a) / 2.0;
          if (!(thr < b)) thr = a;  // adjacent doubles collapse the midpoint
          best_gain = gain;
          best_feature = static_cast<std::int32_t>(f);
          best_threshold = thr;
        }
      }
    }

    if (best_feature < 0) return self;

    std::vector<std::size_t> left, right;
    for (std::size_t i : rows) {
      const double v = data_.columns[static_cast<std::size_t>(best_feature)][i];
      (v <= best_threshold ? left : right).push_back(i);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[static_cast<std::size_t>(self)].feature = best_feature;
    tree.nodes[static_cast<std::size_t>(self)].threshold = best_threshold;
    const std::int32_t l = grow(tree, std::move(left), depth + 1);
    tree.nodes[static_cast<std::size_t>(self)].left = l;
    const std::int32_t r = grow(tree, std::move(right), depth + 1);
    tree.nodes[static_cast<std::size_t>(self)].right = r;
    return self;
  }

  const Dataset& data_;
  const TreeParams& params_;
};

}  // namespace

TreeEnsemble train_bagged_trees(const Dataset& train, std::int64_t n_trees,
                                const TreeParams& params, std::uint64_t seed,
                                int jobs) {
  if (n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
  if (params.max_depth < 1 || params.min_leaf < 1) {
    throw std::invalid_argument("tree params must be positive");
  }
  const std::size_t n = train.n_rows();
  if (n == 0) throw std::invalid_argument("empty training set");
  const auto pos = static_cast<std::size_t>(
      std::count(train.labels.begin(), train.labels.end(), 1));
  if (pos == 0 || pos == n) {
    throw std::invalid_argument("training set has a single class");
  }

  TreeEnsemble ensemble;
  ensemble.schema = train.feature_names;
  ensemble.seed = seed;
  ensemble.params = params;
  ensemble.trees.resize(static_cast<std::size_t>(n_trees));

  parallel_for(static_cast<std::size_t>(n_trees), jobs, [&](std::size_t t) {
    Rng rng = Rng::substream(seed, t);
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) {
      s = static_cast<std::size_t>(rng.uniform_int(n));
    }
    TreeBuilder builder(train, params);
    ensemble.trees[t] = builder.build(std::move(sample));
  });
  return ensemble;
}

double predict_proba(const TreeEnsemble& ensemble, const FeatureVector& row) {
  std::vector<double> values(ensemble.schema.size());
  for (std::size_t j = 0; j < ensemble.schema.size(); ++j) {
    auto it = row.find(ensemble.schema[j]);
    if (it == row.end()) {
      throw std::invalid_argument("feature '" + ensemble.schema[j] +
                                  "' missing from input row");
    }
    values[j] = it->second;
  }
  double sum = 0.0;
  for (const auto& tree : ensemble.trees) sum += tree.predict(values);
  return sum / static_cast<double>(ensemble.trees.size());
}

std::vector<double> predict_dataset(const TreeEnsemble& ensemble,
                                    const Dataset& data) {
  std::vector<std::size_t> col_of(ensemble.schema.size());
  for (std::size_t j = 0; j < ensemble.schema.size(); ++j) {
    col_of[j] = data.column_index(ensemble.schema[j]);
  }
  std::vector<double> scores(data.n_rows());
  std::vector<double> row(ensemble.schema.size());
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    for (std::size_t j = 0; j < col_of.size(); ++j) {
      row[j] = data.columns[col_of[j]][i];
    }
    double sum = 0.0;
    for (const auto& tree : ensemble.trees) sum += tree.predict(row);
    scores[i] = sum / static_cast<double>(ensemble.trees.size());
  }
  return scores;
}

std::string TreeEnsemble::to_json() const {
  nlohmann::json j;
  j["schema"] = schema;
  j["seed"] = seed;
  j["params"] = {{"max_depth", params.max_depth},
                 {"min_leaf", params.min_leaf}};
  nlohmann::json jtrees = nlohmann::json::array();
  for (const auto& tree : trees) {
    nlohmann::json jt = nlohmann::json::array();
    for (const auto& nd : tree.nodes) {
      if (nd.feature < 0) {
        jt.push_back({{"value", nd.leaf_value}});
      } else {
        jt.push_back({{"feature", nd.feature},
                      {"threshold", nd.threshold},
                      {"left", nd.left},
                      {"right", nd.right}});
      }
    }
    jtrees.push_back(std::move(jt));
  }
  j["trees"] = std::move(jtrees);
  return j.dump();
}

TreeEnsemble TreeEnsemble::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  TreeEnsemble e;
  e.schema = j.at("schema").get<std::vector<std::string>>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.params.max_depth = j.at("params").at("max_depth").get<std::int64_t>();
  e.params.min_leaf = j.at("params").at("min_leaf").get<std::int64_t>();
  for (const auto& jt : j.at("trees")) {
    DecisionTree tree;
    for (const auto& jn : jt) {
      TreeNode nd;
      if (jn.contains("value")) {
        nd.leaf_value = jn.at("value").get<double>();
      } else {
        nd.feature = jn.at("feature").get<std::int32_t>();
        nd.threshold = jn.at("threshold").get<double>();
        nd.left = jn.at("left").get<std::int32_t>();
        nd.right = jn.at("right").get<std::int32_t>();
      }
      tree.nodes.push_back(nd);
    }
    e.trees.push_back(std::move(tree));
  }
  return e;
}

void TreeEnsemble::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json() << "\n";
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

TreeEnsemble TreeEnsemble::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

namespace {

void check_scores_labels(const std::vector<double>& scores,
                         const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("scores and labels must align and be non-empty");
  }
  for (double s : scores) {
    if (!(s >= 0.0) || !(s <= 1.0)) {
      throw std::invalid_argument("scores must lie in [0, 1]");
    }
  }
  for (int y : labels) {
    if (y != 0 && y != 1) {
      throw std::invalid_argument("labels must be 0 or 1");
    }
  }
}

double acc_of(const std::vector<double>& scores, const std::vector<int>& labels,
              double threshold) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    correct += (scores[i] >= threshold) == (labels[i] == 1);
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

double rmse_of(const std::vector<double>& scores,
               const std::vector<int>& labels) {
  double sq = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double d = scores[i] - labels[i];
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(scores.size()));
}

double cxe_of(const std::vector<double>& scores,
              const std::vector<int>& labels) {
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = std::clamp(scores[i], 1e-6, 1.0 - 1e-6);
    sum += labels[i] == 1 ? std::log2(s) : std::log2(1.0 - s);
  }
  return -sum / static_cast<double>(scores.size());
}

// Rank statistic with half-credit for ties via average ranks.
double auc_of(const std::vector<double>& scores,
              const std::vector<int>& labels) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = static_cast<double>(i + j + 1) / 2.0;  // 1-based
    for (std::size_t r = i; r < j; ++r) {
      if (labels[order[r]] == 1) {
        pos_rank_sum += avg_rank;
        n_pos += 1;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  return (pos_rank_sum -
          static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) /
              2.0) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Precision averaged at each positive's rank, scores descending, ties kept
// in input order.
double apr_of(const std::vector<double>& scores,
              const std::vector<int>& labels) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (labels[order[r]] == 1) {
      hits += 1;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  return sum / static_cast<double>(hits);
}

}  // namespace

MetricsReport evaluate(const std::vector<double>& scores,
                       const std::vector<int>& labels, double threshold) {
  check_scores_labels(scores, labels);
  const auto n_pos = std::count(labels.begin(), labels.end(), 1);
  if (n_pos == 0 || static_cast<std::size_t>(n_pos) == labels.size()) {
    throw std::invalid_argument(
        "labels contain a single class; AUC and APR are undefined");
  }
  MetricsReport m;
  m.acc = acc_of(scores, labels, threshold);
  m.auc = auc_of(scores, labels);
  m.rmse = rmse_of(scores, labels);
  m.apr = apr_of(scores, labels);
  m.cxe = cxe_of(scores, labels);
  return m;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["acc"] = acc;
  j["auc"] = auc;
  j["rmse"] = rmse;
  j["apr"] = apr;
  j["cxe"] = cxe;
  return j.dump();
}

void MetricsReport::save_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "acc,auc,rmse,apr,cxe\n";
  out << fmt_double(acc) << ',' << fmt_double(auc) << ',' << fmt_double(rmse)
      << ',' << fmt_double(apr) << ',' << fmt_double(cxe) << "\n";
  if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

double positive_bias_baseline(const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("empty labels");
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  return static_cast<double>(pos) / static_cast<double>(labels.size());
}

std::vector<SelectionStep> stepwise_forward_selection(
    const Dataset& train, const Dataset& validation,
    const std::vector<std::string>& candidate_features, std::int64_t max_steps,
    const SelectionConfig& config) {
  if (candidate_features.empty()) {
    throw std::invalid_argument("no candidate features");
  }
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  std::vector<std::string> remaining = candidate_features;
  std::sort(remaining.begin(), remaining.end());
  remaining.erase(std::unique(remaining.begin(), remaining.end()),
                  remaining.end());
  for (const auto& f : remaining) {
    (void)train.column_index(f);
    (void)validation.column_index(f);
  }

  std::vector<std::string> selected;
  std::vector<SelectionStep> steps;
  double prev_auc = -1.0;
  while (static_cast<std::int64_t>(steps.size()) < max_steps &&
         !remaining.empty()) {
    std::vector<double> aucs(remaining.size());
    parallel_for(remaining.size(), config.jobs, [&](std::size_t c) {
      std::vector<std::string> cols = selected;
      cols.push_back(remaining[c]);
      const Dataset tr = train.select_columns(cols);
      const Dataset va = validation.select_columns(cols);
      const TreeEnsemble ens = train_bagged_trees(
          tr, config.inner_trees, config.tree_params, config.seed, 1);
      aucs[c] = auc_of(predict_dataset(ens, va), va.labels);
    });
    std::size_t best = 0;
    for (std::size_t c = 1; c < aucs.size(); ++c) {
      if (aucs[c] > aucs[best]) best = c;  // ties keep the smaller name
    }
    if (!steps.empty() && aucs[best] - prev_auc <= config.epsilon) break;
    prev_auc = aucs[best];
    selected.push_back(remaining[best]);
    steps.push_back({remaining[best], 0.0});
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }

  // Reported AUCs come from the full-size ensemble on each prefix of the
  // selection.
  for (std::size_t s = 0; s < steps.size(); ++s) {
    const std::vector<std::string> cols(selected.begin(),
                                        selected.begin() +
                                            static_cast<std::ptrdiff_t>(s + 1));
    const Dataset tr = train.select_columns(cols);
    const Dataset va = validation.select_columns(cols);
    const TreeEnsemble ens = train_bagged_trees(
        tr, config.final_trees, config.tree_params, config.seed, config.jobs);
    steps[s].auc = auc_of(predict_dataset(ens, va), va.labels);
  }
  return steps;
}

MetricsReport cross_validate(const Dataset& dataset, std::int64_t n_folds,
                             const CvConfig& config) {
  if (n_folds < 2) throw std::invalid_argument("n_folds must be >= 2");
  const auto n_pos =
      std::count(dataset.labels.begin(), dataset.labels.end(), 1);
  if (n_pos == 0 || static_cast<std::size_t>(n_pos) == dataset.n_rows()) {
    throw std::invalid_argument("dataset has a single class");
  }

  std::vector<std::string> thread_ids;
  std::set<std::string> seen;
  for (const auto& id : dataset.ids) {
    if (seen.insert(id.thread_id).second) thread_ids.push_back(id.thread_id);
  }
  if (n_folds > static_cast<std::int64_t>(thread_ids.size())) {
    throw std::invalid_argument("more folds than distinct threads");
  }
  Rng rng = Rng::substream(config.seed, 0);
  rng.shuffle(thread_ids);
  std::map<std::string, std::int64_t> fold_of;
  for (std::size_t i = 0; i < thread_ids.size(); ++i) {
    fold_of[thread_ids[i]] = static_cast<std::int64_t>(i) % n_folds;
  }

  double acc_sum = 0.0, rmse_sum = 0.0, cxe_sum = 0.0;
  std::vector<double> pooled_scores;
  std::vector<int> pooled_labels;
  for (std::int64_t fold = 0; fold < n_folds; ++fold) {
    std::vector<std::size_t> tr, te;
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
      (fold_of.at(dataset.ids[i].thread_id) == fold ? te : tr).push_back(i);
    }
    const Dataset train = subset_rows(dataset, tr);
    const Dataset test = subset_rows(dataset, te);
    const TreeEnsemble ens = train_bagged_trees(
        train, config.n_trees, config.tree_params,
        config.seed + static_cast<std::uint64_t>(fold) + 1, config.jobs);
    const std::vector<double> scores = predict_dataset(ens, test);
    acc_sum += acc_of(scores, test.labels, config.threshold);
    rmse_sum += rmse_of(scores, test.labels);
    cxe_sum += cxe_of(scores, test.labels);
    pooled_scores.insert(pooled_scores.end(), scores.begin(), scores.end());
    pooled_labels.insert(pooled_labels.end(), test.labels.begin(),
                         test.labels.end());
  }

  MetricsReport m;
  m.acc = acc_sum / static_cast<double>(n_folds);
  m.rmse = rmse_sum / static_cast<double>(n_folds);
  m.cxe = cxe_sum / static_cast<double>(n_folds);
  m.auc = auc_of(pooled_scores, pooled_labels);
  m.apr = apr_of(pooled_scores, pooled_labels);
  return m;
}

}  // namespace threadlab
