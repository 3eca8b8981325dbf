#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "helpers.hpp"
#include "json.hpp"
#include "threadlab/learn.hpp"
#include "threadlab/patterns.hpp"

using namespace threadlab;
using testutil::make_thread;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// One numeric feature "x" per row; labels as given.
Dataset toy_dataset(const std::vector<double>& x, const std::vector<int>& y) {
  Dataset d;
  d.feature_names = {"x"};
  d.columns = {x};
  d.labels = y;
  for (std::size_t i = 0; i < y.size(); ++i) {
    d.ids.push_back({"t" + std::to_string(i), -1});
  }
  return d;
}

// Two well-separated clusters: x near 0 labels 0, x near 10 labels 1.
Dataset two_clusters(std::size_t per_class, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x;
  std::vector<int> y;
  for (std::size_t i = 0; i < per_class; ++i) {
    x.push_back(rng.uniform01());
    y.push_back(0);
    x.push_back(10.0 + rng.uniform01());
    y.push_back(1);
  }
  return toy_dataset(x, y);
}

}  // namespace

TEST_CASE("length dataset labels and skips") {
  Corpus corpus;
  corpus.threads.push_back(make_thread("short", "P", {"a"}));
  corpus.threads.push_back(make_thread("exact", "P", {"a", "b"}));
  corpus.threads.push_back(make_thread("long", "P", {"a", "b", "a", "c"}));

  LengthTaskConfig cfg;
  cfg.prefix_len = 2;
  cfg.length_threshold = 4;
  cfg.features.fb_features = false;

  const Dataset d = build_length_dataset(corpus, cfg);
  REQUIRE(d.n_rows() == 2);
  CHECK(d.ids[0].thread_id == "exact");
  CHECK(d.ids[0].target_code == -1);
  CHECK(d.ids[1].thread_id == "long");
  CHECK(d.labels == std::vector<int>{0, 1});
  CHECK(d.feature_names == feature_schema(2, cfg.features));
  CHECK(d.columns[d.column_index("uniq_comm[2]")] ==
        std::vector<double>{2.0, 2.0});

  cfg.prefix_len = 9;
  CHECK_THROWS_AS(build_length_dataset(corpus, cfg), std::runtime_error);
  cfg.prefix_len = 0;
  CHECK_THROWS_AS(build_length_dataset(corpus, cfg), std::invalid_argument);
}

TEST_CASE("reentry dataset keeps threads whose prefix shows the code") {
  Corpus corpus;
  corpus.threads.push_back(make_thread("back", "P", {"A", "B", "A"}));
  corpus.threads.push_back(make_thread("gone", "P", {"A", "B", "C"}));
  corpus.threads.push_back(make_thread("late2", "P", {"A", "B", "C", "B"}));
  corpus.threads.push_back(make_thread("tiny", "P", {"A"}));

  ReentryTaskConfig cfg;
  cfg.prefix_len = 2;
  cfg.target_code = 1;
  cfg.features.fb_features = false;

  SUBCASE("first commenter returning") {
    const Dataset d = build_reentry_dataset(corpus, cfg);
    REQUIRE(d.n_rows() == 3);
    CHECK(d.ids[0].thread_id == "back");
    CHECK(d.ids[0].target_code == 1);
    CHECK(d.labels == std::vector<int>{1, 0, 0});
  }
  SUBCASE("second commenter returning") {
    cfg.target_code = 2;
    const Dataset d = build_reentry_dataset(corpus, cfg);
    REQUIRE(d.n_rows() == 3);
    CHECK(d.labels == std::vector<int>{0, 0, 1});
    CHECK(d.ids[2].thread_id == "late2");
    CHECK(d.ids[2].target_code == 2);
  }
  SUBCASE("code absent from every prefix") {
    cfg.target_code = 3;
    CHECK_THROWS_AS(build_reentry_dataset(corpus, cfg), std::runtime_error);
  }
}

TEST_CASE("dataset column utilities and csv bytes") {
  Dataset d;
  d.feature_names = {"a", "b"};
  d.columns = {{1.0, 0.5}, {2.0, 3.0}};
  d.labels = {1, 0};
  d.ids = {{"t0", -1}, {"t1", -1}};

  CHECK(d.column_index("b") == 1);
  CHECK_THROWS_AS(d.column_index("zzz"), std::invalid_argument);

  const Dataset sub = d.select_columns({"b"});
  CHECK(sub.feature_names == std::vector<std::string>{"b"});
  CHECK(sub.columns == std::vector<std::vector<double>>{{2.0, 3.0}});
  CHECK(sub.labels == d.labels);
  CHECK(sub.ids.size() == 2);

  const auto dir = testutil::tmp_dir();
  const std::string path = (dir / "data.csv").string();
  d.to_csv(path);
  CHECK(slurp(path) == "a,b,label\n1,2,1\n0.5,3,0\n");
}

TEST_CASE("dataset splitting") {
  const Dataset d = two_clusters(5, 3);  // 10 rows
  const auto [train, test] = split_dataset(d, 9, 0.3);
  CHECK(test.n_rows() == 3);
  CHECK(train.n_rows() == 7);

  std::multiset<std::string> seen;
  for (const auto& id : train.ids) seen.insert(id.thread_id);
  for (const auto& id : test.ids) seen.insert(id.thread_id);
  std::multiset<std::string> all;
  for (const auto& id : d.ids) all.insert(id.thread_id);
  CHECK(seen == all);

  // Row content travels with the id.
  for (std::size_t i = 0; i < test.n_rows(); ++i) {
    const auto orig = std::find_if(d.ids.begin(), d.ids.end(),
                                   [&](const Dataset::InstanceId& id) {
                                     return id.thread_id ==
                                            test.ids[i].thread_id;
                                   });
    const auto row = static_cast<std::size_t>(orig - d.ids.begin());
    CHECK(test.columns[0][i] == d.columns[0][row]);
    CHECK(test.labels[i] == d.labels[row]);
  }

  const auto [train2, test2] = split_dataset(d, 9, 0.3);
  CHECK(test2.ids.size() == test.ids.size());
  for (std::size_t i = 0; i < test.ids.size(); ++i) {
    CHECK(test2.ids[i].thread_id == test.ids[i].thread_id);
  }

  CHECK_THROWS_AS(split_dataset(d, 9, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(split_dataset(d, 9, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(split_dataset(d, 9, 0.04), std::invalid_argument);
}

TEST_CASE("bagged trees separate clean clusters perfectly") {
  const Dataset d = two_clusters(50, 11);
  const TreeEnsemble model = train_bagged_trees(d, 5, {}, 17);
  const std::vector<double> scores = predict_dataset(model, d);
  const MetricsReport m = evaluate(scores, d.labels);
  CHECK(m.acc == 1.0);
  CHECK(m.auc == 1.0);

  CHECK(predict_proba(model, {{"x", 0.2}}) == 0.0);
  CHECK(predict_proba(model, {{"x", 10.7}}) == 1.0);
  CHECK_THROWS_AS(predict_proba(model, {{"y", 0.2}}), std::invalid_argument);
}

TEST_CASE("tree training is deterministic and jobs-independent") {
  Rng rng(23);
  std::vector<double> x;
  std::vector<int> y;
  for (int i = 0; i < 120; ++i) {
    x.push_back(rng.uniform01());
    y.push_back(rng.uniform01() < 0.4 + 0.3 * x.back() ? 1 : 0);
  }
  const Dataset d = toy_dataset(x, y);

  const TreeEnsemble a = train_bagged_trees(d, 8, {}, 5, 1);
  const TreeEnsemble b = train_bagged_trees(d, 8, {}, 5, 3);
  CHECK(a.to_json() == b.to_json());

  const TreeEnsemble c = train_bagged_trees(d, 8, {}, 6, 1);
  CHECK(a.to_json() != c.to_json());
}

TEST_CASE("tree size limits") {
  const Dataset d = two_clusters(50, 11);  // 100 rows

  TreeParams stump;
  stump.min_leaf = 51;
  const TreeEnsemble leaves = train_bagged_trees(d, 4, stump, 1);
  for (const auto& tree : leaves.trees) {
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].feature == -1);
  }

  TreeParams shallow;
  shallow.max_depth = 1;
  const TreeEnsemble depth1 = train_bagged_trees(d, 4, shallow, 1);
  for (const auto& tree : depth1.trees) CHECK(tree.nodes.size() <= 3);
}

TEST_CASE("tree training input validation") {
  const Dataset d = two_clusters(10, 1);
  Dataset single = d;
  std::fill(single.labels.begin(), single.labels.end(), 1);
  CHECK_THROWS_AS(train_bagged_trees(single, 2, {}, 0), std::invalid_argument);
  CHECK_THROWS_AS(train_bagged_trees(Dataset{}, 2, {}, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(train_bagged_trees(d, 0, {}, 0), std::invalid_argument);
  TreeParams bad;
  bad.min_leaf = 0;
  CHECK_THROWS_AS(train_bagged_trees(d, 2, bad, 0), std::invalid_argument);
  bad = {};
  bad.max_depth = 0;
  CHECK_THROWS_AS(train_bagged_trees(d, 2, bad, 0), std::invalid_argument);
}

TEST_CASE("ensemble json and file round trips preserve predictions") {
  const Dataset d = two_clusters(30, 7);
  const TreeEnsemble model = train_bagged_trees(d, 6, {}, 33);

  const TreeEnsemble back = TreeEnsemble::from_json(model.to_json());
  CHECK(back.schema == model.schema);
  CHECK(back.seed == model.seed);
  CHECK(back.params.max_depth == model.params.max_depth);
  CHECK(back.params.min_leaf == model.params.min_leaf);
  CHECK(predict_dataset(back, d) == predict_dataset(model, d));

  const auto dir = testutil::tmp_dir();
  const std::string path = (dir / "model.json").string();
  model.save(path);
  const TreeEnsemble loaded = TreeEnsemble::load(path);
  CHECK(loaded.to_json() == model.to_json());

  const auto j = nlohmann::json::parse(model.to_json());
  CHECK(j.contains("schema"));
  CHECK(j.contains("seed"));
  CHECK(j.contains("params"));
  REQUIRE(j.contains("trees"));
  for (const auto& tree : j["trees"]) {
    for (const auto& node : tree) {
      if (node.contains("value")) {
        CHECK(node.size() == 1);
      } else {
        CHECK(node.contains("feature"));
        CHECK(node.contains("threshold"));
        CHECK(node.contains("left"));
        CHECK(node.contains("right"));
      }
    }
  }
}

TEST_CASE("metrics on a perfect predictor") {
  const std::vector<int> labels = {0, 1, 0, 1, 1};
  const std::vector<double> scores = {0.0, 1.0, 0.0, 1.0, 1.0};
  const MetricsReport m = evaluate(scores, labels);
  CHECK(m.acc == 1.0);
  CHECK(m.auc == 1.0);
  CHECK(m.rmse == 0.0);
  CHECK(m.apr == 1.0);
  CHECK(m.cxe < 1e-5);  // clipping keeps the log finite
}

TEST_CASE("metrics for a constant predictor follow the base rate") {
  const std::vector<std::pair<int, int>> mixes = {{221, 179}, {1091, 909}};
  for (const auto& [n_pos, n_neg] : mixes) {
    std::vector<int> labels(static_cast<std::size_t>(n_pos), 1);
    labels.insert(labels.end(), static_cast<std::size_t>(n_neg), 0);
    const double q = positive_bias_baseline(labels);
    CHECK(q == doctest::Approx(static_cast<double>(n_pos) /
                               static_cast<double>(n_pos + n_neg)));
    const std::vector<double> scores(labels.size(), q);
    const MetricsReport m = evaluate(scores, labels);
    CHECK(m.acc == doctest::Approx(q));  // q > 0.5: everything flagged positive
    CHECK(m.auc == doctest::Approx(0.5));
    CHECK(m.rmse == doctest::Approx(std::sqrt(q * (1.0 - q))));
    CHECK(m.cxe == doctest::Approx(-q * std::log2(q) -
                                   (1.0 - q) * std::log2(1.0 - q)));
    // Ties keep input order and the positives were listed first.
    CHECK(m.apr == 1.0);
  }
}

TEST_CASE("rmse of a constant score decomposes into variance plus bias") {
  const std::vector<int> labels = {1, 1, 0, 0, 0};
  const std::vector<double> scores(5, 0.3);
  const MetricsReport m = evaluate(scores, labels);
  CHECK(m.rmse == doctest::Approx(std::sqrt(0.4 * 0.6 + 0.01)));
}

TEST_CASE("auc matches the quadratic reference on tied scores") {
  Rng rng(13);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_int(40));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool both = false;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.uniform_int(5)) / 4.0;  // heavy ties
      labels[i] = rng.uniform01() < 0.5 ? 1 : 0;
    }
    labels[0] = 0;
    labels[n - 1] = 1;
    both = true;
    REQUIRE(both);
    const MetricsReport m = evaluate(scores, labels);
    CHECK(m.auc == doctest::Approx(testutil::auc_reference(scores, labels))
                       .epsilon(1e-12));
  }
}

TEST_CASE("auc is invariant under monotone transforms and flips with labels") {
  Rng rng(19);
  std::vector<double> scores(60);
  std::vector<int> labels(60);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = rng.uniform01();
    labels[i] = rng.uniform01() < 0.4 ? 1 : 0;
  }
  labels[0] = 1;
  labels[1] = 0;

  std::vector<double> squared = scores;
  for (double& s : squared) s *= s;
  CHECK(evaluate(squared, labels).auc ==
        doctest::Approx(evaluate(scores, labels).auc).epsilon(1e-12));

  std::vector<int> flipped = labels;
  for (int& y : flipped) y = 1 - y;
  CHECK(evaluate(scores, labels).auc + evaluate(scores, flipped).auc ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("average precision by hand") {
  // Positives at ranks 1 and 3: (1/1 + 2/3) / 2.
  CHECK(evaluate({0.9, 0.8, 0.7}, {1, 0, 1}).apr ==
        doctest::Approx(5.0 / 6.0));

  // Ties keep first-seen order, so the input arrangement decides.
  CHECK(evaluate({0.5, 0.5}, {1, 0}).apr == doctest::Approx(1.0));
  CHECK(evaluate({0.5, 0.5}, {0, 1}).apr == doctest::Approx(0.5));
}

TEST_CASE("accuracy threshold is inclusive") {
  const std::vector<double> scores = {0.4, 0.6};
  const std::vector<int> labels = {0, 1};
  CHECK(evaluate(scores, labels, 0.5).acc == 1.0);
  CHECK(evaluate(scores, labels, 0.3).acc == 0.5);
  CHECK(evaluate(scores, labels, 0.6).acc == 1.0);  // 0.6 >= 0.6 is positive
  CHECK(evaluate({0.5, 0.5}, labels, 0.5).acc == 0.5);
}

TEST_CASE("evaluate input validation") {
  CHECK_THROWS_AS(evaluate({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(evaluate({0.5}, {1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(evaluate({0.5, 0.5}, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(evaluate({0.5, 0.5}, {0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(evaluate({1.5, 0.5}, {1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(evaluate({-0.1, 0.5}, {1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(evaluate({0.5, 0.5}, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(positive_bias_baseline({}), std::invalid_argument);
}

TEST_CASE("metrics serialization") {
  MetricsReport m;
  m.acc = 0.5;
  m.auc = 0.25;
  m.rmse = 0.0;
  m.apr = 1.0;
  m.cxe = 2.0;

  const auto dir = testutil::tmp_dir();
  const std::string path = (dir / "metrics.csv").string();
  m.save_csv(path);
  CHECK(slurp(path) == "acc,auc,rmse,apr,cxe\n0.5,0.25,0,1,2\n");

  const auto j = nlohmann::json::parse(m.to_json());
  CHECK(j["acc"].get<double>() == 0.5);
  CHECK(j["auc"].get<double>() == 0.25);
  CHECK(j["rmse"].get<double>() == 0.0);
  CHECK(j["apr"].get<double>() == 1.0);
  CHECK(j["cxe"].get<double>() == 2.0);
}

namespace {

// x_strong equals the label; the rest is noise.
Dataset planted_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.feature_names = {"x_noise", "x_strong", "x_strong_copy", "x_weak"};
  d.columns.assign(4, {});
  for (std::size_t i = 0; i < n; ++i) {
    const int y = i % 2 == 0 ? 1 : 0;
    d.labels.push_back(y);
    d.ids.push_back({"t" + std::to_string(i), -1});
    d.columns[0].push_back(rng.uniform01());
    d.columns[1].push_back(static_cast<double>(y));
    d.columns[2].push_back(static_cast<double>(y));
    d.columns[3].push_back(rng.uniform01() * 0.2 +
                           0.4 * static_cast<double>(y));
  }
  return d;
}

}  // namespace

TEST_CASE("stepwise selection finds the planted feature and stops") {
  const Dataset d = planted_dataset(160, 3);
  const auto [train, validation] = split_dataset(d, 1, 0.3);

  SelectionConfig cfg;
  cfg.inner_trees = 10;
  cfg.final_trees = 20;
  cfg.seed = 2;

  SUBCASE("strongest candidate wins the first step") {
    const auto steps = stepwise_forward_selection(
        train, validation, {"x_noise", "x_strong", "x_weak"}, 3, cfg);
    REQUIRE_FALSE(steps.empty());
    CHECK(steps[0].feature == "x_strong");
    CHECK(steps[0].auc > 0.99);
    // A perfect AUC leaves no room for a further eps-sized gain.
    CHECK(steps.size() == 1);
  }
  SUBCASE("an identical copy adds nothing and ends the search") {
    const auto steps = stepwise_forward_selection(
        train, validation, {"x_strong_copy", "x_strong"}, 5, cfg);
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].feature == "x_strong");  // tie breaks by name
  }
  SUBCASE("duplicate candidate entries collapse") {
    const auto steps = stepwise_forward_selection(
        train, validation, {"x_weak", "x_weak", "x_weak"}, 5, cfg);
    REQUIRE(steps.size() >= 1);
    CHECK(steps[0].feature == "x_weak");
    CHECK(steps.size() == 1);
  }
  SUBCASE("determinism across jobs") {
    auto a = stepwise_forward_selection(train, validation,
                                        {"x_noise", "x_weak"}, 2, cfg);
    SelectionConfig par = cfg;
    par.jobs = 3;
    auto b = stepwise_forward_selection(train, validation,
                                        {"x_noise", "x_weak"}, 2, par);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].feature == b[i].feature);
      CHECK(a[i].auc == b[i].auc);
    }
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(stepwise_forward_selection(train, validation, {}, 3, cfg),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        stepwise_forward_selection(train, validation, {"x_weak"}, 0, cfg),
        std::invalid_argument);
    CHECK_THROWS_AS(
        stepwise_forward_selection(train, validation, {"nope"}, 1, cfg),
        std::invalid_argument);
  }
}

TEST_CASE("cross validation on separable data") {
  const Dataset d = two_clusters(40, 21);
  CvConfig cfg;
  cfg.n_trees = 10;
  cfg.seed = 4;

  const MetricsReport m = cross_validate(d, 5, cfg);
  CHECK(m.acc > 0.9);
  CHECK(m.auc > 0.9);

  const MetricsReport again = cross_validate(d, 5, cfg);
  CHECK(m.acc == again.acc);
  CHECK(m.auc == again.auc);
  CHECK(m.rmse == again.rmse);
  CHECK(m.apr == again.apr);
  CHECK(m.cxe == again.cxe);
}

TEST_CASE("leave-one-out stays defined through pooled ranking metrics") {
  const Dataset d = two_clusters(4, 2);  // 8 single-row threads
  CvConfig cfg;
  cfg.n_trees = 5;
  cfg.tree_params.min_leaf = 1;  // 7-row folds must still be able to split
  const MetricsReport m = cross_validate(d, 8, cfg);
  CHECK(m.auc > 0.5);
}

TEST_CASE("cross validation input validation") {
  const Dataset d = two_clusters(4, 2);
  CHECK_THROWS_AS(cross_validate(d, 9, {}), std::invalid_argument);
  CHECK_THROWS_AS(cross_validate(d, 1, {}), std::invalid_argument);
  Dataset single = d;
  std::fill(single.labels.begin(), single.labels.end(), 0);
  CHECK_THROWS_AS(cross_validate(single, 2, {}), std::invalid_argument);
}

TEST_CASE("folds never split a thread's rows") {
  // Two identical rows per thread; a one-hot column identifies the thread.
  // Row-level folds would leak the twin into training and memorize it.
  const std::size_t n_threads = 60;
  Dataset d;
  for (std::size_t t = 0; t < n_threads; ++t) {
    d.feature_names.push_back("is_t" + std::to_string(t));
  }
  d.columns.assign(n_threads, {});
  for (std::size_t t = 0; t < n_threads; ++t) {
    for (int twin = 0; twin < 2; ++twin) {
      for (std::size_t f = 0; f < n_threads; ++f) {
        d.columns[f].push_back(f == t ? 1.0 : 0.0);
      }
      d.labels.push_back(static_cast<int>(t % 2));
      d.ids.push_back({"t" + std::to_string(t), -1});
    }
  }

  CvConfig cfg;
  cfg.n_trees = 10;
  cfg.tree_params.min_leaf = 1;
  cfg.seed = 6;
  const MetricsReport m = cross_validate(d, 5, cfg);
  // Unseen threads carry no usable signal, so pooled AUC sits near chance.
  CHECK(m.auc < 0.75);
  CHECK(m.auc > 0.25);
}
