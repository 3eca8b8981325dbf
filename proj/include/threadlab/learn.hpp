#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "threadlab/corpus.hpp"
#include "threadlab/features.hpp"

namespace threadlab {

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> columns;  // [feature][row]
  std::vector<int> labels;                   // 0/1

  struct InstanceId {
    std::string thread_id;
    std::int32_t target_code = -1;  // re-entry instances carry their code
  };
  std::vector<InstanceId> ids;

  std::size_t n_rows() const { return labels.size(); }
  std::size_t column_index(const std::string& name) const;  // throws if absent
  Dataset select_columns(const std::vector<std::string>& names) const;
  void to_csv(const std::string& path) const;  // features..., label
};

struct LengthTaskConfig {
  std::int64_t prefix_len = 5;
  std::int64_t length_threshold = 8;  // label = final length >= threshold
  FeatureOptions features;
};

struct ReentryTaskConfig {
  std::int64_t prefix_len = 5;
  std::int32_t target_code = 1;  // label = code re-appears after the prefix
  FeatureOptions features;
};

Dataset build_length_dataset(const Corpus& corpus,
                             const LengthTaskConfig& config);
Dataset build_reentry_dataset(const Corpus& corpus,
                              const ReentryTaskConfig& config);

// Shuffled split; the first round(test_fraction * n) rows become the test
// set. Both halves must come out non-empty.
std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset,
                                          std::uint64_t seed,
                                          double test_fraction);  // train,test

struct TreeParams {
  std::int64_t max_depth = 12;
  std::int64_t min_leaf = 10;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // feature value <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double leaf_value = 0.0;    // positive fraction
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(const std::vector<double>& row) const;
};

struct TreeEnsemble {
  std::vector<std::string> schema;
  std::vector<DecisionTree> trees;
  std::uint64_t seed = 0;
  TreeParams params;

  std::string to_json() const;
  static TreeEnsemble from_json(const std::string& text);
  void save(const std::string& path) const;
  static TreeEnsemble load(const std::string& path);
};

// Tree i fits a bootstrap sample (n draws with replacement) drawn from
// substream (seed, i); splits greedily minimize Gini impurity with midpoint
// thresholds. Results do not depend on jobs.
TreeEnsemble train_bagged_trees(const Dataset& train, std::int64_t n_trees,
                                const TreeParams& params, std::uint64_t seed,
                                int jobs = 1);

double predict_proba(const TreeEnsemble& ensemble, const FeatureVector& row);
std::vector<double> predict_dataset(const TreeEnsemble& ensemble,
                                    const Dataset& data);

struct MetricsReport {
  double acc = 0.0;
  double auc = 0.0;
  double rmse = 0.0;
  double apr = 0.0;
  double cxe = 0.0;  // bits

  std::string to_json() const;
  void save_csv(const std::string& path) const;  // one Table-style row
};

// ACC thresholds at `threshold` (predict positive when score >= threshold);
// AUC by the rank statistic with half-credit ties; APR averages precision at
// each positive's rank (stable order on ties); CXE is base-2 cross-entropy
// with scores clipped to [1e-6, 1 - 1e-6]. Needs both classes present.
MetricsReport evaluate(const std::vector<double>& scores,
                       const std::vector<int>& labels, double threshold = 0.5);

// Constant score equal to the positive fraction of the given labels.
double positive_bias_baseline(const std::vector<int>& labels);

struct SelectionStep {
  std::string feature;
  double auc = 0.0;  // validation AUC of the full ensemble on the set so far
};

struct SelectionConfig {
  std::int64_t inner_trees = 20;  // candidate scans
  std::int64_t final_trees = 60;  // reported AUCs
  TreeParams tree_params;
  std::uint64_t seed = 0;
  double epsilon = 1e-4;  // minimum AUC gain to keep going
  int jobs = 1;
};

// Greedy forward selection maximizing validation AUC; candidate ties go to
// the lexicographically smallest feature name.
std::vector<SelectionStep> stepwise_forward_selection(
    const Dataset& train, const Dataset& validation,
    const std::vector<std::string>& candidate_features, std::int64_t max_steps,
    const SelectionConfig& config);

struct CvConfig {
  std::int64_t n_trees = 60;
  TreeParams tree_params;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  int jobs = 1;
};

// Folds are assigned per thread id, so multiple instances of a thread never
// straddle a fold. ACC/RMSE/CXE are averaged across folds; AUC/APR are
// computed on the pooled held-out scores, which keeps them defined even for
// single-instance folds (leave-one-out).
MetricsReport cross_validate(const Dataset& dataset, std::int64_t n_folds,
                             const CvConfig& config);

}  // namespace threadlab
