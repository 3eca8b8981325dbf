#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "threadlab/density.hpp"
#include "threadlab/patterns.hpp"
#include "threadlab/rng.hpp"

namespace threadlab {

// Rule for picking which existing participant re-enters.
struct ThetaRule {
  enum class Kind { Uniform, RichGetRicher, Recency };
  Kind kind = Kind::Uniform;
  // Recency: selection weight lambda^(steps since the participant's last
  // activity); the poster's initial activity is the post itself (step 0).
  double recency_lambda = 0.5;

  static ThetaRule parse(const std::string& name);  // uniform | rich | recency
  std::string name() const;
};

// Fixed-new-entrant-probability model: at step j a brand-new participant
// enters with probability p[j-1]; otherwise the theta rule picks someone
// already present (the poster counts as present from the start).
struct ClassFParams {
  std::int64_t k = 0;
  std::vector<double> p;  // each in (0, 1]
  ThetaRule theta;

  void validate() const;
};

// Reinforced-weight urn over arrival patterns. Re-entry multiplies the
// commenter's weight by alpha; a new arrival resets to weight 1 and divides
// every pre-existing weight by alpha. beta is the fixed new-entrant weight.
struct UrnParams {
  double alpha = 2.0;  // >= 1
  double beta = 1.0;   // > 0
  std::int64_t k = 1;

  void validate() const;
};

// Weights are exact powers of alpha by construction, so the state stores
// integer exponents; probabilities are formed with a max-shifted
// normalization and never overflow regardless of k.
struct UrnState {
  std::int64_t step = 1;                  // comments emitted so far
  std::vector<std::int32_t> weight_exp;   // weight(c) = alpha^weight_exp[c]
  std::int32_t current = 1;               // code of the latest commenter

  // State after the forced first comment (code 1, weights w(0)=w(1)=1).
  static UrnState initial();

  double weight(double alpha, std::int32_t code) const;
  std::int32_t next_code() const {
    return static_cast<std::int32_t>(weight_exp.size());
  }

  void apply_reentry(std::int32_t code);
  void apply_new_arrival();
};

struct UrnStepProbs {
  std::vector<double> existing;  // indexed by code; 0 at the current commenter
  double new_entrant = 0;

  double sum() const;
};

// Probabilities for the next commenter: existing participant c != current
// with probability w(c) / (beta + sum of other weights), a new participant
// with probability beta / (same denominator).
UrnStepProbs urn_step_probabilities(const UrnState& state,
                                    const UrnParams& params);

ArrivalPattern simulate_classF(const ClassFParams& params, Rng& rng);

// Exact PMF of the number of distinct participants (poster included) in a
// class-F thread: 1 + sum of independent Bernoulli(p_j), computed by the
// Poisson-binomial recurrence. Independent of the theta rule.
Density exact_distinct_distribution_classF(const std::vector<double>& p);

ArrivalPattern simulate_urn(const UrnParams& params, Rng& rng);

using ModelParams = std::variant<ClassFParams, UrnParams>;

// Empirical PMF of distinct participants (poster included) over `runs`
// simulations. Run i draws from substream (master_seed, i), so the result is
// identical for any jobs value.
Density ensemble_density(const ModelParams& model, std::size_t runs,
                         std::uint64_t master_seed, int jobs = 1);

// Length-free model family description, as accepted by the CLI and the
// synthetic-corpus generator; materialized to ClassFParams/UrnParams once
// the thread length is known.
struct PSpec {
  enum class Kind { Uniform, Crp, List };
  Kind kind = Kind::Uniform;
  double value = 0.5;        // Uniform: p_j = value; Crp: p_j = value/(value+j)
  std::vector<double> list;  // List: explicit p_1..p_k

  std::vector<double> materialize(std::int64_t k) const;
  // "uniform:0.5" | "crp:2" | "0.9,0.8,0.7"
  static PSpec parse(const std::string& text);
  std::string to_string() const;
};

struct ModelSpec {
  enum class Family { Urn, ClassF };
  Family family = Family::Urn;
  double alpha = 2.0;
  double beta = 1.0;
  PSpec p;
  ThetaRule theta;

  ModelParams with_length(std::int64_t k) const;
};

ArrivalPattern draw_pattern(const ModelSpec& spec, std::int64_t k, Rng& rng);

}  // namespace threadlab
