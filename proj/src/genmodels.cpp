#include "threadlab/genmodels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <stdexcept>

#include "threadlab/util.hpp"

namespace threadlab {

namespace {

std::size_t sample_weights(const std::vector<double>& w, Rng& rng) {
  std::vector<double> cdf(w.size());
  std::partial_sum(w.begin(), w.end(), cdf.begin());
  if (cdf.empty() || cdf.back() <= 0) {
    throw std::logic_error("sample_weights: no positive weight");
  }
  return rng.discrete_cdf(cdf);
}

ArrivalPattern simulate(const ClassFParams& m, Rng& rng) {
  return simulate_classF(m, rng);
}

ArrivalPattern simulate(const UrnParams& m, Rng& rng) {
  return simulate_urn(m, rng);
}

}  // namespace

ThetaRule ThetaRule::parse(const std::string& name) {
  ThetaRule r;
  if (name == "uniform") {
    r.kind = Kind::Uniform;
  } else if (name == "rich") {
    r.kind = Kind::RichGetRicher;
  } else if (name == "recency") {
    r.kind = Kind::Recency;
  } else {
    throw std::invalid_argument("unknown theta rule '" + name +
                                "' (expected uniform, rich or recency)");
  }
  return r;
}

std::string ThetaRule::name() const {
  switch (kind) {
    case Kind::Uniform:
      return "uniform";
    case Kind::RichGetRicher:
      return "rich";
    case Kind::Recency:
      return "recency";
  }
  return "?";
}

void ClassFParams::validate() const {
  if (k < 1) {
    throw std::invalid_argument("thread length k must be >= 1");
  }
  if (static_cast<std::int64_t>(p.size()) != k) {
    throw std::invalid_argument(
        "need one new-entrant probability per step: got " +
        std::to_string(p.size()) + " for k=" + std::to_string(k));
  }
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!(p[j] > 0.0) || !(p[j] <= 1.0)) {
      throw std::invalid_argument("p[" + std::to_string(j + 1) +
                                  "] must lie in (0, 1], got " +
                                  fmt_double(p[j]));
    }
  }
  if (theta.kind == ThetaRule::Kind::Recency &&
      (!(theta.recency_lambda > 0.0) || !(theta.recency_lambda <= 1.0))) {
    throw std::invalid_argument("recency lambda must lie in (0, 1], got " +
                                fmt_double(theta.recency_lambda));
  }
}

void UrnParams::validate() const {
  if (!(alpha >= 1.0)) {
    throw std::invalid_argument("urn alpha must be >= 1, got " +
                                fmt_double(alpha));
  }
  if (!(beta > 0.0)) {
    throw std::invalid_argument("urn beta must be strictly positive, got " +
                                fmt_double(beta));
  }
  if (k < 1) {
    throw std::invalid_argument("thread length k must be >= 1");
  }
}

UrnState UrnState::initial() {
  UrnState s;
  s.step = 1;
  s.weight_exp = {0, 0};
  s.current = 1;
  return s;
}

double UrnState::weight(double alpha, std::int32_t code) const {
  return std::pow(alpha, weight_exp.at(static_cast<std::size_t>(code)));
}

void UrnState::apply_reentry(std::int32_t code) {
  if (code == current) {
    throw std::logic_error("urn re-entry by the current commenter");
  }
  weight_exp.at(static_cast<std::size_t>(code)) += 1;
  current = code;
  step += 1;
}

void UrnState::apply_new_arrival() {
  for (auto& e : weight_exp) e -= 1;
  current = next_code();
  weight_exp.push_back(0);
  step += 1;
}

double UrnStepProbs::sum() const {
  return std::accumulate(existing.begin(), existing.end(), new_entrant);
}

UrnStepProbs urn_step_probabilities(const UrnState& state,
                                    const UrnParams& params) {
  const std::size_t n = state.weight_exp.size();
  if (state.current < 0 || static_cast<std::size_t>(state.current) >= n) {
    throw std::logic_error("urn state: current commenter out of range");
  }
  UrnStepProbs out;
  out.existing.assign(n, 0.0);

  // All competing weights are alpha^e plus the constant beta; shift exponents
  // so the largest term is about 1, which keeps the ratios exact and avoids
  // overflow at any depth.
  const double ln_a = std::log(params.alpha);
  double shift = ln_a > 0 ? std::log(params.beta) / ln_a : 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    if (static_cast<std::int32_t>(c) == state.current) continue;
    shift = std::max(shift, static_cast<double>(state.weight_exp[c]));
  }

  double denom = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    if (static_cast<std::int32_t>(c) == state.current) continue;
    out.existing[c] = std::exp((state.weight_exp[c] - shift) * ln_a);
    denom += out.existing[c];
  }
  out.new_entrant = std::exp(std::log(params.beta) - shift * ln_a);
  denom += out.new_entrant;

  for (auto& v : out.existing) v /= denom;
  out.new_entrant /= denom;
  return out;
}

ArrivalPattern simulate_urn(const UrnParams& params, Rng& rng) {
  params.validate();
  ArrivalPattern pat;
  pat.codes.reserve(static_cast<std::size_t>(params.k));
  pat.codes.push_back(1);  // the first comment always opens the conversation

  UrnState state = UrnState::initial();
  while (state.step < params.k) {
    UrnStepProbs probs = urn_step_probabilities(state, params);
    std::vector<double> w = probs.existing;
    w.push_back(probs.new_entrant);
    std::size_t pick = sample_weights(w, rng);
    if (pick == probs.existing.size()) {
      state.apply_new_arrival();
    } else {
      state.apply_reentry(static_cast<std::int32_t>(pick));
    }
    pat.codes.push_back(state.current);
  }
  return pat;
}

ArrivalPattern simulate_classF(const ClassFParams& params, Rng& rng) {
  params.validate();
  ArrivalPattern pat;
  pat.codes.reserve(static_cast<std::size_t>(params.k));

  // Per-participant activity trackers; index = ID code (0 = poster). The
  // post itself counts as the poster's activity at step 0 but not as a
  // comment.
  std::vector<std::int64_t> comment_count{0};
  std::vector<std::int64_t> last_active{0};

  for (std::int64_t j = 1; j <= params.k; ++j) {
    std::int32_t code;
    if (rng.uniform01() < params.p[static_cast<std::size_t>(j - 1)]) {
      code = static_cast<std::int32_t>(comment_count.size());
      comment_count.push_back(0);
      last_active.push_back(j);
    } else {
      switch (params.theta.kind) {
        case ThetaRule::Kind::Uniform:
          code = static_cast<std::int32_t>(
              rng.uniform_int(comment_count.size()));
          break;
        case ThetaRule::Kind::RichGetRicher: {
          std::vector<double> w(comment_count.size());
          for (std::size_t c = 0; c < w.size(); ++c) {
            w[c] = static_cast<double>(comment_count[c] + 1);
          }
          code = static_cast<std::int32_t>(sample_weights(w, rng));
          break;
        }
        case ThetaRule::Kind::Recency: {
          // lambda^(time since last activity), shifted so the most recent
          // participant has weight 1; the shift cancels in normalization.
          std::int64_t newest =
              *std::max_element(last_active.begin(), last_active.end());
          std::vector<double> w(last_active.size());
          for (std::size_t c = 0; c < w.size(); ++c) {
            w[c] = std::pow(params.theta.recency_lambda,
                            static_cast<double>(newest - last_active[c]));
          }
          code = static_cast<std::int32_t>(sample_weights(w, rng));
          break;
        }
        default:
          throw std::logic_error("unhandled theta rule");
      }
    }
    comment_count[static_cast<std::size_t>(code)] += 1;
    last_active[static_cast<std::size_t>(code)] = j;
    pat.codes.push_back(code);
  }
  return pat;
}

Density exact_distinct_distribution_classF(const std::vector<double>& p) {
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!(p[j] > 0.0) || !(p[j] <= 1.0)) {
      throw std::invalid_argument("p[" + std::to_string(j + 1) +
                                  "] must lie in (0, 1], got " +
                                  fmt_double(p[j]));
    }
  }
  // Poisson-binomial recurrence over the number of new entrants; the theta
  // rule never changes how many distinct participants appear.
  std::vector<double> f{1.0};
  for (double pj : p) {
    std::vector<double> g(f.size() + 1, 0.0);
    for (std::size_t s = 0; s < f.size(); ++s) {
      g[s] += f[s] * (1.0 - pj);
      g[s + 1] += f[s] * pj;
    }
    f = std::move(g);
  }
  std::map<std::int64_t, double> mass;
  for (std::size_t s = 0; s < f.size(); ++s) {
    if (f[s] > 0.0) {
      mass[static_cast<std::int64_t>(s) + 1] = f[s];  // +1 for the poster
    }
  }
  return Density(mass);
}

Density ensemble_density(const ModelParams& model, std::size_t runs,
                         std::uint64_t master_seed, int jobs) {
  if (runs == 0) {
    throw std::invalid_argument("ensemble_density: runs must be >= 1");
  }
  std::visit([](const auto& m) { m.validate(); }, model);

  std::vector<std::int64_t> distinct(runs, 0);
  parallel_for(runs, jobs, [&](std::size_t i) {
    Rng rng = Rng::substream(master_seed, i);
    ArrivalPattern pat = std::visit(
        [&](const auto& m) { return simulate(m, rng); }, model);
    distinct[i] = distinct_participants(pat, /*include_poster=*/true);
  });

  std::map<std::int64_t, std::int64_t> hist;
  for (std::int64_t d : distinct) hist[d] += 1;
  return Density::from_counts(hist);
}

std::vector<double> PSpec::materialize(std::int64_t k) const {
  if (k < 1) {
    throw std::invalid_argument("thread length k must be >= 1");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(k));
  switch (kind) {
    case Kind::Uniform:
      out.assign(static_cast<std::size_t>(k), value);
      break;
    case Kind::Crp:
      for (std::int64_t j = 1; j <= k; ++j) {
        out.push_back(value / (value + static_cast<double>(j)));
      }
      break;
    case Kind::List:
      if (static_cast<std::int64_t>(list.size()) < k) {
        throw std::invalid_argument(
            "p list has " + std::to_string(list.size()) +
            " entries but the thread needs " + std::to_string(k));
      }
      out.assign(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(k));
      break;
  }
  return out;
}

PSpec PSpec::parse(const std::string& text) {
  PSpec spec;
  if (text.rfind("uniform:", 0) == 0) {
    spec.kind = Kind::Uniform;
    spec.value = std::stod(text.substr(8));
    if (!(spec.value > 0.0) || !(spec.value <= 1.0)) {
      throw std::invalid_argument("uniform p must lie in (0, 1]");
    }
  } else if (text.rfind("crp:", 0) == 0) {
    spec.kind = Kind::Crp;
    spec.value = std::stod(text.substr(4));
    if (!(spec.value > 0.0)) {
      throw std::invalid_argument("crp concentration must be positive");
    }
  } else {
    spec.kind = Kind::List;
    for (const auto& part : split(text, ',')) {
      const double v = std::stod(std::string(part));
      if (!(v > 0.0) || !(v <= 1.0)) {
        throw std::invalid_argument("p entries must lie in (0, 1]");
      }
      spec.list.push_back(v);
    }
    if (spec.list.empty()) {
      throw std::invalid_argument("empty p specification");
    }
  }
  return spec;
}

std::string PSpec::to_string() const {
  switch (kind) {
    case Kind::Uniform:
      return "uniform:" + fmt_double(value);
    case Kind::Crp:
      return "crp:" + fmt_double(value);
    case Kind::List: {
      std::string out;
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (i) out += ',';
        out += fmt_double(list[i]);
      }
      return out;
    }
  }
  return "?";
}

ModelParams ModelSpec::with_length(std::int64_t k) const {
  if (family == Family::Urn) {
    UrnParams u;
    u.alpha = alpha;
    u.beta = beta;
    u.k = k;
    u.validate();
    return u;
  }
  ClassFParams f;
  f.k = k;
  f.p = p.materialize(k);
  f.theta = theta;
  f.validate();
  return f;
}

ArrivalPattern draw_pattern(const ModelSpec& spec, std::int64_t k, Rng& rng) {
  ModelParams params = spec.with_length(k);
  return std::visit([&](const auto& m) { return simulate(m, rng); }, params);
}

}  // namespace threadlab
