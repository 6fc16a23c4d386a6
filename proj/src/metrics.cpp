#include "robosched/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"
#include "robosched/errors.hpp"
#include "robosched/executor.hpp"

namespace robosched {

namespace {

std::map<Tokens, int> ngrams(const Tokens& t, std::size_t n) {
  std::map<Tokens, int> out;
  if (t.size() < n) return out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) ++out[Tokens(t.begin() + i, t.begin() + i + n)];
  return out;
}

int clipped_overlap(const std::map<Tokens, int>& c, const std::map<Tokens, int>& r) {
  int m = 0;
  for (const auto& [g, k] : c) {
    auto it = r.find(g);
    if (it != r.end()) m += std::min(k, it->second);
  }
  return m;
}

int total(const std::map<Tokens, int>& c) {
  int n = 0;
  for (const auto& [_, k] : c) n += k;
  return n;
}

double f1(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

std::size_t lcs(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

double bleu(const Tokens& candidate, const Tokens& reference, Smoothing smoothing) {
  if (reference.empty()) throw EmptyInput("BLEU needs a nonempty reference");
  if (candidate.empty()) return 0.0;
  const std::size_t order = std::min<std::size_t>(4, candidate.size());
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= order; ++n) {
    auto c = ngrams(candidate, n);
    double m = clipped_overlap(c, ngrams(reference, n));
    double t = total(c);
    if (smoothing == Smoothing::AddOne && n > 1) {
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0) return 0.0;
    log_sum += std::log(m / t) / static_cast<double>(order);
  }
  double c = static_cast<double>(candidate.size()), r = static_cast<double>(reference.size());
  double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return std::clamp(bp * std::exp(log_sum), 0.0, 1.0);
}

std::optional<double> rouge(const Tokens& candidate, const Tokens& reference, RougeVariant v) {
  if (candidate.empty() || reference.empty()) throw EmptyInput("ROUGE needs nonempty sequences");
  if (v == RougeVariant::RL) {
    double l = static_cast<double>(lcs(candidate, reference));
    return f1(l / static_cast<double>(candidate.size()), l / static_cast<double>(reference.size()));
  }
  std::size_t n = v == RougeVariant::R1 ? 1 : 2;
  if (candidate.size() < n || reference.size() < n) return std::nullopt;
  auto c = ngrams(candidate, n);
  auto r = ngrams(reference, n);
  double o = clipped_overlap(c, r);
  return f1(o / total(c), o / total(r));
}

std::vector<std::pair<std::size_t, std::size_t>> meteor_alignment(const Tokens& candidate, const Tokens& reference) {
  // Greedy tiling: repeatedly match the longest common run of unmatched
  // tokens (earliest in candidate, then reference), then fall back to
  // single tokens.
  std::vector<bool> cu(candidate.size(), false), ru(reference.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  while (true) {
    std::size_t best_len = 0, bi = 0, bj = 0;
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      if (cu[i]) continue;
      for (std::size_t j = 0; j < reference.size(); ++j) {
        std::size_t len = 0;
        while (i + len < candidate.size() && j + len < reference.size() && !cu[i + len] && !ru[j + len] &&
               candidate[i + len] == reference[j + len])
          ++len;
        if (len > best_len) {
          best_len = len;
          bi = i;
          bj = j;
        }
      }
    }
    if (best_len == 0) break;
    for (std::size_t k = 0; k < best_len; ++k) {
      cu[bi + k] = ru[bj + k] = true;
      out.push_back({bi + k, bj + k});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t count_chunks(const std::vector<std::pair<std::size_t, std::size_t>>& al) {
  if (al.empty()) return 0;
  std::size_t chunks = 1;
  for (std::size_t k = 1; k < al.size(); ++k)
    if (!(al[k].first == al[k - 1].first + 1 && al[k].second == al[k - 1].second + 1)) ++chunks;
  return chunks;
}

double meteor(const Tokens& candidate, const Tokens& reference) {
  if (candidate.empty() || reference.empty()) throw EmptyInput("METEOR needs nonempty sequences");
  auto al = meteor_alignment(candidate, reference);
  double m = static_cast<double>(al.size());
  if (m == 0.0) return 0.0;
  double p = m / static_cast<double>(candidate.size());
  double r = m / static_cast<double>(reference.size());
  double fmean = 10.0 * p * r / (r + 9.0 * p);
  double penalty = 0.5 * std::pow(static_cast<double>(count_chunks(al)) / m, 3.0);
  return std::clamp(fmean * (1.0 - penalty), 0.0, 1.0);
}

SimilarityScores similarity(const Plan& draft, const Plan& corrected, const MetricOptions& opt) {
  Tokens ref = tokenize_plan(draft, opt.full_tokens);
  Tokens cand = tokenize_plan(corrected, opt.full_tokens);
  SimilarityScores s;
  if (ref.empty() && cand.empty()) {
    s.bleu = s.rouge1 = s.rougeL = s.meteor = 1.0;
    s.rouge2 = 1.0;
    return s;
  }
  if (ref.empty() || cand.empty()) return s;
  s.bleu = bleu(cand, ref, opt.smoothing);
  s.rouge1 = *rouge(cand, ref, RougeVariant::R1);
  s.rouge2 = rouge(cand, ref, RougeVariant::R2);
  s.rougeL = *rouge(cand, ref, RougeVariant::RL);
  s.meteor = meteor(cand, ref);
  return s;
}

EvalReport eval_run(const Scenario& s, const Plan& draft, const RepairResult& result, const MetricOptions& opt) {
  EvalReport e;
  e.scores = similarity(draft, result.plan, opt);
  e.feasible = result.feasible;
  e.script = edit_script(draft, result.plan);
  if (result.script.cost == e.script.cost) e.script = result.script;
  ValidateOptions full;
  e.draft_battery_violations = static_cast<int>(validate(s, draft, full).count(CheckClass::Battery));
  e.battery_violations = static_cast<int>(validate(s, result.plan, full).count(CheckClass::Battery));
  e.draft_makespan = makespan(simulate(s, draft));
  e.makespan = makespan(simulate(s, result.plan));
  e.makespan_delta = e.makespan - e.draft_makespan;
  e.t_rep = result.iterations_used;
  return e;
}

BatchReport aggregate(const std::vector<EvalReport>& runs) {
  BatchReport b;
  b.runs = runs.size();
  if (runs.empty()) return b;
  double feasible = 0, edits = 0, t_rep = 0;
  for (const auto& r : runs) {
    feasible += r.feasible ? 1 : 0;
    edits += r.script.cost;
    t_rep += r.t_rep;
  }
  double n = static_cast<double>(runs.size());
  b.fr = feasible / n;
  b.fpr = feasible / n;
  b.mean_edits = edits / n;
  b.mean_t_rep = t_rep / n;
  return b;
}

std::string scores_json(const SimilarityScores& s, int indent) {
  auto r4 = [](double v) { return std::round(v * 10000.0) / 10000.0; };
  nlohmann::ordered_json j;
  j["bleu"] = r4(s.bleu);
  j["rouge1"] = r4(s.rouge1);
  j["rouge2"] = s.rouge2 ? nlohmann::ordered_json(r4(*s.rouge2)) : nlohmann::ordered_json(nullptr);
  j["rougeL"] = r4(s.rougeL);
  j["meteor"] = r4(s.meteor);
  return j.dump(indent) + "\n";
}

}  // namespace robosched
