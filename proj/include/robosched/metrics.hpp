#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robosched/plan.hpp"
#include "robosched/repair.hpp"
#include "robosched/scenario.hpp"

namespace robosched {

using Tokens = std::vector<std::string>;

enum class Smoothing { None, AddOne };
enum class RougeVariant { R1, R2, RL };

/// Sentence BLEU, n = 1..min(4, |candidate|). Throws EmptyInput on an empty reference.
double bleu(const Tokens& candidate, const Tokens& reference, Smoothing smoothing = Smoothing::None);

/// F1. nullopt for R2 when either side has fewer than 2 tokens. Throws EmptyInput.
std::optional<double> rouge(const Tokens& candidate, const Tokens& reference, RougeVariant v);

/// Exact-match unigram METEOR. Throws EmptyInput.
double meteor(const Tokens& candidate, const Tokens& reference);

/// Matched (candidate, reference) index pairs used by meteor, candidate order.
std::vector<std::pair<std::size_t, std::size_t>> meteor_alignment(const Tokens& candidate, const Tokens& reference);
std::size_t count_chunks(const std::vector<std::pair<std::size_t, std::size_t>>& alignment);

struct SimilarityScores {
  double bleu = 0.0;
  double rouge1 = 0.0;
  std::optional<double> rouge2;
  double rougeL = 0.0;
  double meteor = 0.0;
};

struct MetricOptions {
  Smoothing smoothing = Smoothing::None;
  bool full_tokens = false;
};

/// Scores the corrected plan (candidate) against the draft (reference).
SimilarityScores similarity(const Plan& draft, const Plan& corrected, const MetricOptions& opt = {});

struct EvalReport {
  SimilarityScores scores;
  bool feasible = false;
  EditScript script;
  int draft_battery_violations = 0;
  int battery_violations = 0;
  double draft_makespan = 0.0;
  double makespan = 0.0;
  double makespan_delta = 0.0;
  int t_rep = 0;
};

EvalReport eval_run(const Scenario& s, const Plan& draft, const RepairResult& result, const MetricOptions& opt = {});

struct BatchReport {
  std::size_t runs = 0;
  double fr = 0.0;
  double fpr = 0.0;
  double mean_edits = 0.0;
  double mean_t_rep = 0.0;
};

BatchReport aggregate(const std::vector<EvalReport>& runs);

std::string scores_json(const SimilarityScores& s, int indent = 2);

}  // namespace robosched
