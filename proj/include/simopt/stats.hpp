#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace simopt {

/// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// Student t cumulative distribution function.
double student_t_cdf(double t, double df);

/// P(|T| >= |t|) for T ~ t(df).
double student_t_two_sided_p(double t, double df);

enum class HigherMean { a, b, tie };
enum class Verdict { better, worse, comparable };

std::string_view to_string(Verdict v) noexcept;

struct TTestResult {
  double t_stat = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  HigherMean higher_mean = HigherMean::tie;
  bool significant_at_5pct = false;
  /// Zero variance in both samples with unequal means.
  bool degenerate = false;
};

/// Two-sided two-sample t-test; pooled variance by default, Welch otherwise.
/// Throws std::invalid_argument if either sample has fewer than two values.
TTestResult t_test_two_sample(std::span<const double> a, std::span<const double> b, bool pooled = true);

/// "better"/"worse" for sample a when p < 0.05, else "comparable".
Verdict verdict(const TTestResult& result) noexcept;

struct TrialSummary {
  std::optional<double> initial_value;
  double final_value = 0.0;
  std::optional<double> improvement;
  std::uint64_t stages = 0;
  std::uint64_t evaluations = 0;
  double wall_seconds = 0.0;
};

struct TrialAggregate {
  std::size_t trials = 0;
  double mean_improvement = 0.0;
  double sd_improvement = 0.0;
  double mean_final = 0.0;
  double sd_final = 0.0;
  double mean_stages = 0.0;
  double mean_evaluations = 0.0;
  double sd_evaluations = 0.0;
  /// Fewer than two values behind an SD, which is then reported as 0.
  bool degenerate = false;
};

/// Throws std::invalid_argument on an empty list.
TrialAggregate summarize_trials(std::span<const TrialSummary> trials);

double mean(std::span<const double> xs);
/// Sample SD with n-1 denominator; 0 for fewer than two values.
double sample_sd(std::span<const double> xs);

}  // namespace simopt
