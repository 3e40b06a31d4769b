#include "simopt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace simopt {

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("t distribution needs df > 0");
  if (std::isinf(t)) return 0.0;
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  return regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_sided_p(t, df);
  return t < 0.0 ? tail : 1.0 - tail;
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::better: return "better";
    case Verdict::worse: return "worse";
    case Verdict::comparable: return "comparable";
  }
  return "comparable";
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

TTestResult t_test_two_sample(std::span<const double> a, std::span<const double> b, bool pooled) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("t-test needs at least two values per sample");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean(a);
  const double mb = mean(b);
  const double va = std::pow(sample_sd(a), 2);
  const double vb = std::pow(sample_sd(b), 2);

  TTestResult r;
  r.higher_mean = ma > mb ? HigherMean::a : (mb > ma ? HigherMean::b : HigherMean::tie);
  double se = 0.0;
  if (pooled) {
    r.df = na + nb - 2.0;
    const double sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / r.df;
    se = std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
  } else {
    const double qa = va / na;
    const double qb = vb / nb;
    se = std::sqrt(qa + qb);
    const double denom = qa * qa / (na - 1.0) + qb * qb / (nb - 1.0);
    r.df = denom > 0.0 ? (qa + qb) * (qa + qb) / denom : na + nb - 2.0;
  }

  if (se == 0.0) {
    if (ma == mb) {
      r.t_stat = 0.0;
      r.p_value = 1.0;
    } else {
      r.t_stat = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
      r.degenerate = true;
    }
  } else {
    r.t_stat = (ma - mb) / se;
    r.p_value = std::clamp(student_t_two_sided_p(r.t_stat, r.df), 0.0, 1.0);
  }
  r.significant_at_5pct = r.p_value < 0.05;
  return r;
}

Verdict verdict(const TTestResult& result) noexcept {
  if (!result.significant_at_5pct || result.higher_mean == HigherMean::tie) return Verdict::comparable;
  return result.higher_mean == HigherMean::a ? Verdict::better : Verdict::worse;
}

TrialAggregate summarize_trials(std::span<const TrialSummary> trials) {
  if (trials.empty()) throw std::invalid_argument("summarize_trials needs at least one trial");
  std::vector<double> improvements, finals, stages, evals;
  for (const auto& t : trials) {
    if (t.improvement) improvements.push_back(*t.improvement);
    finals.push_back(t.final_value);
    stages.push_back(static_cast<double>(t.stages));
    evals.push_back(static_cast<double>(t.evaluations));
  }
  TrialAggregate agg;
  agg.trials = trials.size();
  agg.mean_improvement = mean(improvements);
  agg.sd_improvement = sample_sd(improvements);
  agg.mean_final = mean(finals);
  agg.sd_final = sample_sd(finals);
  agg.mean_stages = mean(stages);
  agg.mean_evaluations = mean(evals);
  agg.sd_evaluations = sample_sd(evals);
  agg.degenerate = trials.size() < 2 || (!improvements.empty() && improvements.size() < 2);
  return agg;
}

}  // namespace simopt
