#pragma once

// Payment arithmetic for the deferred and up-front mechanisms: compounding,
// instalments, landowner revenue, discounting and budget matching.

#include <map>
#include <utility>
#include <vector>

namespace deferral::finance {

/// Yearly cash flows keyed by year (year 0 = conservation year).
/// Adding to an existing year accumulates, so years stay unique and sorted.
class CashflowStream {
public:
  CashflowStream() = default;
  CashflowStream(std::initializer_list<std::pair<int, double>> flows);

  /// Throws std::invalid_argument for a negative year or non-finite amount.
  void add(int year, double amount);

  double at(int year) const;
  bool empty() const { return flows_.empty(); }
  /// Last year with an entry, or -1 when empty.
  int last_year() const;
  double total() const;

  std::vector<std::pair<int, double>> entries() const { return {flows_.begin(), flows_.end()}; }
  const std::map<int, double>& flows() const { return flows_; }

  CashflowStream& operator+=(const CashflowStream& other);
  friend CashflowStream operator+(CashflowStream lhs, const CashflowStream& rhs) { return lhs += rhs; }

private:
  std::map<int, double> flows_;
};

/// (1 + r)^t.
double compound_factor(double r, int t);

/// Annual instalment m = (1+r)^t (v1 - c) / x.
/// Throws std::invalid_argument when c > v1: that bid carries no loan and the
/// caller must treat it as non-participation.
double annual_instalment(double v1, double c, double r, int t, int x);

/// Landowner revenue R = c + (1+r)^t (v1 - c). Throws when c > v1.
double total_revenue(double v1, double c, double r, int t);

/// Net present value; year 0 is undiscounted.
double npv(const CashflowStream& stream, double delta);

/// Ordinary annuity factor: sum_{i=1..periods} (1+delta)^-i.
double annuity_factor(int periods, double delta);

/// Annuity-due factor: sum_{y=0..periods-1} (1+delta)^-y.
double annuity_due_factor(int periods, double delta);

/// Present value of `periods` end-of-year instalments of size m.
double discounted_instalment_sum(double m, int periods, double delta);

/// Constant annual budget, paid in years 0..horizon-1, whose NPV equals that
/// of `initial` in year 0 plus `instalment_cost_per_year` in years 1..years.
double match_upfront_budget(double initial, double instalment_cost_per_year, int years, double delta,
                            int horizon);

/// The deferred-mechanism budget stream used by match_upfront_budget.
CashflowStream deferred_stream(double initial, double instalment_cost_per_year, int years);

} // namespace deferral::finance
