#include "deferral/finance.hpp"

#include <cmath>
#include <stdexcept>

namespace deferral::finance {

CashflowStream::CashflowStream(std::initializer_list<std::pair<int, double>> flows) {
  for (const auto& [year, amount] : flows)
    add(year, amount);
}

void CashflowStream::add(int year, double amount) {
  if (year < 0)
    throw std::invalid_argument("cash flow year must be >= 0");
  if (!std::isfinite(amount))
    throw std::invalid_argument("cash flow amount must be finite");
  flows_[year] += amount;
}

double CashflowStream::at(int year) const {
  const auto it = flows_.find(year);
  return it == flows_.end() ? 0.0 : it->second;
}

int CashflowStream::last_year() const { return flows_.empty() ? -1 : flows_.rbegin()->first; }

double CashflowStream::total() const {
  double sum = 0.0;
  for (const auto& [year, amount] : flows_)
    sum += amount;
  return sum;
}

CashflowStream& CashflowStream::operator+=(const CashflowStream& other) {
  for (const auto& [year, amount] : other.flows_)
    flows_[year] += amount;
  return *this;
}

double compound_factor(double r, int t) { return std::pow(1.0 + r, t); }

double annual_instalment(double v1, double c, double r, int t, int x) {
  if (x < 1)
    throw std::invalid_argument("instalment count must be >= 1");
  if (c > v1)
    throw std::invalid_argument("downpayment exceeds the conservation payment; no loan to repay");
  return compound_factor(r, t) * (v1 - c) / x;
}

double total_revenue(double v1, double c, double r, int t) {
  if (c > v1)
    throw std::invalid_argument("downpayment exceeds the conservation payment; no loan to repay");
  return c + compound_factor(r, t) * (v1 - c);
}

double npv(const CashflowStream& stream, double delta) {
  double sum = 0.0;
  for (const auto& [year, amount] : stream.flows())
    sum += amount / compound_factor(delta, year);
  return sum;
}

double annuity_factor(int periods, double delta) {
  double sum = 0.0;
  for (int i = 1; i <= periods; ++i)
    sum += 1.0 / compound_factor(delta, i);
  return sum;
}

double annuity_due_factor(int periods, double delta) {
  double sum = 0.0;
  for (int y = 0; y < periods; ++y)
    sum += 1.0 / compound_factor(delta, y);
  return sum;
}

double discounted_instalment_sum(double m, int periods, double delta) {
  if (periods < 1)
    throw std::invalid_argument("periods must be >= 1");
  return m * annuity_factor(periods, delta);
}

CashflowStream deferred_stream(double initial, double instalment_cost_per_year, int years) {
  CashflowStream stream;
  stream.add(0, initial);
  for (int y = 1; y <= years; ++y)
    stream.add(y, instalment_cost_per_year);
  return stream;
}

double match_upfront_budget(double initial, double instalment_cost_per_year, int years, double delta,
                            int horizon) {
  if (horizon < 1)
    throw std::invalid_argument("horizon must be >= 1");
  const double target = npv(deferred_stream(initial, instalment_cost_per_year, years), delta);
  return target / annuity_due_factor(horizon, delta);
}

} // namespace deferral::finance
