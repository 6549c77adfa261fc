#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pcx/errors.hpp"

namespace pcx {

/// Sorted set of coordinate indices in 1..n (1-based, matching the usual
/// subscript convention for principal coordinates).
struct IndexSet {
    std::vector<int> indices;

    IndexSet() = default;
    IndexSet(std::initializer_list<int> list);
    explicit IndexSet(std::vector<int> list);

    int size() const { return static_cast<int>(indices.size()); }
    bool contains(int k) const;
    void validate(int n) const;  // sorted, unique, within 1..n

    std::string to_string() const;  // "{1,3,5}"

    auto operator<=>(const IndexSet&) const = default;
};

struct PlanTerm {
    std::int64_t weight = 0;  // weights are exact integers by construction
    IndexSet subset;
};

/// Weighted collection of index subsets; the approximate solution is the
/// weighted sum of the corresponding sub-PDE solutions. Terms are kept in
/// canonical order: by subset cardinality, then lexicographically.
struct ExpansionPlan {
    std::vector<PlanTerm> terms;
    int r = 0;  // retained dimensions, every subset contains {1..r}
    int m = 0;  // correction order, max subset size is r+m
    int n = 0;  // total dimension

    std::int64_t weight_sum() const;
    std::string to_string() const;  // one "(weight, {indices})" line per term
};

/// u_{r,1} = (1+r-n) u^{1..r} + sum_{k>r} u^{1..r,k}. Requires 1 <= r < n.
ExpansionPlan first_order_plan(int r, int n);

/// u_{r,2}: weight 1+(n-r)(n-r-3)/2 on {1..r}, 2-(n-r) on each {1..r,k},
/// 1 on each {1..r,k,l}. Requires 1 <= r <= n-2.
ExpansionPlan second_order_plan(int r, int n);

/// Order-m plan from the anchored difference calculus: sums the mixed
/// differences Delta^alpha u(lambda0) over |alpha| <= m and collects the
/// resulting integer coefficients per subset. Agrees term-by-term with the
/// specialized constructors for m = 1, 2.
ExpansionPlan general_plan(int r, int m, int n);

/// Weighted sum of per-subset values. Every subset in the plan must be
/// present; a missing one is reported by name.
double combine(const ExpansionPlan& plan, const std::map<IndexSet, double>& term_values);

/// Sup-norms of mixed even-order derivatives of the initial data, keyed by the
/// (sorted) tuple of distinct differentiation directions. Ships with a
/// constructor for the product-of-cosines family, where every norm is 1.
class MixedNormTable {
public:
    MixedNormTable() = default;
    static MixedNormTable all_ones(int n);

    void set(IndexSet key, double value);
    double norm(const IndexSet& key) const;  // throws if missing

private:
    std::map<IndexSet, double> norms_;
    bool all_ones_ = false;
    int n_ = 0;
};

/// t^2 sum_{r<i<k<=n} lambda_i lambda_k ||d4 g / dz_i^2 dz_k^2||_inf.
/// `lambdas` are the heat-equation diffusion coefficients, sorted descending.
double bound_first_order(double t, std::span<const double> lambdas, int r,
                         const MixedNormTable& norms);

/// t^3 sum_{r<i<j<k<=n} lambda_i lambda_j lambda_k ||d6 g||_inf.
double bound_second_order(double t, std::span<const double> lambdas, int r,
                          const MixedNormTable& norms);

}  // namespace pcx
