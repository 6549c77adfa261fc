#include "pcx/expansion.hpp"

#include <algorithm>
#include <sstream>

namespace pcx {

IndexSet::IndexSet(std::initializer_list<int> list) : indices(list) {
    std::sort(indices.begin(), indices.end());
}

IndexSet::IndexSet(std::vector<int> list) : indices(std::move(list)) {
    std::sort(indices.begin(), indices.end());
}

bool IndexSet::contains(int k) const {
    return std::binary_search(indices.begin(), indices.end(), k);
}

void IndexSet::validate(int n) const {
    int prev = 0;
    for (int k : indices) {
        if (k <= prev) throw validation_error("index set must be strictly increasing: " + to_string());
        if (k < 1 || k > n)
            throw validation_error("index set entry out of range 1.." + std::to_string(n) + ": " + to_string());
        prev = k;
    }
}

std::string IndexSet::to_string() const {
    std::ostringstream os;
    os << '{';
    for (size_t i = 0; i < indices.size(); ++i) {
        if (i) os << ',';
        os << indices[i];
    }
    os << '}';
    return os.str();
}

namespace {

bool canonical_less(const PlanTerm& a, const PlanTerm& b) {
    if (a.subset.size() != b.subset.size()) return a.subset.size() < b.subset.size();
    return a.subset.indices < b.subset.indices;
}

ExpansionPlan finalize(std::map<IndexSet, std::int64_t> coeffs, int r, int m, int n) {
    ExpansionPlan plan;
    plan.r = r;
    plan.m = m;
    plan.n = n;
    for (auto& [subset, w] : coeffs)
        if (w != 0) plan.terms.push_back({w, subset});
    std::sort(plan.terms.begin(), plan.terms.end(), canonical_less);
    return plan;
}

}  // namespace

std::int64_t ExpansionPlan::weight_sum() const {
    std::int64_t s = 0;
    for (const auto& t : terms) s += t.weight;
    return s;
}

std::string ExpansionPlan::to_string() const {
    std::ostringstream os;
    for (const auto& t : terms) os << '(' << t.weight << ", " << t.subset.to_string() << ")\n";
    return os.str();
}

ExpansionPlan first_order_plan(int r, int n) {
    if (r < 1 || r >= n) throw validation_error("first_order_plan: need 1 <= r < n");
    std::map<IndexSet, std::int64_t> coeffs;
    std::vector<int> retained(r);
    for (int i = 0; i < r; ++i) retained[i] = i + 1;
    coeffs[IndexSet(retained)] = 1 + r - n;
    for (int k = r + 1; k <= n; ++k) {
        auto with_k = retained;
        with_k.push_back(k);
        coeffs[IndexSet(std::move(with_k))] = 1;
    }
    return finalize(std::move(coeffs), r, 1, n);
}

ExpansionPlan second_order_plan(int r, int n) {
    if (r < 1 || r > n - 2) throw validation_error("second_order_plan: need 1 <= r <= n-2");
    const std::int64_t q = n - r;
    std::map<IndexSet, std::int64_t> coeffs;
    std::vector<int> retained(r);
    for (int i = 0; i < r; ++i) retained[i] = i + 1;
    coeffs[IndexSet(retained)] = 1 + q * (q - 3) / 2;
    for (int k = r + 1; k <= n; ++k) {
        auto with_k = retained;
        with_k.push_back(k);
        coeffs[IndexSet(std::move(with_k))] = 2 - q;
    }
    for (int k = r + 1; k <= n; ++k)
        for (int l = k + 1; l <= n; ++l) {
            auto with_kl = retained;
            with_kl.push_back(k);
            with_kl.push_back(l);
            coeffs[IndexSet(std::move(with_kl))] = 1;
        }
    return finalize(std::move(coeffs), r, 2, n);
}

ExpansionPlan general_plan(int r, int m, int n) {
    if (r < 1 || m < 0 || r + m > n)
        throw validation_error("general_plan: need 1 <= r, 0 <= m, r+m <= n");

    std::vector<int> retained(r);
    for (int i = 0; i < r; ++i) retained[i] = i + 1;
    std::map<IndexSet, std::int64_t> coeffs;

    // Delta^alpha u(lambda0) = sum_{beta <= alpha} (-1)^{|alpha - beta|} u(lambda0 + dlambda.beta),
    // alpha over the tail coordinates with |alpha| <= m. The beta-term's subset is
    // {1..r} together with the coordinates beta selects.
    const int tail = n - r;
    std::vector<int> members;
    auto recurse = [&](auto&& self, int next, int remaining) -> void {
        // members currently holds a chosen alpha; expand its beta-sum.
        const int a = static_cast<int>(members.size());
        for (std::uint32_t bits = 0; bits < (1u << a); ++bits) {
            auto subset = retained;
            int b = 0;
            for (int i = 0; i < a; ++i)
                if (bits & (1u << i)) {
                    subset.push_back(members[i]);
                    ++b;
                }
            coeffs[IndexSet(std::move(subset))] += ((a - b) % 2 == 0) ? 1 : -1;
        }
        if (remaining == 0) return;
        for (int k = next; k <= n; ++k) {
            members.push_back(k);
            self(self, k + 1, remaining - 1);
            members.pop_back();
        }
    };
    recurse(recurse, r + 1, std::min(m, tail));
    return finalize(std::move(coeffs), r, m, n);
}

double combine(const ExpansionPlan& plan, const std::map<IndexSet, double>& term_values) {
    double sum = 0.0;
    for (const auto& term : plan.terms) {
        auto it = term_values.find(term.subset);
        if (it == term_values.end())
            throw validation_error("combine: missing value for subset " + term.subset.to_string());
        sum += static_cast<double>(term.weight) * it->second;
    }
    return sum;
}

MixedNormTable MixedNormTable::all_ones(int n) {
    MixedNormTable t;
    t.all_ones_ = true;
    t.n_ = n;
    return t;
}

void MixedNormTable::set(IndexSet key, double value) {
    if (value < 0.0) throw validation_error("mixed norm must be >= 0");
    norms_[std::move(key)] = value;
}

double MixedNormTable::norm(const IndexSet& key) const {
    if (all_ones_) {
        key.validate(n_);
        return 1.0;
    }
    auto it = norms_.find(key);
    if (it == norms_.end())
        throw validation_error("mixed norm table: missing entry for " + key.to_string());
    return it->second;
}

double bound_first_order(double t, std::span<const double> lambdas, int r,
                         const MixedNormTable& norms) {
    if (t < 0.0) throw validation_error("bound_first_order: t must be >= 0");
    const int n = static_cast<int>(lambdas.size());
    double sum = 0.0;
    for (int i = r + 1; i <= n; ++i)
        for (int k = i + 1; k <= n; ++k)
            sum += lambdas[k - 1] * lambdas[i - 1] * norms.norm(IndexSet{i, k});
    return t * t * sum;
}

double bound_second_order(double t, std::span<const double> lambdas, int r,
                          const MixedNormTable& norms) {
    if (t < 0.0) throw validation_error("bound_second_order: t must be >= 0");
    const int n = static_cast<int>(lambdas.size());
    double sum = 0.0;
    for (int i = r + 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            for (int k = j + 1; k <= n; ++k)
                sum += lambdas[i - 1] * lambdas[j - 1] * lambdas[k - 1] *
                       norms.norm(IndexSet{i, j, k});
    return t * t * t * sum;
}

}  // namespace pcx
