#include "pcx/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <future>
#include <thread>

namespace pcx {

void MCConfig::validate() const {
    if (n_samples < 2) throw validation_error("mc: n_samples must be >= 2");
    if (batch < 1) throw validation_error("mc: batch must be >= 1");
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double uniform_open(std::uint64_t bits) {
    // 53 significant bits, strictly inside (0,1)
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Streaming mean/M2 with ordered pairwise combination (Chan et al.).
struct Accumulator {
    double mean = 0.0;
    double m2 = 0.0;
    std::int64_t n = 0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void combine(const Accumulator& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double d = o.mean - mean;
        const std::int64_t tot = n + o.n;
        mean += d * static_cast<double>(o.n) / static_cast<double>(tot);
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) /
                          static_cast<double>(tot);
        n = tot;
    }

    MCEstimate estimate() const {
        MCEstimate e;
        e.mean = mean;
        e.n_used = n;
        e.std_error = (n > 1) ? std::sqrt(m2 / static_cast<double>(n - 1) /
                                          static_cast<double>(n))
                              : 0.0;
        return e;
    }
};

// Runs the sampler batch by batch. make_sampler() builds one sampler closure
// per worker (owning its scratch buffers); each sampler maps a flat index and
// a normals buffer to one sample value, as a pure function of the normals.
// Batches are independent and may run concurrently; the reduction order is
// fixed by batch index either way, so results are bit-identical.
template <typename MakeSampler>
MCEstimate run_batches(const MCConfig& cfg, int dim, MakeSampler&& make_sampler) {
    cfg.validate();
    const std::int64_t n_batches = (cfg.n_samples + cfg.batch - 1) / cfg.batch;

    auto run_one = [&](auto& sampler, std::vector<double>& zeta, std::int64_t b) {
        const std::int64_t start = b * cfg.batch;
        const std::int64_t stop = std::min(cfg.n_samples, start + cfg.batch);
        Accumulator local;
        for (std::int64_t i = start; i < stop; ++i)
            local.add(sampler(static_cast<std::uint64_t>(i), zeta));
        return local;
    };

    std::vector<Accumulator> partials(static_cast<size_t>(n_batches));
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const size_t workers =
        cfg.parallel ? std::min<size_t>(static_cast<size_t>(n_batches), hw) : 1;
    if (workers > 1) {
        std::atomic<std::int64_t> next{0};
        std::vector<std::future<void>> pool;
        for (size_t w = 0; w < workers; ++w)
            pool.push_back(std::async(std::launch::async, [&] {
                auto sampler = make_sampler();
                std::vector<double> zeta(dim);
                for (std::int64_t b = next.fetch_add(1); b < n_batches; b = next.fetch_add(1))
                    partials[static_cast<size_t>(b)] = run_one(sampler, zeta, b);
            }));
        for (auto& f : pool) f.get();
    } else {
        auto sampler = make_sampler();
        std::vector<double> zeta(dim);
        for (std::int64_t b = 0; b < n_batches; ++b)
            partials[static_cast<size_t>(b)] = run_one(sampler, zeta, b);
    }

    Accumulator total;
    for (const Accumulator& a : partials) total.combine(a);
    return total.estimate();
}

}  // namespace

double normal_quantile(double p) {
    // Wichura, Applied Statistics 37 (1988), algorithm AS 241 (PPND16).
    if (!(p > 0.0 && p < 1.0)) throw validation_error("normal_quantile: p must be in (0,1)");
    const double q = p - 0.5;
    double r;
    if (std::abs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -x : x;
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t key)
    : base_(mix64(mix64(seed) ^ mix64(key ^ 0xA5A5A5A5A5A5A5A5ULL))) {}

void NormalStream::fill(std::uint64_t sample_index, std::span<double> out) const {
    const std::uint64_t row = mix64(base_ ^ mix64(sample_index));
    for (size_t k = 0; k < out.size(); ++k)
        out[k] = normal_quantile(uniform_open(mix64(row + k)));
}

std::vector<double> sample_terminal_z(std::span<const double> lambdas,
                                      std::span<const double> anchor, double horizon,
                                      std::span<const double> normals) {
    const size_t n = lambdas.size();
    if (anchor.size() != n || normals.size() != n)
        throw validation_error("sample_terminal_z: size mismatch");
    std::vector<double> z(n);
    for (size_t k = 0; k < n; ++k) {
        if (lambdas[k] < 0.0)
            throw validation_error("sample_terminal_z: negative diffusion coefficient");
        z[k] = anchor[k] + std::sqrt(2.0 * lambdas[k] * horizon) * normals[k];
    }
    return z;
}

ZProblem ZProblem::from_market(const ModelSpec& model, const PayoffSpec& payoff) {
    payoff.validate(model.n_assets);
    const Spectrum spec = spectrum(build_covariance(model));
    const CoordinateMap map = coordinate_map(model, spec);
    ZProblem zp;
    const Eigen::VectorXd heat = spec.heat_coefficients();
    zp.lambdas.assign(heat.data(), heat.data() + heat.size());
    const Eigen::VectorXd anchor = map.anchor(model.spot);
    zp.anchor.assign(anchor.data(), anchor.data() + anchor.size());
    zp.horizon = model.horizon;
    auto g = initial_condition(payoff, map);
    zp.g = [g](std::span<const double> z) { return g(z); };
    return zp;
}

namespace {

void check_problem(const ZProblem& p) {
    if (p.lambdas.size() != p.anchor.size())
        throw validation_error("mc: lambdas/anchor size mismatch");
    if (!p.g) throw validation_error("mc: missing payoff function");
    for (double l : p.lambdas)
        if (l < 0.0) throw validation_error("mc: negative diffusion coefficient");
    if (!(p.horizon > 0.0)) throw validation_error("mc: horizon must be > 0");
}

}  // namespace

MCEstimate estimate_price(const ZProblem& problem, const MCConfig& cfg) {
    check_problem(problem);
    const int n = static_cast<int>(problem.lambdas.size());
    std::vector<double> scale(n);
    for (int k = 0; k < n; ++k)
        scale[k] = std::sqrt(2.0 * problem.lambdas[k] * problem.horizon);
    const NormalStream stream(cfg.seed, 0);
    return run_batches(cfg, n, [&] {
        return [&problem, &cfg, scale, stream, n,
                z = std::vector<double>(n)](std::uint64_t i,
                                            std::vector<double>& zeta) mutable {
            stream.fill(i, zeta);
            double acc = 0.0;
            const int reps = cfg.antithetic ? 2 : 1;
            for (int rep = 0; rep < reps; ++rep) {
                const double sgn = (rep == 0) ? 1.0 : -1.0;
                for (int k = 0; k < n; ++k)
                    z[k] = problem.anchor[k] + scale[k] * sgn * zeta[k];
                acc += problem.g(z);
            }
            return acc / reps;
        };
    });
}

MCEstimate estimate_price(const ModelSpec& model, const PayoffSpec& payoff,
                          const MCConfig& cfg) {
    return estimate_price(ZProblem::from_market(model, payoff), cfg);
}

MCEstimate estimate_alpha_difference(const ZProblem& problem, std::span<const int> alpha,
                                     int r, const MCConfig& cfg,
                                     std::optional<std::uint64_t> stream_key) {
    check_problem(problem);
    const int n = static_cast<int>(problem.lambdas.size());
    if (static_cast<int>(alpha.size()) != n)
        throw validation_error("alpha difference: alpha length must match dimension");
    if (r < 0 || r > n) throw validation_error("alpha difference: r out of range");

    std::vector<int> support;
    for (int k = 0; k < n; ++k) {
        if (alpha[k] != 0 && alpha[k] != 1)
            throw validation_error("alpha difference: alpha entries must be 0 or 1");
        if (alpha[k] == 1) {
            if (k < r)
                throw validation_error("alpha difference: alpha must vanish on the retained "
                                       "coordinates k <= r");
            support.push_back(k);
        }
    }
    const int a = static_cast<int>(support.size());
    if (a > 20) throw validation_error("alpha difference: |alpha| too large");

    // Per-coordinate scales for the anchored vector lambda0 + dlambda.beta.
    std::vector<double> scale_full(n), scale_anchor(n, 0.0);
    for (int k = 0; k < n; ++k)
        scale_full[k] = std::sqrt(2.0 * problem.lambdas[k] * problem.horizon);
    for (int k = 0; k < r; ++k) scale_anchor[k] = scale_full[k];

    std::uint64_t key;
    if (stream_key) {
        key = *stream_key;
    } else {
        key = 0x5851F42D4C957F2DULL;
        for (int k : support) key = key * 6364136223846793005ULL + static_cast<std::uint64_t>(k) + 1;
    }
    const NormalStream stream(cfg.seed, key);

    const std::uint32_t betas = 1u << a;
    const std::uint32_t flips = cfg.antithetic ? betas : 1u;  // 2^a sign patterns
    return run_batches(cfg, n, [&] {
        return [&problem, stream, support, scale_full, scale_anchor, a, betas, flips, n,
                z = std::vector<double>(n)](std::uint64_t i,
                                            std::vector<double>& zeta) mutable {
            stream.fill(i, zeta);
            double acc = 0.0;
            for (std::uint32_t flip = 0; flip < flips; ++flip) {
                double sum = 0.0;
                for (std::uint32_t beta = 0; beta < betas; ++beta) {
                    for (int k = 0; k < n; ++k)
                        z[k] = problem.anchor[k] + scale_anchor[k] * zeta[k];
                    int popcount = 0;
                    for (int j = 0; j < a; ++j)
                        if (beta & (1u << j)) {
                            const int k = support[j];
                            const double s = (flip & (1u << j)) ? -1.0 : 1.0;
                            z[k] = problem.anchor[k] + scale_full[k] * s * zeta[k];
                            ++popcount;
                        }
                    const double sign = ((a - popcount) % 2 == 0) ? 1.0 : -1.0;
                    sum += sign * problem.g(z);
                }
                acc += sum;
            }
            return acc / flips;
        };
    });
}

MCEstimate estimate_alpha_difference(const ModelSpec& model, const PayoffSpec& payoff,
                                     std::span<const int> alpha, int r, const MCConfig& cfg,
                                     std::optional<std::uint64_t> stream_key) {
    return estimate_alpha_difference(ZProblem::from_market(model, payoff), alpha, r, cfg,
                                     stream_key);
}

MCEstimate estimate_truncation_error(const ZProblem& problem, const ExpansionPlan& plan,
                                     const MCConfig& cfg) {
    check_problem(problem);
    const int n = static_cast<int>(problem.lambdas.size());
    if (plan.n != n) throw validation_error("truncation error: plan dimension mismatch");

    std::vector<double> scale_full(n);
    for (int k = 0; k < n; ++k)
        scale_full[k] = std::sqrt(2.0 * problem.lambdas[k] * problem.horizon);
    // One scale row per plan term, zeroed outside the term's subset.
    std::vector<std::vector<double>> scales;
    std::vector<double> weights;
    for (const auto& term : plan.terms) {
        term.subset.validate(n);
        std::vector<double> s(n, 0.0);
        for (int k : term.subset.indices) s[k - 1] = scale_full[k - 1];
        scales.push_back(std::move(s));
        weights.push_back(static_cast<double>(term.weight));
    }

    const NormalStream stream(cfg.seed, 0);
    return run_batches(cfg, n, [&] {
        return [&problem, &cfg, stream, scale_full, &scales, &weights, n,
                z = std::vector<double>(n)](std::uint64_t i,
                                            std::vector<double>& zeta) mutable {
            stream.fill(i, zeta);
            double acc = 0.0;
            const int reps = cfg.antithetic ? 2 : 1;
            for (int rep = 0; rep < reps; ++rep) {
                const double sgn = (rep == 0) ? 1.0 : -1.0;
                for (int k = 0; k < n; ++k)
                    z[k] = problem.anchor[k] + scale_full[k] * sgn * zeta[k];
                double d = problem.g(z);
                for (size_t t = 0; t < scales.size(); ++t) {
                    const auto& s = scales[t];
                    for (int k = 0; k < n; ++k)
                        z[k] = problem.anchor[k] + s[k] * sgn * zeta[k];
                    d -= weights[t] * problem.g(z);
                }
                acc += d;
            }
            return acc / reps;
        };
    });
}

MCEstimate estimate_truncation_error(const ModelSpec& model, const PayoffSpec& payoff,
                                     const ExpansionPlan& plan, const MCConfig& cfg) {
    return estimate_truncation_error(ZProblem::from_market(model, payoff), plan, cfg);
}

}  // namespace pcx
