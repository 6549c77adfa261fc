// Command-line front end: expansion plans, single prices, convergence sweeps,
// Monte Carlo references, and a quick self-test battery.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pcx/harness.hpp"
#include "pcx/oracle.hpp"

namespace {

struct CommonOptions {
    std::string preset;
    std::string config_path;
    std::optional<double> gamma;
    std::optional<double> strike;
    std::optional<int> j_points;
    std::optional<int> m_steps;
    std::optional<std::int64_t> n_samples;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> payoff;
    std::optional<std::string> reference;
    std::optional<std::string> output;
    std::optional<double> lambda2_max;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--preset", opt.preset, "configuration preset (fig2-desk, fig3-desk, fig4-desk)");
    cmd->add_option("--config", opt.config_path, "JSON config file (flags override file values)");
    cmd->add_option("--gamma", opt.gamma, "restrict the sweep to a single gamma");
    cmd->add_option("--strike", opt.strike, "override the payoff strike");
    cmd->add_option("--j-points", opt.j_points, "grid intervals per axis (even)");
    cmd->add_option("--m-steps", opt.m_steps, "time steps");
    cmd->add_option("--samples", opt.n_samples, "Monte Carlo sample count");
    cmd->add_option("--seed", opt.seed, "Monte Carlo seed");
    cmd->add_option("--payoff", opt.payoff, "payoff preset name");
    cmd->add_option("--reference", opt.reference, "reference: oracle, mc, mc_coupled");
    cmd->add_option("--out", opt.output, "CSV output path");
    cmd->add_option("--lambda2-max", opt.lambda2_max, "exclude records above this lambda2 from the fit");
}

pcx::ExperimentConfig build_config(const CommonOptions& opt) {
    pcx::ExperimentConfig cfg;
    bool have = false;
    if (!opt.config_path.empty()) {
        cfg = pcx::load_config(opt.config_path);
        have = true;
    }
    if (!opt.preset.empty()) {
        cfg = pcx::preset_config(opt.preset);
        have = true;
    }
    if (!have) cfg = pcx::preset_config("fig2-desk");
    if (opt.gamma) cfg.gamma_list = {*opt.gamma};
    if (opt.strike) cfg.payoff.strike = *opt.strike;
    if (opt.j_points) cfg.j_points = *opt.j_points;
    if (opt.m_steps) cfg.m_steps = *opt.m_steps;
    if (opt.n_samples) cfg.mc.n_samples = *opt.n_samples;
    if (opt.seed) cfg.mc.seed = *opt.seed;
    if (opt.payoff) {
        cfg.payoff = pcx::preset_payoff(*opt.payoff);
        cfg.payoff_name = *opt.payoff;
    }
    if (opt.reference) {
        if (*opt.reference == "oracle")
            cfg.reference = pcx::ExperimentConfig::Reference::oracle;
        else if (*opt.reference == "mc")
            cfg.reference = pcx::ExperimentConfig::Reference::mc;
        else if (*opt.reference == "mc_coupled")
            cfg.reference = pcx::ExperimentConfig::Reference::mc_coupled;
        else
            throw pcx::validation_error("unknown reference: " + *opt.reference);
    }
    if (opt.output) cfg.output_path = *opt.output;
    if (opt.lambda2_max) cfg.lambda2_max = *opt.lambda2_max;
    return cfg;
}

int run_selftest() {
    using namespace pcx;
    int failures = 0;
    auto check = [&](bool ok, const std::string& name) {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name.c_str());
        if (!ok) ++failures;
    };

    for (int n = 3; n <= 12; ++n)
        for (int r = 1; r < n; ++r)
            for (int m = 0; m + r <= n; ++m)
                if (general_plan(r, m, n).weight_sum() != 1) {
                    check(false, "plan weight sums");
                    goto after_weights;
                }
    check(true, "plan weight sums equal 1 for all r, m, n <= 12");
after_weights:

    {
        bool ok = true;
        for (int n = 3; n <= 12 && ok; ++n) {
            for (int r = 1; r < n && ok; ++r) {
                auto g1 = general_plan(r, 1, n);
                auto s1 = first_order_plan(r, n);
                ok = (g1.terms.size() == s1.terms.size());
                for (size_t i = 0; ok && i < g1.terms.size(); ++i)
                    ok = g1.terms[i].weight == s1.terms[i].weight &&
                         g1.terms[i].subset == s1.terms[i].subset;
            }
            for (int r = 1; r + 2 <= n && ok; ++r) {
                auto g2 = general_plan(r, 2, n);
                auto s2 = second_order_plan(r, n);
                ok = (g2.terms.size() == s2.terms.size());
                for (size_t i = 0; ok && i < g2.terms.size(); ++i)
                    ok = g2.terms[i].weight == s2.terms[i].weight &&
                         g2.terms[i].subset == s2.terms[i].subset;
            }
        }
        check(ok, "difference-calculus plans match the order-1/2 closed forms");
    }

    {
        auto [l1, l2] = equicorrelation_spectrum(0.2, 0.5, 10);
        auto sp = spectrum(build_covariance(
            ModelSpec::equicorrelated(10, 0.2, 0.5, 100.0, 100.0, std::vector<double>(10, 0.1))));
        const bool ok = std::abs(l1 - sp.lambdas(0)) < 1e-12 &&
                        std::abs(l2 - sp.lambdas(1)) < 1e-12 &&
                        std::abs(l1 - 0.22) < 1e-15 && std::abs(l2 - 0.02) < 1e-15;
        check(ok, "equicorrelation spectrum closed form");
    }

    {
        std::vector<double> lower = {0, 1, 1}, diag = {2, 2, 2}, upper = {1, 1, 0};
        auto x = thomas_solve(lower, diag, upper, std::vector<double>{3, 4, 3});
        const bool ok = std::abs(x[0] - 1) < 1e-14 && std::abs(x[1] - 1) < 1e-14 &&
                        std::abs(x[2] - 1) < 1e-14;
        check(ok, "tridiagonal solve");
    }

    {
        const double p = lognormal_call(std::log(100.0) - 0.02, 0.04, 100.0);
        check(std::abs(p - 7.965567455405804) < 1e-9, "lognormal call closed form");
    }

    {
        SubProblem p;
        p.subset = IndexSet{1};
        p.lambdas = {0.11};
        p.axes = {choose_axis(0.11, 1.0, 0.0, 200)};
        p.horizon = 1.0;
        p.m_steps = 24;
        p.initial = [](std::span<const double> z) { return std::cos(z[0]); };
        const double v = solve_subproblem(p);
        check(std::abs(v - std::exp(-0.11)) < 2e-5, "1d heat solve against closed form");
    }

    std::printf("%s\n", failures == 0 ? "selftest: all checks passed" : "selftest: FAILURES");
    return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dimension-wise expansion pricer for high-dimensional heat equations"};
    app.require_subcommand(1);

    auto* plan_cmd = app.add_subcommand("plan", "print an expansion plan");
    int plan_r = 1, plan_m = 1, plan_n = 10;
    plan_cmd->add_option("--r", plan_r, "retained dimensions")->required();
    plan_cmd->add_option("--m", plan_m, "correction order")->required();
    plan_cmd->add_option("--n", plan_n, "total dimension")->required();

    CommonOptions solve_opt, conv_opt, mc_opt;
    auto* solve_cmd = app.add_subcommand("solve", "expansion value at a single gamma");
    add_common(solve_cmd, solve_opt);
    auto* conv_cmd = app.add_subcommand("converge", "gamma sweep, CSV output and power-law fit");
    add_common(conv_cmd, conv_opt);
    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo reference estimate");
    add_common(mc_cmd, mc_opt);
    bool mc_coupled = false;
    mc_cmd->add_flag("--coupled", mc_coupled, "estimate u - u^xi on shared paths instead of u");

    auto* selftest_cmd = app.add_subcommand("selftest", "run the quick invariant battery");

    try {
        app.parse(argc, argv);

        if (plan_cmd->parsed()) {
            std::printf("%s", pcx::general_plan(plan_r, plan_m, plan_n).to_string().c_str());
            return 0;
        }
        if (solve_cmd->parsed()) {
            auto cfg = build_config(solve_opt);
            if (cfg.gamma_list.size() != 1)
                throw pcx::validation_error("solve: pick one gamma with --gamma");
            const auto pt = pcx::prepare_point(cfg, cfg.gamma_list[0]);
            const auto ex = pcx::evaluate_expansion(cfg, pt);
            for (const auto& [subset, value] : ex.term_values)
                std::printf("term %s = %.12g\n", subset.to_string().c_str(), value);
            std::printf("expansion = %.12g\n", ex.combined);
            return 0;
        }
        if (conv_cmd->parsed()) {
            auto cfg = build_config(conv_opt);
            const auto records = pcx::run_sweep(cfg);
            if (!cfg.output_path.empty()) {
                pcx::emit_csv(records, cfg.output_path);
                std::printf("wrote %s\n", cfg.output_path.c_str());
            }
            for (const auto& r : records)
                std::printf("gamma=%g lambda2=%g abs_error=%.6g stderr=%.2g\n", r.gamma,
                            r.lambda2, r.abs_error, r.std_error);
            const auto fit = pcx::fit_power_law(records, cfg.lambda2_max);
            std::printf("exponent=%.6g ci95=%.6g\n", fit.exponent, fit.ci95);
            return 0;
        }
        if (mc_cmd->parsed()) {
            auto cfg = build_config(mc_opt);
            if (cfg.gamma_list.size() != 1)
                throw pcx::validation_error("mc: pick one gamma with --gamma");
            const auto pt = pcx::prepare_point(cfg, cfg.gamma_list[0]);
            const pcx::ZProblem zp = pcx::make_zproblem(cfg, pt);
            pcx::MCEstimate est;
            if (mc_coupled)
                est = pcx::estimate_truncation_error(zp, pt.plan, cfg.mc);
            else
                est = pcx::estimate_price(zp, cfg.mc);
            std::printf("%.17g,%.17g,%lld\n", est.mean, est.std_error,
                        static_cast<long long>(est.n_used));
            return 0;
        }
        if (selftest_cmd->parsed()) return run_selftest();
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const pcx::validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const pcx::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
