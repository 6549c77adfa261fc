#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcx/expansion.hpp"
#include "pcx/model.hpp"
#include "pcx/montecarlo.hpp"
#include "pcx/payoff.hpp"
#include "pcx/pde.hpp"

namespace pcx {

/// Declarative description of one convergence experiment: an equicorrelated
/// market swept over gamma, an expansion order, a reference, and resolutions.
struct ExperimentConfig {
    enum class Reference { oracle, mc, mc_coupled };
    enum class TermSolver { pde, oracle };

    int n_assets = 10;
    double sigma = 0.2;
    double spot = 100.0;
    double horizon = 1.0;
    double risk_free = 0.0;

    PayoffSpec payoff;
    std::string payoff_name;  // preset name when applicable, for reporting

    int r = 1;
    int m = 1;
    std::vector<double> gamma_list;
    Reference reference = Reference::mc_coupled;
    TermSolver term_solver = TermSolver::pde;

    int j_points = 200;
    int m_steps = 12;
    double kappa = 5.0;
    // Plan terms are independent pure solves; results do not depend on the
    // schedule, so sweeps may evaluate them concurrently.
    bool parallel_terms = true;

    MCConfig mc;
    std::string output_path;
    std::optional<double> lambda2_max;  // optional fit filter

    void validate() const;
};

struct ConvergenceRecord {
    double gamma = 0.0;
    double lambda2 = 0.0;  // second covariance eigenvalue (table convention)
    double expansion = 0.0;
    double reference = 0.0;
    double abs_error = 0.0;
    double std_error = 0.0;            // 0 for oracle references
    std::optional<double> bound;       // theoretical bound when available
};

/// Everything derived from the config at one gamma: market, rotation, plan.
struct SweepPoint {
    ModelSpec model;
    Spectrum spec;
    CoordinateMap map;
    Eigen::VectorXd anchor;        // z* in principal coordinates (0 for cosine data)
    std::vector<double> heat;      // diffusion coefficients
    ExpansionPlan plan;
};

SweepPoint prepare_point(const ExperimentConfig& cfg, double gamma);

/// Value of one sub-problem u^nu at the anchor, by ADI solve on the
/// arctan-stretched grid.
double pde_term_value(const ExperimentConfig& cfg, const SweepPoint& pt,
                      const IndexSet& subset);

/// Closed-form u^nu for the cosine and geometric/digital payoffs.
double oracle_term_value(const ExperimentConfig& cfg, const SweepPoint& pt,
                         const IndexSet& subset);

/// Per-term values for the whole plan plus the combined expansion value.
struct ExpansionResult {
    std::map<IndexSet, double> term_values;
    double combined = 0.0;
};
ExpansionResult evaluate_expansion(const ExperimentConfig& cfg, const SweepPoint& pt);

/// Full-solution reference value for one point (closed form or plain MC).
/// Not used for the coupled reference, which estimates the error directly.
double oracle_reference(const ExperimentConfig& cfg, const SweepPoint& pt);

/// The point's pricing problem in principal coordinates (anchor 0 and direct
/// z-space data for the cosine family, market pullback otherwise).
ZProblem make_zproblem(const ExperimentConfig& cfg, const SweepPoint& pt);

/// Sweeps gamma_list: per gamma builds the spectrum and plan, solves all plan
/// terms, combines, and compares against the configured reference. A sub-solve
/// failure aborts with the offending (gamma, subset) named.
std::vector<ConvergenceRecord> run_sweep(const ExperimentConfig& cfg);

struct PowerLawFit {
    double exponent = 0.0;
    double ci95 = 0.0;  // half-width from the standard slope-variance formula
    int n_used = 0;
};

/// OLS of log(abs_error) against log(lambda2). Records with nonpositive error
/// are excluded with a warning; fewer than 3 usable records is an error.
PowerLawFit fit_power_law(const std::vector<ConvergenceRecord>& records,
                          std::optional<double> lambda2_max = {});
PowerLawFit fit_power_law(const std::vector<double>& lambda2,
                          const std::vector<double>& abs_error);

/// Header `gamma,lambda2,expansion,reference,abs_error,stderr,bound`, one row
/// per record, ordered by gamma descending, full round-trip precision.
void emit_csv(const std::vector<ConvergenceRecord>& records, const std::string& path);
std::vector<ConvergenceRecord> parse_csv(const std::string& path);

/// Desk-scale presets: fig2-desk (ten-asset first order, coupled MC
/// reference), fig3-desk (five-asset second order), fig4-desk (geometric
/// basket against the closed-form oracle, strike at the kink).
ExperimentConfig preset_config(std::string_view name);
std::vector<std::string> config_preset_names();

/// JSON config file covering every ExperimentConfig field.
ExperimentConfig load_config(const std::string& path);

}  // namespace pcx
