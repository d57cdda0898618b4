#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "datagen.hpp"

namespace mnr::select {

enum class Penalty { lasso, scad, mcp };

struct PenaltySpec {
    Penalty kind = Penalty::lasso;
    double lambda = 0.0;
    double a = 3.7;     // scad knot
    double gamma = 3.0; // mcp knot
};

// 0 means "use the default for this n": screen_cap floor(n/log n),
// model_cap floor(sqrt n)-1. screening_cap is the screening-algorithm size
// floor(sqrt(n/log n)), used by the screening and causal pipelines.
struct Caps {
    std::size_t screen_cap = 0;
    std::size_t model_cap = 0;
};

std::size_t default_screen_cap(std::size_t n);
std::size_t default_model_cap(std::size_t n);
std::size_t screening_cap(std::size_t n);

// Top-cap features ranked by the marginal association score: |corr(x_j, y)|
// for gaussian, the absolute single-feature score statistic at the null
// model for binomial/cox. Returned in rank order (strongest first); ties go
// to the lower index.
std::vector<int> sis_screen(const datagen::Dataset &ds, std::size_t cap);

// Marginal association scores for all columns (the ranking key above).
std::vector<double> marginal_scores(const datagen::Dataset &ds);

struct PenFit {
    std::vector<double> beta; // dense over the candidate columns
    double intercept = 0.0;   // binomial only; gaussian fits have no intercept
    int sweeps = 0;
};

// Single-lambda penalized fit over the given candidate columns (all columns
// if empty). Gaussian solves (1/2n)|y - X b|^2 + sum pen(|b_j|) with no
// intercept (center y first); binomial adds an unpenalized intercept;
// cox is penalized partial likelihood. Throws errc::numeric on
// non-convergence after the sweep budget.
PenFit fit_penalized(const datagen::Dataset &ds, const PenaltySpec &spec,
                     const std::vector<int> &cols = {});

struct SelectionResult {
    std::vector<int> active;   // sorted, 0-based
    std::vector<double> coef;  // penalized coefficients, aligned with active
    double intercept = 0.0;
    double lambda = 0.0;
    std::string method;
};

// method: sis | lasso | scad | mcp | sis_then_lasso | sis_then_scad |
// sis_then_mcp. Penalized methods fit a 100-point log-spaced lambda path
// from lambda_max down to 0.001*lambda_max (0.01 when the candidate count
// reaches n, where the tail nears interpolation) and pick lambda by BIC
// (n log(RSS/n) + k log n for gaussian, deviance + k log n otherwise; ties
// to the larger lambda). A path point that exhausts the sweep budget ends
// the descent; candidates found so far stand. SCAD/MCP points are solved
// from both the warm start and zero, keeping the better local optimum.
// The active set is truncated to model_cap by absolute coefficient.
SelectionResult select_variables(const datagen::Dataset &ds, const std::string &method,
                                 Caps caps = {});

std::vector<double> lambda_path(double lambda_max, int points = 100,
                                double min_ratio = 0.001);

// Univariate penalized update: argmin_b v*b^2/2 - z*b + pen(|b|).
double thresh_update(double z, double v, const PenaltySpec &spec);

double penalty_value(const PenaltySpec &spec, double b);

struct NodewiseFit {
    std::vector<int> support;  // column indices, sorted
    std::vector<double> coef;  // aligned with support
    double lambda = 0.0;
};

// Lasso regression of column `target` on `candidates`, driven entirely by
// the precomputed Gram matrix gram = X'X. Lambda is picked by extended BIC
// with per-coefficient penalty log n + 2*gamma*log(universe); the plain BIC
// over-selects edges once p(p-1)/2 pairs are in play, so the nodewise
// graph uses gamma = 1 by default.
NodewiseFit nodewise_lasso_ebic(const numkit::Matrix &gram, std::size_t n, int target,
                                const std::vector<int> &candidates, double ebic_gamma,
                                std::size_t universe);

} // namespace mnr::select
