#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blanket.hpp"
#include "datagen.hpp"
#include "select.hpp"

namespace mnr::infer {

// One subset regression, reported on the scale of the data the fit saw;
// the pipelines rescale to the pre-standardization columns before
// returning. df is the Student-t degrees of freedom for gaussian fits and
// +infinity for the Wald (normal) families.
struct InferenceRecord {
    int feature = -1; // 0-based
    double beta_hat = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_value = 1.0;
    double df = 0.0;
    int subset_size = 0;
    double grad_norm = 0.0; // score sup-norm at the fit (0 for exact OLS)
    bool flagged = false;   // estimable but suspect (e.g. separation)
    std::string flag;
};

struct JointInferenceRecord {
    std::vector<int> features;
    std::vector<double> beta_hat;
    numkit::Matrix cov; // covariance estimate of sqrt(n)(beta_hat - beta)
    std::vector<double> ci_low, ci_high; // per-coordinate Bonferroni intervals
    double level = 0.95;
    double df = 0.0;
    int subset_size = 0;
};

// OLS of y on an intercept plus the subset columns; requires j in subset
// and |subset| <= n-2. sigma2_hat = RSS/(n-|D|-1); the standard error is
// sqrt(sigma2_hat * theta_jj / n) with theta_jj from the inverse subset
// Gram, and the interval/p-value use Student t with n-|D|-1 df.
InferenceRecord subset_ols_infer(const datagen::Dataset &ds, int j,
                                 const std::vector<int> &subset, double level = 0.95);

// Wald inference from the inverse observed information of the subset GLM
// (binomial with intercept, cox partial likelihood). Requires
// |subset| <= n/4.
InferenceRecord subset_glm_infer(const datagen::Dataset &ds, int j,
                                 const std::vector<int> &subset, double level = 0.95);

// Simultaneous inference for the set A on the union subset
// A + blankets(A) + s_star, with per-coordinate Bonferroni intervals at
// level 1-(1-level)/|A|.
JointInferenceRecord joint_infer(const datagen::Dataset &ds, const std::vector<int> &a,
                                 const blanket::BlanketMap &blankets,
                                 const std::vector<int> &s_star, double level = 0.95);

enum class Adjust { holm, bh };

// Holm step-down / Benjamini-Hochberg step-up adjusted p-values (monotone,
// clipped at 1, order-preserving).
std::vector<double> adjust_pvalues(const std::vector<double> &p, Adjust method);

enum class Mode { full, screening };

struct MnrConfig {
    Mode mode = Mode::full;
    std::string selection;                 // empty: family default
    std::string blanket_method = "nodewise"; // nodewise | corr_screen
    double level = 0.95;
    double causal_alpha = 0.05;
    std::size_t screen_cap = 0;            // 0: mode default
    std::size_t model_cap = 0;
    int blanket_cap = 0;
    double nodewise_gamma = 1.0;
    int threads = 1;
    std::uint64_t seed = 0;                // recorded in reports only
};

struct MnrReport {
    std::vector<InferenceRecord> records;  // per assessed feature, rescaled
    std::vector<double> p_holm, p_bh, z;   // aligned with records
    std::vector<std::pair<int, std::string>> errors; // per-feature failures
    std::vector<int> s_star;               // selected conditioning set
    blanket::BlanketMap blankets;
    std::vector<int> selected_causal;
    bool causal_fallback = false;
    std::string method;                    // mnr | mnr_screen | causal | desparsified
    std::string selection_method;
    double level = 0.95;
    datagen::Family family = datagen::Family::gaussian;
    std::size_t n = 0, p = 0;
    std::uint64_t seed = 0;
};

// Full pipeline: selection, blankets, one subset regression per feature,
// multiple-testing adjustments and z-scores. Standardizes a copy of the
// data when needed; records are reported on the input scale.
MnrReport run_mnr(const datagen::Dataset &ds, const MnrConfig &cfg = {});

// Causal-discovery pipeline: SIS conditioning set, per-member correlation
// blankets, subset inference only for members, Holm selection at
// causal_alpha with a smallest-p singleton fallback.
MnrReport run_causal(const datagen::Dataset &ds, const MnrConfig &cfg = {});

// Default selection method for a family (sis_then_scad / sis_then_mcp /
// sis_then_lasso for gaussian / binomial / cox).
std::string default_selection(datagen::Family family);

// z = Phi^{-1}(1 - p), computed as -Phi^{-1}(p) with p clamped away from
// {0, 1} so the transform stays finite.
double p_to_z(double p);

} // namespace mnr::infer
