#pragma once

#include "infer.hpp"

namespace mnr::baselines {

struct DebiasedResult {
    std::vector<infer::InferenceRecord> records; // one per feature, rescaled
    std::vector<double> beta_lasso;              // initial estimate (input scale)
    double sigma_hat = 0.0;
    double lambda = 0.0;
    // Standardized-scale internals, kept so the bias-correction identity
    // can be verified term by term.
    std::vector<double> std_beta_lasso;
    std::vector<double> std_beta_bc;
    numkit::Matrix z; // projection residuals, one column per feature
};

// Desparsified lasso for the gaussian family: initial lasso with BIC
// lambda, nodewise-residual projections z_j (lasso of x_j on the rest, BIC
// lambda), bias correction
//   b_j = beta_lasso_j + z_j'(y - X beta_lasso) / (z_j'x_j)
// and se_j = sigma_hat |z_j|_2 / |z_j'x_j| with sigma_hat^2 the lasso RSS
// over n - |support|. Intervals and p-values are normal. Throws
// errc::numeric naming j when |z_j'x_j| <= 1e-10 n (degenerate projection).
DebiasedResult desparsified_lasso(const datagen::Dataset &ds, double level = 0.95,
                                  int threads = 1);

} // namespace mnr::baselines
