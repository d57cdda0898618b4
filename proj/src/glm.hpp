#pragma once

#include <vector>

#include "numkit.hpp"

// Likelihood machinery for the binomial and Cox families, shared by the
// penalized solvers (IRLS working responses) and the subset Newton fits.
namespace mnr::glm {

// Precomputed event ordering for Breslow partial-likelihood sums. Rows are
// visited in decreasing time; tied times share one risk set.
struct CoxOrder {
    std::vector<int> desc;     // row indices, time descending
    std::vector<int> event;    // copy of the event indicator
    std::vector<double> time;  // copy of the observed times
    int n_events = 0;
};

CoxOrder make_cox_order(const std::vector<double> &time, const std::vector<int> &event);

// Breslow partial log-likelihood at linear predictor eta.
double cox_loglik(const CoxOrder &ord, const std::vector<double> &eta);

// Gradient and diagonal curvature of the partial log-likelihood with
// respect to eta (per observation), for IRLS working responses.
void cox_eta_derivs(const CoxOrder &ord, const std::vector<double> &eta,
                    std::vector<double> &grad, std::vector<double> &curv);

// Gradient (k) and negative Hessian (k x k) with respect to beta for the
// design z (n x k, dense rows). Returns the partial log-likelihood.
double cox_beta_derivs(const CoxOrder &ord, const numkit::Matrix &z,
                       const std::vector<double> &eta, std::vector<double> &grad,
                       numkit::Matrix &neg_hess);

struct NewtonResult {
    std::vector<double> beta;
    numkit::Matrix cov;     // inverse observed information
    double loglik = 0.0;
    double grad_norm = 0.0; // sup-norm of the score at the returned beta
    int iters = 0;
    bool converged = false;
    bool separation = false; // binomial only: fitted probabilities pinned at 0/1
};

// Logistic regression by Newton with step-halving; z includes any intercept
// column the caller wants. Tolerance is on the score sup-norm.
NewtonResult logistic_newton(const numkit::Matrix &z, const std::vector<double> &y,
                             int max_iter = 100, double tol = 1e-9);

// Cox regression by Newton with step-halving on the Breslow partial
// likelihood (no intercept).
NewtonResult cox_newton(const CoxOrder &ord, const numkit::Matrix &z,
                        int max_iter = 100, double tol = 1e-9);

double logistic_loglik(const numkit::Matrix &z, const std::vector<double> &y,
                       const std::vector<double> &beta);

} // namespace mnr::glm
