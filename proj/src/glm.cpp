#include "glm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mnr::glm {

CoxOrder make_cox_order(const std::vector<double> &time, const std::vector<int> &event) {
    if (time.size() != event.size())
        throw invalid_argument_error("cox: time/event length mismatch");
    CoxOrder ord;
    ord.time = time;
    ord.event = event;
    ord.desc.resize(time.size());
    std::iota(ord.desc.begin(), ord.desc.end(), 0);
    std::sort(ord.desc.begin(), ord.desc.end(), [&](int a, int b) {
        if (time[a] != time[b])
            return time[a] > time[b];
        return a < b;
    });
    for (int e : event)
        ord.n_events += e != 0;
    return ord;
}

double cox_loglik(const CoxOrder &ord, const std::vector<double> &eta) {
    const std::size_t n = ord.desc.size();
    double ll = 0.0, s0 = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && ord.time[ord.desc[j]] == ord.time[ord.desc[i]])
            ++j;
        for (std::size_t k = i; k < j; ++k)
            s0 += std::exp(eta[ord.desc[k]]);
        for (std::size_t k = i; k < j; ++k) {
            const int row = ord.desc[k];
            if (ord.event[row])
                ll += eta[row] - std::log(s0);
        }
        i = j;
    }
    return ll;
}

void cox_eta_derivs(const CoxOrder &ord, const std::vector<double> &eta,
                    std::vector<double> &grad, std::vector<double> &curv) {
    const std::size_t n = ord.desc.size();
    grad.assign(n, 0.0);
    curv.assign(n, 0.0);
    // First pass (time descending): risk-set sums S0(t) at each event time.
    // Second pass (time ascending): cumulative event-time sums
    // A_i = sum_{events with t_j <= t_i} 1/S0(t_j), B_i likewise with 1/S0^2.
    std::vector<double> s0_at(n, 0.0);
    double s0 = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && ord.time[ord.desc[j]] == ord.time[ord.desc[i]])
            ++j;
        for (std::size_t k = i; k < j; ++k)
            s0 += std::exp(eta[ord.desc[k]]);
        for (std::size_t k = i; k < j; ++k)
            s0_at[k] = s0;
        i = j;
    }
    double a = 0.0, b = 0.0;
    std::size_t kk = n;
    while (kk > 0) {
        std::size_t j = kk;
        while (j > 0 && ord.time[ord.desc[j - 1]] == ord.time[ord.desc[kk - 1]])
            --j;
        for (std::size_t k = j; k < kk; ++k) {
            const int row = ord.desc[k];
            if (ord.event[row]) {
                a += 1.0 / s0_at[k];
                b += 1.0 / (s0_at[k] * s0_at[k]);
            }
        }
        for (std::size_t k = j; k < kk; ++k) {
            const int row = ord.desc[k];
            const double w = std::exp(eta[row]);
            grad[row] = (ord.event[row] ? 1.0 : 0.0) - w * a;
            curv[row] = w * a - w * w * b;
        }
        kk = j;
    }
}

double cox_beta_derivs(const CoxOrder &ord, const numkit::Matrix &z,
                       const std::vector<double> &eta, std::vector<double> &grad,
                       numkit::Matrix &neg_hess) {
    const std::size_t n = ord.desc.size();
    const std::size_t k = z.cols();
    grad.assign(k, 0.0);
    neg_hess = numkit::Matrix(k, k, 0.0);
    std::vector<double> s1(k, 0.0);
    numkit::Matrix s2(k, k, 0.0);
    double ll = 0.0, s0 = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && ord.time[ord.desc[j]] == ord.time[ord.desc[i]])
            ++j;
        for (std::size_t q = i; q < j; ++q) {
            const int row = ord.desc[q];
            const double w = std::exp(eta[row]);
            const double *zr = z.row(row);
            s0 += w;
            for (std::size_t a = 0; a < k; ++a) {
                s1[a] += w * zr[a];
                for (std::size_t b = a; b < k; ++b)
                    s2(a, b) += w * zr[a] * zr[b];
            }
        }
        for (std::size_t q = i; q < j; ++q) {
            const int row = ord.desc[q];
            if (!ord.event[row])
                continue;
            const double *zr = z.row(row);
            ll += eta[row] - std::log(s0);
            for (std::size_t a = 0; a < k; ++a) {
                const double ma = s1[a] / s0;
                grad[a] += zr[a] - ma;
                for (std::size_t b = a; b < k; ++b)
                    neg_hess(a, b) += s2(a, b) / s0 - ma * (s1[b] / s0);
            }
        }
        i = j;
    }
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < a; ++b)
            neg_hess(a, b) = neg_hess(b, a);
    return ll;
}

double logistic_loglik(const numkit::Matrix &z, const std::vector<double> &y,
                       const std::vector<double> &beta) {
    const std::size_t n = z.rows(), k = z.cols();
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double *zr = z.row(i);
        double eta = 0.0;
        for (std::size_t a = 0; a < k; ++a)
            eta += zr[a] * beta[a];
        // log f = y*eta - log(1 + e^eta), stable in both tails
        ll += y[i] * eta - (eta > 0.0 ? eta + std::log1p(std::exp(-eta))
                                      : std::log1p(std::exp(eta)));
    }
    return ll;
}

NewtonResult logistic_newton(const numkit::Matrix &z, const std::vector<double> &y,
                             int max_iter, double tol) {
    const std::size_t n = z.rows(), k = z.cols();
    NewtonResult res;
    res.beta.assign(k, 0.0);
    double ll = logistic_loglik(z, y, res.beta);
    std::vector<double> grad(k), step(k), trial(k), eta(n), mu(n);
    numkit::Matrix info(k, k);
    for (int it = 1; it <= max_iter; ++it) {
        res.iters = it;
        double eta_max = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double *zr = z.row(i);
            double e = 0.0;
            for (std::size_t a = 0; a < k; ++a)
                e += zr[a] * res.beta[a];
            eta[i] = e;
            mu[i] = 1.0 / (1.0 + std::exp(-e));
            eta_max = std::max(eta_max, std::fabs(e));
        }
        std::fill(grad.begin(), grad.end(), 0.0);
        info = numkit::Matrix(k, k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double *zr = z.row(i);
            const double r = y[i] - mu[i];
            const double w = std::max(mu[i] * (1.0 - mu[i]), 1e-12);
            for (std::size_t a = 0; a < k; ++a) {
                grad[a] += zr[a] * r;
                for (std::size_t b = a; b < k; ++b)
                    info(a, b) += w * zr[a] * zr[b];
            }
        }
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < a; ++b)
                info(a, b) = info(b, a);
        res.grad_norm = 0.0;
        for (double g : grad)
            res.grad_norm = std::max(res.grad_norm, std::fabs(g));
        if (res.grad_norm <= tol) {
            res.converged = true;
            break;
        }
        numkit::SpdFactor f;
        try {
            f = numkit::cholesky(info);
        } catch (const Error &) {
            res.separation = eta_max > 25.0;
            break;
        }
        step = numkit::solve_spd(f, grad);
        double scale = 1.0;
        bool improved = false;
        for (int h = 0; h < 40; ++h) {
            for (std::size_t a = 0; a < k; ++a)
                trial[a] = res.beta[a] + scale * step[a];
            const double ll_new = logistic_loglik(z, y, trial);
            if (std::isfinite(ll_new) && ll_new >= ll - 1e-12) {
                res.beta = trial;
                improved = ll_new > ll + 1e-12;
                ll = ll_new;
                break;
            }
            scale *= 0.5;
        }
        if (!improved && res.grad_norm <= 1e-4) {
            // Flat likelihood: accept if the score is already small.
            res.converged = true;
            break;
        }
        if (!improved && eta_max > 25.0) {
            res.separation = true;
            break;
        }
    }
    res.loglik = ll;
    if (res.converged) {
        // Observed information at the solution for the Wald covariance.
        for (std::size_t i = 0; i < n; ++i) {
            const double *zr = z.row(i);
            double e = 0.0;
            for (std::size_t a = 0; a < k; ++a)
                e += zr[a] * res.beta[a];
            mu[i] = 1.0 / (1.0 + std::exp(-e));
            if (mu[i] < 1e-10 || mu[i] > 1.0 - 1e-10)
                res.separation = true;
        }
        info = numkit::Matrix(k, k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double *zr = z.row(i);
            const double w = std::max(mu[i] * (1.0 - mu[i]), 1e-12);
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t b = a; b < k; ++b)
                    info(a, b) += w * zr[a] * zr[b];
        }
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < a; ++b)
                info(a, b) = info(b, a);
        res.cov = numkit::invert_spd(info);
    }
    return res;
}

NewtonResult cox_newton(const CoxOrder &ord, const numkit::Matrix &z, int max_iter,
                        double tol) {
    const std::size_t n = z.rows(), k = z.cols();
    NewtonResult res;
    res.beta.assign(k, 0.0);
    std::vector<double> eta(n, 0.0), grad(k), step(k), trial(k), trial_eta(n);
    numkit::Matrix neg_hess(k, k);
    double ll = cox_beta_derivs(ord, z, eta, grad, neg_hess);
    for (int it = 1; it <= max_iter; ++it) {
        res.iters = it;
        res.grad_norm = 0.0;
        for (double g : grad)
            res.grad_norm = std::max(res.grad_norm, std::fabs(g));
        if (res.grad_norm <= tol) {
            res.converged = true;
            break;
        }
        numkit::SpdFactor f;
        try {
            f = numkit::cholesky(neg_hess);
        } catch (const Error &) {
            break;
        }
        step = numkit::solve_spd(f, grad);
        double scale = 1.0;
        bool moved = false;
        for (int h = 0; h < 40; ++h) {
            for (std::size_t a = 0; a < k; ++a)
                trial[a] = res.beta[a] + scale * step[a];
            for (std::size_t i = 0; i < n; ++i) {
                const double *zr = z.row(i);
                double e = 0.0;
                for (std::size_t a = 0; a < k; ++a)
                    e += zr[a] * trial[a];
                trial_eta[i] = e;
            }
            const double ll_new = cox_loglik(ord, trial_eta);
            if (std::isfinite(ll_new) && ll_new >= ll - 1e-12) {
                res.beta = trial;
                eta = trial_eta;
                moved = true;
                ll = ll_new;
                break;
            }
            scale *= 0.5;
        }
        if (!moved)
            break;
        ll = cox_beta_derivs(ord, z, eta, grad, neg_hess);
    }
    res.loglik = ll;
    if (res.converged)
        res.cov = numkit::invert_spd(neg_hess);
    return res;
}

} // namespace mnr::glm
