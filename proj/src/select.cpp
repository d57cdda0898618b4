#include "select.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <numeric>

#include "glm.hpp"

namespace mnr::select {

using datagen::Dataset;
using datagen::Family;

std::size_t default_screen_cap(std::size_t n) {
    return static_cast<std::size_t>(std::floor(double(n) / std::log(double(n))));
}

std::size_t default_model_cap(std::size_t n) {
    return static_cast<std::size_t>(std::floor(std::sqrt(double(n)))) - 1;
}

std::size_t screening_cap(std::size_t n) {
    return std::max<std::size_t>(
        2, static_cast<std::size_t>(std::floor(std::sqrt(double(n) / std::log(double(n))))));
}

std::vector<double> marginal_scores(const Dataset &ds) {
    const std::size_t n = ds.n(), p = ds.p();
    std::vector<double> score(p, 0.0);
    switch (ds.family) {
    case Family::gaussian: {
        double ybar = 0.0;
        for (double v : ds.y)
            ybar += v;
        ybar /= double(n);
        double syy = 0.0;
        for (double v : ds.y)
            syy += (v - ybar) * (v - ybar);
        for (std::size_t j = 0; j < p; ++j) {
            double sxy = 0.0, sx = 0.0, sxx = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double x = ds.x(i, j);
                sx += x;
                sxx += x * x;
                sxy += x * (ds.y[i] - ybar);
            }
            const double vx = sxx - sx * sx / double(n);
            score[j] = vx > 0.0 && syy > 0.0 ? std::fabs(sxy) / std::sqrt(vx * syy) : 0.0;
        }
        break;
    }
    case Family::binomial:
    case Family::cox: {
        // Score statistic at the null model: U_j = x_j' u scaled by the
        // diagonal curvature quadratic form.
        std::vector<double> u(n), w(n);
        if (ds.family == Family::binomial) {
            double pbar = 0.0;
            for (double v : ds.y)
                pbar += v;
            pbar /= double(n);
            for (std::size_t i = 0; i < n; ++i) {
                u[i] = ds.y[i] - pbar;
                w[i] = pbar * (1.0 - pbar);
            }
        } else {
            const glm::CoxOrder ord = glm::make_cox_order(ds.y, ds.event);
            std::vector<double> eta(n, 0.0);
            glm::cox_eta_derivs(ord, eta, u, w);
        }
        for (std::size_t j = 0; j < p; ++j) {
            double uj = 0.0, vj = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double x = ds.x(i, j);
                uj += x * u[i];
                vj += x * x * w[i];
            }
            score[j] = vj > 0.0 ? std::fabs(uj) / std::sqrt(vj) : 0.0;
        }
        break;
    }
    }
    return score;
}

std::vector<int> sis_screen(const Dataset &ds, std::size_t cap) {
    const std::vector<double> score = marginal_scores(ds);
    std::vector<int> idx(score.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return score[a] > score[b]; });
    if (idx.size() > cap)
        idx.resize(cap);
    return idx;
}

double penalty_value(const PenaltySpec &spec, double b) {
    const double t = std::fabs(b);
    const double l = spec.lambda;
    switch (spec.kind) {
    case Penalty::lasso:
        return l * t;
    case Penalty::scad: {
        const double a = spec.a;
        if (t <= l)
            return l * t;
        if (t <= a * l)
            return (2.0 * a * l * t - t * t - l * l) / (2.0 * (a - 1.0));
        return l * l * (a + 1.0) / 2.0;
    }
    case Penalty::mcp: {
        const double g = spec.gamma;
        if (t <= g * l)
            return l * t - t * t / (2.0 * g);
        return g * l * l / 2.0;
    }
    }
    return 0.0;
}

namespace {

inline double univariate_obj(double b, double az, double v, const PenaltySpec &spec) {
    return 0.5 * v * b * b - az * b + penalty_value(spec, b);
}

// Minimize over a short candidate list; ties keep the earlier (sparser) entry.
inline double pick_best(std::initializer_list<double> cands, double az, double v,
                        const PenaltySpec &spec) {
    double best = 0.0, best_obj = 0.0;
    for (double b : cands) {
        const double obj = univariate_obj(b, az, v, spec);
        if (obj < best_obj) {
            best_obj = obj;
            best = b;
        }
    }
    return best;
}

} // namespace

double thresh_update(double z, double v, const PenaltySpec &spec) {
    const double az = std::fabs(z);
    const double l = spec.lambda;
    if (az == 0.0)
        return 0.0;
    switch (spec.kind) {
    case Penalty::lasso:
        return az <= l ? 0.0 : std::copysign(az - l, z) / v;
    case Penalty::mcp: {
        const double g = spec.gamma;
        if (v * g > 1.0) { // every region convex: closed form is exact
            if (az <= l)
                return 0.0;
            if (az <= v * g * l)
                return std::copysign((az - l) / (v - 1.0 / g), z);
            return z / v;
        }
        // Flat curvature (weighted updates can have v <= 1/gamma): the head
        // region is concave, so the minimum sits at an endpoint or in the
        // unpenalized tail. Evaluate those exactly.
        return std::copysign(pick_best({g * l, std::max(g * l, az / v)}, az, v, spec), z);
    }
    case Penalty::scad: {
        const double a = spec.a;
        if (v * (a - 1.0) > 1.0) {
            if (az <= l)
                return 0.0;
            if (az <= l * (v + 1.0))
                return std::copysign(az - l, z) / v;
            if (az <= v * a * l)
                return std::copysign((az - a * l / (a - 1.0)) / (v - 1.0 / (a - 1.0)), z);
            return z / v;
        }
        const double soft = std::clamp((az - l) / v, 0.0, l);
        return std::copysign(
            pick_best({soft, l, a * l, std::max(a * l, az / v)}, az, v, spec), z);
    }
    }
    return 0.0;
}

std::vector<double> lambda_path(double lambda_max, int points, double min_ratio) {
    std::vector<double> path(points);
    for (int i = 0; i < points; ++i)
        path[i] = lambda_max * std::pow(min_ratio, double(i) / double(points - 1));
    return path;
}

namespace {

constexpr int kMaxSweeps = 10000;
constexpr double kCdTol = 1e-8;

// Gaussian coordinate descent on precomputed Gram quantities.
// g = X_S'X_S, c = X_S'y over the candidate columns; all divided by n
// lazily. Maintains r_j = (c_j - sum_k g_jk beta_k)/n.
struct GramCd {
    const numkit::Matrix &g;
    const std::vector<double> &c;
    double n;
    std::vector<double> v;   // g_jj / n
    std::vector<double> r;   // residual correlations
    std::vector<double> beta;

    GramCd(const numkit::Matrix &g_, const std::vector<double> &c_, double n_)
        : g(g_), c(c_), n(n_) {
        const std::size_t k = c.size();
        v.resize(k);
        r.resize(k);
        beta.assign(k, 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            v[j] = g(j, j) / n;
            r[j] = c[j] / n;
        }
    }

    void set_beta(const std::vector<double> &b) {
        beta = b;
        const std::size_t k = c.size();
        for (std::size_t j = 0; j < k; ++j) {
            double s = c[j];
            for (std::size_t m = 0; m < k; ++m)
                s -= g(j, m) * beta[m];
            r[j] = s / n;
        }
    }

    // One pass over the given coordinate list; returns max |change|.
    double sweep(const std::vector<int> &coords, const PenaltySpec &spec) {
        double max_delta = 0.0;
        const std::size_t k = c.size();
        for (int j : coords) {
            if (v[j] <= 0.0)
                continue;
            const double z = r[j] + v[j] * beta[j];
            const double b_new = thresh_update(z, v[j], spec);
            const double delta = b_new - beta[j];
            if (delta != 0.0) {
                for (std::size_t m = 0; m < k; ++m)
                    r[m] -= g(m, j) * delta / n;
                beta[j] = b_new;
                max_delta = std::max(max_delta, std::fabs(delta));
            }
        }
        return max_delta;
    }
};

int run_gram_cd(GramCd &cd, const PenaltySpec &spec, int sweep_budget = kMaxSweeps) {
    const std::size_t k = cd.c.size();
    std::vector<int> all(k);
    std::iota(all.begin(), all.end(), 0);
    int sweeps = 0;
    while (sweeps < sweep_budget) {
        ++sweeps;
        if (cd.sweep(all, spec) < kCdTol)
            return sweeps;
        // Iterate the active set until stable, then re-check all coords.
        std::vector<int> active;
        for (std::size_t j = 0; j < k; ++j)
            if (cd.beta[j] != 0.0)
                active.push_back(int(j));
        while (sweeps < sweep_budget) {
            ++sweeps;
            if (cd.sweep(active, spec) < kCdTol)
                break;
        }
    }
    throw numeric_error("penalized fit: no convergence after sweep budget");
}

struct GramView {
    numkit::Matrix g; // k x k Gram of candidate columns
    std::vector<double> c;
};

GramView build_gram(const Dataset &ds, const std::vector<int> &cols,
                    const std::vector<double> &y) {
    const std::size_t n = ds.n(), k = cols.size();
    GramView gv;
    gv.g = numkit::Matrix(k, k, 0.0);
    gv.c.assign(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double *xi = ds.x.row(i);
        for (std::size_t a = 0; a < k; ++a) {
            const double xa = xi[cols[a]];
            gv.c[a] += xa * y[i];
            for (std::size_t b = a; b < k; ++b)
                gv.g(a, b) += xa * xi[cols[b]];
        }
    }
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < a; ++b)
            gv.g(a, b) = gv.g(b, a);
    return gv;
}

// Weighted coordinate descent for one IRLS inner problem, naive residual
// updates. Solves (1/2n) sum w_i (z_i - b0 - x_i'b)^2 + sum pen(|b_j|),
// with the intercept unpenalized (binomial only; cox passes with_intercept
// false).
struct WeightedCd {
    const Dataset &ds;
    const std::vector<int> &cols;
    bool with_intercept;

    int fit(const std::vector<double> &z, const std::vector<double> &w,
            const PenaltySpec &spec, std::vector<double> &beta, double &b0,
            int sweep_budget) {
        const std::size_t n = ds.n(), k = cols.size();
        std::vector<double> r(n); // weighted working residual z - b0 - x'b
        double wsum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            wsum += w[i];
        std::vector<double> v(k, 0.0);
        for (std::size_t a = 0; a < k; ++a) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double x = ds.x(i, cols[a]);
                s += w[i] * x * x;
            }
            v[a] = s / double(n);
        }
        for (std::size_t i = 0; i < n; ++i) {
            double eta = b0;
            const double *xi = ds.x.row(i);
            for (std::size_t a = 0; a < k; ++a)
                eta += xi[cols[a]] * beta[a];
            r[i] = z[i] - eta;
        }
        int sweeps = 0;
        while (sweeps < sweep_budget) {
            ++sweeps;
            double max_delta = 0.0;
            if (with_intercept && wsum > 0.0) {
                double num = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    num += w[i] * r[i];
                const double delta = num / wsum;
                if (delta != 0.0) {
                    b0 += delta;
                    for (std::size_t i = 0; i < n; ++i)
                        r[i] -= delta;
                    max_delta = std::fabs(delta);
                }
            }
            for (std::size_t a = 0; a < k; ++a) {
                if (v[a] <= 0.0)
                    continue;
                double zc = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    zc += w[i] * ds.x(i, cols[a]) * r[i];
                zc = zc / double(n) + v[a] * beta[a];
                const double b_new = thresh_update(zc, v[a], spec);
                const double delta = b_new - beta[a];
                if (delta != 0.0) {
                    for (std::size_t i = 0; i < n; ++i)
                        r[i] -= ds.x(i, cols[a]) * delta;
                    beta[a] = b_new;
                    max_delta = std::max(max_delta, std::fabs(delta));
                }
            }
            if (max_delta < kCdTol)
                return sweeps;
        }
        throw numeric_error("penalized irls: inner solver exceeded sweep budget");
    }
};

std::vector<double> centered_response(const Dataset &ds, double &ybar) {
    ybar = 0.0;
    for (double v : ds.y)
        ybar += v;
    ybar /= double(ds.n());
    std::vector<double> yc(ds.y);
    for (double &v : yc)
        v -= ybar;
    return yc;
}

PenFit fit_penalized_gaussian(const Dataset &ds, const PenaltySpec &spec,
                              const std::vector<int> &cols,
                              const std::vector<double> *warm) {
    double ybar = 0.0;
    const std::vector<double> yc = centered_response(ds, ybar);
    const GramView gv = build_gram(ds, cols, yc);
    GramCd cd(gv.g, gv.c, double(ds.n()));
    if (warm)
        cd.set_beta(*warm);
    PenFit fit;
    fit.sweeps = run_gram_cd(cd, spec);
    fit.beta = cd.beta;
    fit.intercept = ybar;
    return fit;
}

struct IrlsState {
    std::vector<double> beta;
    double b0 = 0.0;
};

PenFit fit_penalized_irls(const Dataset &ds, const PenaltySpec &spec,
                          const std::vector<int> &cols, const IrlsState *warm) {
    const std::size_t n = ds.n(), k = cols.size();
    const bool binomial = ds.family == Family::binomial;
    glm::CoxOrder ord;
    if (!binomial)
        ord = glm::make_cox_order(ds.y, ds.event);

    IrlsState st;
    st.beta.assign(k, 0.0);
    if (binomial) {
        double pbar = 0.0;
        for (double v : ds.y)
            pbar += v;
        pbar /= double(n);
        pbar = std::min(std::max(pbar, 1e-8), 1.0 - 1e-8);
        st.b0 = std::log(pbar / (1.0 - pbar));
    }
    if (warm)
        st = *warm;

    std::vector<double> eta(n);
    const auto fill_eta = [&](const IrlsState &s) {
        for (std::size_t i = 0; i < n; ++i) {
            double e = s.b0;
            const double *xi = ds.x.row(i);
            for (std::size_t a = 0; a < k; ++a)
                e += xi[cols[a]] * s.beta[a];
            eta[i] = std::min(std::max(e, -30.0), 30.0);
        }
    };
    // Penalized objective -loglik/n + sum pen(|beta_j|); expects eta filled
    // for the state being scored.
    const auto pen_objective = [&](const IrlsState &s) {
        double ll = 0.0;
        if (binomial) {
            for (std::size_t i = 0; i < n; ++i) {
                const double e = eta[i];
                const double lse = e > 0.0 ? e + std::log1p(std::exp(-e))
                                           : std::log1p(std::exp(e));
                ll += ds.y[i] * e - lse;
            }
        } else {
            ll = glm::cox_loglik(ord, eta);
        }
        double pen = 0.0;
        for (double b : s.beta)
            pen += penalty_value(spec, b);
        return -ll / double(n) + pen;
    };

    WeightedCd cd{ds, cols, binomial};
    std::vector<double> u(n), w(n), z(n);
    PenFit fit;
    fill_eta(st);
    double obj = pen_objective(st);
    for (int outer = 0; outer < 100; ++outer) {
        if (binomial) {
            for (std::size_t i = 0; i < n; ++i) {
                const double mu = 1.0 / (1.0 + std::exp(-eta[i]));
                w[i] = std::max(mu * (1.0 - mu), 1e-8);
                z[i] = eta[i] + (ds.y[i] - mu) / w[i];
            }
        } else {
            glm::cox_eta_derivs(ord, eta, u, w);
            for (std::size_t i = 0; i < n; ++i) {
                w[i] = std::max(w[i], 1e-8);
                z[i] = eta[i] + u[i] / w[i];
            }
        }
        IrlsState cand = st;
        fit.sweeps += cd.fit(z, w, spec, cand.beta, cand.b0, kMaxSweeps);
        // Guarded step: the working-response fit can overshoot (the
        // nonconvex thresholds jump); halve toward the previous iterate
        // until the true penalized objective stops increasing.
        fill_eta(cand);
        double cand_obj = pen_objective(cand);
        int halvings = 0;
        while (cand_obj > obj + 1e-12 && halvings < 30) {
            cand.b0 = 0.5 * (cand.b0 + st.b0);
            for (std::size_t a = 0; a < k; ++a)
                cand.beta[a] = 0.5 * (cand.beta[a] + st.beta[a]);
            fill_eta(cand);
            cand_obj = pen_objective(cand);
            ++halvings;
        }
        if (cand_obj > obj + 1e-12) {
            // No descent direction left: the current iterate is the answer.
            fill_eta(st);
            fit.beta = st.beta;
            fit.intercept = st.b0;
            return fit;
        }
        double delta = std::fabs(cand.b0 - st.b0);
        double scale = std::max(1.0, std::fabs(cand.b0));
        for (std::size_t a = 0; a < k; ++a) {
            delta = std::max(delta, std::fabs(cand.beta[a] - st.beta[a]));
            scale = std::max(scale, std::fabs(cand.beta[a]));
        }
        const double improvement = obj - cand_obj;
        st = std::move(cand);
        obj = cand_obj;
        // Converged when the iterate settles, or when the objective has
        // stagnated (nonconvex paths can bounce between near-tied sparse
        // solutions without further descent).
        if ((halvings == 0 && delta < 1e-6 * scale) ||
            improvement < 1e-10 * (1.0 + std::fabs(obj))) {
            fit.beta = st.beta;
            fit.intercept = st.b0;
            return fit;
        }
    }
    throw numeric_error("penalized irls: outer loop did not converge");
}

double null_lambda_max(const Dataset &ds, const std::vector<int> &cols) {
    const std::size_t n = ds.n();
    std::vector<double> u(n);
    if (ds.family == Family::gaussian) {
        double ybar;
        u = centered_response(ds, ybar);
    } else if (ds.family == Family::binomial) {
        double pbar = 0.0;
        for (double v : ds.y)
            pbar += v;
        pbar /= double(n);
        for (std::size_t i = 0; i < n; ++i)
            u[i] = ds.y[i] - pbar;
    } else {
        std::vector<double> eta(n, 0.0), w;
        const glm::CoxOrder ord = glm::make_cox_order(ds.y, ds.event);
        glm::cox_eta_derivs(ord, eta, u, w);
    }
    double lmax = 0.0;
    for (int j : cols) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += ds.x(i, j) * u[i];
        lmax = std::max(lmax, std::fabs(s) / double(n));
    }
    return lmax;
}

double fit_bic(const Dataset &ds, const std::vector<int> &cols, const PenFit &fit) {
    const std::size_t n = ds.n(), k = cols.size();
    std::size_t df = 0;
    for (double b : fit.beta)
        df += b != 0.0;
    if (ds.family == Family::gaussian) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = ds.y[i] - fit.intercept;
            const double *xi = ds.x.row(i);
            for (std::size_t a = 0; a < k; ++a)
                e -= xi[cols[a]] * fit.beta[a];
            rss += e * e;
        }
        return double(n) * std::log(rss / double(n)) + double(df) * std::log(double(n));
    }
    if (ds.family == Family::binomial) {
        numkit::Matrix z(n, k + 1);
        std::vector<double> coef(k + 1);
        coef[0] = fit.intercept;
        for (std::size_t a = 0; a < k; ++a)
            coef[a + 1] = fit.beta[a];
        for (std::size_t i = 0; i < n; ++i) {
            z(i, 0) = 1.0;
            for (std::size_t a = 0; a < k; ++a)
                z(i, a + 1) = ds.x(i, cols[a]);
        }
        const double dev = -2.0 * glm::logistic_loglik(z, ds.y, coef);
        return dev + double(df) * std::log(double(n));
    }
    const glm::CoxOrder ord = glm::make_cox_order(ds.y, ds.event);
    std::vector<double> eta(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double *xi = ds.x.row(i);
        double e = 0.0;
        for (std::size_t a = 0; a < k; ++a)
            e += xi[cols[a]] * fit.beta[a];
        eta[i] = e;
    }
    return -2.0 * glm::cox_loglik(ord, eta) + double(df) * std::log(double(n));
}

} // namespace

PenFit fit_penalized(const Dataset &ds, const PenaltySpec &spec,
                     const std::vector<int> &cols_in) {
    std::vector<int> cols = cols_in;
    if (cols.empty()) {
        cols.resize(ds.p());
        std::iota(cols.begin(), cols.end(), 0);
    }
    if (spec.lambda < 0.0)
        throw invalid_argument_error("fit_penalized: negative lambda");
    if (ds.family == Family::gaussian)
        return fit_penalized_gaussian(ds, spec, cols, nullptr);
    return fit_penalized_irls(ds, spec, cols, nullptr);
}

SelectionResult select_variables(const Dataset &ds, const std::string &method, Caps caps) {
    const std::size_t n = ds.n();
    if (caps.screen_cap == 0)
        caps.screen_cap = default_screen_cap(n);
    if (caps.model_cap == 0)
        caps.model_cap = default_model_cap(n);

    SelectionResult res;
    res.method = method;

    std::string penalty_name = method;
    bool use_sis = false;
    if (method == "sis") {
        std::vector<int> keep = sis_screen(ds, std::min(caps.screen_cap, caps.model_cap));
        std::sort(keep.begin(), keep.end());
        res.active = keep;
        res.coef.assign(keep.size(), 0.0);
        return res;
    }
    if (method.rfind("sis_then_", 0) == 0) {
        use_sis = true;
        penalty_name = method.substr(9);
    }
    PenaltySpec spec;
    if (penalty_name == "lasso")
        spec.kind = Penalty::lasso;
    else if (penalty_name == "scad")
        spec.kind = Penalty::scad;
    else if (penalty_name == "mcp")
        spec.kind = Penalty::mcp;
    else
        throw invalid_argument_error("select_variables: unknown method '" + method + "'");

    std::vector<int> cols;
    if (use_sis) {
        cols = sis_screen(ds, caps.screen_cap);
        std::sort(cols.begin(), cols.end());
    } else {
        cols.resize(ds.p());
        std::iota(cols.begin(), cols.end(), 0);
    }

    const double lmax = null_lambda_max(ds, cols);
    if (lmax <= 0.0) {
        res.intercept = 0.0;
        return res;
    }
    // With as many candidates as observations the tail of the path nears
    // interpolation, where coordinate descent stalls; keep the floor higher.
    const double min_ratio = cols.size() < n ? 0.001 : 0.01;
    const std::vector<double> path = lambda_path(lmax, 100, min_ratio);
    const bool nonconvex = spec.kind != Penalty::lasso;

    double best_bic = std::numeric_limits<double>::infinity();
    PenFit best_fit;
    double best_lambda = path.front();

    if (ds.family == Family::gaussian) {
        double ybar = 0.0;
        const std::vector<double> yc = centered_response(ds, ybar);
        const GramView gv = build_gram(ds, cols, yc);
        double yy = 0.0;
        for (double v : yc)
            yy += v * v;
        GramCd cd(gv.g, gv.c, double(n));
        // Penalized objective RSS/(2n) + sum pen at a converged state, using
        // RSS = y'y - beta'c - n*beta'r.
        const auto objective = [&](const GramCd &state, const PenaltySpec &s) {
            double bc = 0.0, br = 0.0, pen = 0.0;
            for (std::size_t a = 0; a < state.beta.size(); ++a) {
                bc += state.beta[a] * gv.c[a];
                br += state.beta[a] * state.r[a];
                pen += penalty_value(s, state.beta[a]);
            }
            return (yy - bc - double(n) * br) / (2.0 * double(n)) + pen;
        };
        for (double lambda : path) {
            PenaltySpec s = spec;
            s.lambda = lambda;
            try {
                run_gram_cd(cd, s); // warm start: cd keeps the previous beta
            } catch (const Error &) {
                break; // saturated tail; candidates found so far stand
            }
            if (nonconvex) {
                // SCAD/MCP descent can stick to the stale sparse branch of
                // the previous lambda. Also solve from zero and keep the
                // better local optimum.
                GramCd cold(gv.g, gv.c, double(n));
                bool cold_ok = true;
                try {
                    run_gram_cd(cold, s);
                } catch (const Error &) {
                    cold_ok = false;
                }
                if (cold_ok && objective(cold, s) < objective(cd, s) - 1e-12)
                    cd.set_beta(cold.beta);
            }
            PenFit fit;
            fit.beta = cd.beta;
            fit.intercept = ybar;
            // Saturated fits drive n log(RSS/n) to -inf, which would make
            // BIC pick interpolation when the candidate count reaches n;
            // stop once the support passes half the sample.
            std::size_t df = 0;
            for (double b : fit.beta)
                df += b != 0.0;
            if (df > n / 2)
                break;
            const double bic = fit_bic(ds, cols, fit);
            if (bic < best_bic) {
                best_bic = bic;
                best_fit = fit;
                best_lambda = lambda;
            }
        }
    } else {
        glm::CoxOrder ord;
        if (ds.family != Family::binomial)
            ord = glm::make_cox_order(ds.y, ds.event);
        // -loglik/n + sum pen for a returned fit.
        const auto irls_objective = [&](const PenFit &fit, const PenaltySpec &s) {
            std::vector<double> eta(n);
            for (std::size_t i = 0; i < n; ++i) {
                double e = fit.intercept;
                const double *xi = ds.x.row(i);
                for (std::size_t a = 0; a < cols.size(); ++a)
                    e += xi[cols[a]] * fit.beta[a];
                eta[i] = std::min(std::max(e, -30.0), 30.0);
            }
            double ll = 0.0;
            if (ds.family == Family::binomial) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double e = eta[i];
                    const double lse = e > 0.0 ? e + std::log1p(std::exp(-e))
                                               : std::log1p(std::exp(e));
                    ll += ds.y[i] * e - lse;
                }
            } else {
                ll = glm::cox_loglik(ord, eta);
            }
            double pen = 0.0;
            for (double b : fit.beta)
                pen += penalty_value(s, b);
            return -ll / double(n) + pen;
        };
        IrlsState warm;
        warm.beta.assign(cols.size(), 0.0);
        bool have_warm = false;
        for (double lambda : path) {
            PenaltySpec s = spec;
            s.lambda = lambda;
            PenFit fit;
            bool ok = true;
            try {
                fit = fit_penalized_irls(ds, s, cols, have_warm ? &warm : nullptr);
            } catch (const Error &) {
                ok = false;
            }
            if (nonconvex && have_warm) {
                // Cold multi-start, same rationale as the gaussian path.
                try {
                    PenFit cold = fit_penalized_irls(ds, s, cols, nullptr);
                    if (!ok || irls_objective(cold, s) < irls_objective(fit, s) - 1e-12) {
                        fit = std::move(cold);
                        ok = true;
                    }
                } catch (const Error &) {
                }
            }
            if (!ok)
                break; // saturated tail: stop descending lambda
            warm.beta = fit.beta;
            warm.b0 = fit.intercept;
            have_warm = true;
            std::size_t df = 0;
            for (double b : fit.beta)
                df += b != 0.0;
            if (df > n / 2)
                break; // same saturation guard as the gaussian path
            const double bic = fit_bic(ds, cols, fit);
            if (bic < best_bic) {
                best_bic = bic;
                best_fit = fit;
                best_lambda = lambda;
            }
        }
    }

    res.lambda = best_lambda;
    res.intercept = best_fit.intercept;
    std::vector<std::pair<int, double>> nz; // (candidate position, coef)
    for (std::size_t a = 0; a < cols.size(); ++a)
        if (best_fit.beta[a] != 0.0)
            nz.emplace_back(int(a), best_fit.beta[a]);
    if (nz.size() > caps.model_cap) {
        std::stable_sort(nz.begin(), nz.end(), [](const auto &l, const auto &r) {
            return std::fabs(l.second) > std::fabs(r.second);
        });
        nz.resize(caps.model_cap);
    }
    std::sort(nz.begin(), nz.end());
    for (const auto &[pos, b] : nz) {
        res.active.push_back(cols[pos]);
        res.coef.push_back(b);
    }
    return res;
}

NodewiseFit nodewise_lasso_ebic(const numkit::Matrix &gram, std::size_t n, int target,
                                const std::vector<int> &candidates, double ebic_gamma,
                                std::size_t universe) {
    const std::size_t k = candidates.size();
    NodewiseFit out;
    if (k == 0)
        return out;
    numkit::Matrix g(k, k);
    std::vector<double> c(k);
    for (std::size_t a = 0; a < k; ++a) {
        c[a] = gram(candidates[a], target);
        for (std::size_t b = 0; b < k; ++b)
            g(a, b) = gram(candidates[a], candidates[b]);
    }
    double lmax = 0.0;
    for (double v : c)
        lmax = std::max(lmax, std::fabs(v) / double(n));
    if (lmax <= 0.0)
        return out;

    const double syy = gram(target, target);
    const double pen = std::log(double(n)) + 2.0 * ebic_gamma * std::log(double(universe));
    GramCd cd(g, c, double(n));
    PenaltySpec spec;
    spec.kind = Penalty::lasso;
    double best_crit = std::numeric_limits<double>::infinity();
    std::vector<double> best_beta;
    const double min_ratio = k < n ? 0.001 : 0.01;
    for (double lambda : lambda_path(lmax, 100, min_ratio)) {
        spec.lambda = lambda;
        try {
            run_gram_cd(cd, spec);
        } catch (const Error &) {
            break; // saturated tail; candidates found so far stand
        }
        double rss = syy;
        std::size_t df = 0;
        for (std::size_t a = 0; a < k; ++a) {
            if (cd.beta[a] == 0.0)
                continue;
            ++df;
            rss -= 2.0 * cd.beta[a] * c[a];
            for (std::size_t b = 0; b < k; ++b)
                rss += cd.beta[a] * g(a, b) * cd.beta[b];
        }
        if (df > n / 2)
            break; // saturation guard: n log(rss/n) rewards interpolation
        rss = std::max(rss, 1e-12 * syy);
        const double crit = double(n) * std::log(rss / double(n)) + double(df) * pen;
        if (crit < best_crit) {
            best_crit = crit;
            best_beta = cd.beta;
            out.lambda = lambda;
        }
    }
    for (std::size_t a = 0; a < k; ++a)
        if (!best_beta.empty() && best_beta[a] != 0.0) {
            out.support.push_back(candidates[a]);
            out.coef.push_back(best_beta[a]);
        }
    return out;
}

} // namespace mnr::select
