#include "infer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "glm.hpp"
#include "threadpool.hpp"

namespace mnr::infer {

using datagen::Dataset;
using datagen::Family;
using numkit::Dist;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> clean_subset(const Dataset &ds, int j, const std::vector<int> &subset) {
    std::vector<int> d(subset);
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    if (d.empty() || !std::binary_search(d.begin(), d.end(), j))
        throw invalid_argument_error("subset inference: feature " + std::to_string(j + 1) +
                                     " not in its subset");
    if (d.front() < 0 || std::size_t(d.back()) >= ds.p())
        throw invalid_argument_error("subset inference: subset index out of range");
    return d;
}

// Gram of [1, X_D] and X_D'y in one pass.
void build_design_gram(const Dataset &ds, const std::vector<int> &d, numkit::Matrix &g,
                       std::vector<double> &xty) {
    const std::size_t n = ds.n(), k = d.size();
    g = numkit::Matrix(k + 1, k + 1, 0.0);
    xty.assign(k + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double *xi = ds.x.row(i);
        const double yi = ds.y[i];
        g(0, 0) += 1.0;
        xty[0] += yi;
        for (std::size_t a = 0; a < k; ++a) {
            const double xa = xi[d[a]];
            g(0, a + 1) += xa;
            xty[a + 1] += xa * yi;
            for (std::size_t b = a; b < k; ++b)
                g(a + 1, b + 1) += xa * xi[d[b]];
        }
    }
    for (std::size_t a = 0; a <= k; ++a)
        for (std::size_t b = 0; b < a; ++b)
            g(a, b) = g(b, a);
}

struct OlsFit {
    std::vector<double> coef;   // intercept first
    numkit::Matrix gram_inv;    // (k+1) x (k+1)
    double sigma2 = 0.0;        // RSS/(n-k-1)
    double df = 0.0;
};

OlsFit ols_fit(const Dataset &ds, const std::vector<int> &d, int err_feature) {
    const std::size_t n = ds.n(), k = d.size();
    if (k > n - 2)
        throw numeric_error("subset of size " + std::to_string(k) +
                                " too large for n = " + std::to_string(n),
                            err_feature);
    numkit::Matrix g;
    std::vector<double> xty;
    build_design_gram(ds, d, g, xty);
    numkit::SpdFactor f;
    try {
        f = numkit::cholesky(g);
    } catch (const Error &) {
        throw numeric_error("singular design on subset fit", err_feature);
    }
    OlsFit fit;
    fit.coef = numkit::solve_spd(f, xty);
    fit.gram_inv = numkit::invert_spd(f);
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double *xi = ds.x.row(i);
        double e = ds.y[i] - fit.coef[0];
        for (std::size_t a = 0; a < k; ++a)
            e -= xi[d[a]] * fit.coef[a + 1];
        rss += e * e;
    }
    fit.df = double(n) - double(k) - 1.0;
    fit.sigma2 = std::max(rss, 0.0) / fit.df;
    return fit;
}

double two_sided_p(double stat, double df) {
    if (stat == 0.0)
        return 1.0;
    const double a = std::fabs(stat);
    if (std::isinf(a))
        return 0.0;
    if (std::isinf(df))
        return 2.0 * numkit::dist_cdf(Dist::std_normal, -a);
    return 2.0 * numkit::dist_cdf(Dist::student_t, -a, df);
}

numkit::Matrix glm_design(const Dataset &ds, const std::vector<int> &d, bool intercept) {
    const std::size_t n = ds.n(), k = d.size();
    numkit::Matrix z(n, k + (intercept ? 1 : 0));
    for (std::size_t i = 0; i < n; ++i) {
        const double *xi = ds.x.row(i);
        std::size_t col = 0;
        if (intercept)
            z(i, col++) = 1.0;
        for (std::size_t a = 0; a < k; ++a)
            z(i, col++) = xi[d[a]];
    }
    return z;
}

} // namespace

InferenceRecord subset_ols_infer(const Dataset &ds, int j, const std::vector<int> &subset,
                                 double level) {
    if (!(level > 0.0 && level < 1.0))
        throw invalid_argument_error("subset_ols_infer: level outside (0,1)");
    const std::vector<int> d = clean_subset(ds, j, subset);
    const OlsFit fit = ols_fit(ds, d, j);
    const std::size_t pos =
        std::size_t(std::lower_bound(d.begin(), d.end(), j) - d.begin()) + 1;

    InferenceRecord rec;
    rec.feature = j;
    rec.subset_size = int(d.size());
    rec.df = fit.df;
    rec.beta_hat = fit.coef[pos];
    rec.se = std::sqrt(std::max(fit.sigma2 * fit.gram_inv(pos, pos), 0.0));
    const double q = numkit::dist_quantile(Dist::student_t, 1.0 - (1.0 - level) / 2.0, fit.df);
    rec.ci_low = rec.beta_hat - q * rec.se;
    rec.ci_high = rec.beta_hat + q * rec.se;
    rec.p_value = rec.se > 0.0 ? two_sided_p(rec.beta_hat / rec.se, fit.df)
                               : (rec.beta_hat == 0.0 ? 1.0 : 0.0);
    return rec;
}

InferenceRecord subset_glm_infer(const Dataset &ds, int j, const std::vector<int> &subset,
                                 double level) {
    if (!(level > 0.0 && level < 1.0))
        throw invalid_argument_error("subset_glm_infer: level outside (0,1)");
    if (ds.family == Family::gaussian)
        return subset_ols_infer(ds, j, subset, level);
    const std::vector<int> d = clean_subset(ds, j, subset);
    const std::size_t n = ds.n();
    if (4 * d.size() > n)
        throw numeric_error("subset of size " + std::to_string(d.size()) +
                                " exceeds n/4 = " + std::to_string(n / 4),
                            j);
    const std::size_t pos = std::size_t(std::lower_bound(d.begin(), d.end(), j) - d.begin());

    glm::NewtonResult nr;
    std::size_t cov_pos = pos;
    if (ds.family == Family::binomial) {
        bool ones = false, zeros = false;
        for (double v : ds.y)
            (v > 0.5 ? ones : zeros) = true;
        if (!ones || !zeros)
            throw numeric_error("binomial subset fit: response is constant", j);
        nr = glm::logistic_newton(glm_design(ds, d, true), ds.y);
        cov_pos = pos + 1; // intercept column first
    } else {
        const glm::CoxOrder ord = glm::make_cox_order(ds.y, ds.event);
        if (ord.n_events == 0)
            throw numeric_error("cox subset fit: no events", j);
        nr = glm::cox_newton(ord, glm_design(ds, d, false));
    }
    if (!nr.converged) {
        if (nr.separation)
            throw numeric_error("binomial subset fit: separation, no finite estimate", j);
        throw numeric_error("subset fit: newton did not converge", j);
    }

    InferenceRecord rec;
    rec.feature = j;
    rec.subset_size = int(d.size());
    rec.df = kInf;
    rec.grad_norm = nr.grad_norm;
    rec.beta_hat = nr.beta[cov_pos];
    rec.se = std::sqrt(std::max(nr.cov(cov_pos, cov_pos), 0.0));
    if (nr.separation) {
        rec.flagged = true;
        rec.flag = "separation";
    }
    const double q = numkit::dist_quantile(Dist::std_normal, 1.0 - (1.0 - level) / 2.0);
    rec.ci_low = rec.beta_hat - q * rec.se;
    rec.ci_high = rec.beta_hat + q * rec.se;
    rec.p_value = rec.se > 0.0 ? two_sided_p(rec.beta_hat / rec.se, kInf)
                               : (rec.beta_hat == 0.0 ? 1.0 : 0.0);
    return rec;
}

JointInferenceRecord joint_infer(const Dataset &ds, const std::vector<int> &a,
                                 const blanket::BlanketMap &blankets,
                                 const std::vector<int> &s_star, double level) {
    if (a.empty())
        throw invalid_argument_error("joint_infer: empty feature set");
    if (!(level > 0.0 && level < 1.0))
        throw invalid_argument_error("joint_infer: level outside (0,1)");
    std::vector<int> m(a);
    for (int j : a) {
        if (j < 0 || std::size_t(j) >= ds.p())
            throw invalid_argument_error("joint_infer: feature index out of range");
        if (std::size_t(j) < blankets.neighbors.size())
            for (int k : blankets.neighbors[j])
                m.push_back(k);
    }
    m.insert(m.end(), s_star.begin(), s_star.end());
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());

    const std::size_t ka = a.size();
    const double coord_level = 1.0 - (1.0 - level) / double(ka);

    JointInferenceRecord rec;
    rec.features = a;
    rec.level = level;
    rec.subset_size = int(m.size());
    rec.beta_hat.resize(ka);
    rec.ci_low.resize(ka);
    rec.ci_high.resize(ka);
    rec.cov = numkit::Matrix(ka, ka, 0.0);
    const double nn = double(ds.n());

    if (ds.family == Family::gaussian) {
        const OlsFit fit = ols_fit(ds, m, a.front());
        rec.df = fit.df;
        const double q = numkit::dist_quantile(Dist::student_t,
                                               1.0 - (1.0 - coord_level) / 2.0, fit.df);
        for (std::size_t u = 0; u < ka; ++u) {
            const std::size_t pu =
                std::size_t(std::lower_bound(m.begin(), m.end(), a[u]) - m.begin()) + 1;
            rec.beta_hat[u] = fit.coef[pu];
            const double se = std::sqrt(std::max(fit.sigma2 * fit.gram_inv(pu, pu), 0.0));
            rec.ci_low[u] = rec.beta_hat[u] - q * se;
            rec.ci_high[u] = rec.beta_hat[u] + q * se;
            for (std::size_t v = 0; v < ka; ++v) {
                const std::size_t pv =
                    std::size_t(std::lower_bound(m.begin(), m.end(), a[v]) - m.begin()) + 1;
                rec.cov(u, v) = nn * fit.sigma2 * fit.gram_inv(pu, pv);
            }
        }
    } else {
        if (4 * m.size() > ds.n())
            throw numeric_error("joint subset exceeds n/4", a.front());
        glm::NewtonResult nr;
        std::size_t off = 0;
        if (ds.family == Family::binomial) {
            nr = glm::logistic_newton(glm_design(ds, m, true), ds.y);
            off = 1;
        } else {
            nr = glm::cox_newton(glm::make_cox_order(ds.y, ds.event), glm_design(ds, m, false));
        }
        if (!nr.converged)
            throw numeric_error("joint subset fit: newton did not converge", a.front());
        rec.df = kInf;
        const double q =
            numkit::dist_quantile(Dist::std_normal, 1.0 - (1.0 - coord_level) / 2.0);
        for (std::size_t u = 0; u < ka; ++u) {
            const std::size_t pu =
                std::size_t(std::lower_bound(m.begin(), m.end(), a[u]) - m.begin()) + off;
            rec.beta_hat[u] = nr.beta[pu];
            const double se = std::sqrt(std::max(nr.cov(pu, pu), 0.0));
            rec.ci_low[u] = rec.beta_hat[u] - q * se;
            rec.ci_high[u] = rec.beta_hat[u] + q * se;
            for (std::size_t v = 0; v < ka; ++v) {
                const std::size_t pv =
                    std::size_t(std::lower_bound(m.begin(), m.end(), a[v]) - m.begin()) + off;
                rec.cov(u, v) = nn * nr.cov(pu, pv);
            }
        }
    }

    // Report on the pre-standardization scale when transforms are recorded.
    if (!ds.scale.empty()) {
        for (std::size_t u = 0; u < ka; ++u) {
            const double su = ds.scale[a[u]];
            rec.beta_hat[u] /= su;
            rec.ci_low[u] /= su;
            rec.ci_high[u] /= su;
            for (std::size_t v = 0; v < ka; ++v)
                rec.cov(u, v) /= su * ds.scale[a[v]];
        }
    }
    return rec;
}

std::vector<double> adjust_pvalues(const std::vector<double> &p, Adjust method) {
    const std::size_t m = p.size();
    for (double v : p)
        if (!(v >= 0.0 && v <= 1.0))
            throw invalid_argument_error("adjust_pvalues: p-value outside [0,1]");
    std::vector<std::size_t> ord(m);
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(),
                     [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<double> adj(m, 0.0);
    if (method == Adjust::holm) {
        double running = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double v = std::min(1.0, double(m - i) * p[ord[i]]);
            running = std::max(running, v);
            adj[ord[i]] = running;
        }
    } else {
        double running = 1.0;
        for (std::size_t i = m; i-- > 0;) {
            const double v = std::min(1.0, double(m) * p[ord[i]] / double(i + 1));
            running = std::min(running, v);
            adj[ord[i]] = running;
        }
    }
    return adj;
}

double p_to_z(double p) {
    const double clamped = std::min(std::max(p, 1e-300), 1.0 - 1e-16);
    return -numkit::dist_quantile(Dist::std_normal, clamped);
}

std::string default_selection(Family family) {
    switch (family) {
    case Family::gaussian:
        return "sis_then_scad";
    case Family::binomial:
        return "sis_then_mcp";
    case Family::cox:
        return "sis_then_lasso";
    }
    return "sis_then_lasso";
}

namespace {

// Assemble D_j = {j} + blanket_j + s_star, trimming to the family cap by
// keeping j, then conditioning-set members, then blanket members, each
// ranked by |corr(x_j, x_k)| (ties to the lower index).
std::vector<int> build_subset(const Dataset &ds, int j, const std::vector<int> &blanket_j,
                              const std::vector<int> &s_star) {
    const std::size_t n = ds.n();
    const std::size_t cap = ds.family == Family::gaussian
                                ? n - 2
                                : std::max<std::size_t>(2, n / 4);
    std::vector<int> d{j};
    std::vector<int> rest;
    for (int k : s_star)
        if (k != j && std::find(rest.begin(), rest.end(), k) == rest.end())
            rest.push_back(k);
    const std::size_t n_sstar = rest.size();
    for (int k : blanket_j)
        if (k != j && std::find(rest.begin(), rest.end(), k) == rest.end())
            rest.push_back(k);

    if (rest.size() + 1 > cap) {
        auto corr_with_j = [&](int k) {
            double sjk = 0.0, sjj = 0.0, skk = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double xj = ds.x(i, j), xk = ds.x(i, k);
                sjk += xj * xk;
                sjj += xj * xj;
                skk += xk * xk;
            }
            return sjj > 0.0 && skk > 0.0 ? std::fabs(sjk) / std::sqrt(sjj * skk) : 0.0;
        };
        std::vector<std::pair<double, int>> scored;
        scored.reserve(rest.size());
        for (std::size_t i = 0; i < rest.size(); ++i)
            scored.emplace_back(corr_with_j(rest[i]), int(i));
        const std::size_t keep = cap - 1;
        // Stable partition: conditioning-set members first, then blankets,
        // each by descending correlation with x_j.
        std::stable_sort(scored.begin(), scored.end(), [&](const auto &l, const auto &r) {
            const bool ls = std::size_t(l.second) < n_sstar;
            const bool rs = std::size_t(r.second) < n_sstar;
            if (ls != rs)
                return ls;
            if (l.first != r.first)
                return l.first > r.first;
            return rest[l.second] < rest[r.second];
        });
        std::vector<int> trimmed;
        for (std::size_t i = 0; i < keep && i < scored.size(); ++i)
            trimmed.push_back(rest[scored[i].second]);
        rest = trimmed;
    }
    d.insert(d.end(), rest.begin(), rest.end());
    std::sort(d.begin(), d.end());
    return d;
}

void rescale_records(const Dataset &ds, std::vector<InferenceRecord> &records) {
    if (ds.scale.empty())
        return;
    for (InferenceRecord &r : records) {
        const double s = ds.scale[r.feature];
        r.beta_hat /= s;
        r.se /= s;
        r.ci_low /= s;
        r.ci_high /= s;
    }
}

void finalize_report(MnrReport &rep) {
    std::vector<double> p;
    p.reserve(rep.records.size());
    for (const InferenceRecord &r : rep.records)
        p.push_back(r.p_value);
    rep.p_holm = adjust_pvalues(p, Adjust::holm);
    rep.p_bh = adjust_pvalues(p, Adjust::bh);
    rep.z.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        rep.z[i] = p_to_z(p[i]);
}

Dataset standardized_copy(const Dataset &ds) {
    Dataset out = ds;
    if (!out.standardized)
        datagen::standardize(out);
    return out;
}

} // namespace

MnrReport run_mnr(const Dataset &ds_in, const MnrConfig &cfg) {
    const Dataset ds = standardized_copy(ds_in);
    const std::size_t n = ds.n(), p = ds.p();
    MnrReport rep;
    rep.method = cfg.mode == Mode::screening ? "mnr_screen" : "mnr";
    rep.level = cfg.level;
    rep.family = ds.family;
    rep.n = n;
    rep.p = p;
    rep.seed = cfg.seed;

    select::Caps caps;
    caps.screen_cap = cfg.screen_cap ? cfg.screen_cap : select::default_screen_cap(n);
    caps.model_cap = cfg.model_cap ? cfg.model_cap : select::default_model_cap(n);
    int blanket_cap = cfg.blanket_cap;

    if (cfg.mode == Mode::screening) {
        const std::size_t sc = cfg.screen_cap ? cfg.screen_cap : select::screening_cap(n);
        rep.selection_method = "sis";
        rep.s_star = select::sis_screen(ds, sc);
        std::sort(rep.s_star.begin(), rep.s_star.end());
        if (blanket_cap == 0)
            blanket_cap = int(select::screening_cap(n));
        rep.blankets = blanket::corr_screen_blankets(ds, blanket_cap);
    } else {
        rep.selection_method = cfg.selection.empty() ? default_selection(ds.family)
                                                     : cfg.selection;
        const select::SelectionResult sel =
            select::select_variables(ds, rep.selection_method, caps);
        rep.s_star = sel.active;
        if (blanket_cap == 0)
            blanket_cap = blanket::default_blanket_cap(n);
        if (cfg.blanket_method == "nodewise")
            rep.blankets = blanket::nodewise_blankets(ds, blanket_cap, cfg.nodewise_gamma,
                                                      cfg.threads);
        else if (cfg.blanket_method == "corr_screen")
            rep.blankets = blanket::corr_screen_blankets(ds, blanket_cap);
        else
            throw invalid_argument_error("run_mnr: unknown blanket method '" +
                                         cfg.blanket_method + "'");
    }

    std::vector<InferenceRecord> slots(p);
    std::vector<std::string> errs(p);
    std::vector<char> ok(p, 0);
    parallel_for(int(p), cfg.threads, [&](int j) {
        try {
            const std::vector<int> d = build_subset(ds, j, rep.blankets.neighbors[j],
                                                    rep.s_star);
            slots[j] = ds.family == Family::gaussian
                           ? subset_ols_infer(ds, j, d, cfg.level)
                           : subset_glm_infer(ds, j, d, cfg.level);
            ok[j] = 1;
        } catch (const Error &e) {
            errs[j] = e.what();
        }
    });
    for (std::size_t j = 0; j < p; ++j) {
        if (ok[j])
            rep.records.push_back(slots[j]);
        else
            rep.errors.emplace_back(int(j), errs[j]);
    }
    rescale_records(ds, rep.records);
    finalize_report(rep);
    return rep;
}

MnrReport run_causal(const Dataset &ds_in, const MnrConfig &cfg) {
    const Dataset ds = standardized_copy(ds_in);
    const std::size_t n = ds.n(), p = ds.p();
    MnrReport rep;
    rep.method = "causal";
    rep.level = cfg.level;
    rep.family = ds.family;
    rep.n = n;
    rep.p = p;
    rep.seed = cfg.seed;
    rep.selection_method = "sis";

    const std::size_t sc = cfg.screen_cap ? cfg.screen_cap : select::screening_cap(n);
    rep.s_star = select::sis_screen(ds, sc);
    std::sort(rep.s_star.begin(), rep.s_star.end());
    const int blanket_cap =
        cfg.blanket_cap ? cfg.blanket_cap : int(select::screening_cap(n));
    rep.blankets = blanket::corr_screen_blankets(ds, blanket_cap);

    const std::size_t k = rep.s_star.size();
    std::vector<InferenceRecord> slots(k);
    std::vector<std::string> errs(k);
    std::vector<char> ok(k, 0);
    parallel_for(int(k), cfg.threads, [&](int u) {
        const int j = rep.s_star[u];
        try {
            const std::vector<int> d = build_subset(ds, j, rep.blankets.neighbors[j],
                                                    rep.s_star);
            slots[u] = ds.family == Family::gaussian
                           ? subset_ols_infer(ds, j, d, cfg.level)
                           : subset_glm_infer(ds, j, d, cfg.level);
            ok[u] = 1;
        } catch (const Error &e) {
            errs[u] = e.what();
        }
    });
    for (std::size_t u = 0; u < k; ++u) {
        if (ok[u])
            rep.records.push_back(slots[u]);
        else
            rep.errors.emplace_back(rep.s_star[u], errs[u]);
    }
    rescale_records(ds, rep.records);
    finalize_report(rep);

    for (std::size_t i = 0; i < rep.records.size(); ++i)
        if (rep.p_holm[i] < cfg.causal_alpha)
            rep.selected_causal.push_back(rep.records[i].feature);
    if (rep.selected_causal.empty() && !rep.records.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < rep.records.size(); ++i)
            if (rep.records[i].p_value < rep.records[best].p_value)
                best = i;
        rep.selected_causal.push_back(rep.records[best].feature);
        rep.causal_fallback = true;
    }
    return rep;
}

} // namespace mnr::infer
