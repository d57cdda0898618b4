#include "baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "threadpool.hpp"

namespace mnr::baselines {

using datagen::Dataset;
using datagen::Family;

namespace {
struct InferRow {
    double beta = 0.0;
    double se = 0.0;
};
} // namespace

DebiasedResult desparsified_lasso(const Dataset &ds_in, double level, int threads) {
    if (ds_in.family != Family::gaussian)
        throw invalid_argument_error("desparsified_lasso: gaussian family only");
    if (!(level > 0.0 && level < 1.0))
        throw invalid_argument_error("desparsified_lasso: level outside (0,1)");
    Dataset ds = ds_in;
    if (!ds.standardized)
        datagen::standardize(ds);
    const std::size_t n = ds.n(), p = ds.p();

    // Initial estimate: BIC-lambda lasso over all columns, no truncation.
    select::Caps caps;
    caps.screen_cap = p;
    caps.model_cap = p;
    const select::SelectionResult init = select::select_variables(ds, "lasso", caps);

    DebiasedResult out;
    out.lambda = init.lambda;
    out.std_beta_lasso.assign(p, 0.0);
    for (std::size_t a = 0; a < init.active.size(); ++a)
        out.std_beta_lasso[init.active[a]] = init.coef[a];

    std::vector<double> resid(n);
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = ds.y[i] - init.intercept;
        const double *xi = ds.x.row(i);
        for (std::size_t a = 0; a < init.active.size(); ++a)
            e -= xi[init.active[a]] * init.coef[a];
        resid[i] = e;
        rss += e * e;
    }
    const std::size_t support = init.active.size();
    if (support + 1 >= n)
        throw numeric_error("desparsified_lasso: lasso support too large for n");
    out.sigma_hat = std::sqrt(rss / double(n - support));

    const numkit::Matrix gram = blanket::gram_matrix(ds.x);
    out.z = numkit::Matrix(n, p, 0.0);
    out.std_beta_bc.assign(p, 0.0);
    std::vector<InferRow> rows(p);
    const double q = numkit::dist_quantile(numkit::Dist::std_normal,
                                           1.0 - (1.0 - level) / 2.0);

    std::vector<int> all(p);
    std::iota(all.begin(), all.end(), 0);
    parallel_for(int(p), threads, [&](int j) {
        std::vector<int> cand;
        cand.reserve(p - 1);
        for (int k : all)
            if (k != j)
                cand.push_back(k);
        // Plain BIC (gamma = 0) nodewise lasso for the projection direction.
        const select::NodewiseFit nf =
            select::nodewise_lasso_ebic(gram, n, j, cand, 0.0, p - 1);
        double zx = 0.0, zz = 0.0, zr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double zij = ds.x(i, j);
            const double *xi = ds.x.row(i);
            for (std::size_t a = 0; a < nf.support.size(); ++a)
                zij -= xi[nf.support[a]] * nf.coef[a];
            out.z(i, j) = zij;
            zx += zij * ds.x(i, j);
            zz += zij * zij;
            zr += zij * resid[i];
        }
        if (std::fabs(zx) <= 1e-10 * double(n))
            throw numeric_error("desparsified_lasso: degenerate projection", j);
        const double bc = out.std_beta_lasso[j] + zr / zx;
        out.std_beta_bc[j] = bc;
        rows[j].se = out.sigma_hat * std::sqrt(zz) / std::fabs(zx);
        rows[j].beta = bc;
    });

    out.records.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        infer::InferenceRecord rec;
        rec.feature = int(j);
        rec.df = std::numeric_limits<double>::infinity();
        rec.subset_size = int(support);
        rec.beta_hat = rows[j].beta;
        rec.se = rows[j].se;
        rec.ci_low = rec.beta_hat - q * rec.se;
        rec.ci_high = rec.beta_hat + q * rec.se;
        if (rec.se > 0.0) {
            const double stat = rec.beta_hat / rec.se;
            rec.p_value = 2.0 * numkit::dist_cdf(numkit::Dist::std_normal, -std::fabs(stat));
        } else {
            rec.p_value = rec.beta_hat == 0.0 ? 1.0 : 0.0;
        }
        const double s = ds.scale.empty() ? 1.0 : ds.scale[j];
        rec.beta_hat /= s;
        rec.se /= s;
        rec.ci_low /= s;
        rec.ci_high /= s;
        out.records[j] = rec;
    }
    out.beta_lasso.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j)
        out.beta_lasso[j] =
            out.std_beta_lasso[j] / (ds.scale.empty() ? 1.0 : ds.scale[j]);
    return out;
}

} // namespace mnr::baselines
