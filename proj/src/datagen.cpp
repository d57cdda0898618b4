#include "datagen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rng.hpp"

namespace mnr::datagen {

numkit::Matrix build_cov(const CovSpec &spec) {
    const std::size_t p = spec.p;
    if (p == 0)
        throw invalid_argument_error("build_cov: p must be positive");
    numkit::Matrix m(p, p, 0.0);
    switch (spec.kind) {
    case CovKind::identity:
        for (std::size_t i = 0; i < p; ++i)
            m(i, i) = 1.0;
        break;
    case CovKind::toeplitz:
        if (!(spec.rho > -1.0 && spec.rho < 1.0))
            throw invalid_argument_error("build_cov: toeplitz rho outside (-1,1)");
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j)
                m(i, j) = std::pow(spec.rho, std::fabs(double(i) - double(j)));
        break;
    case CovKind::equicorr:
        if (!(spec.rho > -1.0 / (double(p) - 1.0) && spec.rho < 1.0))
            throw invalid_argument_error("build_cov: equicorr rho not positive definite");
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j)
                m(i, j) = i == j ? 1.0 : spec.rho;
        break;
    case CovKind::ar2_precision:
        for (std::size_t i = 0; i < p; ++i) {
            m(i, i) = 1.0;
            if (i + 1 < p) {
                m(i, i + 1) = 0.5;
                m(i + 1, i) = 0.5;
            }
            if (i + 2 < p) {
                m(i, i + 2) = 0.25;
                m(i + 2, i) = 0.25;
            }
        }
        break;
    }
    return m;
}

numkit::Matrix sample_mvn(std::size_t n, const CovSpec &spec, std::uint64_t seed) {
    const std::size_t p = spec.p;
    const numkit::SpdFactor f = cholesky(build_cov(spec));
    numkit::Matrix x(n, p);
    std::vector<double> z(p);
    for (std::size_t i = 0; i < n; ++i) {
        CounterRng rng(seed, {kStreamX, i});
        for (std::size_t j = 0; j < p; ++j)
            z[j] = rng.normal();
        double *xi = x.row(i);
        if (spec.kind == CovKind::ar2_precision) {
            // Theta = L L^T; solving L^T x = z gives cov(x) = Theta^{-1}.
            for (std::size_t jj = p; jj-- > 0;) {
                double s = z[jj];
                for (std::size_t k = jj + 1; k < p; ++k)
                    s -= f.l(k, jj) * xi[k];
                xi[jj] = s / f.l(jj, jj);
            }
        } else {
            for (std::size_t jj = 0; jj < p; ++jj) {
                double s = 0.0;
                for (std::size_t k = 0; k <= jj; ++k)
                    s += f.l(jj, k) * z[k];
                xi[jj] = s;
            }
        }
    }
    return x;
}

std::vector<double> dense_beta(const ModelSpec &model, std::size_t p) {
    std::vector<double> beta(p, 0.0);
    for (const auto &[idx, val] : model.beta) {
        if (idx < 0 || std::size_t(idx) >= p)
            throw invalid_argument_error("model beta index " + std::to_string(idx + 1) +
                                         " outside [1," + std::to_string(p) + "]");
        beta[idx] = val;
    }
    return beta;
}

std::vector<int> signal_set(const ModelSpec &model) {
    std::vector<int> s;
    for (const auto &[idx, val] : model.beta)
        if (val != 0.0)
            s.push_back(idx);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

Dataset gen_response(numkit::Matrix x, const ModelSpec &model, std::uint64_t seed) {
    const std::size_t n = x.rows(), p = x.cols();
    const std::vector<double> beta = dense_beta(model, p);
    std::vector<std::pair<int, double>> nz;
    for (std::size_t j = 0; j < p; ++j)
        if (beta[j] != 0.0)
            nz.emplace_back(int(j), beta[j]);

    std::vector<double> eta(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double *xi = x.row(i);
        double s = 0.0;
        for (const auto &[idx, val] : nz)
            s += xi[idx] * val;
        eta[i] = s;
    }

    Dataset ds;
    ds.family = model.family;
    ds.y.resize(n);
    CounterRng rng(seed, {kStreamResponse});
    switch (model.family) {
    case Family::gaussian: {
        if (!(model.sigma2 > 0.0))
            throw invalid_argument_error("gen_response: sigma2 must be positive");
        const double sd = std::sqrt(model.sigma2);
        for (std::size_t i = 0; i < n; ++i)
            ds.y[i] = model.beta0 + eta[i] + sd * rng.normal();
        break;
    }
    case Family::binomial:
        for (std::size_t i = 0; i < n; ++i) {
            const double pr = 1.0 / (1.0 + std::exp(-(model.beta0 + eta[i])));
            ds.y[i] = rng.uniform() < pr ? 1.0 : 0.0;
        }
        break;
    case Family::cox: {
        if (!(model.lambda0 > 0.0) || !(model.lambda_c > 0.0))
            throw invalid_argument_error("gen_response: weibull scales must be positive");
        ds.event.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Shape-1 Weibull with the given scale: T = scale * (-log U).
            const double t_event = model.lambda0 * std::exp(-eta[i]) * -std::log(rng.uniform());
            const double t_cens = model.lambda_c * -std::log(rng.uniform());
            ds.y[i] = std::min(t_event, t_cens);
            ds.event[i] = t_event <= t_cens ? 1 : 0;
        }
        break;
    }
    }
    ds.x = std::move(x);
    return ds;
}

void standardize(Dataset &ds) {
    const std::size_t n = ds.n(), p = ds.p();
    if (n < 2)
        throw invalid_argument_error("standardize: need at least two rows");
    if (ds.center.empty())
        ds.center.assign(p, 0.0);
    if (ds.scale.empty())
        ds.scale.assign(p, 1.0);
    for (std::size_t j = 0; j < p; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            mean += ds.x(i, j);
        mean /= double(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = ds.x(i, j) - mean;
            ss += d * d;
        }
        const double var = ss / double(n - 1);
        if (!(var > 1e-24))
            throw numeric_error("standardize: constant column " + std::to_string(j + 1),
                                static_cast<int>(j));
        const double sd = std::sqrt(var);
        for (std::size_t i = 0; i < n; ++i)
            ds.x(i, j) = (ds.x(i, j) - mean) / sd;
        // Compose with the existing transform: x_std = (x_orig - center)/scale.
        ds.center[j] += mean * ds.scale[j];
        ds.scale[j] *= sd;
    }
    ds.standardized = true;
}

} // namespace mnr::datagen
