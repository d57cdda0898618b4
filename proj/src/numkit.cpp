#include "numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mnr::numkit {

SpdFactor cholesky(const Matrix &a) {
    const std::size_t n = a.rows();
    if (n != a.cols())
        throw invalid_argument_error("cholesky: matrix not square");
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        max_diag = std::max(max_diag, a(i, i));
    const double tol = 1e-12 * max_diag;

    Matrix l(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k)
            d -= l(j, k) * l(j, k);
        if (!(d > tol))
            throw numeric_error("cholesky: matrix not positive definite",
                                static_cast<int>(j));
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k)
                s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return SpdFactor{std::move(l)};
}

std::vector<double> solve_spd(const SpdFactor &f, const std::vector<double> &b) {
    const std::size_t n = f.dim();
    if (b.size() != n)
        throw invalid_argument_error("solve_spd: dimension mismatch");
    const Matrix &l = f.l;
    std::vector<double> x(b);
    for (std::size_t i = 0; i < n; ++i) { // L z = b
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k)
            s -= l(i, k) * x[k];
        x[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) { // L^T x = z
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k)
            s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

std::vector<double> solve_spd(const Matrix &a, const std::vector<double> &b) {
    return solve_spd(cholesky(a), b);
}

Matrix invert_spd(const SpdFactor &f) {
    const std::size_t n = f.dim();
    const Matrix &l = f.l;
    // Invert L in place, then form L^-T L^-1.
    Matrix li(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        li(j, j) = 1.0 / l(j, j);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = j; k < i; ++k)
                s -= l(i, k) * li(k, j);
            li(i, j) = s / l(i, i);
        }
    }
    Matrix inv(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = i; k < n; ++k)
                s += li(k, i) * li(k, j);
            inv(i, j) = s;
            inv(j, i) = s;
        }
    return inv;
}

Matrix invert_spd(const Matrix &a) { return invert_spd(cholesky(a)); }

namespace {

// Wichura (1988), algorithm AS 241 (PPND16): normal quantile to ~1e-16.
double norm_quantile(double p) {
    if (p <= 0.0)
        return -std::numeric_limits<double>::infinity();
    if (p >= 1.0)
        return std::numeric_limits<double>::infinity();
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

constexpr double kTol = 1e-12;
constexpr int kMaxIter = 500;

double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIter; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kTol)
            break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x), x > a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kTol)
            break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double beta_cf(double x, double a, double b) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny)
        d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kTol)
            break;
    }
    return h;
}

} // namespace

double reg_gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0)
        throw invalid_argument_error("reg_gamma_p: bad arguments");
    if (x == 0.0)
        return 0.0;
    if (x < a + 1.0)
        return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double reg_beta_i(double x, double a, double b) {
    if (a <= 0.0 || b <= 0.0 || x < 0.0 || x > 1.0)
        throw invalid_argument_error("reg_beta_i: bad arguments");
    if (x == 0.0)
        return 0.0;
    if (x == 1.0)
        return 1.0;
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                  a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_cf(x, a, b) / a;
    return 1.0 - front * beta_cf(1.0 - x, b, a) / b;
}

double dist_cdf(Dist d, double x, double param) {
    switch (d) {
    case Dist::std_normal:
        return 0.5 * std::erfc(-x / std::sqrt(2.0));
    case Dist::student_t: {
        const double df = param;
        if (!(df > 0.0))
            throw invalid_argument_error("dist_cdf: df must be positive");
        if (std::isinf(df))
            return dist_cdf(Dist::std_normal, x);
        if (x == 0.0)
            return 0.5;
        const double half = 0.5 * reg_beta_i(df / (df + x * x), 0.5 * df, 0.5);
        return x > 0.0 ? 1.0 - half : half;
    }
    case Dist::chi_square: {
        const double df = param;
        if (!(df > 0.0))
            throw invalid_argument_error("dist_cdf: df must be positive");
        if (x <= 0.0)
            return 0.0;
        return reg_gamma_p(0.5 * df, 0.5 * x);
    }
    }
    throw invalid_argument_error("dist_cdf: unknown distribution");
}

namespace {

// Monotone bisection inverse of a cdf on the bracket [lo, hi].
template <typename Cdf>
double bisect_quantile(Cdf cdf, double p, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-13 * (1.0 + std::fabs(lo)))
            break;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double dist_quantile(Dist d, double p, double param) {
    if (!(p > 0.0 && p < 1.0))
        throw invalid_argument_error("dist_quantile: p outside (0,1)");
    switch (d) {
    case Dist::std_normal:
        return norm_quantile(p);
    case Dist::student_t: {
        const double df = param;
        if (!(df > 0.0))
            throw invalid_argument_error("dist_quantile: df must be positive");
        if (std::isinf(df))
            return norm_quantile(p);
        if (p == 0.5)
            return 0.0;
        const bool upper = p > 0.5;
        const double pu = upper ? p : 1.0 - p;
        double hi = 1.0;
        while (dist_cdf(Dist::student_t, hi, df) < pu && hi < 1e12)
            hi *= 2.0;
        const double q = bisect_quantile(
            [df](double x) { return dist_cdf(Dist::student_t, x, df); }, pu, 0.0, hi);
        return upper ? q : -q;
    }
    case Dist::chi_square: {
        const double df = param;
        if (!(df > 0.0))
            throw invalid_argument_error("dist_quantile: df must be positive");
        double hi = df + 1.0;
        while (dist_cdf(Dist::chi_square, hi, df) < p && hi < 1e14)
            hi *= 2.0;
        return bisect_quantile(
            [df](double x) { return dist_cdf(Dist::chi_square, x, df); }, p, 0.0, hi);
    }
    }
    throw invalid_argument_error("dist_quantile: unknown distribution");
}

} // namespace mnr::numkit
