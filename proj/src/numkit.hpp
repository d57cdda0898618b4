#pragma once

#include <cstddef>
#include <vector>

#include "errors.hpp"

// Small dense numerical kernel: row-major matrices, Cholesky-based SPD
// solves, and the distribution functions (normal, Student t, chi-square)
// needed for interval construction. Self-contained on purpose: the Gram
// matrices handled here are tiny subsets, so simplicity beats a BLAS.
namespace mnr::numkit {

class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    double &operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double *data() { return a_.data(); }
    const double *data() const { return a_.data(); }

    const double *row(std::size_t i) const { return a_.data() + i * cols_; }
    double *row(std::size_t i) { return a_.data() + i * cols_; }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

// Lower-triangular Cholesky factor L with A = L L^T.
struct SpdFactor {
    Matrix l;
    std::size_t dim() const { return l.rows(); }
};

// Throws Error(errc::numeric, "not positive definite") when a pivot falls
// at or below 1e-12 times the largest diagonal entry of A.
SpdFactor cholesky(const Matrix &a);

std::vector<double> solve_spd(const SpdFactor &f, const std::vector<double> &b);
std::vector<double> solve_spd(const Matrix &a, const std::vector<double> &b);

Matrix invert_spd(const Matrix &a);
Matrix invert_spd(const SpdFactor &f);

enum class Dist { std_normal, student_t, chi_square };

// param: degrees of freedom for student_t / chi_square, ignored for
// std_normal. Quantiles invert the cdf; cdf(quantile(p)) = p to ~1e-9.
double dist_cdf(Dist d, double x, double param = 0.0);
double dist_quantile(Dist d, double p, double param = 0.0);

// Regularized incomplete gamma P(a, x) and incomplete beta I_x(a, b),
// series/continued-fraction evaluation to 1e-12.
double reg_gamma_p(double a, double x);
double reg_beta_i(double x, double a, double b);

} // namespace mnr::numkit
