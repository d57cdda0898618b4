#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "numkit.hpp"

namespace mnr::datagen {

enum class CovKind { identity, toeplitz, equicorr, ar2_precision };

// ar2_precision describes the precision matrix directly: unit diagonal,
// 0.5 at |i-j| = 1, 0.25 at |i-j| = 2 (rho is ignored). The other kinds
// describe the covariance.
struct CovSpec {
    CovKind kind = CovKind::identity;
    double rho = 0.0;
    std::size_t p = 0;
};

enum class Family { gaussian, binomial, cox };

// Sparse truth: beta holds (0-based index, value) pairs; all other
// coefficients are zero. beta0 is ignored by the cox family, which has no
// intercept; lambda0/lambda_c are the event/censoring Weibull scales.
struct ModelSpec {
    Family family = Family::gaussian;
    double beta0 = 0.0;
    std::vector<std::pair<int, double>> beta;
    double sigma2 = 1.0;
    double lambda0 = 0.1;
    double lambda_c = 1.0;
};

struct Dataset {
    numkit::Matrix x;
    std::vector<double> y;     // response; observed time for cox
    std::vector<int> event;    // cox only, 1 = event observed, 0 = censored
    Family family = Family::gaussian;
    bool standardized = false;
    std::vector<double> center; // column transforms applied so far
    std::vector<double> scale;

    std::size_t n() const { return x.rows(); }
    std::size_t p() const { return x.cols(); }
};

numkit::Matrix build_cov(const CovSpec &spec);

// Rows are iid N(0, Sigma). For ar2_precision the matrix from build_cov is
// the precision Theta and sampling solves L^T z = xi with Theta = L L^T.
// Row i consumes the derived stream (seed, kStreamX, i) only.
numkit::Matrix sample_mvn(std::size_t n, const CovSpec &spec, std::uint64_t seed);

Dataset gen_response(numkit::Matrix x, const ModelSpec &model, std::uint64_t seed);

// Center and scale every column to mean 0, variance 1 (divisor n-1),
// composing with any transform already recorded. Throws on a constant
// column, naming its index.
void standardize(Dataset &ds);

std::vector<double> dense_beta(const ModelSpec &model, std::size_t p);
std::vector<int> signal_set(const ModelSpec &model);

// Stream labels for derive(); fixed so that every consumer of a seed pulls
// from a disjoint stream.
inline constexpr std::uint64_t kStreamX = 1;
inline constexpr std::uint64_t kStreamResponse = 2;
inline constexpr std::uint64_t kStreamReplicate = 3;

} // namespace mnr::datagen
