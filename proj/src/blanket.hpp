#pragma once

#include <string>
#include <vector>

#include "datagen.hpp"

namespace mnr::blanket {

struct BlanketMap {
    std::vector<std::vector<int>> neighbors; // per node, sorted, 0-based
    std::string method;
    int cap = 0;
    int fallbacks = 0; // nodes whose penalized fit fell back to corr screening
};

// Nodewise neighborhood regressions: each column on the rest (|corr|
// pre-screen to floor(n/log n), then a lasso with extended-BIC lambda),
// support truncated to cap by |coefficient|, symmetrized by union. After
// the union a blanket exceeding cap is re-truncated by edge strength.
BlanketMap nodewise_blankets(const datagen::Dataset &ds, int cap, double ebic_gamma = 1.0,
                             int threads = 1);

// Per-node top-cap by |corr(x_j, x_k)|; no symmetrization (the screening
// algorithm's neighborhoods are per-node).
BlanketMap corr_screen_blankets(const datagen::Dataset &ds, int cap);

// Default caps: floor(sqrt n)-1 for the full pipeline, screening_cap(n)
// for the screening/causal pipelines.
int default_blanket_cap(std::size_t n);

std::string to_json(const BlanketMap &bm);       // 1-based indices on disk
BlanketMap blanket_from_json(const std::string &text);

// Symmetric Gram matrix X'X (used for corr rankings and nodewise fits).
numkit::Matrix gram_matrix(const numkit::Matrix &x);

} // namespace mnr::blanket
