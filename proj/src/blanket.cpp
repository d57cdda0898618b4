#include "blanket.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "select.hpp"
#include "threadpool.hpp"

namespace mnr::blanket {

using datagen::Dataset;

int default_blanket_cap(std::size_t n) {
    return int(std::floor(std::sqrt(double(n)))) - 1;
}

numkit::Matrix gram_matrix(const numkit::Matrix &x) {
    const std::size_t n = x.rows(), p = x.cols();
    numkit::Matrix g(p, p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double *xi = x.row(i);
        for (std::size_t a = 0; a < p; ++a) {
            const double xa = xi[a];
            if (xa == 0.0)
                continue;
            double *grow = g.row(a);
            for (std::size_t b = a; b < p; ++b)
                grow[b] += xa * xi[b];
        }
    }
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < a; ++b)
            g(a, b) = g(b, a);
    return g;
}

namespace {

// Candidates for node j ranked by |corr|, strongest first, ties to the
// lower index.
std::vector<int> corr_ranked(const numkit::Matrix &gram, int j, std::size_t cap) {
    const std::size_t p = gram.rows();
    std::vector<int> idx;
    idx.reserve(p - 1);
    for (std::size_t k = 0; k < p; ++k)
        if (int(k) != j)
            idx.push_back(int(k));
    std::vector<double> score(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
        if (int(k) == j)
            continue;
        const double den = gram(j, j) * gram(k, k);
        score[k] = den > 0.0 ? std::fabs(gram(j, k)) / std::sqrt(den) : 0.0;
    }
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return score[a] > score[b]; });
    if (idx.size() > cap)
        idx.resize(cap);
    return idx;
}

} // namespace

BlanketMap corr_screen_blankets(const Dataset &ds, int cap) {
    const std::size_t p = ds.p();
    if (cap < 0)
        throw invalid_argument_error("corr_screen_blankets: negative cap");
    const numkit::Matrix gram = gram_matrix(ds.x);
    BlanketMap bm;
    bm.method = "corr_screen";
    bm.cap = cap;
    bm.neighbors.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<int> nb = corr_ranked(gram, int(j), std::size_t(cap));
        std::sort(nb.begin(), nb.end());
        bm.neighbors[j] = std::move(nb);
    }
    return bm;
}

BlanketMap nodewise_blankets(const Dataset &ds, int cap, double ebic_gamma, int threads) {
    const std::size_t n = ds.n(), p = ds.p();
    if (cap < 0)
        throw invalid_argument_error("nodewise_blankets: negative cap");
    const numkit::Matrix gram = gram_matrix(ds.x);
    const std::size_t screen = std::min<std::size_t>(select::default_screen_cap(n), p - 1);

    // Per-node supports with edge strengths, then union-symmetrize.
    std::vector<std::vector<std::pair<int, double>>> picked(p);
    std::vector<int> fallback_flags(p, 0);
    parallel_for(int(p), threads, [&](int j) {
        std::vector<int> cand = corr_ranked(gram, j, screen);
        std::sort(cand.begin(), cand.end());
        select::NodewiseFit fit;
        bool ok = true;
        try {
            fit = select::nodewise_lasso_ebic(gram, n, j, cand, ebic_gamma, p - 1);
        } catch (const Error &) {
            ok = false;
        }
        std::vector<std::pair<int, double>> entries;
        if (ok) {
            for (std::size_t a = 0; a < fit.support.size(); ++a)
                entries.emplace_back(fit.support[a], std::fabs(fit.coef[a]));
        } else {
            // Solver failure: fall back to plain correlation screening.
            fallback_flags[j] = 1;
            for (int k : corr_ranked(gram, j, std::size_t(cap)))
                entries.emplace_back(k, std::fabs(gram(j, k)));
        }
        std::stable_sort(entries.begin(), entries.end(), [](const auto &l, const auto &r) {
            if (l.second != r.second)
                return l.second > r.second;
            return l.first < r.first;
        });
        if (entries.size() > std::size_t(cap))
            entries.resize(std::size_t(cap));
        picked[j] = std::move(entries);
    });

    std::vector<std::map<int, double>> merged(p);
    for (std::size_t j = 0; j < p; ++j)
        for (const auto &[k, s] : picked[j]) {
            auto &mj = merged[j];
            auto it = mj.find(k);
            if (it == mj.end() || it->second < s)
                mj[k] = s;
            auto &mk = merged[k];
            it = mk.find(int(j));
            if (it == mk.end() || it->second < s)
                mk[int(j)] = s;
        }

    BlanketMap bm;
    bm.method = "nodewise";
    bm.cap = cap;
    bm.neighbors.resize(p);
    for (int f : fallback_flags)
        bm.fallbacks += f;
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<std::pair<int, double>> entries(merged[j].begin(), merged[j].end());
        if (entries.size() > std::size_t(cap)) {
            std::stable_sort(entries.begin(), entries.end(), [](const auto &l, const auto &r) {
                if (l.second != r.second)
                    return l.second > r.second;
                return l.first < r.first;
            });
            entries.resize(std::size_t(cap));
        }
        std::vector<int> nb;
        nb.reserve(entries.size());
        for (const auto &[k, s] : entries)
            nb.push_back(k);
        std::sort(nb.begin(), nb.end());
        bm.neighbors[j] = std::move(nb);
    }
    return bm;
}

std::string to_json(const BlanketMap &bm) {
    nlohmann::json j;
    j["method"] = bm.method;
    j["cap"] = bm.cap;
    nlohmann::json nbs = nlohmann::json::array();
    for (const auto &nb : bm.neighbors) {
        nlohmann::json row = nlohmann::json::array();
        for (int k : nb)
            row.push_back(k + 1);
        nbs.push_back(std::move(row));
    }
    j["neighbors"] = std::move(nbs);
    return j.dump();
}

BlanketMap blanket_from_json(const std::string &text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        throw parse_error(std::string("blanket json: ") + e.what());
    }
    BlanketMap bm;
    try {
        bm.method = j.at("method").get<std::string>();
        bm.cap = j.at("cap").get<int>();
        const std::size_t p = j.at("neighbors").size();
        bm.neighbors.resize(p);
        for (std::size_t node = 0; node < p; ++node) {
            for (const auto &v : j.at("neighbors")[node]) {
                const int k = v.get<int>();
                if (k < 1 || std::size_t(k) > p || std::size_t(k - 1) == node)
                    throw parse_error("blanket json: neighbor index out of range");
                bm.neighbors[node].push_back(k - 1);
            }
            std::sort(bm.neighbors[node].begin(), bm.neighbors[node].end());
        }
    } catch (const nlohmann::json::exception &e) {
        throw parse_error(std::string("blanket json: ") + e.what());
    }
    return bm;
}

} // namespace mnr::blanket
