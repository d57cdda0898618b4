#include <doctest.h>

#include <algorithm>
#include <vector>

#include "blanket.hpp"
#include "datagen.hpp"

using namespace mnr;
using datagen::CovKind;
using datagen::CovSpec;
using datagen::Dataset;
using datagen::Family;
using datagen::ModelSpec;
using numkit::Matrix;

namespace {

Dataset design_only(std::size_t n, std::size_t p, CovKind kind, std::uint64_t seed) {
    CovSpec cov{kind, 0.0, p};
    ModelSpec model;
    model.family = Family::gaussian;
    model.beta = {{0, 1.0}};
    Dataset ds = datagen::gen_response(datagen::sample_mvn(n, cov, seed), model, seed);
    datagen::standardize(ds);
    return ds;
}

bool contains(const std::vector<int> &sorted, int v) {
    return std::binary_search(sorted.begin(), sorted.end(), v);
}

bool ar2_superset(const std::vector<int> &nb, int j, int p) {
    for (int t : {j - 2, j - 1, j + 1, j + 2})
        if (t >= 0 && t < p && !contains(nb, t))
            return false;
    return true;
}

} // namespace

TEST_SUITE_BEGIN("blanket");

TEST_CASE("default cap and gram matrix") {
    CHECK(blanket::default_blanket_cap(200) == 13);
    CHECK(blanket::default_blanket_cap(2000) == 43);
    CHECK(blanket::default_blanket_cap(100) == 9);

    Matrix x(3, 2, 0.0);
    x(0, 0) = 1; x(0, 1) = 2;
    x(1, 0) = 3; x(1, 1) = 4;
    x(2, 0) = 5; x(2, 1) = 6;
    Matrix g = blanket::gram_matrix(x);
    CHECK(g(0, 0) == 35.0);
    CHECK(g(0, 1) == 44.0);
    CHECK(g(1, 0) == 44.0);
    CHECK(g(1, 1) == 56.0);
}

TEST_CASE("corr screening ranks by absolute cosine and sorts the result") {
    // Column cosines with c0: c1 ~ 0.999, c2 = 0, c3 ~ 0.707.
    Matrix x(4, 4, 0.0);
    const double cols[4][4] = {{1, 1, 1, 1},      // c0
                               {1, 1, 1, 0.9},    // c1
                               {1, -1, 1, -1},    // c2
                               {1, 1, 0, 0}};     // c3
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            x(i, j) = cols[j][i];
    Dataset ds;
    ds.x = x;
    ds.y.assign(4, 0.0);

    blanket::BlanketMap bm2 = blanket::corr_screen_blankets(ds, 2);
    CHECK(bm2.method == "corr_screen");
    CHECK(bm2.cap == 2);
    REQUIRE(bm2.neighbors.size() == 4);
    CHECK(bm2.neighbors[0] == std::vector<int>{1, 3});

    blanket::BlanketMap bm1 = blanket::corr_screen_blankets(ds, 1);
    CHECK(bm1.neighbors[0] == std::vector<int>{1});

    // cap larger than p-1 keeps everything; cap 0 keeps nothing
    blanket::BlanketMap bmall = blanket::corr_screen_blankets(ds, 10);
    for (const auto &nb : bmall.neighbors)
        CHECK(nb.size() == 3);
    blanket::BlanketMap bm0 = blanket::corr_screen_blankets(ds, 0);
    for (const auto &nb : bm0.neighbors)
        CHECK(nb.empty());

    CHECK_THROWS_AS(blanket::corr_screen_blankets(ds, -1), Error);
}

TEST_CASE("corr screening breaks exact ties toward the lower index") {
    Matrix x(6, 3, 0.0);
    for (int i = 0; i < 6; ++i) {
        const double v = double(i) - 2.5;
        x(i, 0) = v;
        x(i, 1) = 2.0 * v; // same direction as c2: tie on |cosine| with c0
        x(i, 2) = 2.0 * v;
    }
    Dataset ds;
    ds.x = x;
    ds.y.assign(6, 0.0);
    blanket::BlanketMap bm = blanket::corr_screen_blankets(ds, 1);
    CHECK(bm.neighbors[0] == std::vector<int>{1});
}

TEST_CASE("nodewise blankets recover the ar2 band") {
    const std::size_t n = 400, p = 30;
    const int j = 14;
    int superset = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Dataset ds = design_only(n, p, CovKind::ar2_precision, seed);
        blanket::BlanketMap bm =
            blanket::nodewise_blankets(ds, blanket::default_blanket_cap(n));
        CHECK(bm.fallbacks == 0);
        superset += ar2_superset(bm.neighbors[j], j, int(p));
    }
    CHECK(superset >= 18);

    // Single run: every interior node should carry its band.
    Dataset ds = design_only(n, p, CovKind::ar2_precision, 7);
    blanket::BlanketMap bm = blanket::nodewise_blankets(ds, blanket::default_blanket_cap(n));
    int ok = 0, tot = 0;
    for (int node = 2; node < int(p) - 2; ++node) {
        ++tot;
        ok += ar2_superset(bm.neighbors[node], node, int(p));
    }
    CHECK(tot == 26);
    CHECK(ok >= 24);
}

TEST_CASE("nodewise blankets stay empty on independent features") {
    const std::size_t n = 300, p = 40;
    int empty = 0, nodes = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Dataset ds = design_only(n, p, CovKind::identity, seed);
        blanket::BlanketMap bm =
            blanket::nodewise_blankets(ds, blanket::default_blanket_cap(n));
        CHECK(bm.fallbacks == 0);
        for (const auto &nb : bm.neighbors) {
            ++nodes;
            empty += nb.empty();
        }
    }
    CHECK(nodes == 400);
    CHECK(empty >= 380); // EBIC should kill essentially every spurious edge
}

TEST_CASE("nodewise blankets are symmetric when the cap does not bind") {
    Dataset ds = design_only(300, 20, CovKind::ar2_precision, 11);
    blanket::BlanketMap bm = blanket::nodewise_blankets(ds, 19);
    REQUIRE(bm.neighbors.size() == 20);
    for (int j = 0; j < 20; ++j) {
        const auto &nb = bm.neighbors[j];
        CHECK(std::is_sorted(nb.begin(), nb.end()));
        CHECK(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
        CHECK_FALSE(contains(nb, j));
        for (int k : nb)
            CHECK(contains(bm.neighbors[k], j));
    }
}

TEST_CASE("nodewise blankets respect the cap after symmetrization") {
    Dataset ds = design_only(300, 20, CovKind::ar2_precision, 11);
    for (int cap : {0, 1, 2, 4}) {
        blanket::BlanketMap bm = blanket::nodewise_blankets(ds, cap);
        CHECK(bm.cap == cap);
        for (const auto &nb : bm.neighbors)
            CHECK(int(nb.size()) <= cap);
    }
    CHECK_THROWS_AS(blanket::nodewise_blankets(ds, -2), Error);
}

TEST_CASE("nodewise blankets at the n=p experiment scale") {
    Dataset ds = design_only(200, 200, CovKind::ar2_precision, 3);
    blanket::BlanketMap bm = blanket::nodewise_blankets(ds, blanket::default_blanket_cap(200));
    CHECK(bm.fallbacks == 0);
    // Lag-1 partial correlation is 0.5: both immediate neighbors must be found.
    const int j = 100;
    CHECK(contains(bm.neighbors[j], j - 1));
    CHECK(contains(bm.neighbors[j], j + 1));
    for (const auto &nb : bm.neighbors)
        CHECK(int(nb.size()) <= 13);
}

TEST_CASE("blanket json round trip uses 1-based indices") {
    Dataset ds = design_only(200, 8, CovKind::toeplitz, 5);
    blanket::BlanketMap bm = blanket::corr_screen_blankets(ds, 3);
    const std::string text = blanket::to_json(bm);
    CHECK(text.find("\"method\"") != std::string::npos);
    CHECK(text.find("corr_screen") != std::string::npos);

    blanket::BlanketMap back = blanket::blanket_from_json(text);
    CHECK(back.method == bm.method);
    CHECK(back.cap == bm.cap);
    REQUIRE(back.neighbors.size() == bm.neighbors.size());
    for (std::size_t j = 0; j < bm.neighbors.size(); ++j)
        CHECK(back.neighbors[j] == bm.neighbors[j]);

    // Hand-written document: indices on disk are 1-based.
    blanket::BlanketMap tiny = blanket::blanket_from_json(
        R"({"method":"corr_screen","cap":1,"neighbors":[[2],[1],[]]})");
    CHECK(tiny.neighbors[0] == std::vector<int>{1});
    CHECK(tiny.neighbors[1] == std::vector<int>{0});
    CHECK(tiny.neighbors[2].empty());
}

TEST_CASE("blanket json rejects malformed documents") {
    CHECK_THROWS_AS(blanket::blanket_from_json("not json"), Error);
    CHECK_THROWS_AS(blanket::blanket_from_json(R"({"cap":1,"neighbors":[]})"), Error);
    // 0 is out of range in a 1-based document
    CHECK_THROWS_AS(blanket::blanket_from_json(
                        R"({"method":"m","cap":1,"neighbors":[[0],[1]]})"),
                    Error);
    // index beyond p
    CHECK_THROWS_AS(blanket::blanket_from_json(
                        R"({"method":"m","cap":1,"neighbors":[[3],[1]]})"),
                    Error);
    // self loop
    CHECK_THROWS_AS(blanket::blanket_from_json(
                        R"({"method":"m","cap":1,"neighbors":[[1],[]]})"),
                    Error);
    try {
        blanket::blanket_from_json("[1,2");
        CHECK(false);
    } catch (const Error &e) {
        CHECK(e.code() == errc::parse);
    }
}

TEST_CASE("nodewise blankets are deterministic across thread counts") {
    Dataset ds = design_only(200, 40, CovKind::ar2_precision, 13);
    blanket::BlanketMap one = blanket::nodewise_blankets(ds, 13, 1.0, 1);
    blanket::BlanketMap four = blanket::nodewise_blankets(ds, 13, 1.0, 4);
    REQUIRE(one.neighbors.size() == four.neighbors.size());
    for (std::size_t j = 0; j < one.neighbors.size(); ++j)
        CHECK(one.neighbors[j] == four.neighbors[j]);
    CHECK(one.fallbacks == four.fallbacks);
}

TEST_SUITE_END();
