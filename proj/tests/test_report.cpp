#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>

#include "datagen.hpp"
#include "report.hpp"

using namespace mnr;
using infer::InferenceRecord;
using infer::MnrReport;

namespace {

MnrReport sample_report() {
    MnrReport rep;
    rep.method = "mnr";
    rep.selection_method = "sis_then_scad";
    rep.level = 0.95;
    rep.family = datagen::Family::gaussian;
    rep.n = 100;
    rep.p = 3;
    rep.seed = 42;
    for (int j = 0; j < 3; ++j) {
        InferenceRecord r;
        r.feature = j;
        r.beta_hat = 0.5 * (j + 1);
        r.se = 0.1;
        r.ci_low = r.beta_hat - 0.2;
        r.ci_high = r.beta_hat + 0.2;
        r.p_value = 0.01 * (j + 1);
        r.df = j == 2 ? std::numeric_limits<double>::infinity() : 95.0;
        r.subset_size = 4;
        rep.records.push_back(r);
        rep.p_holm.push_back(0.03 * (j + 1));
        rep.p_bh.push_back(0.02 * (j + 1));
        rep.z.push_back(2.0 - j);
    }
    rep.records[1].flagged = true;
    rep.records[1].flag = "separation";
    rep.s_star = {0, 2};
    rep.blankets.method = "nodewise";
    rep.blankets.cap = 2;
    rep.blankets.neighbors = {{1}, {0, 2}, {1}};
    rep.errors.emplace_back(2, "singular design on subset fit");
    return rep;
}

} // namespace

TEST_SUITE_BEGIN("report");

TEST_CASE("fmt_double is shortest round-trip text") {
    CHECK(report::fmt_double(0.1) == "0.1");
    CHECK(report::fmt_double(3.0) == "3");
    CHECK(report::fmt_double(-2.5) == "-2.5");
    CHECK(report::fmt_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(report::fmt_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(report::fmt_double(std::nan("")) == "nan");

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-1e6, 1e6);
    for (int i = 0; i < 200; ++i) {
        double v = unif(rng);
        if (i % 3 == 0)
            v = std::exp(unif(rng) / 1e5) * (i % 2 ? 1 : -1);
        const std::string s = report::fmt_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("csv layout") {
    const MnrReport rep = sample_report();
    const std::string csv = report::report_to_csv(rep);
    const std::string header =
        "feature,beta_hat,se,ci_low,ci_high,p_value,p_holm,p_bh,z_score,df,subset_size";
    CHECK(csv.substr(0, header.size()) == header);
    // one header + three records
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    // 1-based feature ids and an explicit inf df
    CHECK(csv.find("\n1,") != std::string::npos);
    CHECK(csv.find("\n3,") != std::string::npos);
    CHECK(csv.find(",inf,") != std::string::npos);
    const std::string row1 = csv.substr(header.size() + 1);
    CHECK(std::count(row1.begin(), row1.begin() + long(row1.find('\n')), ',') == 10);
}

TEST_CASE("json round trip preserves every field") {
    const MnrReport rep = sample_report();
    const std::string text = report::report_to_json(rep);
    const MnrReport back = report::report_from_json(text);

    CHECK(back.method == rep.method);
    CHECK(back.selection_method == rep.selection_method);
    CHECK(back.level == rep.level);
    CHECK(back.family == rep.family);
    CHECK(back.n == rep.n);
    CHECK(back.p == rep.p);
    CHECK(back.seed == rep.seed);
    REQUIRE(back.records.size() == rep.records.size());
    for (std::size_t i = 0; i < rep.records.size(); ++i) {
        CHECK(back.records[i].feature == rep.records[i].feature);
        CHECK(back.records[i].beta_hat == rep.records[i].beta_hat);
        CHECK(back.records[i].se == rep.records[i].se);
        CHECK(back.records[i].ci_low == rep.records[i].ci_low);
        CHECK(back.records[i].ci_high == rep.records[i].ci_high);
        CHECK(back.records[i].p_value == rep.records[i].p_value);
        CHECK(back.records[i].subset_size == rep.records[i].subset_size);
        CHECK(back.records[i].flagged == rep.records[i].flagged);
        CHECK(back.records[i].flag == rep.records[i].flag);
        if (std::isinf(rep.records[i].df))
            CHECK(std::isinf(back.records[i].df));
        else
            CHECK(back.records[i].df == rep.records[i].df);
        CHECK(back.p_holm[i] == rep.p_holm[i]);
        CHECK(back.p_bh[i] == rep.p_bh[i]);
        CHECK(back.z[i] == rep.z[i]);
    }
    CHECK(back.s_star == rep.s_star);
    CHECK(back.blankets.method == rep.blankets.method);
    CHECK(back.blankets.cap == rep.blankets.cap);
    CHECK(back.blankets.neighbors == rep.blankets.neighbors);
    REQUIRE(back.errors.size() == 1);
    CHECK(back.errors[0].first == 2);
    CHECK(back.errors[0].second == "singular design on subset fit");
    CHECK(back.selected_causal.empty());
}

TEST_CASE("causal fields serialize only for causal reports") {
    MnrReport rep = sample_report();
    CHECK(report::report_to_json(rep).find("selected_causal") == std::string::npos);
    rep.method = "causal";
    rep.selected_causal = {0, 2};
    rep.causal_fallback = true;
    const MnrReport back = report::report_from_json(report::report_to_json(rep));
    CHECK(back.selected_causal == rep.selected_causal);
    CHECK(back.causal_fallback);
}

TEST_CASE("malformed report json raises parse errors") {
    try {
        report::report_from_json("{nope");
        CHECK(false);
    } catch (const Error &e) {
        CHECK(e.code() == errc::parse);
        CHECK(std::string(e.what()).find("report json") != std::string::npos);
    }
    // well-formed JSON, missing required fields
    CHECK_THROWS_AS(report::report_from_json("{}"), Error);
    CHECK_THROWS_AS(report::report_from_json(R"({"method":"mnr"})"), Error);
}

TEST_SUITE_END();
