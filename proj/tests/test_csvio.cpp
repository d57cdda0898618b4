#include <doctest.h>

#include <string>

#include "csv.hpp"
#include "datagen.hpp"

using namespace mnr;
using datagen::CovKind;
using datagen::CovSpec;
using datagen::Dataset;
using datagen::Family;
using datagen::ModelSpec;

namespace {

Dataset gen(std::size_t n, std::size_t p, Family family, std::uint64_t seed) {
    CovSpec cov{CovKind::toeplitz, 0.5, p};
    ModelSpec model;
    model.family = family;
    model.beta = {{0, 1.5}, {2, -1.0}};
    return datagen::gen_response(datagen::sample_mvn(n, cov, seed), model, seed);
}

template <typename F>
std::string error_text(const F &f) {
    try {
        f();
    } catch (const Error &e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_SUITE_BEGIN("csvio");

TEST_CASE("dataset csv round trip is exact") {
    for (Family fam : {Family::gaussian, Family::binomial, Family::cox}) {
        const Dataset ds = gen(25, 4, fam, 11);
        const std::string text = csvio::dataset_to_csv(ds);
        const csvio::Table table = csvio::parse_table(text);
        REQUIRE(table.header.size() == (fam == Family::cox ? 6 : 5));
        CHECK(table.header[0] == "x1");
        CHECK(table.header[3] == "x4");
        CHECK(table.header[4] == "y");
        if (fam == Family::cox)
            CHECK(table.header[5] == "event");

        const Dataset back = csvio::dataset_from_table(table, fam);
        REQUIRE(back.n() == ds.n());
        REQUIRE(back.p() == ds.p());
        CHECK(back.family == fam);
        for (std::size_t i = 0; i < ds.n(); ++i) {
            for (std::size_t j = 0; j < ds.p(); ++j)
                CHECK(back.x(i, j) == ds.x(i, j)); // fmt_double round-trips bits
            CHECK(back.y[i] == ds.y[i]);
            if (fam == Family::cox)
                CHECK(back.event[i] == ds.event[i]);
        }
    }
}

TEST_CASE("column order in the file does not matter") {
    const std::string text = "y,x2,x1\n1.5,0.5,2.0\n-0.25,1.0,3.0\n";
    const Dataset ds = csvio::dataset_from_table(csvio::parse_table(text), Family::gaussian);
    REQUIRE(ds.n() == 2);
    REQUIRE(ds.p() == 2);
    // predictors keep file order: x2 first, then x1
    CHECK(ds.y[0] == 1.5);
    CHECK(ds.x(0, 0) == 0.5);
    CHECK(ds.x(0, 1) == 2.0);
    CHECK(ds.x(1, 0) == 1.0);
    CHECK(ds.x(1, 1) == 3.0);
}

TEST_CASE("custom response and event column names") {
    const std::string text = "g1,outcome,time_to_event\n0.5,1,3.5\n1.0,0,2.0\n";
    csvio::Table table = csvio::parse_table(text);
    // outcome as gaussian response; remaining two are predictors
    const Dataset a = csvio::dataset_from_table(table, Family::gaussian, "outcome");
    CHECK(a.p() == 2);
    CHECK(a.y[0] == 1.0);

    const std::string cox_text = "g1,followup,status\n0.5,3.5,1\n1.0,2.0,0\n";
    const Dataset b = csvio::dataset_from_table(csvio::parse_table(cox_text), Family::cox,
                                                "followup", "status");
    CHECK(b.p() == 1);
    CHECK(b.y[0] == 3.5);
    CHECK(b.event[0] == 1);
    CHECK(b.event[1] == 0);
}

TEST_CASE("parse errors carry 1-based line and column positions") {
    // non-numeric cell at line 3, column 2
    const std::string bad_cell = "x1,y\n1.0,2.0\n0.5,oops\n";
    const std::string msg = error_text([&] { csvio::parse_table(bad_cell); });
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);

    // wrong cell count on line 2
    const std::string short_row = "x1,x2,y\n1.0,2.0\n";
    const std::string msg2 = error_text([&] { csvio::parse_table(short_row); });
    CHECK(msg2.find("line 2") != std::string::npos);

    // empty cell
    const std::string empty_cell = "x1,y\n1.0,\n";
    const std::string msg3 = error_text([&] { csvio::parse_table(empty_cell); });
    CHECK(msg3.find("line 2") != std::string::npos);

    // nan is not a usable value
    const std::string nan_cell = "x1,y\nnan,1.0\n";
    CHECK_THROWS_AS(csvio::parse_table(nan_cell), Error);

    // header only / empty input
    CHECK_THROWS_AS(csvio::parse_table(""), Error);
    CHECK_THROWS_AS(csvio::parse_table("x1,y\n"), Error);

    try {
        csvio::parse_table(bad_cell);
        CHECK(false);
    } catch (const Error &e) {
        CHECK(e.code() == errc::parse);
    }
}

TEST_CASE("dataset assembly validates the schema") {
    // missing response column
    CHECK_THROWS_AS(csvio::dataset_from_table(csvio::parse_table("x1,x2\n1,2\n"),
                                              Family::gaussian),
                    Error);
    // duplicate column name
    CHECK_THROWS_AS(csvio::dataset_from_table(csvio::parse_table("x1,x1,y\n1,2,3\n"),
                                              Family::gaussian),
                    Error);
    // cox requires the event column
    CHECK_THROWS_AS(csvio::dataset_from_table(csvio::parse_table("x1,y\n1,2\n"),
                                              Family::cox),
                    Error);
    // non-cox forbids the event column
    CHECK_THROWS_AS(csvio::dataset_from_table(
                        csvio::parse_table("x1,y,event\n1,2,1\n"), Family::gaussian),
                    Error);
    // event entries must be 0/1
    CHECK_THROWS_AS(csvio::dataset_from_table(
                        csvio::parse_table("x1,y,event\n1,2,0.5\n"), Family::cox),
                    Error);
    // binomial response must be 0/1
    CHECK_THROWS_AS(csvio::dataset_from_table(csvio::parse_table("x1,y\n1,0.7\n"),
                                              Family::binomial),
                    Error);
    // no predictors at all
    CHECK_THROWS_AS(csvio::dataset_from_table(csvio::parse_table("y\n1\n"),
                                              Family::gaussian),
                    Error);
}

TEST_CASE("file io reports the path") {
    const std::string path = "/tmp/mnr_csvio_test.csv";
    csvio::write_file(path, "x1,y\n1.0,2.0\n");
    const Dataset ds = csvio::read_dataset(path, Family::gaussian);
    CHECK(ds.n() == 1);

    const std::string msg =
        error_text([] { csvio::read_dataset("/tmp/does_not_exist_mnr.csv", Family::gaussian); });
    CHECK(msg.find("does_not_exist_mnr.csv") != std::string::npos);

    csvio::write_file(path, "x1,y\n1.0,bad\n");
    const std::string msg2 = error_text([&] { csvio::read_dataset(path, Family::gaussian); });
    CHECK(msg2.find(path) != std::string::npos);
    CHECK(msg2.find("line 2") != std::string::npos);
}

TEST_SUITE_END();
