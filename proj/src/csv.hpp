#pragma once

// Numeric CSV input/output for datasets.  Files carry a header row; the
// response column is named "y" and, for survival data, the event indicator
// column is named "event".  All remaining columns are predictors in file
// order.  Parse failures report 1-based line and column positions.

#include <string>
#include <vector>

#include "datagen.hpp"

namespace mnr::csvio {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;  // each row has header.size() cells
};

Table parse_table(const std::string &text);
Table read_table(const std::string &path);

// Assembles a dataset from a parsed table.  `family` decides whether an
// event column is required (cox) or forbidden (gaussian, binomial).
// Response/event columns are looked up by name; every other column is a
// predictor in file order.
datagen::Dataset dataset_from_table(const Table &table, datagen::Family family,
                                    const std::string &response = "y",
                                    const std::string &event = "event");

datagen::Dataset read_dataset(const std::string &path, datagen::Family family,
                              const std::string &response = "y",
                              const std::string &event = "event");

std::string dataset_to_csv(const datagen::Dataset &ds);
void write_dataset(const std::string &path, const datagen::Dataset &ds);

std::string read_file(const std::string &path);
void write_file(const std::string &path, const std::string &content);

}  // namespace mnr::csvio
