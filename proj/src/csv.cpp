#include "csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "report.hpp"

namespace mnr::csvio {

namespace {

std::vector<std::string> split_line(const std::string &line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    return cells;
}

double parse_cell(const std::string &cell, std::size_t line_no, std::size_t col_no) {
    std::size_t begin = cell.find_first_not_of(" \t");
    if (begin == std::string::npos)
        throw parse_error("line " + std::to_string(line_no) + ", column " +
                          std::to_string(col_no) + ": empty cell");
    std::size_t end = cell.find_last_not_of(" \t") + 1;
    const char *first = cell.data() + begin;
    const char *last = cell.data() + end;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw parse_error("line " + std::to_string(line_no) + ", column " +
                          std::to_string(col_no) + ": cannot parse '" + cell +
                          "' as a number");
    if (!std::isfinite(value))
        throw parse_error("line " + std::to_string(line_no) + ", column " +
                          std::to_string(col_no) + ": non-finite value '" + cell + "'");
    return value;
}

}  // namespace

Table parse_table(const std::string &text) {
    Table table;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto cells = split_line(line);
        if (line_no == 1) {
            for (auto &h : cells) {
                std::size_t b = h.find_first_not_of(" \t");
                std::size_t e = h.find_last_not_of(" \t");
                h = b == std::string::npos ? std::string() : h.substr(b, e - b + 1);
                if (h.empty()) throw parse_error("line 1: empty column name in header");
            }
            for (std::size_t a = 0; a < cells.size(); ++a)
                for (std::size_t b = a + 1; b < cells.size(); ++b)
                    if (cells[a] == cells[b])
                        throw parse_error("line 1: duplicate column name '" + cells[a] +
                                          "'");
            table.header = cells;
            continue;
        }
        if (cells.size() != table.header.size())
            throw parse_error("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(table.header.size()) + " cells, found " +
                              std::to_string(cells.size()));
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            row[c] = parse_cell(cells[c], line_no, c + 1);
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw parse_error("empty input: missing header row");
    if (table.rows.empty()) throw parse_error("no data rows after the header");
    return table;
}

Table read_table(const std::string &path) { return parse_table(read_file(path)); }

datagen::Dataset dataset_from_table(const Table &table, datagen::Family family,
                                    const std::string &response,
                                    const std::string &event) {
    if (response.empty()) throw invalid_argument_error("response column name is empty");
    long y_col = -1;
    long event_col = -1;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (table.header[c] == response) {
            if (y_col >= 0) throw parse_error("duplicate '" + response + "' column");
            y_col = static_cast<long>(c);
        } else if (!event.empty() && table.header[c] == event) {
            if (event_col >= 0) throw parse_error("duplicate '" + event + "' column");
            event_col = static_cast<long>(c);
        }
    }
    if (y_col < 0) throw parse_error("missing response column '" + response + "'");
    if (family == datagen::Family::cox && event_col < 0)
        throw parse_error("family 'cox' requires an event column ('" + event + "')");
    if (family != datagen::Family::cox && event_col >= 0)
        throw parse_error("'" + event + "' column is only valid for family 'cox'");

    const std::size_t n = table.rows.size();
    if (n == 0) throw parse_error("no data rows");
    std::size_t p = table.header.size() - 1 - (event_col >= 0 ? 1 : 0);
    if (p == 0) throw parse_error("no predictor columns");

    datagen::Dataset ds;
    ds.family = family;
    ds.x = numkit::Matrix(n, p);
    ds.y.resize(n);
    if (event_col >= 0) ds.event.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t k = 0;
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            double v = table.rows[i][c];
            if (!std::isfinite(v))
                throw parse_error("line " + std::to_string(i + 2) + ", column " +
                                  std::to_string(c + 1) + ": non-finite value");
            if (static_cast<long>(c) == y_col) {
                ds.y[i] = v;
            } else if (static_cast<long>(c) == event_col) {
                if (v != 0.0 && v != 1.0)
                    throw parse_error("line " + std::to_string(i + 2) + ", column " +
                                      std::to_string(c + 1) +
                                      ": event indicator must be 0 or 1");
                ds.event[i] = static_cast<int>(v);
            } else {
                ds.x(i, k++) = v;
            }
        }
    }
    if (family == datagen::Family::binomial) {
        for (std::size_t i = 0; i < n; ++i)
            if (ds.y[i] != 0.0 && ds.y[i] != 1.0)
                throw parse_error("line " + std::to_string(i + 2) +
                                  ": binomial response must be 0 or 1");
    }
    return ds;
}

datagen::Dataset read_dataset(const std::string &path, datagen::Family family,
                              const std::string &response, const std::string &event) {
    try {
        return dataset_from_table(read_table(path), family, response, event);
    } catch (const Error &e) {
        if (e.code() == errc::parse)
            throw parse_error(path + ": " + e.what());
        throw;
    }
}

std::string dataset_to_csv(const datagen::Dataset &ds) {
    std::string out;
    const std::size_t n = ds.n();
    const std::size_t p = ds.p();
    for (std::size_t j = 0; j < p; ++j) {
        out += "x" + std::to_string(j + 1);
        out += ',';
    }
    out += 'y';
    const bool with_event = ds.family == datagen::Family::cox;
    if (with_event) out += ",event";
    out += '\n';
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            out += report::fmt_double(ds.x(i, j));
            out += ',';
        }
        out += report::fmt_double(ds.y[i]);
        if (with_event) {
            out += ',';
            out += ds.event[i] ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

void write_dataset(const std::string &path, const datagen::Dataset &ds) {
    write_file(path, dataset_to_csv(ds));
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw io_error("read failure on '" + path + "'");
    return buf.str();
}

void write_file(const std::string &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw io_error("write failure on '" + path + "'");
}

}  // namespace mnr::csvio
