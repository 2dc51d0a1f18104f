#include "qprobe/dataset.hpp"

#include "qprobe/error.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace qprobe {

namespace {

constexpr std::size_t kMaxCountVariables = 20;

void check_unique(const std::vector<std::string>& columns, const char* what) {
    std::set<std::string> seen;
    for (const auto& c : columns) {
        if (!seen.insert(c).second) {
            throw ParseError(std::string(what) + ": duplicate column '" + c + "'");
        }
    }
}

std::string location(std::size_t row, std::string_view column) {
    return "row " + std::to_string(row + 1) + ", column '" + std::string(column) + "'";
}

} // namespace

BinaryDataset::BinaryDataset(std::vector<std::string> columns, BinaryMatrix values)
    : columns_(std::move(columns)), values_(std::move(values)) {
    check_unique(columns_, "dataset");
    if (static_cast<std::size_t>(values_.cols()) != columns_.size()) {
        if (!(values_.rows() == 0 && values_.cols() == 0)) {
            throw ArgumentError("dataset: value matrix has " + std::to_string(values_.cols()) +
                                " columns, expected " + std::to_string(columns_.size()));
        }
        values_.resize(0, static_cast<Eigen::Index>(columns_.size()));
    }
    if ((values_.array() > 1).any()) {
        throw ArgumentError("dataset: entries must be 0 or 1");
    }
}

std::size_t BinaryDataset::column_index(std::string_view name) const {
    const auto it = std::find(columns_.begin(), columns_.end(), name);
    if (it == columns_.end()) {
        throw ArgumentError("dataset: unknown column '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - columns_.begin());
}

Eigen::VectorXd BinaryDataset::column(std::size_t c) const {
    return values_.col(static_cast<Eigen::Index>(c)).cast<double>();
}

void RawDataset::validate() const {
    check_unique(columns, "csv");
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != columns.size()) {
            throw ParseError("csv: row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                             " cells, expected " + std::to_string(columns.size()));
        }
    }
}

std::size_t RawDataset::column_index(std::string_view name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
        throw ArgumentError("dataset: unknown column '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - columns.begin());
}

RawDataset parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string cell;
    bool in_quotes = false;
    bool any_in_record = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cell.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            in_quotes = true;
            any_in_record = true;
            break;
        case ',':
            record.push_back(std::move(cell));
            cell.clear();
            any_in_record = true;
            break;
        case '\r':
            break;
        case '\n':
            if (any_in_record || !cell.empty()) {
                record.push_back(std::move(cell));
                records.push_back(std::move(record));
            }
            record.clear();
            cell.clear();
            any_in_record = false;
            break;
        default:
            cell.push_back(c);
            any_in_record = true;
        }
    }
    if (in_quotes) {
        throw ParseError("csv: unterminated quoted field");
    }
    if (any_in_record || !cell.empty()) {
        record.push_back(std::move(cell));
        records.push_back(std::move(record));
    }
    if (records.empty()) {
        throw ParseError("csv: missing header row");
    }
    RawDataset out;
    out.columns = std::move(records.front());
    out.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
    out.validate();
    return out;
}

RawDataset read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("csv: cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str());
}

namespace {

void append_field(std::string& out, std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        out += field;
        return;
    }
    out.push_back('"');
    for (char ch : field) {
        if (ch == '"') {
            out.push_back('"');
        }
        out.push_back(ch);
    }
    out.push_back('"');
}

void append_row(std::string& out, std::span<const std::string> fields) {
    for (std::size_t c = 0; c < fields.size(); ++c) {
        if (c > 0) {
            out.push_back(',');
        }
        append_field(out, fields[c]);
    }
    out.push_back('\n');
}

} // namespace

std::string to_csv(const RawDataset& d) {
    d.validate();
    std::string out;
    append_row(out, d.columns);
    for (const auto& row : d.rows) {
        append_row(out, row);
    }
    return out;
}

std::string to_csv(const BinaryDataset& d) {
    std::string out;
    append_row(out, d.columns());
    out.reserve(out.size() + d.rows() * d.cols() * 2);
    for (std::size_t r = 0; r < d.rows(); ++r) {
        for (std::size_t c = 0; c < d.cols(); ++c) {
            if (c > 0) {
                out.push_back(',');
            }
            out.push_back(d(r, c) ? '1' : '0');
        }
        out.push_back('\n');
    }
    return out;
}

void write_csv(const BinaryDataset& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("csv: cannot write '" + path.string() + "'");
    }
    out << to_csv(d);
    if (!out) {
        throw Error("csv: write to '" + path.string() + "' failed");
    }
}

RawDataset to_raw(const BinaryDataset& d) {
    RawDataset out;
    out.columns = d.columns();
    out.rows.resize(d.rows());
    for (std::size_t r = 0; r < d.rows(); ++r) {
        out.rows[r].reserve(d.cols());
        for (std::size_t c = 0; c < d.cols(); ++c) {
            out.rows[r].emplace_back(d(r, c) ? "1" : "0");
        }
    }
    return out;
}

RawDataset binarize(const RawDataset& d, std::string_view column, std::string_view zero_label,
                    std::string_view one_label) {
    const std::size_t c = d.column_index(column);
    if (zero_label == one_label) {
        throw ArgumentError("binarize: zero and one labels are both '" + std::string(zero_label) + "'");
    }
    RawDataset out;
    out.columns = d.columns;
    bool matched = false;
    for (const auto& row : d.rows) {
        const auto& cell = row[c];
        if (cell != zero_label && cell != one_label) {
            continue;
        }
        matched = true;
        auto kept = row;
        kept[c] = cell == zero_label ? "0" : "1";
        out.rows.push_back(std::move(kept));
    }
    if (!matched && !d.rows.empty()) {
        throw ArgumentError("binarize: neither '" + std::string(zero_label) + "' nor '" + std::string(one_label) +
                            "' occurs in column '" + std::string(column) + "'");
    }
    return out;
}

RawDataset drop_columns(const RawDataset& d, std::span<const std::string> names) {
    std::vector<bool> drop(d.columns.size(), false);
    for (const auto& name : names) {
        drop[d.column_index(name)] = true;
    }
    RawDataset out;
    for (std::size_t c = 0; c < d.columns.size(); ++c) {
        if (!drop[c]) {
            out.columns.push_back(d.columns[c]);
        }
    }
    out.rows.reserve(d.rows.size());
    for (const auto& row : d.rows) {
        std::vector<std::string> kept;
        kept.reserve(out.columns.size());
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (!drop[c]) {
                kept.push_back(row[c]);
            }
        }
        out.rows.push_back(std::move(kept));
    }
    return out;
}

BinaryDataset drop_columns(const BinaryDataset& d, std::span<const std::string> names) {
    std::vector<bool> drop(d.cols(), false);
    for (const auto& name : names) {
        drop[d.column_index(name)] = true;
    }
    std::vector<std::string> columns;
    std::vector<Eigen::Index> keep;
    for (std::size_t c = 0; c < d.cols(); ++c) {
        if (!drop[c]) {
            columns.push_back(d.columns()[c]);
            keep.push_back(static_cast<Eigen::Index>(c));
        }
    }
    BinaryMatrix values(d.values().rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        values.col(static_cast<Eigen::Index>(k)) = d.values().col(keep[k]);
    }
    return BinaryDataset(std::move(columns), std::move(values));
}

RawDataset filter_rows(const RawDataset& d, std::string_view column, std::string_view value) {
    const std::size_t c = d.column_index(column);
    RawDataset out;
    out.columns = d.columns;
    for (const auto& row : d.rows) {
        if (row[c] == value) {
            out.rows.push_back(row);
        }
    }
    return out;
}

BinaryDataset to_binary(const RawDataset& d) {
    d.validate();
    const auto m = static_cast<Eigen::Index>(d.rows.size());
    const auto n = static_cast<Eigen::Index>(d.columns.size());
    BinaryMatrix values(m, n);
    for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            const auto cell = std::string_view(d.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
            if (cell == "0") {
                values(r, c) = 0;
            } else if (cell == "1") {
                values(r, c) = 1;
            } else {
                throw ParseError("binary data: " + location(static_cast<std::size_t>(r), d.columns[static_cast<std::size_t>(c)]) +
                                 ": expected 0 or 1, got '" + std::string(cell) + "'");
            }
        }
    }
    return BinaryDataset(d.columns, std::move(values));
}

std::vector<std::int64_t> counts(const BinaryDataset& d, std::span<const std::size_t> variables) {
    if (variables.size() > kMaxCountVariables) {
        throw CapacityError("counts: " + std::to_string(variables.size()) + " variables exceed the limit of " +
                            std::to_string(kMaxCountVariables));
    }
    for (auto v : variables) {
        if (v >= d.cols()) {
            throw ArgumentError("counts: column index out of range");
        }
    }
    std::vector<std::int64_t> table(std::size_t{1} << variables.size(), 0);
    const auto& values = d.values();
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        std::size_t cell = 0;
        for (auto v : variables) {
            cell = (cell << 1) | values(r, static_cast<Eigen::Index>(v));
        }
        ++table[cell];
    }
    return table;
}

} // namespace qprobe
