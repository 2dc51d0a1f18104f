#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qprobe/graph.hpp"

namespace qprobe {

using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// m x n matrix of {0, 1} observations with unique column names.
class BinaryDataset {
public:
    BinaryDataset() = default;
    BinaryDataset(std::vector<std::string> columns, BinaryMatrix values);

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const noexcept { return columns_.size(); }
    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const BinaryMatrix& values() const noexcept { return values_; }
    std::uint8_t operator()(std::size_t r, std::size_t c) const {
        return values_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
    /// Throws ArgumentError for unknown names.
    std::size_t column_index(std::string_view name) const;

    /// Column as a double vector, convenient for regression designs.
    Eigen::VectorXd column(std::size_t c) const;

    friend bool operator==(const BinaryDataset& a, const BinaryDataset& b) {
        return a.columns_ == b.columns_ && a.values_.rows() == b.values_.rows() &&
               a.values_.cols() == b.values_.cols() && a.values_ == b.values_;
    }

private:
    std::vector<std::string> columns_;
    BinaryMatrix values_;
};

/// String-valued table before binarization.
struct RawDataset {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// Throws ParseError on ragged rows or duplicate column names.
    void validate() const;
    std::size_t column_index(std::string_view name) const;
};

/// Header row, comma separated, optional double quotes, LF or CRLF.
RawDataset parse_csv(std::string_view text);
RawDataset read_csv(const std::filesystem::path& path);

/// LF line endings; fields containing commas, quotes or newlines are quoted.
std::string to_csv(const RawDataset& d);
std::string to_csv(const BinaryDataset& d);
void write_csv(const BinaryDataset& d, const std::filesystem::path& path);

RawDataset to_raw(const BinaryDataset& d);

/// Keeps rows labelled zero_label or one_label in `column` and recodes them to
/// "0" / "1". Throws if the column is missing, the labels coincide, or neither
/// label occurs.
RawDataset binarize(const RawDataset& d, std::string_view column, std::string_view zero_label,
                    std::string_view one_label);

RawDataset drop_columns(const RawDataset& d, std::span<const std::string> names);
BinaryDataset drop_columns(const BinaryDataset& d, std::span<const std::string> names);

/// Keeps rows whose `column` cell equals `value`.
RawDataset filter_rows(const RawDataset& d, std::string_view column, std::string_view value);

/// Every cell must be "0" or "1"; otherwise ParseError naming row and column.
BinaryDataset to_binary(const RawDataset& d);

/// Contingency counts over `variables`; the first variable is the most
/// significant bit of the cell index. At most 20 variables.
std::vector<std::int64_t> counts(const BinaryDataset& d, std::span<const std::size_t> variables);

} // namespace qprobe
