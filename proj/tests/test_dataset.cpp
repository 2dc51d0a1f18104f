#include "doctest.h"

#include "qprobe/dataset.hpp"
#include "qprobe/error.hpp"
#include "qprobe/rng.hpp"

#include <filesystem>
#include <numeric>

using namespace qprobe;

namespace {

BinaryDataset make(std::vector<std::string> cols, std::initializer_list<std::initializer_list<int>> rows) {
    BinaryMatrix v(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (int x : row) {
            v(r, c++) = static_cast<std::uint8_t>(x);
        }
        ++r;
    }
    return BinaryDataset(std::move(cols), v);
}

BinaryDataset noise_data(Rng& rng, std::size_t m, std::size_t n) {
    BinaryMatrix v(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
        for (Eigen::Index c = 0; c < v.cols(); ++c) {
            v(r, c) = rng.bernoulli(0.4) ? 1 : 0;
        }
    }
    std::vector<std::string> cols;
    for (std::size_t i = 0; i < n; ++i) {
        cols.push_back("c" + std::to_string(i));
    }
    return BinaryDataset(cols, v);
}

} // namespace

TEST_CASE("dataset construction checks") {
    BinaryMatrix bad(1, 2);
    bad << 0, 2;
    CHECK_THROWS_AS(BinaryDataset({"a", "b"}, bad), ArgumentError);
    CHECK_THROWS_AS(BinaryDataset({"a"}, BinaryMatrix::Zero(2, 2)), ArgumentError);
    CHECK_THROWS_AS(BinaryDataset({"a", "a"}, BinaryMatrix::Zero(2, 2)), ParseError);
    const auto d = make({"a", "b"}, {{0, 1}});
    CHECK(d.column_index("b") == 1);
    CHECK_THROWS_AS(d.column_index("z"), ArgumentError);
}

TEST_CASE("csv parsing") {
    const auto header_only = parse_csv("a,b\n");
    CHECK(header_only.columns == std::vector<std::string>{"a", "b"});
    CHECK(header_only.rows.empty());
    CHECK(to_binary(header_only).rows() == 0);

    const auto quoted = parse_csv("\"x,y\",b\r\n\"he said \"\"hi\"\"\",1\r\n");
    CHECK(quoted.columns[0] == "x,y");
    CHECK(quoted.rows[0][0] == "he said \"hi\"");
    CHECK(quoted.rows[0][1] == "1");

    const auto again = parse_csv(to_csv(quoted));
    CHECK(again.columns == quoted.columns);
    CHECK(again.rows == quoted.rows);

    CHECK_THROWS_AS(parse_csv(""), ParseError);
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), ParseError);
    CHECK_THROWS_AS(parse_csv("a,a\n1,1\n"), ParseError);
    CHECK_THROWS_AS(parse_csv("a\n\"open\n"), ParseError);
}

TEST_CASE("non-binary cells are reported by row and column") {
    const auto raw = parse_csv("a,b\n0,1\n1,2\n");
    try {
        (void)to_binary(raw);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        const std::string what = e.what();
        CHECK(what.find("row 2") != std::string::npos);
        CHECK(what.find("'b'") != std::string::npos);
    }
}

TEST_CASE("csv round trip") {
    Rng rng(2);
    const auto d = noise_data(rng, 40, 5);
    CHECK(to_binary(parse_csv(to_csv(d))) == d);
    CHECK(to_binary(to_raw(d)) == d);

    const auto path = std::filesystem::temp_directory_path() / "qprobe_test_dataset.csv";
    write_csv(d, path);
    CHECK(to_binary(read_csv(path)) == d);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_csv(path), ParseError);
}

TEST_CASE("binarize") {
    const auto raw = parse_csv("season,x\nWinter,1\nSummer,0\nSpring,1\nWinter,0\n");
    const auto b = binarize(raw, "season", "Spring", "Winter");
    REQUIRE(b.rows.size() == 3);
    CHECK(b.rows[0][0] == "1");
    CHECK(b.rows[1][0] == "0");
    CHECK(b.rows[2][0] == "1");
    CHECK(b.rows[2][1] == "0");

    CHECK_THROWS_AS(binarize(raw, "nope", "a", "b"), ArgumentError);
    CHECK_THROWS_AS(binarize(raw, "season", "Winter", "Winter"), ArgumentError);
    CHECK_THROWS_AS(binarize(raw, "season", "Fall", "Monsoon"), ArgumentError);
}

TEST_CASE("drop columns and filter rows") {
    const auto raw = parse_csv("a,b,c\n1,0,1\n0,0,1\n");
    const std::vector<std::string> drop{"b"};
    const auto kept = drop_columns(raw, drop);
    CHECK(kept.columns == std::vector<std::string>{"a", "c"});
    CHECK(kept.rows[1] == std::vector<std::string>{"0", "1"});
    CHECK(drop_columns(to_binary(raw), drop) == to_binary(kept));

    const auto f = filter_rows(raw, "a", "1");
    REQUIRE(f.rows.size() == 1);
    CHECK(f.rows[0][2] == "1");
    CHECK_THROWS_AS(filter_rows(raw, "z", "1"), ArgumentError);
}

TEST_CASE("counts examples") {
    const auto d = make({"a", "b"}, {{0, 0}, {0, 1}, {1, 1}, {0, 1}});
    const std::vector<std::size_t> a{0};
    const std::vector<std::size_t> ab{0, 1};
    const std::vector<std::size_t> none;
    CHECK(counts(d, a) == std::vector<std::int64_t>{3, 1});
    // First variable is the most significant bit.
    CHECK(counts(d, ab) == std::vector<std::int64_t>{1, 2, 0, 1});
    CHECK(counts(d, none) == std::vector<std::int64_t>{4});

    const auto zeros = make({"a"}, {{0}, {0}, {0}, {0}});
    CHECK(counts(zeros, a) == std::vector<std::int64_t>{4, 0});

    const std::vector<std::size_t> out_of_range{5};
    CHECK_THROWS_AS(counts(d, out_of_range), ArgumentError);
    Rng rng(3);
    const auto wide = noise_data(rng, 3, 21);
    std::vector<std::size_t> all(21);
    std::iota(all.begin(), all.end(), 0);
    CHECK_THROWS_AS(counts(wide, all), CapacityError);
}

TEST_CASE("counts match a direct tally and marginalize consistently") {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const auto d = noise_data(rng, 1 + rng.index(60), 5);
        const auto k = 1 + rng.index(4);
        const auto vars = rng.choose(5, k);
        const auto table = counts(d, vars);

        std::vector<std::int64_t> tally(std::size_t{1} << k, 0);
        for (std::size_t r = 0; r < d.rows(); ++r) {
            std::size_t cell = 0;
            for (auto v : vars) {
                cell = (cell << 1) | d(r, v);
            }
            ++tally[cell];
        }
        CHECK(table == tally);
        CHECK(std::accumulate(table.begin(), table.end(), std::int64_t{0}) == static_cast<std::int64_t>(d.rows()));

        // Summing out the last variable gives the table over the rest.
        const std::vector<std::size_t> head(vars.begin(), vars.end() - 1);
        const auto reduced = counts(d, head);
        for (std::size_t cell = 0; cell < reduced.size(); ++cell) {
            CHECK(reduced[cell] == table[2 * cell] + table[2 * cell + 1]);
        }
    }
}

TEST_CASE("transforms leave their input untouched") {
    const auto raw = parse_csv("s,x\nA,1\nB,0\n");
    const auto copy = raw;
    const std::vector<std::string> drop{"x"};
    (void)binarize(raw, "s", "A", "B");
    (void)drop_columns(raw, drop);
    (void)filter_rows(raw, "s", "A");
    CHECK(raw.columns == copy.columns);
    CHECK(raw.rows == copy.rows);
}
