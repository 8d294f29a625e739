#include "mesh/dataset.hpp"

#include <fstream>
#include <limits>

#include <doctest.h>

#include "mesh/errors.hpp"
#include "support/helpers.hpp"

using namespace mesh;

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("csv ingestion with sidecar split") {
    test::TempDir dir("dataset");
    write_file(dir.file("d.csv"),
               "f0,f1,label\n"
               "0.5,1.0,1\n"
               "0.25,-2,0\n"
               "1.5,0,1\n"
               "2.5,3,0\n");
    write_file(dir.file("d.split.json"),
               R"({"dataset_id": "demo", "train": [0, 1, 2], "validation": [3]})");
    const auto ds = Dataset::load_csv(dir.file("d.csv"), dir.file("d.split.json"));
    CHECK(ds.id == "demo");
    CHECK(ds.n_rows == 4);
    CHECK(ds.n_cols == 2);
    CHECK(ds.at(1, 1) == -2.0);
    CHECK(ds.labels == std::vector<std::uint8_t>{1, 0, 1, 0});
    CHECK(ds.train_idx == std::vector<std::int32_t>{0, 1, 2});
    CHECK(ds.val_idx == std::vector<std::int32_t>{3});
}

TEST_CASE("ingestion rejects bad inputs") {
    test::TempDir dir("dataset_bad");
    const auto split_ok = dir.file("s.json");
    write_file(split_ok, R"({"dataset_id": "x", "train": [0], "validation": [1]})");

    SUBCASE("missing value") {
        write_file(dir.file("d.csv"), "a,b,label\n1,,1\n2,3,0\n");
        CHECK_THROWS_AS(Dataset::load_csv(dir.file("d.csv"), split_ok), DataError);
    }
    SUBCASE("non-binary label") {
        write_file(dir.file("d.csv"), "a,b,label\n1,2,2\n2,3,0\n");
        CHECK_THROWS_AS(Dataset::load_csv(dir.file("d.csv"), split_ok), DataError);
    }
    SUBCASE("unparseable cell") {
        write_file(dir.file("d.csv"), "a,b,label\n1,oops,1\n2,3,0\n");
        CHECK_THROWS_AS(Dataset::load_csv(dir.file("d.csv"), split_ok), DataError);
    }
    SUBCASE("ragged row") {
        write_file(dir.file("d.csv"), "a,b,label\n1,2,3,1\n2,3,0\n");
        CHECK_THROWS_AS(Dataset::load_csv(dir.file("d.csv"), split_ok), DataError);
    }
    SUBCASE("overlapping split") {
        write_file(dir.file("d.csv"), "a,b,label\n1,2,1\n2,3,0\n");
        write_file(dir.file("overlap.json"),
                   R"({"dataset_id": "x", "train": [0, 1], "validation": [1]})");
        CHECK_THROWS_AS(Dataset::load_csv(dir.file("d.csv"), dir.file("overlap.json")),
                        DataError);
    }
    SUBCASE("empty validation split") {
        write_file(dir.file("d.csv"), "a,b,label\n1,2,1\n2,3,0\n");
        write_file(dir.file("empty.json"),
                   R"({"dataset_id": "x", "train": [0, 1], "validation": []})");
        CHECK_THROWS_AS(Dataset::load_csv(dir.file("d.csv"), dir.file("empty.json")),
                        DataError);
    }
    SUBCASE("out-of-range index") {
        write_file(dir.file("d.csv"), "a,b,label\n1,2,1\n2,3,0\n");
        write_file(dir.file("range.json"),
                   R"({"dataset_id": "x", "train": [0], "validation": [5]})");
        CHECK_THROWS_AS(Dataset::load_csv(dir.file("d.csv"), dir.file("range.json")),
                        DataError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(Dataset::load_csv(dir.file("absent.csv"), split_ok), DataError);
    }
}

TEST_CASE("validate flags non-finite features") {
    auto ds = test::make_dataset("nan", {{1.0, 2.0}, {3.0, 4.0}}, {0, 1}, {0}, {1});
    ds.features[2] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(ds.validate(), DataError);
}
