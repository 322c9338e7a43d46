#include "mixsearch/common.hpp"
#include "mixsearch/io.hpp"
#include "mixsearch/random.hpp"

#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace mixsearch;

TEST_CASE("4-decimal ticks") {
  CHECK(to_ticks(2.76) == 27600);
  CHECK(to_ticks(4.6667) == 46667);
  CHECK(to_ticks(3.70333333) == 37033);
  CHECK(to_ticks(round4(1.0 + 4.0 * 2.0 / 3.0)) == 36667);
  CHECK(format4(2.76) == "2.7600");
  CHECK(format4(4.0) == "4.0000");
}

TEST_CASE("enum names round-trip") {
  for (Dataset d : kAllDatasets) CHECK(parse_dataset(to_string(d)) == d);
  for (Dimension d : kAllDimensions) CHECK(parse_dimension(to_string(d)) == d);
  CHECK(dimension_of(Dataset::OrBench) == Dimension::Benign);
  CHECK(dataset_of(Dimension::IF) == Dataset::IF);
  CHECK_THROWS_AS(parse_dataset("PKU"), DataError);
}

TEST_CASE("slice ids are sorted axis=value lists") {
  CHECK(slice_id({{"proximity", "NEAR"}, {"category", "hacking"}}) == "category=hacking,proximity=NEAR");
  CHECK(slice_id({}) == "");
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, "sample", 0) == derive_seed(1, "sample", 0));
  std::set<std::uint64_t> seen;
  for (int t = -1; t < 50; ++t) {
    seen.insert(derive_seed(42, "sample", t));
    seen.insert(derive_seed(42, "backend", t));
  }
  CHECK(seen.size() == 102);
  CHECK(derive_seed(1, "sample", 3) != derive_seed(2, "sample", 3));
}

TEST_CASE("rng helpers") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(rng.below(5) < 5);
  }
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
}

TEST_CASE("sha256 matches the published test vector") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("io helpers") {
  testsupport::TempDir dir;
  write_file_atomic(dir / "a/b.json", dump_pretty({{"z", 1}, {"a", 2}}));
  CHECK(read_text_file(dir / "a/b.json") == "{\n  \"a\": 2,\n  \"z\": 1\n}\n");
  CHECK(read_json_file(dir / "a/b.json")["z"] == 1);

  write_file_atomic(dir / "x.jsonl", "{\"k\": 1}\n\n{\"k\": 2}\n");
  std::vector<int> ks;
  for_each_jsonl(dir / "x.jsonl", [&](const Json& j, std::size_t) { ks.push_back(j["k"]); });
  CHECK(ks == std::vector<int>{1, 2});

  CHECK_THROWS_AS(read_text_file(dir / "missing.json"), DataError);
  try {
    read_json_file(dir / "missing.json");
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("missing.json") != std::string::npos);
  }
  write_file_atomic(dir / "bad.jsonl", "{\"k\": 1}\n{oops\n");
  try {
    for_each_jsonl(dir / "bad.jsonl", [](const Json&, std::size_t) {});
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}
