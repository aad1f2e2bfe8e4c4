#include "doctest.h"

#include <sstream>

#include "formine/dataset.hpp"
#include "formine/errors.hpp"
#include "formine/normalizer.hpp"

using namespace formine;

namespace {

FormulaRecord record_with(std::string normalized, std::string origin = "b0") {
  FormulaRecord r;
  r.normalized = std::move(normalized);
  r.id = content_hash(r.normalized);
  r.token_count = 3;
  r.origin_id = std::move(origin);
  return r;
}

}  // namespace

TEST_CASE("bucket thresholds are half-open") {
  CHECK(bucket_difficulty(10) == Bucket::easy);
  CHECK(bucket_difficulty(63) == Bucket::easy);
  CHECK(bucket_difficulty(64) == Bucket::middle);
  CHECK(bucket_difficulty(255) == Bucket::middle);
  CHECK(bucket_difficulty(256) == Bucket::hard);
  CHECK(bucket_difficulty(1000) == Bucket::hard);
}

TEST_CASE("bucket thresholds are configurable and validated") {
  BucketThresholds tight{4, 8};
  CHECK(bucket_difficulty(3, tight) == Bucket::easy);
  CHECK(bucket_difficulty(4, tight) == Bucket::middle);
  CHECK(bucket_difficulty(8, tight) == Bucket::hard);
  CHECK_THROWS_AS(bucket_difficulty(0), Error);
  CHECK_THROWS_AS(bucket_difficulty(5, BucketThresholds{8, 8}), Error);
}

TEST_CASE("bucketing is monotone in token count") {
  Bucket previous = Bucket::easy;
  for (int count = 1; count < 600; ++count) {
    Bucket bucket = bucket_difficulty(count);
    CHECK(static_cast<int>(bucket) >= static_cast<int>(previous));
    previous = bucket;
  }
}

TEST_CASE("content hash is a deterministic 64-hex digest of the text") {
  std::string a = content_hash("x+y");
  CHECK(a.size() == 64);
  CHECK(a == content_hash("x+y"));
  CHECK(a != content_hash("x+z"));
  CHECK(a.find_first_not_of("0123456789abcdef") == std::string::npos);
}

TEST_CASE("dedup keeps the first record per id") {
  auto a1 = record_with("a", "first");
  auto a2 = record_with("a", "second");
  auto b = record_with("b");
  auto out = dedup({a1, a2, b});
  REQUIRE(out.size() == 2);
  CHECK(out[0].normalized == "a");
  CHECK(out[0].origin_id == "first");
  CHECK(out[1].normalized == "b");
  CHECK(dedup({}).empty());
  // idempotent
  auto again = dedup(out);
  CHECK(again.size() == out.size());
}

TEST_CASE("whitespace variants collapse to one survivor after normalization") {
  auto a = record_with(normalize("x  +  y").text);
  auto b = record_with(normalize("x + y").text);
  CHECK(a.id == b.id);
  CHECK(dedup({a, b}).size() == 1);
}

TEST_CASE("corpus report counts kinds buckets and statuses") {
  auto a = record_with("a");
  a.bucket = Bucket::easy;
  a.env_kind = EnvKind::equation;
  auto b = record_with("b");
  b.bucket = Bucket::easy;
  b.env_kind = EnvKind::align;
  auto c = record_with("c");
  c.bucket = Bucket::hard;
  c.env_kind = EnvKind::equation;
  c.token_count = 300;
  nlohmann::json report = corpus_report({a, b, c});
  CHECK(report["records"] == 3);
  CHECK(report["by_bucket"]["easy"] == 2);
  CHECK(report["by_bucket"]["hard"] == 1);
  CHECK(report["by_env_kind"]["equation"] == 2);
  CHECK(report["by_env_kind"]["align"] == 1);
  CHECK(report["by_render_status"]["not_rendered"] == 3);
  size_t kind_total = 0;
  for (const auto& [key, value] : report["by_env_kind"].items())
    kind_total += value.get<size_t>();
  CHECK(kind_total == 3);

  nlohmann::json empty = corpus_report({});
  CHECK(empty["records"] == 0);
  CHECK(empty["by_bucket"].empty());
}

TEST_CASE("dataset schema carries exactly the published fields") {
  auto r = record_with("x+y");
  r.raw = "raw";
  r.expanded = "expanded";
  nlohmann::json j = record_to_dataset_json(r);
  CHECK(j.size() == 7);
  for (const char* key : {"id", "normalized", "env_kind", "token_count", "bucket", "image",
                          "origin_id"})
    CHECK(j.contains(key));
  CHECK(j["image"].is_null());
  r.image_path = "images/abc.png";
  CHECK(record_to_dataset_json(r)["image"] == "images/abc.png");
}

TEST_CASE("stage jsonl round-trips records") {
  auto r = record_with("x+y");
  r.raw = "x +y";
  r.expanded = "x+ y";
  r.env_kind = EnvKind::gather_star;
  r.bucket = Bucket::middle;
  r.render_status = RenderStatus::compile_error;
  r.flags = {"arity_skipped"};
  std::stringstream io;
  write_jsonl(io, {r}, /*stage_schema=*/true);
  auto back = read_jsonl(io);
  REQUIRE(back.size() == 1);
  CHECK(back[0].id == r.id);
  CHECK(back[0].raw == r.raw);
  CHECK(back[0].expanded == r.expanded);
  CHECK(back[0].normalized == r.normalized);
  CHECK(back[0].env_kind == r.env_kind);
  CHECK(back[0].bucket == r.bucket);
  CHECK(back[0].render_status == r.render_status);
  CHECK(back[0].flags == r.flags);
}
