// Copyright 2026 The detoxcorp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "../support/normalizer_corpus.hpp"
#include "../support/oracles.hpp"
#include "../support/temp_dir.hpp"
#include "detox/error.hpp"
#include "detox/ingest.hpp"

namespace detox {
namespace {

using test::kNormCorpus;

TEST(Normalize, CorpusExactMatches) {
  static_assert(std::size(kNormCorpus) >= 30);
  for (const auto& c : kNormCorpus) {
    EXPECT_EQ(normalize(c.input), c.expected) << "input: " << c.input;
  }
}

TEST(Normalize, IdempotentOnRandomStrings) {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 1000; ++i) {
    const std::string s = oracle::random_messy(rng);
    const std::string once = normalize(s);
    ASSERT_EQ(normalize(once), once) << "input bytes: " << testing::PrintToString(s);
  }
}

TEST(Normalize, NoAdjacentUserTagsSurvive) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const std::string out = normalize(oracle::random_messy(rng));
    EXPECT_EQ(out.find("@USER @USER"), std::string::npos) << out;
  }
}

TEST(Normalize, DecodeEntitiesLeavesMalformedAlone) {
  EXPECT_EQ(decode_html_entities("a & b"), "a & b");
  EXPECT_EQ(decode_html_entities("&#;"), "&#;");
  EXPECT_EQ(decode_html_entities("&#xZZ;"), "&#xZZ;");
  EXPECT_EQ(decode_html_entities("&#x1F600;"), "\xF0\x9F\x98\x80");
}

class IngestFiles : public ::testing::Test {
 protected:
  test::TempDir dir;

  std::filesystem::path write(const std::string& name, const std::string& body) {
    auto p = dir.path() / name;
    std::ofstream(p, std::ios::binary) << body;
    return p;
  }
};

TEST_F(IngestFiles, DelimitedWithQuotesAndEmbeddedNewlines) {
  ReaderSpec spec;
  spec.path = write("a.csv", "id,text,label\n1,\"hello, \"\"world\"\"\",x\n2,\"two\nlines\",y\n");
  spec.source = "s";
  const auto r = load_source(spec);
  ASSERT_EQ(r.posts.size(), 2u);
  EXPECT_EQ(r.posts[0].text, "hello, \"world\"");
  EXPECT_EQ(r.posts[1].text, "two\nlines");
  EXPECT_EQ(r.posts[1].source, "s");
}

TEST_F(IngestFiles, MissingColumnNamesColumnAndLine) {
  ReaderSpec spec;
  spec.path = write("b.csv", "id,body,label\n1,hi,x\n");
  spec.source = "s";
  try {
    load_source(spec);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.column(), "text");
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST_F(IngestFiles, ShortRowReportsItsLine) {
  ReaderSpec spec;
  spec.path = write("c.csv", "id,text,label\n1,ok,x\n2,short\n");
  spec.source = "s";
  try {
    load_source(spec);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.column(), "label");
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST_F(IngestFiles, HeaderOnlyIsEmptySource) {
  ReaderSpec spec;
  spec.path = write("d.csv", "id,text,label\n");
  spec.source = "s";
  EXPECT_THROW(load_source(spec), EmptySourceError);
}

TEST_F(IngestFiles, EmptyTextRowIsSkippedAndCounted) {
  ReaderSpec spec;
  spec.path = write("e.csv", "id,text,label\n1,,x\n");
  spec.source = "s";
  const auto r = load_source(spec);
  EXPECT_EQ(r.posts.size(), 0u);
  EXPECT_EQ(r.skipped_empty, 1u);
}

TEST_F(IngestFiles, MissingFileIsIoErrorNamingPath) {
  ReaderSpec spec;
  spec.path = dir.path() / "nope.csv";
  spec.source = "s";
  try {
    load_source(spec);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("nope.csv"), std::string::npos);
  }
}

TEST_F(IngestFiles, RecordsFormat) {
  ReaderSpec spec;
  spec.format = SourceFormat::Records;
  spec.path = write("r.jsonl", "{\"id\": 5, \"text\": \"hi\", \"label\": \"h\"}\n\n{\"id\": \"6\", \"text\": \"\", \"label\": \"h\"}\n");
  spec.source = "r";
  const auto r = load_source(spec);
  ASSERT_EQ(r.posts.size(), 1u);
  EXPECT_EQ(r.posts[0].id, "5");
  EXPECT_EQ(r.skipped_empty, 1u);

  spec.path = write("bad.jsonl", "{\"id\": 1, \"text\": \"x\", \"label\": \"h\"}\n{oops\n");
  EXPECT_THROW(load_source(spec), IoError);

  spec.path = write("missing.jsonl", "{\"id\": 1, \"label\": \"h\"}\n");
  try {
    load_source(spec);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.column(), "text");
    EXPECT_EQ(e.line(), 1u);
  }

  spec.path = write("blank.jsonl", "\n\n");
  EXPECT_THROW(load_source(spec), EmptySourceError);
}

TEST_F(IngestFiles, DuplicateIdsRejected) {
  ReaderSpec spec;
  spec.path = write("dup.csv", "id,text,label\n1,a,x\n1,b,x\n");
  spec.source = "s";
  EXPECT_THROW(load_source(spec), ArgumentError);
}

TEST(FilterHate, KeepsAllowedLabelsInOrder) {
  std::vector<RawPost> posts{{"1", "a", "t1", "hate"},
                             {"2", "a", "t2", "normal"},
                             {"3", "b", "t3", "0"},
                             {"4", "a", "t4", "hate"}};
  LabelPolicy policy{{"a", {"hate"}}, {"b", {}}};
  const auto kept = filter_hate(posts, policy);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].id, "1");
  EXPECT_EQ(kept[1].id, "4");
  EXPECT_THROW(filter_hate(posts, LabelPolicy{{"a", {"hate"}}}), PolicyError);
}

TEST(NormalizePosts, DegenerateAndDedupe) {
  std::vector<RawPost> posts{{"1", "s", "hello  @bob", "h"},
                             {"2", "s", "http://x.y", "h"},
                             {"3", "s", "hello @alice", "h"},
                             {"4", "t", "other", "h"}};
  const auto batch = normalize_posts(posts);
  ASSERT_EQ(batch.samples.size(), 3u);
  EXPECT_EQ(batch.degenerate_ids, std::vector<std::string>{"s:2"});
  EXPECT_EQ(batch.samples[0].id, "s:1");
  EXPECT_EQ(batch.samples[0].text, "hello @USER");
  EXPECT_EQ(batch.samples[0].original_text, "hello  @bob");

  const auto d = dedupe(batch.samples);
  EXPECT_EQ(d.duplicates, 1u);
  ASSERT_EQ(d.samples.size(), 2u);
  EXPECT_EQ(d.samples[0].id, "s:1");
  EXPECT_EQ(d.samples[1].id, "t:4");
}

TEST(Samples, RoundTrip) {
  test::TempDir dir;
  std::vector<CleanSample> s{{"a:1", "a", "x \"q\"", "orig"}, {"b:2", "b", "y", "y"}};
  write_samples(dir.path() / "s.jsonl", s);
  EXPECT_EQ(read_samples(dir.path() / "s.jsonl"), s);
}

}  // namespace
}  // namespace detox
