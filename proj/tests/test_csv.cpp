// Copyright 2026 The hdmerge Authors
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

#include "hdmerge/csv.hpp"
#include "hdmerge/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace hdmerge;

TEST(Csv, ReadsQuotedFieldsAndEmbeddedNewlines)
{
  csv::Reader r("a,b,c\n1,\"x,y\",\"he said \"\"hi\"\"\"\n2,\"multi\nline\",3\n");
  const auto & h = r.read_header();
  ASSERT_EQ(h.size(), 3u);
  std::vector<std::string_view> f;
  ASSERT_TRUE(r.next(f));
  EXPECT_EQ(f[1], "x,y");
  EXPECT_EQ(f[2], "he said \"hi\"");
  ASSERT_TRUE(r.next(f));
  EXPECT_EQ(f[1], "multi\nline");
  EXPECT_FALSE(r.next(f));
}

TEST(Csv, HandlesCrLfAndBom)
{
  csv::Reader r("\xEF\xBB\xBFid,v\r\n7,1.5\r\n");
  r.read_header();
  EXPECT_TRUE(r.column("id").has_value());
  std::vector<std::string_view> f;
  ASSERT_TRUE(r.next(f));
  EXPECT_EQ(f[0], "7");
  EXPECT_EQ(f[1], "1.5");
}

TEST(Csv, MissingColumnIsSchemaError)
{
  csv::Reader r("a,b\n1,2\n");
  r.read_header();
  try {
    r.require("trackId");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError & e) {
    EXPECT_EQ(e.column(), "trackId");
  }
}

TEST(Csv, MalformedNumberReportsLine)
{
  try {
    csv::parse_double("1.2.3", 17);
    FAIL() << "expected ParseError";
  } catch (const ParseError & e) {
    EXPECT_EQ(e.line(), 17u);
  }
  EXPECT_THROW(csv::parse_int("12a"), ParseError);
}

TEST(Csv, DoubleFormattingRoundTrips)
{
  for (const double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123, 0.04}) {
    EXPECT_EQ(csv::parse_double(csv::format_double(v)), v);
  }
  EXPECT_EQ(csv::format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(csv::format_double(std::nan("")), "");
  EXPECT_TRUE(std::isnan(csv::parse_double("")));
  EXPECT_TRUE(std::isinf(csv::parse_double("inf")));
}

TEST(Csv, WriterQuotesOnlyWhenNeeded)
{
  std::ostringstream out;
  csv::Writer w(out);
  w.row({"plain", "with,comma", "with\"quote"});
  EXPECT_EQ(out.str(), "plain,\"with,comma\",\"with\"\"quote\"\n");
}
