#include <doctest.h>

#include <sstream>

#include "logflat/error.hpp"
#include "logflat/ingest.hpp"

using namespace logflat;

TEST_CASE("parse_record reads the sample event") {
  const auto v = parse_record(R"({"honeypot":"19","payloadCommand":"wget"})", 1);
  REQUIRE(v.is_object());
  REQUIRE(v.as_object().size() == 2);
  CHECK(v.as_object()[0].name == "honeypot");
  CHECK(v.as_object()[0].value.as_text() == "19");
  CHECK(v.as_object()[1].value.as_text() == "wget");
}

TEST_CASE("empty object is a valid record") {
  const auto v = parse_record("{}", 1);
  CHECK(v.is_object());
  CHECK(v.as_object().empty());
}

TEST_CASE("top level must be an object") {
  CHECK_THROWS_AS(parse_record("[1,2]", 3), StructureError);
  CHECK_THROWS_AS(parse_record("\"x\"", 3), StructureError);
}

TEST_CASE("malformed json carries the line number") {
  try {
    parse_record("{\"a\":", 17);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 17);
  }
}

TEST_CASE("duplicate keys are rejected") { CHECK_THROWS_AS(parse_record(R"({"a":1,"a":2})", 1), ParseError); }

TEST_CASE("number widths") {
  const auto v = parse_record(R"({"i":9007199254740991,"big":9007199254740993,"f":1.5,"whole":2.0,"neg":-4})", 1);
  CHECK(v.find("i")->kind() == ValueKind::Int);
  CHECK(v.find("big")->kind() == ValueKind::Float);
  CHECK(v.find("f")->kind() == ValueKind::Float);
  CHECK(v.find("whole")->kind() == ValueKind::Float);
  CHECK(v.find("neg")->as_int() == -4);
}

TEST_CASE("depth limit counts containers") {
  CHECK_NOTHROW(parse_record(R"({"a":{"b":{"c":1}}})", 1, 3));
  CHECK_THROWS_AS(parse_record(R"({"a":{"b":{"c":{}}}})", 1, 3), ParseError);
  CHECK_THROWS_AS(parse_record(R"({"a":[[[[[[[[1]]]]]]]]})", 1), ParseError);
}

TEST_CASE("CRLF terminators are accepted") {
  std::istringstream in("{\"a\":1}\r\n{\"a\":2}\r\n");
  const auto c = read_corpus(in);
  CHECK(c.records.size() == 2);
  CHECK(c.stats.records_failed == 0);
}

TEST_CASE("skip policy counts failures and keeps order") {
  std::istringstream in("{\"a\":1}\n\n{\"a\":\n{\"a\":3}\n");
  const auto c = read_corpus(in);
  REQUIRE(c.records.size() == 2);
  CHECK(c.records[0].find("a")->as_int() == 1);
  CHECK(c.records[1].find("a")->as_int() == 3);
  CHECK(c.stats.records_ok == 2);
  CHECK(c.stats.records_failed == 1);
  REQUIRE(c.stats.failed_lines.size() == 1);
  CHECK(c.stats.failed_lines[0].line_number == 3);
  CHECK(c.line_numbers == std::vector<std::size_t>{1, 4});
}

TEST_CASE("abort policy stops at the first malformed line") {
  std::istringstream in("{\"a\":1}\n{\"a\":2}\nnot json\n{\"a\":4}\n");
  IngestOptions opts;
  opts.policy = ErrorPolicy::Abort;
  try {
    read_corpus(in, opts);
    FAIL("expected abort");
  } catch (const InputError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("three valid lines") {
  std::istringstream in("{\"a\":1}\n{\"b\":2}\n{\"c\":3}\n");
  const auto c = read_corpus(in);
  CHECK(c.records.size() == 3);
  CHECK(c.stats.records_failed == 0);
}

TEST_CASE("worker count does not change output") {
  std::string text;
  for (int i = 0; i < 500; ++i) {
    text += (i % 37 == 5) ? "{bad\n" : "{\"n\":" + std::to_string(i) + ",\"s\":[1,{\"x\":\"y\"}]}\n";
  }
  std::istringstream a(text), b(text);
  IngestOptions one, four;
  four.workers = 4;
  const auto ca = read_corpus(a, one);
  const auto cb = read_corpus(b, four);
  CHECK(ca.records == cb.records);
  CHECK(ca.line_numbers == cb.line_numbers);
  CHECK(ca.stats.records_failed == cb.stats.records_failed);
  CHECK(ca.stats.records_ok + ca.stats.records_failed == 500);
}

TEST_CASE("serialize then parse is identity") {
  const char* docs[] = {
      R"({"z":1,"a":[1,2.5,"x",null,true,{"k":[]}],"m":{"$oid":"5776"},"e":""})",
      R"({"unicode":"héllo 😀","esc":"a\"b\\c\n"})",
      R"({"neg":-0.0,"tiny":1e-300,"huge":1.7976931348623157e308})",
  };
  for (const char* d : docs) {
    const auto v = parse_record(d, 1);
    const auto again = parse_record(to_json_text(v), 1);
    CHECK(v == again);
  }
}
