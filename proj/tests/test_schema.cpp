#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "logflat/error.hpp"
#include "logflat/ingest.hpp"
#include "logflat/schema.hpp"
#include "support/random_records.hpp"

using namespace logflat;

namespace {

ValueNode rec(const char* json) { return parse_record(json, 1); }

std::vector<ValueNode> recs(std::initializer_list<const char*> lines) {
  std::vector<ValueNode> out;
  for (const char* l : lines) out.push_back(rec(l));
  return out;
}

FieldClass classify(std::string key, const std::vector<ValueNode>& samples, const ClassifyOptions& o = {}) {
  return classify_field(FieldPath::key(std::move(key)), std::span<const ValueNode>(samples), o);
}

}  // namespace

TEST_CASE("path rendering and column stems") {
  const FieldPath p({PathSegment::make_key("_id"), PathSegment::make_key("$oid")});
  CHECK(p.render() == "_id.$oid");
  CHECK(p.column_stem() == "_id_oid");
  const FieldPath q({PathSegment::make_key("raw_sig"), PathSegment::make_part(4), PathSegment::make_part(1)});
  CHECK(q.render() == "raw_sig#4#1");
  CHECK(q.column_stem() == "raw_sig_4_1");
  const FieldPath r({PathSegment::make_key("a.b"), PathSegment::make_index(2)});
  CHECK(r.render() == "a\\.b[2]");
  CHECK(r.column_stem() == "a.b_2");
}

TEST_CASE("kind lattice") {
  CHECK(join_kinds(ValueKind::Null, ValueKind::Int) == ValueKind::Int);
  CHECK(join_kinds(ValueKind::Int, ValueKind::Float) == ValueKind::Float);
  CHECK(join_kinds(ValueKind::Float, ValueKind::Text) == ValueKind::Text);
  CHECK(join_kinds(ValueKind::Bool, ValueKind::Null) == ValueKind::Bool);
  CHECK(join_kinds(ValueKind::Bool, ValueKind::Int) == ValueKind::Text);
}

TEST_CASE("fingerprint of the sample record") {
  const auto fp = fingerprint(rec(R"({"id":"a","honeypot":"19"})"));
  REQUIRE(fp.entries.size() == 2);
  CHECK(fp.entries[0] == SchemaFingerprint::Entry{"honeypot", ValueKind::Text});
  CHECK(fp.entries[1] == SchemaFingerprint::Entry{"id", ValueKind::Text});
  CHECK(fp.digest.size() == 16);
}

TEST_CASE("empty record fingerprint") {
  const auto fp = fingerprint(rec("{}"));
  CHECK(fp.entries.empty());
  CHECK(fp.digest == SchemaFingerprint::from_entries({}).digest);
  CHECK(fp.digest == "cbf29ce484222325");  // FNV-1a offset basis: hash of no bytes
}

TEST_CASE("fingerprint depends only on structure") {
  const auto a = fingerprint(rec(R"({"x":1,"y":{"z":"q"},"n":null})"));
  const auto b = fingerprint(rec(R"({"y":{"z":"other"},"n":null,"x":99})"));
  CHECK(a == b);
  const auto c = fingerprint(rec(R"({"x":1,"y":{"w":"q"},"n":null})"));
  CHECK(a.digest != c.digest);
  REQUIRE(a.entries.size() == 3);
  CHECK(a.entries[0] == SchemaFingerprint::Entry{"n", ValueKind::Null});
}

TEST_CASE("classification rules") {
  SUBCASE("struct wrapper") {
    auto s = recs({R"({"v":{"$oid":"a"}})", R"({"v":{"$oid":"b"}})"});
    std::vector<ValueNode> vals;
    for (auto& r : s) vals.push_back(*r.find("v"));
    CHECK(classify("_id", vals).kind == FieldClass::Kind::StructWrapper);
  }
  SUBCASE("dictionary union") {
    std::vector<ValueNode> vals = {rec(R"({"a":1})"), rec(R"({"b":1})"), rec(R"({"a":2})")};
    CHECK(classify("payload", vals).kind == FieldClass::Kind::DictUnion);
  }
  SUBCASE("forced dictionary") {
    std::vector<ValueNode> vals = {rec(R"({"a":1})")};
    ClassifyOptions o;
    o.dict_paths.insert("payload");
    CHECK(classify("payload", vals, o).kind == FieldClass::Kind::DictUnion);
  }
  SUBCASE("delimited") {
    std::vector<ValueNode> vals = {ValueNode("a:b:c:d"), ValueNode("e:f:g:h"), ValueNode(nullptr)};
    CHECK(classify("raw_sig", vals) == FieldClass::delimited(':'));
  }
  SUBCASE("delimiter below share") {
    std::vector<ValueNode> vals;
    for (int i = 0; i < 8; ++i) vals.emplace_back("a:b");
    vals.emplace_back("ab");
    vals.emplace_back("cd");
    CHECK(classify("f", vals).kind == FieldClass::Kind::Scalar);
    vals.pop_back();
    vals.emplace_back("c:d");
    vals.emplace_back("e:f");
    CHECK(classify("f", vals) == FieldClass::delimited(':'));
  }
  SUBCASE("priority order") {
    std::vector<ValueNode> vals = {ValueNode("a,b|c"), ValueNode("d,e|f")};
    CHECK(classify("f", vals) == FieldClass::delimited(','));
  }
  SUBCASE("timestamps and urls are not split") {
    std::vector<ValueNode> ts = {ValueNode("2016-07-01T14:48:37.839108389+02:00"), ValueNode("2016-07-01T14:48:38Z")};
    CHECK(classify("t", ts).kind == FieldClass::Kind::Scalar);
    std::vector<ValueNode> urls = {ValueNode("http://a/b"), ValueNode("https://c/d")};
    CHECK(classify("u", urls).kind == FieldClass::Kind::Scalar);
  }
  SUBCASE("override disables splitting") {
    std::vector<ValueNode> vals = {ValueNode("a:b"), ValueNode("c:d")};
    ClassifyOptions o;
    o.delimiter_overrides["f"] = std::nullopt;
    CHECK(classify("f", vals, o).kind == FieldClass::Kind::Scalar);
    o.delimiter_overrides["f"] = '-';
    CHECK(classify("f", vals, o) == FieldClass::delimited('-'));
  }
  SUBCASE("list") {
    std::vector<ValueNode> vals = {rec(R"({"l":[1,2]})").find("l")->as_array(), Array{}};
    CHECK(classify("l", vals).kind == FieldClass::Kind::List);
  }
  SUBCASE("mixed shapes conflict") {
    std::vector<ValueNode> vals = {rec(R"({"a":1})"), ValueNode("text")};
    CHECK_THROWS_AS(classify("payload", vals), ClassificationConflict);
  }
}

TEST_CASE("classification is stable when consistent samples are added") {
  std::vector<ValueNode> s = {rec(R"({"a":1,"b":2})"), rec(R"({"a":3,"b":4})")};
  CHECK(classify("w", s).kind == FieldClass::Kind::StructWrapper);
  s.push_back(rec(R"({"b":5,"a":6})"));
  CHECK(classify("w", s).kind == FieldClass::Kind::StructWrapper);
  s.push_back(rec(R"({"c":1})"));
  CHECK(classify("w", s).kind == FieldClass::Kind::DictUnion);
  s.push_back(rec(R"({"a":1,"b":2})"));
  CHECK(classify("w", s).kind == FieldClass::Kind::DictUnion);
}

TEST_CASE("registry over identical structures") {
  const auto rs = recs({R"({"a":1,"b":"x"})", R"({"b":"y","a":2})", R"({"a":3,"b":"z"})"});
  const auto reg = build_registry(rs);
  REQUIRE(reg.schemas().size() == 1);
  CHECK(reg.schemas()[0].count == 3);
  CHECK(reg.record_count() == 3);
}

TEST_CASE("registry over k hand-built structures") {
  const std::vector<std::vector<std::string>> templates = {
      {"a"}, {"a", "b"}, {"b", "c"}, {"a", "b", "c"}, {"d"}, {"c", "d", "e"}};
  std::vector<ValueNode> rs;
  for (int round = 0; round < 3; ++round) {
    for (const auto& t : templates) {
      Object o;
      for (const auto& k : t) o.push_back({k, ValueNode(static_cast<std::int64_t>(round))});
      rs.emplace_back(std::move(o));
    }
  }
  const auto reg = build_registry(rs);
  REQUIRE(reg.schemas().size() == templates.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    CHECK(reg.schemas()[i].count == 3);
    CHECK(reg.schemas()[i].fingerprint.entries.size() == templates[i].size());
    total += reg.schemas()[i].count;
  }
  CHECK(total == rs.size());
}

TEST_CASE("dictionary union inner schemas and partitions") {
  const auto rs = recs({
      R"({"channel":"c1","payload":{"a":1,"b":"x"}})",
      R"({"channel":"c2","payload":{"c":"y"}})",
      R"({"channel":"c1","payload":{"b":"z","a":5}})",
      R"({"channel":"c3","payload":{"c":"w","d":1.5}})",
  });
  const auto reg = build_registry(rs);
  REQUIRE(reg.dict_unions().size() == 1);
  const auto& du = reg.dict_unions()[0];
  CHECK(reg.path(du.path).rendered == "payload");
  REQUIRE(du.inner_schemas.size() == 3);
  CHECK(du.inner_schemas[0].count == 2);
  CHECK(du.inner_schemas[0].fingerprint.entries.size() == 2);
  CHECK(du.inner_schemas[0].fingerprint.entries[0].path == "a");
  CHECK(reg.partitions().size() == 3);
  CHECK(reg.schemas().size() == 3);

  const auto shape = reg.analyze(rs[2]);
  CHECK(shape.known);
  REQUIRE(shape.partition);
  CHECK(*shape.partition == 0);
  const auto unseen = reg.analyze(rec(R"({"channel":"c1","payload":{"a":1}})"));
  CHECK(unseen.known);
  CHECK_FALSE(unseen.partition);
  const auto foreign = reg.analyze(rec(R"({"channel":"c1","payload":{"zz":1}})"));
  CHECK_FALSE(foreign.known);

  const auto col = reg.find_column("payload_a");
  REQUIRE(col);
  CHECK(reg.field_of(*col) == "payload.a");
  CHECK(reg.field_of(*reg.find_column("channel")) == "channel");
}

TEST_CASE("list lengths and part counts do not split partitions") {
  const auto rs = recs({
      R"({"payload":{"cmds":["a"],"sig":"1:2"}})",
      R"({"payload":{"cmds":["a","b","c"],"sig":"1:2:3"}})",
      R"({"payload":{"other":1}})",
      R"({"payload":{"cmds":["x","y"],"sig":"4:5"}})",
  });
  const auto reg = build_registry(rs);
  CHECK(reg.schemas().size() == 4);  // exact fingerprints still differ
  REQUIRE(reg.dict_unions().size() == 1);
  const auto& inner = reg.dict_unions()[0].inner_schemas;
  REQUIRE(inner.size() == 2);
  CHECK(inner[0].count == 3);
  REQUIRE(inner[0].fingerprint.entries.size() == 2);
  CHECK(inner[0].fingerprint.entries[0].path == "cmds");
  CHECK(inner[0].fingerprint.entries[1].path == "sig");
  CHECK(reg.partitions().size() == 2);

  // Without a dict union the top-level structure groups the same way.
  const auto flat = build_registry(recs({R"({"l":[1],"k":"a"})", R"({"k":"b","l":[1,2,3]})", R"({"k":"c"})"}));
  CHECK(flat.schemas().size() == 3);
  CHECK(flat.partitions().size() == 2);
  const auto shape = flat.analyze(rec(R"({"l":[7,8],"k":"d"})"));
  REQUIRE(shape.partition);
  CHECK(*shape.partition == 0);
}

TEST_CASE("column names: collisions and reserved name") {
  const auto rs = recs({R"({"a_b":1,"a":{"b":2},"schemaType":"t","$x":1,"x":2})"});
  const auto reg = build_registry(rs);
  std::vector<std::string> names;
  for (const auto& c : reg.columns()) names.push_back(c.name);
  CHECK(names == std::vector<std::string>{"a_b", "a_b_2", "schemaType_2", "x", "x_2"});
}

TEST_CASE("conflicting shapes across records name the path") {
  const auto rs = recs({R"({"p":{"a":1}})", R"({"p":"text"})"});
  try {
    build_registry(rs);
    FAIL("expected a conflict");
  } catch (const ClassificationConflict& e) {
    CHECK(e.path() == "p");
  }
}

TEST_CASE("level-two split") {
  const auto rs = recs({R"({"raw_sig":"4:64:1:*:1024,0:mss"})", R"({"raw_sig":"4:128:0:*:512,1:nop"})"});
  const auto reg = build_registry(rs);
  CHECK(reg.path(*reg.find_path("raw_sig")).cls == FieldClass::delimited(':'));
  CHECK(reg.path(*reg.find_path("raw_sig#4")).cls == FieldClass::delimited(','));
  CHECK(reg.find_column("raw_sig_4_0"));
  CHECK(reg.find_column("raw_sig_4_1"));
  CHECK_FALSE(reg.find_column("raw_sig_4"));
}

TEST_CASE("random corpora: counts sum and digests ignore values and key order") {
  testsupport::RandomRecords gen(21);
  std::vector<ValueNode> rs;
  for (int i = 0; i < 2000; ++i) rs.push_back(gen.next());
  const auto reg = build_registry(rs);
  std::size_t total = 0;
  std::set<std::string> digests;
  for (const auto& s : reg.schemas()) {
    total += s.count;
    digests.insert(s.fingerprint.digest);
  }
  CHECK(total == rs.size());
  CHECK(digests.size() == reg.schemas().size());
  CHECK(reg.dict_unions().size() == 1);

  // Reversing key order must not move a record to another schema.
  for (std::size_t i = 0; i < 200; ++i) {
    Object o = rs[i].as_object();
    std::reverse(o.begin(), o.end());
    const auto a = reg.analyze(rs[i]);
    const auto b = reg.analyze(ValueNode(std::move(o)));
    REQUIRE(a.schema);
    CHECK(a.schema == b.schema);
  }
}
