#include <doctest.h>

#include <set>
#include <sstream>

#include "logflat/corpus.hpp"
#include "logflat/flatten.hpp"
#include "logflat/ingest.hpp"
#include "logflat/schema.hpp"

using namespace logflat;

namespace {

std::string generate(const CorpusOptions& o) {
  std::ostringstream out;
  generate_corpus(out, o);
  return out.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("template field lists have the expected sizes") {
  const auto& t = sensor_templates();
  REQUIRE(t.size() == 13);
  const std::vector<std::size_t> sizes{8, 11, 9, 9, 11, 9, 14, 8, 20, 24, 21, 7, 12};
  std::set<std::string> all;
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t[i].fields.size() == sizes[i]);
    CHECK(std::set<std::string>(t[i].fields.begin(), t[i].fields.end()).size() == sizes[i]);
    all.insert(t[i].fields.begin(), t[i].fields.end());
  }
  CHECK(all.size() == 92);
}

TEST_CASE("generation is deterministic and sized as asked") {
  CorpusOptions o;
  const std::string a = generate(o);
  CHECK(count_lines(a) == 1300);
  CHECK(generate(o) == a);
  o.seed = 43;
  CHECK(generate(o) != a);

  CorpusOptions one;
  one.templates = {3};
  one.records_per_schema = 1;
  CHECK(count_lines(generate(one)) == 1);

  CorpusOptions bad;
  bad.templates = {13};
  std::ostringstream sink;
  CHECK_THROWS(generate_corpus(sink, bad));
}

TEST_CASE("every record carries the shared fields and its template's payload") {
  CorpusOptions o;
  o.records_per_schema = 5;
  std::istringstream in(generate(o));
  const Corpus c = read_corpus(in);
  REQUIRE(c.records.size() == 65);
  CHECK(c.stats.records_failed == 0);
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    const auto& rec = c.records[i];
    std::set<std::string> top;
    for (const auto& m : rec.as_object()) top.insert(m.name);
    CHECK(top == std::set<std::string>{"_id", "channel", "ident", "normalized", "payload", "timestamp"});
    const ValueNode* normalized = rec.find("normalized");
    REQUIRE(normalized != nullptr);
    CHECK(normalized->as_bool());
    const auto& tmpl = sensor_templates()[i % 13];
    std::set<std::string> keys;
    for (const auto& m : rec.find("payload")->as_object()) keys.insert(m.name);
    CHECK(keys == std::set<std::string>(tmpl.fields.begin(), tmpl.fields.end()));
  }
}

TEST_CASE("the full corpus splits into thirteen baseline structures") {
  CorpusOptions o;
  o.records_per_schema = 50;
  std::istringstream in(generate(o));
  const Corpus c = read_corpus(in);
  const auto reg = build_registry(c.records);
  REQUIRE(reg.dict_unions().size() == 1);
  CHECK(reg.path(reg.dict_unions()[0].path).rendered == "payload");
  CHECK(reg.partitions().size() == 13);
  FlattenConfig cfg;
  const auto local = partition_by_schema(c.records, reg, cfg);
  CHECK(local.frames.size() == 13);
  CHECK(local.rejected_count == 0);
  for (std::size_t k = 0; k < local.frames.size(); ++k) {
    const auto& tmpl = sensor_templates()[k];
    std::set<std::string> fields;
    for (const auto& name : local.frames[k].column_names()) {
      if (name == "schemaType") continue;
      const auto id = reg.find_column(name);
      REQUIRE(id.has_value());
      const std::string f = reg.field_of(*id);
      if (f.rfind("payload.", 0) == 0) fields.insert(f.substr(8));
    }
    CHECK(fields == std::set<std::string>(tmpl.fields.begin(), tmpl.fields.end()));
  }
}
