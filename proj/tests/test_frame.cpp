#include <doctest.h>

#include <cmath>
#include <ctime>
#include <map>
#include <random>
#include <sstream>

#include "logflat/error.hpp"
#include "logflat/frame.hpp"
#include "logflat/frame_io.hpp"
#include "logflat/frame_ops.hpp"
#include "logflat/time.hpp"

using namespace logflat;
using namespace std::chrono;

namespace {

Column text_column(std::string name, std::vector<std::optional<std::string>> values) {
  ColumnBuilder b(std::move(name), ColumnKind::Text);
  for (const auto& v : values) {
    if (v) b.append_text(*v);
    else b.append_null();
  }
  return std::move(b).build();
}

Column float_column(std::string name, const std::vector<std::optional<double>>& values) {
  ColumnBuilder b(std::move(name), ColumnKind::Float);
  for (const auto& v : values) {
    if (v) b.append_float(*v);
    else b.append_null();
  }
  return std::move(b).build();
}

Frame one(Column c) {
  std::vector<Column> cols;
  cols.push_back(std::move(c));
  return Frame("f", std::move(cols));
}

std::int64_t ns(Instant t) { return t.time_since_epoch().count(); }

}  // namespace

TEST_CASE("sample timestamp normalizes to UTC") {
  const auto t = parse_timestamp("2016-07-01T14:48:37.839108389+02:00");
  REQUIRE(t);
  CHECK(format_rfc3339(*t) == "2016-07-01T12:48:37.839108389Z");
  const auto expected = sys_days{2016y / July / 1} + 12h + 48min + 37s + nanoseconds{839108389};
  CHECK(*t == expected);
}

TEST_CASE("epoch zero and the other default formats") {
  CHECK(ns(*parse_timestamp("1970-01-01T00:00:00Z")) == 0);
  CHECK(ns(*parse_timestamp("1970-01-01 00:00:01")) == 1'000'000'000);
  CHECK(ns(*parse_timestamp("86400")) == 86'400'000'000'000);
  CHECK(ns(*parse_timestamp("1467384517839")) == 1'467'384'517'839'000'000);
  CHECK(format_rfc3339(*parse_timestamp("2016-07-01T14:48:37-0130")) == "2016-07-01T16:18:37Z");
}

TEST_CASE("unparseable timestamps") {
  CHECK_FALSE(parse_timestamp("not a date"));
  CHECK_FALSE(parse_timestamp("2016-02-30T00:00:00Z"));
  CHECK_FALSE(parse_timestamp("2015-02-29T00:00:00Z"));
  CHECK(parse_timestamp("2016-02-29T23:59:00Z"));
  TimeParseOptions strict;
  strict.strict = true;
  CHECK_THROWS_AS(parse_timestamp("not a date", strict), ProcessingError);
}

TEST_CASE("decompose_time fixed points") {
  const auto t = *parse_timestamp("2016-07-01T12:48:37Z");
  CHECK(decompose_time(t) == TimeWindows{2016, 7, 5, 12, 48});
  CHECK(decompose_time(Instant{}) == TimeWindows{1970, 1, 4, 0, 0});
  CHECK(decompose_time(*parse_timestamp("2016-02-29T23:59:00Z")) == TimeWindows{2016, 2, 1, 23, 59});
}

TEST_CASE("decompose_time agrees with gmtime on random instants") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> secs(0, 4'102'444'799);  // up to 2099-12-31
  for (int i = 0; i < 1000; ++i) {
    const std::time_t s = secs(rng);
    std::tm tm{};
    gmtime_r(&s, &tm);
    const auto w = decompose_time(Instant{seconds{s}} + nanoseconds{static_cast<std::int64_t>(rng() % 1'000'000'000)});
    CHECK(w.year == tm.tm_year + 1900);
    CHECK(w.month == static_cast<unsigned>(tm.tm_mon + 1));
    CHECK(w.day_of_week == static_cast<unsigned>(tm.tm_wday == 0 ? 7 : tm.tm_wday));
    CHECK(w.hour == static_cast<unsigned>(tm.tm_hour));
    CHECK(w.minute == static_cast<unsigned>(tm.tm_min));
  }
}

TEST_CASE("frame invariants") {
  std::vector<Column> cols;
  cols.push_back(text_column("a", {"x", "y"}));
  cols.push_back(text_column("a", {"x", "y"}));
  CHECK_THROWS_AS(Frame("f", std::move(cols)), ProcessingError);
  std::vector<Column> uneven;
  uneven.push_back(text_column("a", {"x", "y"}));
  uneven.push_back(text_column("b", {"x"}));
  CHECK_THROWS_AS(Frame("f", std::move(uneven)), ProcessingError);
  ColumnBuilder b("i", ColumnKind::Int);
  CHECK_THROWS_AS(b.append(Scalar{std::string("x")}), KindError);
}

TEST_CASE("string_index by frequency then text") {
  auto [f, dict] = string_index(one(text_column("c", {"b", "a", "b"})), "c");
  CHECK(dict.categories == std::vector<std::string>{"b", "a"});
  CHECK(f.column("c").kind() == ColumnKind::Int);
  CHECK(f.column("c").int_at(0) == 0);
  CHECK(f.column("c").int_at(1) == 1);
  CHECK(f.column("c").int_at(2) == 0);

  auto [g, tie] = string_index(one(text_column("c", {"y", "x"})), "c");
  CHECK(tie.categories == std::vector<std::string>{"x", "y"});
  CHECK(g.column("c").int_at(0) == 1);

  CHECK_THROWS_AS(string_index(one(float_column("n", {1.0})), "n"), KindError);
}

TEST_CASE("string_index matches a counting oracle and restores") {
  std::mt19937_64 rng(11);
  std::vector<std::optional<std::string>> values;
  std::map<std::string, std::size_t> counts;
  for (int i = 0; i < 1000; ++i) {
    if (rng() % 20 == 0) {
      values.push_back(std::nullopt);
      continue;
    }
    // Skewed draw so frequencies differ; some ties are likely among rare ones.
    const auto k = static_cast<int>(std::sqrt(static_cast<double>(rng() % 400)));
    std::string v = "cat" + std::to_string(k);
    ++counts[v];
    values.push_back(v);
  }
  const Frame frame = one(text_column("c", values));
  auto [indexed, dict] = string_index(frame, "c");

  std::vector<std::pair<std::string, std::size_t>> oracle(counts.begin(), counts.end());
  std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  REQUIRE(dict.size() == oracle.size());
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    CHECK(dict.categories[i] == oracle[i].first);
    CHECK(dict.frequencies[i] == oracle[i].second);
  }
  CHECK(restore_index(indexed, dict) == frame);
}

TEST_CASE("zscale") {
  const auto z = zscale(one(float_column("x", {1.0, 2.0, 3.0})), "x").column("x");
  CHECK(z.float_at(0) == doctest::Approx(-1.0));
  CHECK(z.float_at(1) == doctest::Approx(0.0));
  CHECK(z.float_at(2) == doctest::Approx(1.0));
  const auto c = zscale(one(float_column("x", {5.0, 5.0, std::nullopt, 5.0})), "x").column("x");
  CHECK(c.float_at(0) == 0.0);
  CHECK(c.is_null(2));
  CHECK_THROWS_AS(zscale(one(text_column("t", {"a"})), "t"), KindError);
}

TEST_CASE("zscale on random values and under affine maps") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(40.0, 12.0);
  std::vector<std::optional<double>> xs, ys, ns_;
  for (int i = 0; i < 1000; ++i) {
    const double x = d(rng);
    xs.push_back(x);
    ys.push_back(3.5 * x - 8.0);
    ns_.push_back(-0.25 * x + 1.0);
  }
  const auto z = zscale(one(float_column("x", xs)), "x").column("x");
  const auto zy = zscale(one(float_column("x", ys)), "x").column("x");
  const auto zn = zscale(one(float_column("x", ns_)), "x").column("x");
  double sum = 0, sq = 0;
  for (std::size_t i = 0; i < 1000; ++i) sum += z.float_at(i);
  const double mean = sum / 1000;
  for (std::size_t i = 0; i < 1000; ++i) sq += (z.float_at(i) - mean) * (z.float_at(i) - mean);
  CHECK(std::abs(mean) < 1e-9);
  CHECK(std::abs(std::sqrt(sq / 999) - 1.0) < 1e-9);
  for (std::size_t i = 0; i < 1000; ++i) {
    CHECK(std::abs(zy.float_at(i) - z.float_at(i)) < 1e-9);
    CHECK(std::abs(zn.float_at(i) + z.float_at(i)) < 1e-9);
  }
}

TEST_CASE("null fill policies") {
  std::vector<Column> cols;
  cols.push_back(float_column("x", {1.0, std::nullopt, 3.0, 10.0}));
  cols.push_back(text_column("t", {"a", std::nullopt, "b", "c"}));
  const Frame f("f", std::move(cols));
  const auto mean = apply_null_fill(f, NullFill::parse("mean"));
  CHECK(mean.column("x").float_at(1) == doctest::Approx(14.0 / 3));
  CHECK(mean.column("t").text(1) == "");
  const auto median = apply_null_fill(f, NullFill::parse("median"));
  CHECK(median.column("x").float_at(1) == doctest::Approx(3.0));
  const auto na = apply_null_fill(f, NullFill::parse("sentinel:NA"));
  for (std::size_t c = 0; c < na.column_count(); ++c) CHECK(na.column(c).null_count() == 0);
  CHECK(na.column("t").text(1) == "NA");
  CHECK(na.column("x").kind() == ColumnKind::Text);
  const auto zero = apply_null_fill(f, NullFill::parse("sentinel:0"));
  CHECK(zero.column("x").float_at(1) == 0.0);
  CHECK_THROWS_AS(NullFill::parse("avg"), ConfigError);
}

TEST_CASE("time column conversion") {
  std::vector<Column> cols;
  cols.push_back(text_column("when", {"2016-07-01T14:48:37.839108389+02:00", std::nullopt, "1970-01-01T00:00:00Z"}));
  cols.push_back(text_column("other", {"a", "b", "c"}));
  const Frame f("f", std::move(cols));
  auto [out, conv] = convert_time_columns(f, TimeParseOptions{});
  REQUIRE(conv.size() == 1);
  CHECK(out.column_names() == std::vector<std::string>{"when_ts", "when_year", "when_month", "when_day_of_week",
                                                       "when_hour", "when_minute", "other"});
  CHECK(out.column("when_ts").kind() == ColumnKind::Timestamp);
  CHECK(out.column("when_hour").int_at(0) == 12);
  CHECK(out.column("when_day_of_week").int_at(2) == 4);
  CHECK(out.column("when_year").is_null(1));
}

TEST_CASE("csv writer") {
  ColumnBuilder b("a", ColumnKind::Int);
  b.append_int(1);
  std::vector<Column> cols;
  cols.push_back(std::move(b).build());
  std::ostringstream out;
  const auto bytes = write_csv(Frame("f", std::move(cols)), out);
  CHECK(out.str() == "a\n1\n");
  CHECK(bytes == 4);

  std::ostringstream nulls;
  write_csv(one(text_column("t", {std::nullopt, "", "x,y", "say \"hi\"", "two\nlines"})), nulls);
  CHECK(nulls.str() == "t\n\n\"\"\n\"x,y\"\n\"say \"\"hi\"\"\"\n\"two\nlines\"\n");
}

namespace {

Frame mixed_frame(std::uint64_t seed, std::size_t rows) {
  std::mt19937_64 rng(seed);
  ColumnBuilder t("text", ColumnKind::Text), i("int", ColumnKind::Int), f("float", ColumnKind::Float),
      b("bool", ColumnKind::Bool), ts("ts", ColumnKind::Timestamp);
  const char* words[] = {"", "plain", "with,comma", "quote\"d", "multi\nline", "ünïcode", " padded "};
  for (std::size_t r = 0; r < rows; ++r) {
    auto maybe_null = [&](ColumnBuilder& c) {
      if (rng() % 7 == 0) {
        c.append_null();
        return true;
      }
      return false;
    };
    if (!maybe_null(t)) t.append_text(words[rng() % 7]);
    if (!maybe_null(i)) i.append_int(static_cast<std::int64_t>(rng() >> 12) - (std::int64_t{1} << 51));
    if (!maybe_null(f)) f.append_float(std::ldexp(static_cast<double>(rng() >> 11), -40) - 1e3);
    if (!maybe_null(b)) b.append_bool(rng() % 2 == 0);
    if (!maybe_null(ts)) ts.append_timestamp(Instant{nanoseconds{static_cast<std::int64_t>(rng() % 4'000'000'000'000'000'000ull)}});
  }
  std::vector<Column> cols;
  for (auto* c : {&t, &i, &f, &b, &ts}) cols.push_back(std::move(*c).build());
  return Frame("mixed", std::move(cols));
}

}  // namespace

TEST_CASE("csv round trip") {
  const Frame f = mixed_frame(5, 300);
  std::stringstream io;
  write_csv(f, io);
  CHECK(read_csv(io, "mixed", schema_of(f)) == f);
}

TEST_CASE("jsonl round trip with and without schema") {
  const Frame f = mixed_frame(9, 300);
  std::stringstream a;
  write_jsonl(f, a);
  std::stringstream b(a.str());
  CHECK(read_jsonl(a, "mixed", schema_of(f)) == f);
  CHECK(read_jsonl(b, "mixed") == f);
}
