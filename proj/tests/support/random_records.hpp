#pragma once

// Seeded generator of nested records for round-trip checks. Every field name
// has one fixed shape across the corpus (scalar, struct, list, delimited text
// or dictionary), so the registry can classify it consistently; records pick
// random subsets of fields and random values. Container depth stays <= 4.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "logflat/value.hpp"

namespace testsupport {

class RandomRecords {
 public:
  explicit RandomRecords(std::uint64_t seed) : rng_(seed) {
    // Record templates: which top-level fields appear.
    for (int t = 0; t < 12; ++t) {
      std::vector<int> fields;
      for (int f = 0; f < kFieldCount; ++f) {
        if (pick(100) < 45) fields.push_back(f);
      }
      if (fields.empty()) fields.push_back(t % kFieldCount);
      templates_.push_back(std::move(fields));
    }
    // Inner key sets of the dictionary field.
    for (int s = 0; s < 5; ++s) {
      std::vector<int> keys;
      for (int k = 0; k < 8; ++k) {
        if (pick(100) < 50 || k == s) keys.push_back(k);
      }
      dict_schemas_.push_back(std::move(keys));
    }
  }

  logflat::ValueNode next() {
    const auto& fields = templates_[pick(templates_.size())];
    logflat::Object obj;
    for (int f : fields) obj.push_back({name_of(f), field(f)});
    shuffle(obj);
    return logflat::ValueNode(std::move(obj));
  }

 private:
  static constexpr int kFieldCount = 14;

  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

  static std::string name_of(int f) {
    static const char* names[kFieldCount] = {"s_a",  "s_b",   "s_c", "$meta", "w_one", "w_two", "l_num",
                                             "l_obj", "d_sig", "d_pair", "payload", "s_d", "l_nest", "@type"};
    return names[f];
  }

  void shuffle(logflat::Object& obj) {
    for (std::size_t i = obj.size(); i > 1; --i) std::swap(obj[i - 1], obj[pick(i)]);
  }

  std::string word() {
    static const char* words[] = {"tcp", "udp", "alpha", "beta", "x", "", "Zeta 9", "ünï", "q\"uote", "new\nline"};
    return words[pick(10)];
  }

  logflat::ValueNode scalar() {
    switch (pick(6)) {
      case 0: return logflat::ValueNode(nullptr);
      case 1: return logflat::ValueNode(pick(2) == 0);
      case 2: return logflat::ValueNode(static_cast<std::int64_t>(rng_() % 2'000'001) - 1'000'000);
      case 3: return logflat::ValueNode(static_cast<double>(static_cast<std::int64_t>(rng_() % 20001) - 10000) / 64.0);
      default: return logflat::ValueNode(word());
    }
  }

  std::string token() {
    static const char* tokens[] = {"64", "1024", "mss", "nop", "ws", "df", "0", "id+"};
    return tokens[pick(8)];
  }

  logflat::ValueNode strukt(int depth) {
    logflat::Object o;
    o.push_back({"k1", scalar()});
    o.push_back({"k2", scalar()});
    if (depth < 3) o.push_back({"inner", strukt(depth + 1)});
    return logflat::ValueNode(std::move(o));
  }

  logflat::ValueNode field(int f) {
    switch (f) {
      case 0:
      case 1:
      case 2:
      case 11:
      case 13: return scalar();
      case 3: {
        logflat::Object o;
        o.push_back({"$oid", logflat::ValueNode(std::to_string(rng_() % 1'000'000'007))});
        return logflat::ValueNode(std::move(o));
      }
      case 4: return strukt(1);
      case 5: {
        logflat::Object o;
        o.push_back({"$date", logflat::ValueNode(word())});
        return logflat::ValueNode(std::move(o));
      }
      case 6: {
        logflat::Array a;
        const std::size_t n = 1 + pick(5);
        for (std::size_t i = 0; i < n; ++i) a.push_back(scalar());
        return logflat::ValueNode(std::move(a));
      }
      case 7: {
        logflat::Array a;
        const std::size_t n = 1 + pick(3);
        for (std::size_t i = 0; i < n; ++i) {
          logflat::Object o;
          o.push_back({"port", logflat::ValueNode(static_cast<std::int64_t>(pick(65536)))});
          o.push_back({"tag", logflat::ValueNode(word())});
          a.push_back(logflat::ValueNode(std::move(o)));
        }
        return logflat::ValueNode(std::move(a));
      }
      case 8: {
        // ':' outer split, ',' inside the fifth part (raw_sig style).
        std::string s = token() + ":" + token() + ":" + token() + ":*:" + token() + "," + token() + ":" + token();
        return logflat::ValueNode(s);
      }
      case 9: return logflat::ValueNode(token() + "|" + token());
      case 10: {
        const auto& keys = dict_schemas_[pick(dict_schemas_.size())];
        logflat::Object o;
        for (int k : keys) {
          const std::string name = "p" + std::to_string(k);
          if (k == 6) o.push_back({name, strukt(2)});
          else if (k == 7) {
            logflat::Array a;
            const std::size_t n = 1 + pick(3);
            for (std::size_t i = 0; i < n; ++i) a.push_back(logflat::ValueNode(word()));
            o.push_back({name, logflat::ValueNode(std::move(a))});
          } else {
            o.push_back({name, scalar()});
          }
        }
        shuffle(o);
        return logflat::ValueNode(std::move(o));
      }
      case 12: {
        logflat::Array outer;
        const std::size_t n = 1 + pick(2);
        for (std::size_t i = 0; i < n; ++i) {
          logflat::Array inner;
          const std::size_t m = 1 + pick(3);
          for (std::size_t j = 0; j < m; ++j) inner.push_back(scalar());
          outer.push_back(logflat::ValueNode(std::move(inner)));
        }
        return logflat::ValueNode(std::move(outer));
      }
    }
    return logflat::ValueNode(nullptr);
  }

  std::mt19937_64 rng_;
  std::vector<std::vector<int>> templates_;
  std::vector<std::vector<int>> dict_schemas_;
};

}  // namespace testsupport
