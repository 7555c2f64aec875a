#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace logflat {

// One sensor's payload field list.
struct CorpusTemplate {
  std::string name;
  std::string channel;
  std::vector<std::string> fields;
};

// The 13 honeypot/IDS payload shapes (dionaea, p0f, cowrie, glastopf,
// snort, amun, shockpot).
const std::vector<CorpusTemplate>& sensor_templates();

// Top-level fields every generated record carries next to `payload`.
const std::vector<std::string>& shared_fields();

struct CorpusOptions {
  std::uint64_t seed = 42;
  std::size_t records_per_schema = 100;
  std::vector<std::size_t> templates;  // indices into sensor_templates(); empty = all
  double null_rate = 0.02;             // chance a plain payload value is null
};

// Writes JSONL, cycling through the templates record by record. Returns the
// number of lines written. Same options, same bytes.
std::size_t generate_corpus(std::ostream& out, const CorpusOptions& options);

}  // namespace logflat
