#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "newsrec/synth.hpp"
#include "newsrec/trainer.hpp"

namespace newsrec {

// Flat key=value run configuration with a fixed schema. '#' starts a
// comment line. Unknown keys and malformed values are rejected so
// experiment files stay diffable and typo-safe.
class RunConfig {
 public:
  static RunConfig defaults();
  static RunConfig from_file(const std::string& path);
  static RunConfig from_text(const std::string& text);

  // Schema: key -> default value (as text).
  static const std::map<std::string, std::string>& schema();

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  int64_t get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  // Sorted key=value lines; stable for checkpoint embedding.
  std::string serialize() const;

  uint64_t seed() const;
  TrainConfig train_config() const;
  SynthSpec synth_spec() const;

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace newsrec
