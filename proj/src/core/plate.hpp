#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rnode::plate {

// Indian registration grammar: A = letter slot, 0 = digit slot.
struct PlateGrammar {
  std::vector<std::string> patterns = {"AA00AA0000", "AA00A0000"};
  std::map<char, std::set<char>> confusion_table;

  PlateGrammar();
  static PlateGrammar from_json(const std::string& text);
  std::string to_json() const;
};

enum class ValidationKind { VALID, CORRECTED, INVALID };

struct ValidationResult {
  ValidationKind kind = ValidationKind::INVALID;
  std::string text;  // corrected or original text when not INVALID
};

// Exact pattern match, else a single confusion substitution at a slot whose
// character class disagrees; CORRECTED only when exactly one candidate works.
ValidationResult validate(const std::string& text, const PlateGrammar& grammar);

struct BallotReading {
  std::string text;
  double confidence = 0.0;
  std::int64_t frame_index = 0;
};

struct PlateBallot {
  std::int64_t track_id = 0;
  std::vector<BallotReading> readings;  // sorted by frame_index, capped at capacity
  std::optional<std::pair<std::string, double>> decided;

  void add(BallotReading r, int capacity);
};

struct VoteConfig {
  int t_vote = 7;        // ballot capacity
  int min_readings = 3;  // grammar-valid readings required before deciding
};

// Confidence-sum vote over post-validation texts; score normalized by the
// total confidence of all valid readings.
std::optional<std::pair<std::string, double>> vote(const PlateBallot& ballot,
                                                   const PlateGrammar& grammar,
                                                   const VoteConfig& cfg = {});

// Lowercase hex SHA-256(salt || text). Salt must be at least 16 bytes.
std::string hash_plate(const std::string& text, const std::string& salt);

}  // namespace rnode::plate
