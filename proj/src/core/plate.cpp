#include "plate.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace rnode::plate {

using nlohmann::json;

PlateGrammar::PlateGrammar() {
  const std::vector<std::pair<char, char>> pairs = {
      {'O', '0'}, {'I', '1'}, {'B', '8'}, {'S', '5'}, {'Z', '2'}, {'G', '6'}};
  for (auto [a, b] : pairs) {
    confusion_table[a].insert(b);
    confusion_table[b].insert(a);
  }
}

PlateGrammar PlateGrammar::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("bad grammar document: ") + e.what());
  }
  PlateGrammar g;
  if (j.contains("patterns")) {
    g.patterns.clear();
    for (const auto& p : j["patterns"]) g.patterns.push_back(p.get<std::string>());
  }
  if (j.contains("confusion")) {
    g.confusion_table.clear();
    for (const auto& pair : j["confusion"]) {
      std::string s = pair.get<std::string>();
      if (s.size() != 2) throw InputError("confusion entries must be two characters");
      g.confusion_table[s[0]].insert(s[1]);
      g.confusion_table[s[1]].insert(s[0]);
    }
  }
  if (g.patterns.empty()) throw InputError("grammar needs at least one pattern");
  return g;
}

std::string PlateGrammar::to_json() const {
  json j;
  j["patterns"] = patterns;
  j["confusion"] = json::array();
  std::set<std::string> seen;
  for (const auto& [c, subs] : confusion_table)
    for (char s : subs) {
      std::string key{std::min(c, s), std::max(c, s)};
      if (seen.insert(key).second) j["confusion"].push_back(key);
    }
  return j.dump(2);
}

namespace {

bool slot_matches(char c, char slot) {
  if (slot == 'A') return c >= 'A' && c <= 'Z';
  return c >= '0' && c <= '9';
}

bool matches_pattern(const std::string& text, const std::string& pattern) {
  if (text.size() != pattern.size()) return false;
  for (size_t i = 0; i < text.size(); ++i)
    if (!slot_matches(text[i], pattern[i])) return false;
  return true;
}

}  // namespace

ValidationResult validate(const std::string& text, const PlateGrammar& grammar) {
  for (const auto& p : grammar.patterns)
    if (matches_pattern(text, p)) return {ValidationKind::VALID, text};

  std::set<std::string> candidates;
  for (const auto& p : grammar.patterns) {
    if (text.size() != p.size()) continue;
    std::vector<size_t> bad;
    for (size_t i = 0; i < text.size(); ++i)
      if (!slot_matches(text[i], p[i])) bad.push_back(i);
    if (bad.size() != 1) continue;  // one substitution can fix exactly one slot
    size_t i = bad[0];
    auto it = grammar.confusion_table.find(text[i]);
    if (it == grammar.confusion_table.end()) continue;
    for (char sub : it->second) {
      if (!slot_matches(sub, p[i])) continue;
      std::string fixed = text;
      fixed[i] = sub;
      candidates.insert(fixed);
    }
  }
  if (candidates.size() == 1) return {ValidationKind::CORRECTED, *candidates.begin()};
  return {ValidationKind::INVALID, {}};
}

void PlateBallot::add(BallotReading r, int capacity) {
  readings.push_back(std::move(r));
  std::sort(readings.begin(), readings.end(),
            [](const BallotReading& a, const BallotReading& b) {
              return a.frame_index < b.frame_index;
            });
  while (static_cast<int>(readings.size()) > capacity) readings.erase(readings.begin());
}

std::optional<std::pair<std::string, double>> vote(const PlateBallot& ballot,
                                                   const PlateGrammar& grammar,
                                                   const VoteConfig& cfg) {
  struct Group {
    double score = 0.0;
    std::int64_t latest_frame = -1;
  };
  std::map<std::string, Group> groups;
  double total = 0.0;
  int valid_count = 0;
  for (const auto& r : ballot.readings) {
    auto v = validate(r.text, grammar);
    if (v.kind == ValidationKind::INVALID) continue;
    ++valid_count;
    total += r.confidence;
    Group& g = groups[v.text];
    g.score += r.confidence;
    g.latest_frame = std::max(g.latest_frame, r.frame_index);
  }
  if (valid_count < cfg.min_readings || total <= 0.0) return std::nullopt;
  const std::pair<const std::string, Group>* best = nullptr;
  for (const auto& kv : groups) {
    if (!best || kv.second.score > best->second.score ||
        (kv.second.score == best->second.score &&
         (kv.second.latest_frame > best->second.latest_frame ||
          (kv.second.latest_frame == best->second.latest_frame && kv.first < best->first))))
      best = &kv;
  }
  return std::make_pair(best->first, best->second.score / total);
}

std::string hash_plate(const std::string& text, const std::string& salt) {
  if (salt.size() < 16) throw InputError("weak salt: need at least 16 bytes");
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw InternalError("EVP_MD_CTX_new failed");
  bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
            EVP_DigestUpdate(ctx, salt.data(), salt.size()) == 1 &&
            EVP_DigestUpdate(ctx, text.data(), text.size()) == 1 &&
            EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw InternalError("SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace rnode::plate
