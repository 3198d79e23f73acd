#include "partnerlab/core/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/text.hpp"

namespace partnerlab {

namespace {

constexpr std::string_view kPunct = ".,!?;:\"()";

bool is_punct(char c) { return kPunct.find(c) != std::string_view::npos; }

const char* const kSpecials[] = {"<unk>", "<SPLIT>", "<bos>", "<eos>"};

}  // namespace

std::vector<std::string> tokenize(std::string_view input) {
  std::vector<std::string> out;
  for (const std::string& word : text::split_words(text::to_lower(input))) {
    size_t b = 0;
    size_t e = word.size();
    std::vector<std::string> trailing;
    while (b < e && is_punct(word[b])) out.emplace_back(1, word[b++]);
    while (e > b && is_punct(word[e - 1])) trailing.emplace_back(1, word[--e]);
    if (e > b) out.push_back(word.substr(b, e - b));
    out.insert(out.end(), trailing.rbegin(), trailing.rend());
  }
  return out;
}

bool is_sentence_final_token(std::string_view token) {
  return token == "." || token == "!" || token == "?";
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  bool capitalize_next = true;
  for (const std::string& raw : tokens) {
    std::string tok = raw;
    bool punct = tok.size() == 1 && is_punct(tok[0]) && tok != "(" && tok != "\"";
    if (!out.empty() && !punct) out.push_back(' ');
    if (tok == "i" || text::starts_with(tok, "i'")) tok[0] = 'I';
    if (capitalize_next && !tok.empty() && std::isalpha(static_cast<unsigned char>(tok[0]))) {
      tok[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(tok[0])));
      capitalize_next = false;
    }
    out += tok;
    if (is_sentence_final_token(tok)) capitalize_next = true;
  }
  return out;
}

Vocabulary::Vocabulary() {
  for (const char* s : kSpecials) add(s);
}

void Vocabulary::add(const std::string& tok) {
  if (index_.count(tok)) return;
  index_.emplace(tok, static_cast<TokenId>(tokens_.size()));
  tokens_.push_back(tok);
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, std::size_t max_size, int min_count) {
  std::map<std::string, int> counts;
  for (const auto& t : texts) {
    for (auto& tok : tokenize(t)) ++counts[tok];
  }
  std::vector<std::pair<std::string, int>> sorted(counts.begin(), counts.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  for (const auto& [tok, n] : sorted) {
    if (v.tokens_.size() >= max_size) break;
    if (n < min_count) continue;
    v.add(tok);
  }
  return v;
}

Vocabulary Vocabulary::from_words(const std::vector<std::string>& words) {
  Vocabulary v;
  for (const auto& w : words) v.add(w);
  return v;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("vocab", "cannot read " + path.string());
  Vocabulary v;
  v.tokens_.clear();
  v.index_.clear();
  std::string line;
  while (std::getline(in, line)) v.add(line);
  for (int i = 0; i < kNumSpecial; ++i) {
    if (v.tokens_.size() <= static_cast<size_t>(i) || v.tokens_[static_cast<size_t>(i)] != kSpecials[i]) {
      throw DataError("vocab", path.string() + " does not start with the reserved special tokens");
    }
  }
  return v;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("vocab", "cannot write " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

std::vector<TokenId> Vocabulary::encode(std::string_view text) const { return encode_tokens(tokenize(text)); }

std::vector<TokenId> Vocabulary::encode_tokens(const std::vector<std::string>& tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::string Vocabulary::decode(const std::vector<TokenId>& ids) const {
  std::vector<std::string> toks;
  for (TokenId i : ids) {
    if (i == kBos || i == kEos || i == kSplit) continue;
    toks.push_back(token(i));
  }
  return detokenize(toks);
}

bool Vocabulary::is_sentence_final(TokenId id) const {
  return id >= kNumSpecial && is_sentence_final_token(token(id));
}

}  // namespace partnerlab
