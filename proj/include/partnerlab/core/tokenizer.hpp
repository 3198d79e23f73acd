#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace partnerlab {

using TokenId = int;

// Lowercased word tokenizer that splits leading and trailing punctuation into
// separate tokens. Apostrophes inside words are kept ("don't").
std::vector<std::string> tokenize(std::string_view text);

// Inverse of tokenize up to case and spacing: punctuation attaches to the
// previous token, the first letter and the pronoun "i" are capitalized.
std::string detokenize(const std::vector<std::string>& tokens);

bool is_sentence_final_token(std::string_view token);

// Closed word vocabulary with reserved special tokens at fixed ids.
class Vocabulary {
 public:
  static constexpr TokenId kUnk = 0;
  static constexpr TokenId kSplit = 1;
  static constexpr TokenId kBos = 2;
  static constexpr TokenId kEos = 3;
  static constexpr int kNumSpecial = 4;

  Vocabulary();

  // Tokens sorted by descending frequency then lexicographically; ties are
  // broken deterministically so the same corpus always yields the same ids.
  static Vocabulary build(const std::vector<std::string>& texts, std::size_t max_size = 8000,
                          int min_count = 1);

  // Vocabulary holding exactly the given words after the specials.
  static Vocabulary from_words(const std::vector<std::string>& words);

  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(static_cast<size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }

  std::vector<TokenId> encode(std::string_view text) const;
  std::vector<TokenId> encode_tokens(const std::vector<std::string>& tokens) const;
  std::string decode(const std::vector<TokenId>& ids) const;

  bool is_sentence_final(TokenId id) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  void add(const std::string& tok);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace partnerlab
