#pragma once

#include <string>
#include <vector>

namespace gvlm {

/// Word-level vocabulary shared by the mock task tokenizer and the toy
/// decoder. Ids 0..3 are <pad>, <bos>, <eos>, <unk>.
class Vocabulary {
public:
    static constexpr std::size_t kPad = 0;
    static constexpr std::size_t kBos = 1;
    static constexpr std::size_t kEos = 2;
    static constexpr std::size_t kUnk = 3;

    Vocabulary();

    /// Lowercased, punctuation-stripped word split; words added in sorted
    /// order for determinism.
    static Vocabulary build(const std::vector<std::string>& texts);

    static std::vector<std::string> split_words(const std::string& text);

    std::size_t size() const { return words_.size(); }
    std::size_t id(const std::string& word) const;  // kUnk when absent
    const std::string& word(std::size_t id) const;
    bool contains(const std::string& word) const;

    std::vector<std::size_t> encode(const std::string& text, bool add_eos = false) const;
    std::string decode(const std::vector<std::size_t>& ids) const;

    std::string to_json() const;
    static Vocabulary from_json(const std::string& text);
    void save_file(const std::string& path) const;
    static Vocabulary load_file(const std::string& path);

private:
    std::vector<std::string> words_;
};

}  // namespace gvlm
