#include "gvlm/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "gvlm/tensor.hpp"

namespace gvlm {

using json = nlohmann::json;

Vocabulary::Vocabulary() : words_{"<pad>", "<bos>", "<eos>", "<unk>"} {}

std::vector<std::string> Vocabulary::split_words(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts) {
    std::set<std::string> words;
    for (const std::string& t : texts)
        for (std::string& w : split_words(t)) words.insert(std::move(w));
    Vocabulary v;
    for (const std::string& w : words) v.words_.push_back(w);
    return v;
}

std::size_t Vocabulary::id(const std::string& word) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
        if (words_[i] == word) return i;
    return kUnk;
}

const std::string& Vocabulary::word(std::size_t id) const {
    if (id >= words_.size()) throw std::invalid_argument("Vocabulary: id out of range");
    return words_[id];
}

bool Vocabulary::contains(const std::string& word) const {
    return std::find(words_.begin(), words_.end(), word) != words_.end();
}

std::vector<std::size_t> Vocabulary::encode(const std::string& text, bool add_eos) const {
    std::vector<std::size_t> ids;
    for (const std::string& w : split_words(text)) ids.push_back(id(w));
    if (add_eos) ids.push_back(kEos);
    return ids;
}

std::string Vocabulary::decode(const std::vector<std::size_t>& ids) const {
    std::string out;
    for (std::size_t i : ids) {
        if (i == kPad || i == kBos || i == kEos) continue;
        if (!out.empty()) out.push_back(' ');
        out += word(i);
    }
    return out;
}

std::string Vocabulary::to_json() const {
    json j;
    j["words"] = words_;
    return j.dump(2);
}

Vocabulary Vocabulary::from_json(const std::string& text) {
    try {
        json j = json::parse(text);
        Vocabulary v;
        v.words_ = j.at("words").get<std::vector<std::string>>();
        if (v.words_.size() < 4 || v.words_[0] != "<pad>" || v.words_[1] != "<bos>" ||
            v.words_[2] != "<eos>" || v.words_[3] != "<unk>")
            throw DataError("vocabulary: missing reserved tokens");
        return v;
    } catch (const json::exception& e) {
        throw DataError(std::string("vocabulary JSON: ") + e.what());
    }
}

void Vocabulary::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << to_json() << "\n";
}

Vocabulary Vocabulary::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

}  // namespace gvlm
