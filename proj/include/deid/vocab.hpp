#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "deid/note.hpp"

namespace deid {

/// Training vocabulary: case-sensitive surfaces, dense indices assigned in
/// first-occurrence order.
class Vocabulary {
public:
    std::uint32_t add(const std::string& surface) {
        const auto [it, inserted] = index_.emplace(surface, static_cast<std::uint32_t>(surfaces_.size()));
        if (inserted) surfaces_.push_back(surface);
        return it->second;
    }

    std::optional<std::uint32_t> lookup(const std::string& surface) const {
        const auto it = index_.find(surface);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    bool contains(const std::string& surface) const { return index_.contains(surface); }
    std::size_t size() const { return surfaces_.size(); }
    const std::vector<std::string>& surfaces() const { return surfaces_; }

private:
    std::unordered_map<std::string, std::uint32_t> index_;
    std::vector<std::string> surfaces_;
};

inline Vocabulary build_vocab(std::span<const Note> training_notes) {
    Vocabulary vocab;
    for (const Note& note : training_notes)
        for (const Token& t : token_stream(note)) vocab.add(t.text);
    return vocab;
}

}  // namespace deid
