#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace deid {

/// Base class for all toolkit errors. `name()` is the stable identifier the
/// CLI prints before the message; data/contract errors exit with status 2.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& message)
        : std::runtime_error(message), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

// --- note-model ---

struct UnmappedPlaceholder : Error {
    explicit UnmappedPlaceholder(std::string inner_text)
        : Error("UnmappedPlaceholder", "no mapping rule matches placeholder inner text: \"" + inner_text + "\""),
          inner(std::move(inner_text)) {}
    std::string inner;
};

struct MalformedPlaceholder : Error {
    MalformedPlaceholder(std::size_t line_index, std::size_t offset)
        : Error("MalformedPlaceholder",
                "\"[**\" without closing \"**]\" at line " + std::to_string(line_index) + ", offset " +
                    std::to_string(offset)),
          line_index(line_index), offset(offset) {}
    std::size_t line_index;  // 0-based
    std::size_t offset;      // scalar offset of the opener
};

struct SchemaError : Error {
    SchemaError(std::size_t line_number, const std::string& detail)
        : Error("SchemaError", "line " + std::to_string(line_number) + ": " + detail),
          line_number(line_number) {}
    std::size_t line_number;  // 1-based record line
};

struct IoError : Error {
    explicit IoError(const std::string& detail) : Error("IoError", detail) {}
};

// --- surrogen ---

struct EmptyLexicon : Error {
    explicit EmptyLexicon(const std::string& where) : Error("EmptyLexicon", "lexicon has no entries: " + where) {}
};

struct NonPositiveWeight : Error {
    NonPositiveWeight(std::size_t line_number, const std::string& detail)
        : Error("NonPositiveWeight", "line " + std::to_string(line_number) + ": " + detail),
          line_number(line_number) {}
    std::size_t line_number;  // 1-based
};

struct DuplicateSurface : Error {
    DuplicateSurface(std::size_t line_number, const std::string& surface)
        : Error("DuplicateSurface", "line " + std::to_string(line_number) + ": duplicate surface \"" + surface + "\""),
          line_number(line_number) {}
    std::size_t line_number;  // 1-based
};

struct MissingLexicon : Error {
    explicit MissingLexicon(const std::string& category)
        : Error("MissingLexicon", "no lexicon available for category " + category) {}
};

// --- corpusgen / config ---

struct ConfigError : Error {
    explicit ConfigError(const std::string& detail) : Error("ConfigError", detail) {}
};

// --- features ---

struct FrozenTableViolation : Error {
    FrozenTableViolation() : Error("FrozenTableViolation", "training-mode extraction on a frozen feature table") {}
};

// --- crf ---

struct LengthMismatch : Error {
    LengthMismatch(std::size_t lhs, std::size_t rhs)
        : Error("LengthMismatch", "sequence lengths differ: " + std::to_string(lhs) + " vs " + std::to_string(rhs)) {}
};

struct IndexOutOfRange : Error {
    explicit IndexOutOfRange(const std::string& detail) : Error("IndexOutOfRange", detail) {}
};

struct NonFiniteObjective : Error {
    explicit NonFiniteObjective(const std::string& detail) : Error("NonFiniteObjective", detail) {}
};

struct EmptyDataset : Error {
    EmptyDataset() : Error("EmptyDataset", "training dataset is empty") {}
};

struct VersionMismatch : Error {
    VersionMismatch(int found, int expected)
        : Error("VersionMismatch",
                "model format version " + std::to_string(found) + ", reader supports " + std::to_string(expected)) {}
};

struct CorruptModel : Error {
    explicit CorruptModel(const std::string& detail) : Error("CorruptModel", detail) {}
};

// --- deid-eval ---

struct AlignmentError : Error {
    explicit AlignmentError(const std::string& detail) : Error("AlignmentError", detail) {}
};

struct InsufficientPool : Error {
    InsufficientPool(std::size_t pool_size, std::size_t requested)
        : Error("InsufficientPool",
                "pool has " + std::to_string(pool_size) + " notes, largest requested size is " +
                    std::to_string(requested)) {}
};

struct OverlapError : Error {
    explicit OverlapError(const std::string& note_id)
        : Error("OverlapError", "note_id shared between pool and test set: " + note_id) {}
};

}  // namespace deid
