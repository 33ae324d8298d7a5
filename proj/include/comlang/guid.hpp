#pragma once

#include <optional>
#include <string>

namespace comlang {

// A GUID in 8-4-4-4-12 hex form, stored uppercase. Input is accepted in any
// case and normalized; equality is exact on the normalized text.
class Guid {
public:
    Guid() = default;

    // Returns nullopt unless `text` matches the 8-4-4-4-12 shape.
    static std::optional<Guid> parse(const std::string& text);

    // Deterministic GUID from a seed; used by tests and `guid-new --seed`.
    static Guid from_seed(std::uint64_t seed);

    // Fresh version-4 GUID from an OS entropy source.
    static Guid random();

    const std::string& str() const { return text_; }

    bool operator==(const Guid& other) const { return text_ == other.text_; }
    bool operator!=(const Guid& other) const { return text_ != other.text_; }
    bool operator<(const Guid& other) const { return text_ < other.text_; }

private:
    explicit Guid(std::string normalized) : text_(std::move(normalized)) {}
    std::string text_;
};

// True iff `text` has the 8-4-4-4-12 hex-digit shape (any letter case).
bool is_guid_text(const std::string& text);

}  // namespace comlang
