#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mecsim {

enum class KeyType { Num, Int, U64, Bool, Str };

/// One entry of the configuration registry. Alias keys (alias_of != nullptr)
/// are accepted on input, converted, and stored under the canonical key; they
/// never appear in dumps.
struct KeySpec {
    const char* section;
    const char* key;
    KeyType type;
    const char* desk_default;  // nullptr for alias entries
    const char* alias_of;      // canonical key in the same section
    double scale;              // alias value multiplier (ignored for db_to_linear)
    bool db_to_linear;         // alias converts dB to a linear ratio
};

/// Typed, registry-backed configuration. Keys outside the registry are a hard
/// error wherever they can enter (file, env, set), so typos cannot silently
/// fall back to defaults.
class Config {
  public:
    /// Fully populated defaults. scale is "desk" (small, fast) or "paper"
    /// (Table-1-sized network).
    static Config defaults(std::string_view scale = "desk");
    static Config from_text(std::string_view text, std::string_view origin, std::string_view scale = "desk");
    static Config from_file(const std::string& path, std::string_view scale = "desk");

    static const std::vector<KeySpec>& registry();

    /// Alias-aware, type-checked write. `value` is the raw text form.
    void set(std::string_view section, std::string_view key, std::string_view value);

    /// Applies MECSIM_<SECTION>_<KEY>=value environment overrides. Unknown
    /// keys under the prefix are an error.
    void apply_env(const char* prefix = "MECSIM_");

    double num(std::string_view section, std::string_view key) const;
    std::int64_t integer(std::string_view section, std::string_view key) const;
    std::uint64_t u64(std::string_view section, std::string_view key) const;
    bool boolean(std::string_view section, std::string_view key) const;
    const std::string& str(std::string_view section, std::string_view key) const;

    /// Canonical INI text in registry order; parsing it back yields an equal
    /// Config.
    std::string dump() const;
    std::uint64_t hash() const;

    bool operator==(const Config&) const = default;

  private:
    const std::string& raw(std::string_view section, std::string_view key) const;
    // section -> key -> raw value, canonical keys only
    std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace mecsim
