#pragma once

#include <any>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hrt::bt {

/// Key/value store shared by the nodes of one tree.
///
/// Keys are plain strings. Node-private entries live under `node/<id>/...`
/// (see `node_key`), entries exchanged between allocation nodes under
/// `alloc/...`. A key that was never written is reported as absent, never
/// as a default-constructed value.
class Blackboard {
public:
    template <typename T>
    void set(const std::string& key, T value) {
        if (key.empty()) {
            throw std::invalid_argument("blackboard key cannot be empty");
        }
        entries_[key] = std::move(value);
    }

    /// Pointer to the stored value, or nullptr when absent. A present key
    /// holding another type is a programming error and throws.
    template <typename T>
    [[nodiscard]] T* find(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            return nullptr;
        }
        T* value = std::any_cast<T>(&it->second);
        if (value == nullptr) {
            throw std::logic_error("blackboard key '" + key + "' holds a different type");
        }
        return value;
    }

    template <typename T>
    [[nodiscard]] const T* find(const std::string& key) const {
        return const_cast<Blackboard*>(this)->find<T>(key);
    }

    template <typename T>
    [[nodiscard]] const T& get(const std::string& key) const {
        const T* value = find<T>(key);
        if (value == nullptr) {
            throw std::out_of_range("blackboard key '" + key + "' was never written");
        }
        return *value;
    }

    /// Returns the entry, creating it from `init` on first access.
    template <typename T>
    T& get_or_create(const std::string& key, T init = T{}) {
        if (T* value = find<T>(key)) {
            return *value;
        }
        set(key, std::move(init));
        return *find<T>(key);
    }

    [[nodiscard]] bool contains(const std::string& key) const { return entries_.count(key) != 0; }
    void erase(const std::string& key) { entries_.erase(key); }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }

    /// Removes every key starting with `prefix`.
    void erase_prefix(std::string_view prefix);

private:
    std::map<std::string, std::any> entries_;
};

std::string node_key(std::size_t node_id, std::string_view name);
std::string shared_key(std::string_view name);

}  // namespace hrt::bt
