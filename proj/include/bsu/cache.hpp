#pragma once

#include <map>
#include <optional>
#include <shared_mutex>
#include <string>

#include "bsu/int.hpp"

namespace bsu {

/// Append-only file cache of exact partial zeta values. Records are
/// "key\tnum/den\n"; a corrupt trailing record (torn write) is truncated on
/// open with a warning. A process that opens the file for writing holds an
/// advisory lock for the lifetime of the cache object; readers are lock-free.
/// Concurrent in-process use is safe (shared mutex).
class ZetaCache {
  public:
    ZetaCache() = default;  // purely in-memory
    explicit ZetaCache(const std::string& path, bool writable = true);
    ~ZetaCache();

    ZetaCache(const ZetaCache&) = delete;
    ZetaCache& operator=(const ZetaCache&) = delete;

    std::optional<Rat> lookup(const std::string& key) const;
    void store(const std::string& key, const Rat& value);

    size_t size() const;
    const std::string& path() const { return path_; }

  private:
    std::string path_;
    int fd_ = -1;
    mutable std::shared_mutex mtx_;
    std::map<std::string, Rat> map_;
};

} // namespace bsu
