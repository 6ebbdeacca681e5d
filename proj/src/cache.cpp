#include "bsu/cache.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cstring>
#include <fstream>
#include <mutex>
#include <iostream>

#include "bsu/errors.hpp"

namespace bsu {

namespace {
const char kHeader[] = "# zeta cache v1\n";

bool parse_record(const std::string& line, std::string& key, Rat& value) {
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) return false;
    key = line.substr(0, tab);
    std::string val = line.substr(tab + 1);
    auto slash = val.find('/');
    try {
        if (slash == std::string::npos) {
            value = Rat(Int(val));
        } else {
            value = Rat(Int(val.substr(0, slash)), Int(val.substr(slash + 1)));
        }
    } catch (const std::exception&) {
        return false;
    }
    return true;
}
} // namespace

ZetaCache::ZetaCache(const std::string& path, bool writable) : path_(path) {
    // Load existing records, tracking the offset of the last intact line.
    off_t good = 0;
    {
        std::ifstream in(path, std::ios::binary);
        if (in) {
            std::string contents((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
            size_t pos = 0;
            while (pos < contents.size()) {
                size_t nl = contents.find('\n', pos);
                if (nl == std::string::npos) {
                    std::cerr << "zeta cache: truncating torn trailing record\n";
                    break;
                }
                std::string line = contents.substr(pos, nl - pos);
                if (line.empty() || line[0] == '#') {
                    good = static_cast<off_t>(nl + 1);
                    pos = nl + 1;
                    continue;
                }
                std::string key;
                Rat value;
                if (!parse_record(line, key, value)) {
                    std::cerr << "zeta cache: truncating corrupt record at offset " << pos << "\n";
                    break;
                }
                map_.emplace(std::move(key), std::move(value));
                good = static_cast<off_t>(nl + 1);
                pos = nl + 1;
            }
        }
    }
    if (!writable) return;
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0) throw error(errc::bad_config, "cannot open cache file: " + path);
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        // another process owns the cache for writing; fall back to read-only
        ::close(fd_);
        fd_ = -1;
        return;
    }
    struct stat st{};
    if (::fstat(fd_, &st) == 0 && st.st_size > good) {
        if (::ftruncate(fd_, good) != 0)
            std::cerr << "zeta cache: could not truncate corrupt tail\n";
    }
    if (good == 0) {
        if (::write(fd_, kHeader, sizeof(kHeader) - 1) < 0)
            std::cerr << "zeta cache: header write failed\n";
    } else {
        ::lseek(fd_, 0, SEEK_END);
    }
}

ZetaCache::~ZetaCache() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

std::optional<Rat> ZetaCache::lookup(const std::string& key) const {
    std::shared_lock lk(mtx_);
    auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

void ZetaCache::store(const std::string& key, const Rat& value) {
    std::unique_lock lk(mtx_);
    auto [it, inserted] = map_.emplace(key, value);
    if (!inserted) return;
    if (fd_ >= 0) {
        std::string rec = key + "\t" + value.str() + "\n";
        if (::write(fd_, rec.data(), rec.size()) < 0)
            std::cerr << "zeta cache: append failed\n";
    }
}

size_t ZetaCache::size() const {
    std::shared_lock lk(mtx_);
    return map_.size();
}

} // namespace bsu
