#include "millsforge/cache.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

namespace millsforge {

namespace {

constexpr const char* kMagic = "MILLSFORGE v1";

// Exclusive-per-path advisory lock held for the duration of a store/load.
class PathLock {
public:
    explicit PathLock(const std::string& path) {
        lock_path_ = path + ".lock";
        fd_ = ::open(lock_path_.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd_ >= 0) ::flock(fd_, LOCK_EX);
    }
    ~PathLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }

private:
    std::string lock_path_;
    int fd_ = -1;
};

std::string frame(const CacheRecord& rec) {
    std::string body = "record " + rec.type + "\n" + rec.payload;
    if (body.empty() || body.back() != '\n') body += '\n';
    body += "end\n";
    return body;
}

std::string hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void cache_store(const std::string& path, const CacheRecord& rec) {
    PathLock lock(path);
    std::string body = frame(rec);
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw ResourceError("cache_store: cannot write " + tmp);
        out << kMagic << "\n" << body << "checksum " << hex16(fnv1a64(body)) << "\n";
        if (!out.flush()) throw ResourceError("cache_store: write failure on " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ResourceError("cache_store: atomic rename onto " + path + " failed");
}

CacheRecord cache_load(const std::string& path) {
    PathLock lock(path);
    std::ifstream in(path);
    if (!in) throw IntegrityError("cache_load: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw IntegrityError("cache_load: bad or missing format header in " + path);
    std::string body, checksum_line;
    while (std::getline(in, line)) {
        if (line.rfind("checksum ", 0) == 0) {
            checksum_line = line;
            break;
        }
        body += line;
        body += '\n';
    }
    if (checksum_line.empty())
        throw IntegrityError("cache_load: record truncated (no checksum line)");
    std::string want = checksum_line.substr(9);
    if (want != hex16(fnv1a64(body)))
        throw IntegrityError("cache_load: checksum mismatch; refusing corrupted record");

    CacheRecord rec;
    std::istringstream bs(body);
    if (!std::getline(bs, line) || line.rfind("record ", 0) != 0)
        throw IntegrityError("cache_load: missing record type line");
    rec.type = line.substr(7);
    std::string payload;
    bool saw_end = false;
    while (std::getline(bs, line)) {
        if (line == "end") {
            saw_end = true;
            break;
        }
        payload += line;
        payload += '\n';
    }
    if (!saw_end) throw IntegrityError("cache_load: record body unterminated");
    rec.payload = payload;
    return rec;
}

std::string default_cache_path() {
    const char* env = std::getenv("MILLSFORGE_CACHE");
    return env ? env : "";
}

}  // namespace millsforge
