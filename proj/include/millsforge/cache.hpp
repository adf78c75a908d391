#pragma once
// cache.hpp - resumable on-disk records: versioned header, checksummed
// payload, atomic replace, advisory locking.
//
// Format:
//   MILLSFORGE v1
//   record <type>
//   <payload lines>
//   end
//   checksum <16 hex digits>

#include <cstdint>
#include <string>

#include "millsforge/errors.hpp"

namespace millsforge {

struct CacheRecord {
    std::string type;     // "sequence" or "conjecture_frontier"
    std::string payload;  // line-oriented body, trailing newline optional
};

// FNV-1a 64 over the framed record body.
std::uint64_t fnv1a64(const std::string& data);

// Atomic write (temp file + rename) under an exclusive advisory lock.
void cache_store(const std::string& path, const CacheRecord& rec);

// Verifies version and checksum before returning; corruption refuses the
// load with IntegrityError.
CacheRecord cache_load(const std::string& path);

// MILLSFORGE_CACHE, or empty when unset. Flags override this.
std::string default_cache_path();

}  // namespace millsforge
