#pragma once

#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "forge/backends/translator.hpp"

namespace forge::server {

inline constexpr std::size_t kDefaultCapacity = 2;

using Loader = std::function<std::unique_ptr<backends::Translator>(const backends::BackendSpec&)>;

// Bounded cache of loaded translators with least-recently-used eviction.
//
// The index lock is held only for lookups and bookkeeping. Loads are
// serialized by a separate lock and complete before anything is evicted, so
// a failed load leaves the cache as it was. An evicted handle is retired
// under its own lock, which waits for any translation in flight; a request
// that then finds its handle retired looks the model up again.
class ModelManager {
 public:
  explicit ModelManager(std::size_t capacity = kDefaultCapacity, Loader loader = {});

  std::vector<std::string> translate(const backends::BackendSpec& spec,
                                     const std::vector<std::string>& batch);

  // Loads (or refreshes) a model without translating.
  void touch(const backends::BackendSpec& spec);

  std::size_t capacity() const { return capacity_; }
  // Resident model ids, most recently used first.
  std::vector<std::string> resident() const;
  // Evicted model ids in eviction order.
  std::vector<std::string> evictions() const;
  std::size_t loads() const;
  std::size_t peak_resident() const;

 private:
  struct Handle {
    backends::BackendSpec spec;
    std::unique_ptr<backends::Translator> translator;
    std::mutex mu;
    bool retired = false;
  };
  using Entry = std::pair<std::string, std::shared_ptr<Handle>>;

  std::shared_ptr<Handle> get_or_load(const backends::BackendSpec& spec);
  std::shared_ptr<Handle> lookup(const std::string& model_id);  // refreshes recency

  const std::size_t capacity_;
  Loader loader_;
  mutable std::mutex index_mu_;
  std::mutex load_mu_;
  std::list<Entry> lru_;  // front = most recent
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
  std::vector<std::string> evictions_;
  std::size_t loads_ = 0;
  std::size_t peak_ = 0;
};

}  // namespace forge::server
