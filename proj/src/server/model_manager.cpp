#include "forge/server/model_manager.hpp"

#include "forge/common/error.hpp"

namespace forge::server {

ModelManager::ModelManager(std::size_t capacity, Loader loader)
    : capacity_(capacity), loader_(std::move(loader)) {
  if (capacity_ < 1) throw ValidationError("model cache capacity must be >= 1");
  if (!loader_) loader_ = backends::load_backend;
}

std::shared_ptr<ModelManager::Handle> ModelManager::lookup(const std::string& model_id) {
  const auto it = index_.find(model_id);
  if (it == index_.end()) return nullptr;
  lru_.splice(lru_.begin(), lru_, it->second);
  return it->second->second;
}

std::shared_ptr<ModelManager::Handle> ModelManager::get_or_load(const backends::BackendSpec& spec) {
  {
    std::lock_guard<std::mutex> lock(index_mu_);
    if (auto h = lookup(spec.model_id)) return h;
  }
  std::lock_guard<std::mutex> load_lock(load_mu_);
  {
    // Another request may have loaded it while we waited.
    std::lock_guard<std::mutex> lock(index_mu_);
    if (auto h = lookup(spec.model_id)) return h;
  }
  spec.validate();
  auto handle = std::make_shared<Handle>();
  handle->spec = spec;
  handle->translator = loader_(spec);  // throws before anything is evicted

  std::shared_ptr<Handle> victim;
  {
    std::lock_guard<std::mutex> lock(index_mu_);
    if (index_.size() >= capacity_) {
      victim = lru_.back().second;
      evictions_.push_back(lru_.back().first);
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
  }
  if (victim) {
    std::lock_guard<std::mutex> vlock(victim->mu);
    victim->retired = true;
    victim->translator.reset();
  }
  std::lock_guard<std::mutex> lock(index_mu_);
  lru_.emplace_front(spec.model_id, handle);
  index_[spec.model_id] = lru_.begin();
  ++loads_;
  peak_ = std::max(peak_, index_.size());
  return handle;
}

std::vector<std::string> ModelManager::translate(const backends::BackendSpec& spec,
                                                 const std::vector<std::string>& batch) {
  while (true) {
    auto h = get_or_load(spec);
    std::lock_guard<std::mutex> lock(h->mu);
    if (h->retired) continue;
    return h->translator->translate(batch);
  }
}

void ModelManager::touch(const backends::BackendSpec& spec) { get_or_load(spec); }

std::vector<std::string> ModelManager::resident() const {
  std::lock_guard<std::mutex> lock(index_mu_);
  std::vector<std::string> out;
  for (const auto& [id, h] : lru_) out.push_back(id);
  return out;
}

std::vector<std::string> ModelManager::evictions() const {
  std::lock_guard<std::mutex> lock(index_mu_);
  return evictions_;
}

std::size_t ModelManager::loads() const {
  std::lock_guard<std::mutex> lock(index_mu_);
  return loads_;
}

std::size_t ModelManager::peak_resident() const {
  std::lock_guard<std::mutex> lock(index_mu_);
  return peak_;
}

}  // namespace forge::server
