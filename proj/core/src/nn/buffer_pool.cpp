#include "mtcd/nn/buffer_pool.hpp"

#include <cstdlib>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace mtcd::nn {

struct BufferPool::Impl {
    std::mutex mutex;
    std::unordered_map<std::size_t, std::vector<void*>> free_blocks;
    std::size_t cached = 0;
};

// Never destroyed: tensors held by other statics are released during exit,
// possibly after a function-local pool would already be gone.
BufferPool& BufferPool::instance() {
    static BufferPool* pool = new BufferPool;
    return *pool;
}

BufferPool::~BufferPool() {
    trim();
    delete impl_;
}

BufferPool::Impl* BufferPool::impl() {
    if (!impl_) impl_ = new Impl;
    return impl_;
}

void* BufferPool::acquire(std::size_t bytes) {
    Impl* im = impl();
    {
        std::lock_guard lock(im->mutex);
        auto it = im->free_blocks.find(bytes);
        if (it != im->free_blocks.end() && !it->second.empty()) {
            void* p = it->second.back();
            it->second.pop_back();
            im->cached -= bytes;
            return p;
        }
    }
    const std::size_t rounded = (bytes + kAlignment - 1) / kAlignment * kAlignment;
    void* p = std::aligned_alloc(kAlignment, rounded);
    if (!p) {
        trim();
        p = std::aligned_alloc(kAlignment, rounded);
        if (!p) throw std::bad_alloc();
    }
    return p;
}

void BufferPool::release(void* p, std::size_t bytes) noexcept {
    if (!p) return;
    Impl* im = impl_;
    if (im) {
        std::lock_guard lock(im->mutex);
        if (im->cached + bytes <= kMaxCachedBytes) {
            try {
                im->free_blocks[bytes].push_back(p);
                im->cached += bytes;
                return;
            } catch (...) {
            }
        }
    }
    std::free(p);
}

void BufferPool::trim() noexcept {
    if (!impl_) return;
    std::lock_guard lock(impl_->mutex);
    for (auto& [size, blocks] : impl_->free_blocks)
        for (void* p : blocks) std::free(p);
    impl_->free_blocks.clear();
    impl_->cached = 0;
}

std::size_t BufferPool::cached_bytes() const noexcept {
    if (!impl_) return 0;
    std::lock_guard lock(impl_->mutex);
    return impl_->cached;
}

} // namespace mtcd::nn
