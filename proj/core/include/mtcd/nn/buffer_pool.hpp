#pragma once

#include <cstddef>
#include <new>
#include <utility>

namespace mtcd::nn {

/// Process-wide cache of large freed blocks, reused by exact size. Training
/// allocates the same activation shapes every step; recycling them avoids
/// returning pages to the OS and faulting them back in.
class BufferPool {
public:
    static BufferPool& instance();

    void* acquire(std::size_t bytes);
    void release(void* p, std::size_t bytes) noexcept;

    /// Frees every cached block.
    void trim() noexcept;
    std::size_t cached_bytes() const noexcept;

    static constexpr std::size_t kMinPooledBytes = 64 * 1024;
    static constexpr std::size_t kMaxCachedBytes = std::size_t{2} << 30;
    /// Every tensor starts on this boundary. Vectorised reductions peel a
    /// scalar head up to the first aligned element, so a varying base address
    /// would change summation order and make reruns differ in the last bits.
    static constexpr std::size_t kAlignment = 64;

private:
    BufferPool() = default;
    ~BufferPool();
    struct Impl;
    Impl* impl();
    Impl* impl_ = nullptr;
};

/// Allocator for tensor storage. Elements are default-initialised, so value
/// types such as float are left uninitialised unless a fill is requested.
template <typename T>
struct PooledAllocator {
    using value_type = T;

    PooledAllocator() noexcept = default;
    template <typename U>
    PooledAllocator(const PooledAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        const std::size_t bytes = n * sizeof(T);
        if (bytes < BufferPool::kMinPooledBytes)
            return static_cast<T*>(::operator new(bytes, std::align_val_t{BufferPool::kAlignment}));
        return static_cast<T*>(BufferPool::instance().acquire(bytes));
    }
    void deallocate(T* p, std::size_t n) noexcept {
        const std::size_t bytes = n * sizeof(T);
        if (bytes < BufferPool::kMinPooledBytes)
            ::operator delete(p, std::align_val_t{BufferPool::kAlignment});
        else
            BufferPool::instance().release(p, bytes);
    }

    template <typename U, typename... Args>
    void construct(U* p, Args&&... args) {
        if constexpr (sizeof...(Args) == 0)
            ::new (static_cast<void*>(p)) U;
        else
            ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
    }

    template <typename U>
    bool operator==(const PooledAllocator<U>&) const noexcept { return true; }
    template <typename U>
    bool operator!=(const PooledAllocator<U>&) const noexcept { return false; }
};

} // namespace mtcd::nn
