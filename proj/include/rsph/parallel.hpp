#pragma once

// Static-partition worker pool. Work items are split into contiguous index
// ranges; callers write only to per-index outputs, so results never depend on
// the thread count.

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rsph {

class WorkerPool {
public:
    explicit WorkerPool(std::size_t threads = 1) : size_(std::max<std::size_t>(threads, 1)) {
        for (std::size_t t = 1; t < size_; ++t) {
            workers_.emplace_back([this, t] { worker_loop(t); });
        }
    }

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    ~WorkerPool() {
        {
            std::lock_guard lock(mutex_);
            stop_ = true;
            ++generation_;
        }
        wake_.notify_all();
        for (auto& w : workers_) {
            w.join();
        }
    }

    std::size_t size() const noexcept { return size_; }

    using ChunkBody = std::function<void(std::size_t, std::size_t, std::size_t)>;

    /// Number of chunks for_chunks will use for n items.
    std::size_t chunk_count(std::size_t n) const noexcept {
        return (size_ == 1 || n < 2 * size_) ? 1 : size_;
    }

    /// Calls body(begin, end) on disjoint chunks covering [0, n).
    void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
        for_chunks(n, [&](std::size_t, std::size_t begin, std::size_t end) { body(begin, end); });
    }

    /// Calls body(chunk, begin, end) for chunk in [0, chunk_count(n)). Blocks
    /// until all chunks are done and rethrows the exception of the lowest
    /// failing chunk.
    void for_chunks(std::size_t n, const ChunkBody& body) {
        if (chunk_count(n) == 1) {
            body(0, 0, n);
            return;
        }
        std::vector<std::exception_ptr> errors(size_);
        {
            std::lock_guard lock(mutex_);
            task_ = &body;
            errors_ = &errors;
            n_ = n;
            pending_ = size_ - 1;
            ++generation_;
        }
        wake_.notify_all();
        run_chunk(0, body, errors);
        {
            std::unique_lock lock(mutex_);
            done_.wait(lock, [this] { return pending_ == 0; });
            task_ = nullptr;
        }
        for (auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

private:
    void run_chunk(std::size_t t, const ChunkBody& body, std::vector<std::exception_ptr>& errors) {
        const std::size_t begin = n_ * t / size_;
        const std::size_t end = n_ * (t + 1) / size_;
        try {
            body(t, begin, end);
        } catch (...) {
            errors[t] = std::current_exception();
        }
    }

    void worker_loop(std::size_t t) {
        std::size_t seen = 0;
        for (;;) {
            const ChunkBody* task = nullptr;
            std::vector<std::exception_ptr>* errors = nullptr;
            {
                std::unique_lock lock(mutex_);
                wake_.wait(lock, [&] { return generation_ != seen; });
                seen = generation_;
                if (stop_) {
                    return;
                }
                task = task_;
                errors = errors_;
            }
            run_chunk(t, *task, *errors);
            {
                std::lock_guard lock(mutex_);
                if (--pending_ == 0) {
                    done_.notify_one();
                }
            }
        }
    }

    std::size_t size_;
    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const ChunkBody* task_ = nullptr;
    std::vector<std::exception_ptr>* errors_ = nullptr;
    std::size_t n_ = 0;
    std::size_t pending_ = 0;
    std::size_t generation_ = 0;
    bool stop_ = false;
};

} // namespace rsph
