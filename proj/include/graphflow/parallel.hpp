#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace graphflow {

inline int default_jobs() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(i) for i in [0, count). Work items must be independent; callers
// that aggregate results should write into preallocated slots indexed by i
// so the outcome does not depend on scheduling.
template <class Body>
void parallel_for(int count, int jobs, Body&& body) {
    if (count <= 0) return;
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int t = 0; t < jobs; ++t) {
        workers.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    }
    for (auto& w : workers) w.join();
}

}  // namespace graphflow
