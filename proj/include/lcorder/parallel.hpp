#pragma once

#include <cstdint>
#include <exception>
#include <vector>

namespace lcorder {

/// Evaluates fn(0..n-1) on OpenMP threads and returns results in index
/// order. The first exception (lowest index) is rethrown after the loop.
template <typename Fn>
auto parallel_map(std::int64_t n, Fn&& fn) -> std::vector<decltype(fn(std::int64_t{}))>
{
    using Result = decltype(fn(std::int64_t{}));
    std::vector<Result> out(static_cast<std::size_t>(n));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t k = 0; k < n; ++k) {
        try {
            out[static_cast<std::size_t>(k)] = fn(k);
        } catch (...) {
            errors[static_cast<std::size_t>(k)] = std::current_exception();
        }
    }
    for (auto const& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

} // namespace lcorder
