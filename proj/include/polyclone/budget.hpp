#pragma once

#include <chrono>
#include <cstdint>

#include "error.hpp"

namespace polyclone {

/// Limits for a single search. Running out is reported as Outcome::budget_exceeded,
/// which is never conflated with a refutation.
struct SearchBudget {
    std::uint64_t node_limit = 1'000'000'000;
    std::chrono::milliseconds time_limit{10 * 60 * 1000};
    unsigned parallel_width = 1;

    void validate() const {
        if (node_limit == 0 || time_limit.count() <= 0 || parallel_width == 0)
            throw ValidationError("search budget limits must be positive");
    }
};

enum class Outcome { found, none, budget_exceeded };

inline const char* to_string(Outcome o) {
    switch (o) {
    case Outcome::found: return "found";
    case Outcome::none: return "none";
    case Outcome::budget_exceeded: return "budget_exceeded";
    }
    return "?";
}

struct SearchStats {
    std::uint64_t nodes = 0;
};

} // namespace polyclone

namespace polyclone {

/// Tracks one budget spent across several consecutive searches.
class BudgetMeter {
public:
    explicit BudgetMeter(SearchBudget budget)
        : budget_(budget), start_(std::chrono::steady_clock::now()) {
        budget_.validate();
    }

    void charge(std::uint64_t nodes) noexcept { used_ += nodes; }
    std::uint64_t used() const noexcept { return used_; }

    bool exhausted() const {
        return used_ >= budget_.node_limit || elapsed() >= budget_.time_limit;
    }

    /// Budget left for the next search; only meaningful while !exhausted().
    SearchBudget remaining() const {
        SearchBudget b = budget_;
        b.node_limit = used_ >= budget_.node_limit ? 1 : budget_.node_limit - used_;
        auto left = budget_.time_limit - elapsed();
        b.time_limit = left.count() > 0 ? left : std::chrono::milliseconds{1};
        return b;
    }

    const SearchBudget& total() const noexcept { return budget_; }

private:
    std::chrono::milliseconds elapsed() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                     start_);
    }

    SearchBudget budget_;
    std::chrono::steady_clock::time_point start_;
    std::uint64_t used_ = 0;
};

} // namespace polyclone
