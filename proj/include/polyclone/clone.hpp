#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "budget.hpp"
#include "hom.hpp"
#include "operation.hpp"

namespace polyclone {

/// A finite set of operations on one domain; stands for the clone it generates.
struct CloneGenSet {
    std::size_t domain_size = 0;
    std::vector<OperationTable> generators;

    CloneGenSet(std::size_t d, std::vector<OperationTable> gens)
        : domain_size(d), generators(std::move(gens)) {
        if (d == 0) throw ValidationError("clone domain must be nonempty");
        for (const auto& g : generators)
            if (g.domain_size() != d) throw ValidationError("generator over a different domain");
    }
};

inline Json clone_to_json(const CloneGenSet& c) {
    Json j;
    j["domain_size"] = c.domain_size;
    Json gens = Json::array();
    for (const auto& g : c.generators) gens.push_back(operation_to_json(g));
    j["generators"] = std::move(gens);
    return j;
}

inline CloneGenSet clone_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("domain_size") || !j.contains("generators"))
        throw ParseError("clone JSON needs domain_size and generators");
    std::vector<OperationTable> gens;
    for (const auto& g : j.at("generators")) gens.push_back(operation_from_json(g));
    return CloneGenSet(j.at("domain_size").get<std::size_t>(), std::move(gens));
}

/// Deduplicating store of fixed-width rows, in insertion order.
class RowSet {
public:
    explicit RowSet(std::size_t width) : width_(width), slots_(1024, 0) {}

    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return count_; }
    std::span<const Element> row(std::size_t i) const { return {data_.data() + i * width_, width_}; }

    std::optional<std::size_t> find(std::span<const Element> r) const {
        const std::size_t mask = slots_.size() - 1;
        for (std::size_t s = hash(r) & mask;; s = (s + 1) & mask) {
            if (slots_[s] == 0) return std::nullopt;
            if (std::equal(r.begin(), r.end(), row(slots_[s] - 1).begin())) return slots_[s] - 1;
        }
    }

    std::pair<std::size_t, bool> insert(std::span<const Element> r) {
        if ((count_ + 1) * 2 > slots_.size()) grow();
        const std::size_t mask = slots_.size() - 1;
        std::size_t s = hash(r) & mask;
        for (;; s = (s + 1) & mask) {
            if (slots_[s] == 0) break;
            if (std::equal(r.begin(), r.end(), row(slots_[s] - 1).begin())) return {slots_[s] - 1, false};
        }
        data_.insert(data_.end(), r.begin(), r.end());
        slots_[s] = static_cast<std::uint32_t>(++count_);
        return {count_ - 1, true};
    }

private:
    static std::size_t hash(std::span<const Element> r) {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (Element x : r) h = (h ^ x) * 0xff51afd7ed558ccdULL;
        h ^= h >> 33;
        h *= 0xc4ceb9fe1a85ec53ULL;
        h ^= h >> 33;
        return static_cast<std::size_t>(h);
    }

    void grow() {
        std::vector<std::uint32_t> fresh(slots_.size() * 2, 0);
        const std::size_t mask = fresh.size() - 1;
        for (std::size_t i = 0; i < count_; ++i) {
            std::size_t s = hash(row(i)) & mask;
            while (fresh[s] != 0) s = (s + 1) & mask;
            fresh[s] = static_cast<std::uint32_t>(i + 1);
        }
        slots_ = std::move(fresh);
    }

    std::size_t width_;
    std::size_t count_ = 0;
    std::vector<Element> data_;
    std::vector<std::uint32_t> slots_;
};

/// Semi-naive fixpoint: rows are closed under the componentwise action of operations of the
/// given arities. `apply(op, ids, out)` writes the row obtained from applying operation `op` to
/// rows `ids`. Constant operations (arity 0) are applied once with no arguments.
/// With parallel_width > 1 candidate rows are computed by several threads and merged in a fixed
/// order, so the final row order does not depend on scheduling. Operations flagged symmetric are
/// applied to nondecreasing index tuples only. Returns false on budget exhaustion.
template <class Apply>
bool semi_naive_closure(RowSet& rows, const std::vector<std::size_t>& arities, Apply&& apply, BudgetMeter& meter,
                        const std::vector<char>& symmetric = {}) {
    const std::size_t w = rows.width();
    const unsigned width = std::max(1U, meter.total().parallel_width);
    {
        std::vector<Element> r(w);
        for (std::size_t g = 0; g < arities.size(); ++g)
            if (arities[g] == 0) {
                apply(g, std::span<const std::size_t>{}, std::span<Element>(r));
                rows.insert(r);
            }
    }
    std::size_t start = 0;
    while (start < rows.size()) {
        const std::size_t end = rows.size();
        for (std::size_t g = 0; g < arities.size(); ++g) {
            const std::size_t m = arities[g];
            if (m == 0) continue;
            // index tuples over [0,end)^m with at least one entry >= start, split by first index
            // direct: insert at once (single thread; rows below `end` are never moved logically)
            const bool sym = g < symmetric.size() && symmetric[g] != 0;
            auto work = [&, m, g, sym](std::size_t lo, std::size_t hi, std::vector<Element>& out, std::uint64_t& done,
                                  bool direct) {
                std::vector<std::size_t> idx(m, 0);
                std::vector<Element> r(w);
                for (std::size_t first = lo; first < hi; ++first) {
                    idx.assign(m, sym ? first : 0);
                    idx[0] = first;
                    const bool first_fresh = first >= start;
                    for (;;) {
                        bool fresh = first_fresh;
                        for (std::size_t a = 1; a < m && !fresh; ++a) fresh = idx[a] >= start;
                        if (fresh) {
                            apply(g, std::span<const std::size_t>(idx), std::span<Element>(r));
                            if (direct)
                                rows.insert(r);
                            else
                                out.insert(out.end(), r.begin(), r.end());
                            ++done;
                        }
                        std::size_t pos = m;
                        while (pos-- > 1) {
                            if (++idx[pos] < end) {
                                if (sym)
                                    for (std::size_t q = pos + 1; q < m; ++q) idx[q] = idx[pos];
                                break;
                            }
                            idx[pos] = 0;
                        }
                        if (pos == 0) break;
                    }
                }
            };
            std::uint64_t per_first = 1;
            for (std::size_t a = 1; a < m; ++a) per_first = std::min<std::uint64_t>(per_first * end, 1U << 20);
            const std::size_t chunk = static_cast<std::size_t>(std::max<std::uint64_t>(1, (1U << 16) / per_first));
            std::vector<std::vector<Element>> outs(width);
            std::vector<std::uint64_t> counts(width, 0);
            for (std::size_t lo = 0; lo < end; lo += chunk * width) {
                if (meter.exhausted()) return false;
                for (unsigned t = 0; t < width; ++t) {
                    outs[t].clear();
                    counts[t] = 0;
                }
                if (width == 1) {
                    work(lo, std::min(end, lo + chunk), outs[0], counts[0], true);
                } else {
                    std::vector<std::thread> pool;
                    for (unsigned t = 0; t < width; ++t) {
                        const std::size_t a = std::min(end, lo + t * chunk), b = std::min(end, a + chunk);
                        pool.emplace_back([&, a, b, t] { work(a, b, outs[t], counts[t], false); });
                    }
                    for (auto& th : pool) th.join();
                }
                for (unsigned t = 0; t < width; ++t) {
                    meter.charge(counts[t]);
                    for (std::size_t k = 0; k < outs[t].size(); k += w)
                        rows.insert(std::span<const Element>(outs[t].data() + k, w));
                }
            }
        }
        start = end;
    }
    return true;
}

/// Closes rows of width w (tuples over the clone's domain) under the generators.
inline bool close_rows(const CloneGenSet& clone, RowSet& rows, BudgetMeter& meter) {
    const std::size_t d = clone.domain_size;
    std::vector<std::size_t> arities;
    std::vector<char> symmetric;
    for (const auto& g : clone.generators) {
        arities.push_back(g.arity());
        symmetric.push_back(is_symmetric(g) ? 1 : 0);
    }
    return semi_naive_closure(
        rows, arities,
        [&](std::size_t gi, std::span<const std::size_t> ids, std::span<Element> out) {
            const OperationTable& g = clone.generators[gi];
            for (std::size_t p = 0; p < out.size(); ++p) {
                std::size_t code = 0;
                for (auto id : ids) code = code * d + rows.row(id)[p];
                out[p] = g.table()[code];
            }
        },
        meter, symmetric);
}

using CloneMembers = SearchResult<std::vector<OperationTable>>;

/// All k-ary members of the clone generated by `gen`, sorted lexicographically.
inline CloneMembers generate_to_arity(const CloneGenSet& gen, std::size_t k, const SearchBudget& budget = {}) {
    const std::uint64_t cells = checked_power(gen.domain_size, k);
    if (cells > kDefaultTableCellCap) throw CapacityError("clone arity too large for table capacity");
    BudgetMeter meter(budget);
    RowSet rows(static_cast<std::size_t>(cells));
    for (std::size_t i = 1; i <= k; ++i) rows.insert(projection(gen.domain_size, k, i).table());
    CloneMembers result;
    const bool complete = close_rows(gen, rows, meter);
    result.stats.nodes = meter.used();
    result.outcome = complete ? Outcome::found : Outcome::budget_exceeded;
    std::vector<OperationTable> members;
    members.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto r = rows.row(i);
        members.emplace_back(gen.domain_size, k, std::vector<Element>(r.begin(), r.end()));
    }
    std::sort(members.begin(), members.end());
    result.witness = std::move(members);
    return result;
}

} // namespace polyclone
