#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "structure.hpp"
#include "structure_io.hpp"
#include "tuple_coding.hpp"

namespace polyclone {

/// Default cap on domain_size^arity for operations built by searches.
inline constexpr std::uint64_t kDefaultTableCellCap = std::uint64_t{1} << 20;

/// A total operation on {0..domain_size-1}, stored as a flat table indexed by
/// TupleCoding(domain_size, arity): the first argument is the most significant digit.
class OperationTable {
public:
    OperationTable(std::size_t domain_size, std::size_t arity, std::vector<Element> table)
        : domain_size_(domain_size), arity_(arity), table_(std::move(table)) {
        if (domain_size == 0) throw ValidationError("operation domain must be nonempty");
        if (checked_power(domain_size, arity) != table_.size())
            throw ValidationError("operation table has " + std::to_string(table_.size()) +
                                  " entries, expected " + std::to_string(domain_size) + "^" +
                                  std::to_string(arity));
        for (Element x : table_)
            if (x >= domain_size) throw ValidationError("operation table entry out of range");
    }

    template <class F>
    static OperationTable from_function(std::size_t domain_size, std::size_t arity, F&& f) {
        const std::uint64_t cells = checked_power(domain_size, arity);
        if (cells > kDefaultTableCellCap) throw CapacityError("operation table too large");
        std::vector<Element> table;
        table.reserve(static_cast<std::size_t>(cells));
        for (TupleOdometer it(domain_size, arity); !it.done(); it.next())
            table.push_back(static_cast<Element>(f(std::span<const Element>(it.current()))));
        return OperationTable(domain_size, arity, std::move(table));
    }

    std::size_t domain_size() const noexcept { return domain_size_; }
    std::size_t arity() const noexcept { return arity_; }
    const std::vector<Element>& table() const noexcept { return table_; }

    Element at(std::size_t index) const { return table_.at(index); }

    Element operator()(std::span<const Element> args) const {
        if (args.size() != arity_) throw ValidationError("wrong number of arguments");
        std::size_t code = 0;
        for (Element x : args) {
            if (x >= domain_size_) throw ValidationError("argument out of range");
            code = code * domain_size_ + x;
        }
        return table_[code];
    }

    Element operator()(std::initializer_list<Element> args) const {
        return (*this)(std::span<const Element>(args.begin(), args.size()));
    }

    friend bool operator==(const OperationTable&, const OperationTable&) = default;
    friend auto operator<=>(const OperationTable& a, const OperationTable& b) {
        if (auto c = a.domain_size_ <=> b.domain_size_; c != 0) return c;
        if (auto c = a.arity_ <=> b.arity_; c != 0) return c;
        return a.table_ <=> b.table_;
    }

private:
    std::size_t domain_size_;
    std::size_t arity_;
    std::vector<Element> table_;
};

/// pi^n_i, with 1 <= i <= n.
inline OperationTable projection(std::size_t domain_size, std::size_t n, std::size_t i) {
    if (i < 1 || i > n) throw ValidationError("projection index out of range");
    return OperationTable::from_function(domain_size, n,
                                         [i](std::span<const Element> x) { return x[i - 1]; });
}

inline bool is_projection(const OperationTable& f) {
    for (std::size_t i = 1; i <= f.arity(); ++i)
        if (f == projection(f.domain_size(), f.arity(), i)) return true;
    return false;
}

/// f(g_1,...,g_n) evaluated pointwise.
inline OperationTable compose(const OperationTable& f, const std::vector<OperationTable>& gs) {
    if (gs.size() != f.arity()) throw ValidationError("compose: need one inner operation per argument");
    if (gs.empty()) return f;
    const std::size_t m = gs.front().arity();
    for (const auto& g : gs)
        if (g.arity() != m || g.domain_size() != f.domain_size())
            throw ValidationError("compose: inner operations must share arity and domain");
    const std::size_t cells = gs.front().table().size();
    std::vector<Element> table(cells);
    for (std::size_t x = 0; x < cells; ++x) {
        std::size_t code = 0;
        for (const auto& g : gs) code = code * f.domain_size() + g.table()[x];
        table[x] = f.table()[code];
    }
    return OperationTable(f.domain_size(), m, std::move(table));
}

/// The operation (x_1..x_m) -> f(x_{idx[0]}, ..., x_{idx[n-1]}), with 0-based indices.
inline OperationTable minor(const OperationTable& f, std::span<const std::size_t> idx, std::size_t m) {
    if (idx.size() != f.arity()) throw ValidationError("minor: index list must match arity");
    for (auto i : idx)
        if (i >= m) throw ValidationError("minor: index out of range");
    return OperationTable::from_function(f.domain_size(), m, [&](std::span<const Element> x) {
        std::size_t code = 0;
        for (auto i : idx) code = code * f.domain_size() + x[i];
        return f.table()[code];
    });
}

/// Invariant under every permutation of the arguments.
inline bool is_symmetric(const OperationTable& f) {
    const std::size_t n = f.arity();
    if (n < 2) return true;
    std::vector<std::size_t> swap(n), cycle(n);
    for (std::size_t i = 0; i < n; ++i) {
        swap[i] = i;
        cycle[i] = (i + 1) % n;
    }
    std::swap(swap[0], swap[1]);
    return minor(f, swap, n) == f && minor(f, cycle, n) == f;
}

/// True iff f applied componentwise to any arity(f) tuples of R lands in R.
inline bool preserves(const OperationTable& f, const Relation& r) {
    if (f.domain_size() != r.domain_size()) throw ValidationError("preserves: domain mismatch");
    const std::size_t n = f.arity(), k = r.arity(), d = f.domain_size();
    if (r.empty()) return true;
    if (n == 0) {
        Tuple c(k, f.table()[0]);
        return r.contains(c);
    }
    Tuple image(k);
    for (TupleOdometer pick(r.size(), n); !pick.done(); pick.next()) {
        for (std::size_t j = 0; j < k; ++j) {
            std::size_t code = 0;
            for (std::size_t i = 0; i < n; ++i) code = code * d + r.tuple(pick.current()[i])[j];
            image[j] = f.table()[code];
        }
        if (!r.contains(image)) return false;
    }
    return true;
}

inline bool is_polymorphism(const OperationTable& f, const RelStructure& a) {
    if (f.domain_size() != a.size()) return false;
    for (std::size_t r = 0; r < a.relation_count(); ++r)
        if (!preserves(f, a.relation(r))) return false;
    return true;
}

inline Json operation_to_json(const OperationTable& f) {
    Json j;
    j["domain_size"] = f.domain_size();
    j["arity"] = f.arity();
    j["table"] = f.table();
    return j;
}

inline OperationTable operation_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("domain_size") || !j.contains("arity") || !j.contains("table"))
        throw ParseError("operation JSON needs domain_size, arity and table");
    try {
        return OperationTable(j.at("domain_size").get<std::size_t>(), j.at("arity").get<std::size_t>(),
                              j.at("table").get<std::vector<Element>>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad operation JSON: ") + e.what());
    }
}

/// Frequently used operations on {0,1}.
namespace ops {

inline OperationTable boolean_min() {
    return OperationTable::from_function(2, 2, [](auto x) { return std::min(x[0], x[1]); });
}
inline OperationTable boolean_max() {
    return OperationTable::from_function(2, 2, [](auto x) { return std::max(x[0], x[1]); });
}
inline OperationTable minority() {
    return OperationTable::from_function(2, 3, [](auto x) { return x[0] ^ x[1] ^ x[2]; });
}
inline OperationTable majority() {
    return OperationTable::from_function(2, 3, [](auto x) { return (x[0] + x[1] + x[2]) >= 2 ? 1 : 0; });
}

} // namespace ops

} // namespace polyclone
