#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "tuple_coding.hpp"

namespace polyclone {

/// Relations whose full tuple space base^arity is at most this get a membership bitset.
inline constexpr std::uint64_t kDefaultBitsetThreshold = std::uint64_t{1} << 24;
/// Largest domain power_structure() will materialize.
inline constexpr std::uint64_t kDefaultPowerDomainCap = 1'000'000;
/// Largest tuple count power_structure() will materialize per relation.
inline constexpr std::uint64_t kDefaultPowerTupleCap = 50'000'000;

/// A finite relation over {0..domain_size-1}: lexicographically sorted, duplicate free.
class Relation {
public:
    enum class Duplicates { reject, merge };

    Relation(std::size_t domain_size, std::size_t arity, std::vector<Element> flat,
             Duplicates dup = Duplicates::merge,
             std::uint64_t bitset_threshold = kDefaultBitsetThreshold)
        : domain_size_(domain_size), arity_(arity) {
        if (arity == 0) return; // empty nullary relation; see nullary()
        if (flat.size() % arity != 0)
            throw ValidationError("flat tuple data is not a multiple of the arity");
        for (Element x : flat)
            if (x >= domain_size)
                throw ValidationError("tuple entry " + std::to_string(x) +
                                      " out of range for domain size " +
                                      std::to_string(domain_size));
        const std::size_t n = flat.size() / arity;
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        auto row = [&](std::size_t i) { return flat.begin() + static_cast<std::ptrdiff_t>(i * arity); };
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::lexicographical_compare(row(a), row(a) + arity, row(b), row(b) + arity);
        });
        data_.reserve(flat.size());
        for (std::size_t k = 0; k < n; ++k) {
            auto r = row(order[k]);
            if (k > 0 && std::equal(r, r + arity, row(order[k - 1]))) {
                if (dup == Duplicates::reject) throw ValidationError("duplicate tuple in relation");
                continue;
            }
            data_.insert(data_.end(), r, r + arity);
        }
        count_ = data_.size() / arity;
        build_index(bitset_threshold);
    }

    Relation(std::size_t domain_size, std::size_t arity, const std::vector<Tuple>& tuples,
             Duplicates dup = Duplicates::merge)
        : Relation(domain_size, arity, flatten(arity, tuples), dup) {}

    /// The nullary relation, either {()} or {}.
    static Relation nullary(std::size_t domain_size, bool holds) {
        Relation r(domain_size, 0, std::vector<Element>{});
        r.count_ = holds ? 1 : 0;
        return r;
    }

    std::size_t domain_size() const noexcept { return domain_size_; }
    std::size_t arity() const noexcept { return arity_; }
    std::size_t size() const noexcept { return count_; }
    bool empty() const noexcept { return count_ == 0; }
    const std::vector<Element>& flat() const noexcept { return data_; }

    std::span<const Element> tuple(std::size_t i) const {
        return {data_.data() + i * arity_, arity_};
    }

    std::vector<Tuple> tuples() const {
        std::vector<Tuple> out;
        out.reserve(count_);
        for (std::size_t i = 0; i < count_; ++i) {
            auto t = tuple(i);
            out.emplace_back(t.begin(), t.end());
        }
        return out;
    }

    bool contains(std::span<const Element> t) const {
        if (t.size() != arity_) return false;
        if (arity_ == 0) return count_ == 1;
        for (Element x : t)
            if (x >= domain_size_) return false;
        if (!bits_.empty()) {
            std::uint64_t code = 0;
            for (Element x : t) code = code * domain_size_ + x;
            return (bits_[code >> 6] >> (code & 63)) & 1U;
        }
        std::size_t lo = 0, hi = count_;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            auto m = tuple(mid);
            if (std::lexicographical_compare(m.begin(), m.end(), t.begin(), t.end()))
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo < count_ && std::equal(t.begin(), t.end(), tuple(lo).begin());
    }

    friend bool operator==(const Relation& a, const Relation& b) {
        return a.domain_size_ == b.domain_size_ && a.arity_ == b.arity_ &&
               a.count_ == b.count_ && a.data_ == b.data_;
    }

private:
    static std::vector<Element> flatten(std::size_t arity, const std::vector<Tuple>& tuples) {
        std::vector<Element> flat;
        flat.reserve(arity * tuples.size());
        for (const auto& t : tuples) {
            if (t.size() != arity)
                throw ValidationError("tuple of length " + std::to_string(t.size()) +
                                      " in relation of arity " + std::to_string(arity));
            flat.insert(flat.end(), t.begin(), t.end());
        }
        return flat;
    }

    void build_index(std::uint64_t threshold) {
        const std::uint64_t space = checked_power(domain_size_, arity_);
        if (space > threshold) return;
        bits_.assign(static_cast<std::size_t>((space + 63) / 64), 0);
        for (std::size_t i = 0; i < count_; ++i) {
            std::uint64_t code = 0;
            for (Element x : tuple(i)) code = code * domain_size_ + x;
            bits_[code >> 6] |= std::uint64_t{1} << (code & 63);
        }
    }

    std::size_t domain_size_;
    std::size_t arity_;
    std::size_t count_ = 0;
    std::vector<Element> data_;
    std::vector<std::uint64_t> bits_;
};

struct RelationSymbol {
    std::string name;
    std::size_t arity = 0;
    friend bool operator==(const RelationSymbol&, const RelationSymbol&) = default;
};

using Signature = std::vector<RelationSymbol>;

inline bool is_valid_symbol_name(std::string_view name) {
    if (name.empty()) return false;
    auto first = static_cast<unsigned char>(name.front());
    if (!(std::isalpha(first) || first == '_')) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        auto u = static_cast<unsigned char>(c);
        return std::isalnum(u) || u == '_';
    });
}

/// A finite relational structure on {0..size-1}. Relations are kept sorted by name, so
/// two structures with the same content compare (and serialize) identically.
class RelStructure {
public:
    struct Named {
        std::string name;
        std::shared_ptr<const Relation> relation;
    };

    RelStructure(std::size_t size, std::vector<std::pair<std::string, Relation>> relations)
        : size_(size) {
        if (size == 0) throw ValidationError("structure domain must be nonempty");
        rels_.reserve(relations.size());
        for (auto& [name, rel] : relations) {
            if (!is_valid_symbol_name(name))
                throw ValidationError("invalid relation name '" + name + "'");
            if (rel.arity() == 0) throw ValidationError("relation '" + name + "' has arity 0");
            if (rel.domain_size() != size)
                throw ValidationError("relation '" + name + "' built over a different domain");
            rels_.push_back({name, std::make_shared<const Relation>(std::move(rel))});
        }
        std::sort(rels_.begin(), rels_.end(),
                  [](const Named& a, const Named& b) { return a.name < b.name; });
        for (std::size_t i = 1; i < rels_.size(); ++i)
            if (rels_[i].name == rels_[i - 1].name)
                throw ValidationError("duplicate relation name '" + rels_[i].name + "'");
    }

    std::size_t size() const noexcept { return size_; }
    std::size_t relation_count() const noexcept { return rels_.size(); }
    const std::string& name(std::size_t i) const { return rels_.at(i).name; }
    const Relation& relation(std::size_t i) const { return *rels_.at(i).relation; }
    std::shared_ptr<const Relation> shared_relation(std::size_t i) const {
        return rels_.at(i).relation;
    }

    std::optional<std::size_t> find(std::string_view name) const {
        auto it = std::lower_bound(rels_.begin(), rels_.end(), name,
                                   [](const Named& a, std::string_view n) { return a.name < n; });
        if (it == rels_.end() || it->name != name) return std::nullopt;
        return static_cast<std::size_t>(it - rels_.begin());
    }

    const Relation& relation(std::string_view name) const {
        auto i = find(name);
        if (!i) throw ValidationError("no relation named '" + std::string(name) + "'");
        return relation(*i);
    }

    Signature signature() const {
        Signature sig;
        sig.reserve(rels_.size());
        for (const auto& r : rels_) sig.push_back({r.name, r.relation->arity()});
        return sig;
    }

    std::size_t tuple_count() const {
        std::size_t n = 0;
        for (const auto& r : rels_) n += r.relation->size();
        return n;
    }

    /// Copy with one relation added (or replaced, when the name exists).
    RelStructure with_relation(const std::string& name, Relation rel) const {
        std::vector<std::pair<std::string, Relation>> rs;
        for (const auto& r : rels_)
            if (r.name != name) rs.emplace_back(r.name, *r.relation);
        rs.emplace_back(name, std::move(rel));
        return RelStructure(size_, std::move(rs));
    }

    /// Keep only the named relations, optionally renaming them (pairs of old -> new).
    RelStructure reduct(const std::vector<std::pair<std::string, std::string>>& keep) const {
        std::vector<std::pair<std::string, Relation>> rs;
        for (const auto& [from, to] : keep) rs.emplace_back(to, relation(from));
        return RelStructure(size_, std::move(rs));
    }

    friend bool operator==(const RelStructure& a, const RelStructure& b) {
        if (a.size_ != b.size_ || a.rels_.size() != b.rels_.size()) return false;
        for (std::size_t i = 0; i < a.rels_.size(); ++i)
            if (a.rels_[i].name != b.rels_[i].name || !(*a.rels_[i].relation == *b.rels_[i].relation))
                return false;
        return true;
    }

private:
    std::size_t size_;
    std::vector<Named> rels_;
};

inline void require_same_signature(const RelStructure& a, const RelStructure& b) {
    if (a.signature() != b.signature())
        throw SignatureMismatch("structures have different signatures");
}

/// Componentwise n-th power. Element v of A^n is encoded by TupleCoding(|A|, n).
inline RelStructure power_structure(const RelStructure& a, std::size_t n,
                                    std::uint64_t domain_cap = kDefaultPowerDomainCap) {
    if (n == 0) throw ValidationError("power exponent must be at least 1");
    const std::uint64_t dom = checked_power(a.size(), n);
    if (dom > domain_cap)
        throw CapacityError("power domain " + std::to_string(a.size()) + "^" + std::to_string(n) +
                            " exceeds cap " + std::to_string(domain_cap));
    const TupleCoding coding(a.size(), n);
    std::vector<std::pair<std::string, Relation>> rels;
    for (std::size_t r = 0; r < a.relation_count(); ++r) {
        const Relation& rel = a.relation(r);
        const std::size_t k = rel.arity();
        const std::uint64_t count = checked_power(rel.size(), n);
        if (count > kDefaultPowerTupleCap)
            throw CapacityError("power relation '" + a.name(r) + "' would hold " +
                                std::to_string(count) + " tuples");
        std::vector<Element> flat;
        flat.reserve(static_cast<std::size_t>(count) * k);
        Tuple block(n);
        for (TupleOdometer pick(rel.size(), n); !pick.done(); pick.next()) {
            for (std::size_t j = 0; j < k; ++j) {
                for (std::size_t i = 0; i < n; ++i) block[i] = rel.tuple(pick.current()[i])[j];
                flat.push_back(static_cast<Element>(coding.encode(block)));
            }
        }
        rels.emplace_back(a.name(r), Relation(static_cast<std::size_t>(dom), k, std::move(flat)));
    }
    return RelStructure(static_cast<std::size_t>(dom), std::move(rels));
}

/// Induced substructure on `subset` (sorted, distinct), relabelled 0..|subset|-1 in order.
inline RelStructure induced_substructure(const RelStructure& a, std::span<const Element> subset) {
    if (subset.empty()) throw ValidationError("induced substructure needs a nonempty subset");
    std::vector<std::int64_t> label(a.size(), -1);
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (subset[i] >= a.size()) throw ValidationError("subset element out of range");
        if (i > 0 && subset[i] <= subset[i - 1]) throw ValidationError("subset must be sorted and distinct");
        label[subset[i]] = static_cast<std::int64_t>(i);
    }
    std::vector<std::pair<std::string, Relation>> rels;
    for (std::size_t r = 0; r < a.relation_count(); ++r) {
        const Relation& rel = a.relation(r);
        std::vector<Element> flat;
        for (std::size_t t = 0; t < rel.size(); ++t) {
            auto tup = rel.tuple(t);
            if (std::all_of(tup.begin(), tup.end(), [&](Element x) { return label[x] >= 0; }))
                for (Element x : tup) flat.push_back(static_cast<Element>(label[x]));
        }
        rels.emplace_back(a.name(r), Relation(subset.size(), rel.arity(), std::move(flat)));
    }
    return RelStructure(subset.size(), std::move(rels));
}

} // namespace polyclone
