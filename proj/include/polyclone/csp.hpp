#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "budget.hpp"
#include "structure.hpp"

namespace polyclone::csp {

/// A finite CSP whose constraints are all "scope maps into relation R" over one value set.
/// Homomorphism, polymorphism and coloring searches all compile to this form.
class Problem {
public:
    Problem(std::size_t num_vars, std::size_t num_values)
        : num_vars_(num_vars), num_values_(num_values), words_((num_values + 63) / 64) {
        if (num_values == 0) throw ValidationError("CSP needs at least one value");
        if (num_vars > std::numeric_limits<std::uint32_t>::max())
            throw CapacityError("too many CSP variables");
        initial_.assign(num_vars * words_, ~std::uint64_t{0});
        const std::size_t tail = num_values % 64;
        if (tail != 0)
            for (std::size_t v = 0; v < num_vars; ++v)
                initial_[v * words_ + words_ - 1] = (std::uint64_t{1} << tail) - 1;
    }

    std::size_t num_vars() const noexcept { return num_vars_; }
    std::size_t num_values() const noexcept { return num_values_; }
    std::size_t words() const noexcept { return words_; }

    std::uint32_t add_relation(std::shared_ptr<const Relation> rel) {
        if (rel->domain_size() != num_values_)
            throw ValidationError("constraint relation over the wrong value set");
        relations_.push_back(std::move(rel));
        return static_cast<std::uint32_t>(relations_.size() - 1);
    }

    void add_constraint(std::uint32_t relation, std::span<const std::uint32_t> scope) {
        const Relation& rel = *relations_.at(relation);
        if (scope.size() != rel.arity()) throw ValidationError("constraint scope does not match arity");
        for (auto v : scope)
            if (v >= num_vars_) throw ValidationError("constraint variable out of range");
        rel_of_.push_back(relation);
        offset_.push_back(static_cast<std::uint32_t>(scopes_.size()));
        scopes_.insert(scopes_.end(), scope.begin(), scope.end());
    }

    /// Intersect the initial domain of `var` with `allowed`.
    void restrict(std::uint32_t var, std::span<const Element> allowed) {
        std::vector<std::uint64_t> mask(words_, 0);
        for (Element a : allowed)
            if (a < num_values_) mask[a >> 6] |= std::uint64_t{1} << (a & 63);
        for (std::size_t w = 0; w < words_; ++w) initial_[var * words_ + w] &= mask[w];
    }

    void fix(std::uint32_t var, Element value) {
        const Element one[1] = {value};
        restrict(var, one);
    }

    void set_injective(bool on) noexcept { injective_ = on; }
    bool injective() const noexcept { return injective_; }

    /// Drop duplicate (relation, scope) constraints.
    void dedup() {
        const std::size_t n = rel_of_.size();
        std::vector<std::uint32_t> idx(n);
        for (std::uint32_t i = 0; i < n; ++i) idx[i] = i;
        auto key_less = [&](std::uint32_t a, std::uint32_t b) {
            if (rel_of_[a] != rel_of_[b]) return rel_of_[a] < rel_of_[b];
            auto sa = scope(a), sb = scope(b);
            return std::lexicographical_compare(sa.begin(), sa.end(), sb.begin(), sb.end());
        };
        std::sort(idx.begin(), idx.end(), key_less);
        std::vector<std::uint32_t> rel_of, offset, scopes;
        for (std::size_t k = 0; k < n; ++k) {
            if (k > 0 && !key_less(idx[k - 1], idx[k]) && !key_less(idx[k], idx[k - 1])) continue;
            auto s = scope(idx[k]);
            rel_of.push_back(rel_of_[idx[k]]);
            offset.push_back(static_cast<std::uint32_t>(scopes.size()));
            scopes.insert(scopes.end(), s.begin(), s.end());
        }
        rel_of_ = std::move(rel_of);
        offset_ = std::move(offset);
        scopes_ = std::move(scopes);
    }

    std::size_t constraint_count() const noexcept { return rel_of_.size(); }
    std::uint32_t constraint_relation(std::size_t c) const { return rel_of_[c]; }
    std::span<const std::uint32_t> scope(std::size_t c) const {
        const std::size_t arity = relations_[rel_of_[c]]->arity();
        return {scopes_.data() + offset_[c], arity};
    }
    const Relation& relation(std::size_t r) const { return *relations_[r]; }
    const std::vector<std::uint64_t>& initial_domains() const noexcept { return initial_; }

private:
    std::size_t num_vars_;
    std::size_t num_values_;
    std::size_t words_;
    std::vector<std::shared_ptr<const Relation>> relations_;
    std::vector<std::uint32_t> rel_of_;
    std::vector<std::uint32_t> offset_;
    std::vector<std::uint32_t> scopes_;
    std::vector<std::uint64_t> initial_;
    bool injective_ = false;
};

enum class VariableOrder { smallest_domain, lexicographic };

/// Backtracking search with generalized arc consistency at every node.
class Solver {
public:
    using Callback = std::function<bool(std::span<const Element>)>;

    Solver(std::shared_ptr<const Problem> problem, SearchBudget budget,
           VariableOrder order = VariableOrder::smallest_domain)
        : p_(std::move(problem)), budget_(budget), order_(order), words_(p_->words()) {
        budget_.validate();
        const std::size_t n = p_->num_vars();
        dom_ = p_->initial_domains();
        count_.resize(n);
        for (std::size_t v = 0; v < n; ++v) count_[v] = popcount(v);
        stamp_.assign(n, 0);
        // variable -> constraints adjacency, each constraint listed once per distinct variable
        std::vector<std::uint32_t> deg(n + 1, 0);
        for (std::size_t c = 0; c < p_->constraint_count(); ++c) {
            auto s = p_->scope(c);
            for (std::size_t i = 0; i < s.size(); ++i)
                if (std::find(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(i), s[i]) ==
                    s.begin() + static_cast<std::ptrdiff_t>(i))
                    ++deg[s[i] + 1];
        }
        for (std::size_t v = 0; v < n; ++v) deg[v + 1] += deg[v];
        adj_offset_ = deg;
        adj_.resize(deg[n]);
        std::vector<std::uint32_t> fill(deg.begin(), deg.end() - 1);
        repeats_.assign(p_->constraint_count(), 0);
        std::size_t max_arity = 0;
        for (std::size_t c = 0; c < p_->constraint_count(); ++c) {
            auto s = p_->scope(c);
            max_arity = std::max(max_arity, s.size());
            for (std::size_t i = 0; i < s.size(); ++i) {
                auto first = std::find(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(i), s[i]);
                if (first == s.begin() + static_cast<std::ptrdiff_t>(i))
                    adj_[fill[s[i]]++] = static_cast<std::uint32_t>(c);
                else
                    repeats_[c] = 1;
            }
        }
        support_.assign(std::max<std::size_t>(max_arity, 1) * words_, 0);
        fixed_.resize(max_arity);
        in_queue_.assign(p_->constraint_count(), 0);
        start_ = std::chrono::steady_clock::now();
    }

    /// Propagate the root. Returns false if the problem is already refuted.
    bool initialize() {
        if (initialized_) return ok_;
        initialized_ = true;
        for (std::size_t v = 0; v < count_.size(); ++v)
            if (count_[v] == 0) return ok_ = false;
        for (std::uint32_t c = 0; c < p_->constraint_count(); ++c) enqueue(c);
        if (p_->injective())
            for (std::uint32_t v = 0; v < count_.size(); ++v)
                if (count_[v] == 1) singles_.push_back(v);
        return ok_ = propagate();
    }

    /// Restrict `var` to `value` at the root and propagate.
    bool assign_root(std::uint32_t var, Element value) {
        if (!initialize()) return false;
        ++generation_;
        if (!has(var, value)) return ok_ = false;
        set_singleton(var, value);
        return ok_ = propagate();
    }

    Outcome solve_first(std::vector<Element>& out) {
        Outcome o = search(
            [&](std::span<const Element> s) {
                out.assign(s.begin(), s.end());
                return false;
            },
            {});
        return o;
    }

    /// Enumerate solutions in search order. With a nonempty `focus`, reports each distinct
    /// assignment of the focus variables once (with one full completion).
    /// Returns none when exhausted, found when stopped by the callback.
    Outcome search(const Callback& cb, std::span<const std::uint32_t> focus) {
        if (!initialize()) return Outcome::none;
        std::vector<char> is_focus(count_.size(), focus.empty() ? 1 : 0);
        for (auto v : focus) is_focus[v] = 1;
        const bool projected = !focus.empty();
        std::vector<Frame> frames;
        std::vector<Element> solution(count_.size());

        auto descend = [&]() -> bool { // true: solution reached
            auto v = select(is_focus, projected);
            if (!v) return true;
            frames.push_back({*v, -1, trail_.size(), is_focus[*v] != 0});
            return false;
        };

        bool at_solution = descend();
        for (;;) {
            if (at_solution) {
                for (std::size_t v = 0; v < count_.size(); ++v) solution[v] = lowest(v);
                if (!cb(solution)) return Outcome::found;
                if (projected)
                    while (!frames.empty() && !frames.back().focus) {
                        undo(frames.back().mark);
                        frames.pop_back();
                    }
            }
            // advance to the next viable value
            bool advanced = false;
            while (!frames.empty()) {
                Frame& f = frames.back();
                undo(f.mark);
                auto next = next_value(f.var, f.last);
                if (!next) {
                    frames.pop_back();
                    continue;
                }
                f.last = static_cast<std::int64_t>(*next);
                if (!charge_node()) return Outcome::budget_exceeded;
                ++generation_;
                set_singleton(f.var, *next);
                if (propagate()) {
                    advanced = true;
                    break;
                }
            }
            if (!advanced) return Outcome::none;
            at_solution = descend();
        }
    }

    std::uint64_t nodes() const noexcept { return nodes_; }

    std::optional<std::uint32_t> branching_variable() {
        std::vector<char> all(count_.size(), 1);
        return select(all, false);
    }

    std::vector<Element> values(std::uint32_t var) const {
        std::vector<Element> vals;
        for (std::int64_t a = -1;;) {
            auto n = next_value(var, a);
            if (!n) break;
            vals.push_back(*n);
            a = *n;
        }
        return vals;
    }

    void set_cancel(std::function<bool()> cancel) { cancel_ = std::move(cancel); }
    void set_shared_nodes(std::atomic<std::uint64_t>* counter) { shared_nodes_ = counter; }
    bool cancelled() const noexcept { return cancelled_; }

private:
    struct Frame {
        std::uint32_t var;
        std::int64_t last;
        std::size_t mark;
        bool focus;
    };
    struct TrailEntry {
        std::uint32_t var;
        std::uint32_t count;
        std::uint64_t stamp;
    };

    std::uint32_t popcount(std::size_t v) const {
        std::uint32_t c = 0;
        for (std::size_t w = 0; w < words_; ++w) c += static_cast<std::uint32_t>(std::popcount(dom_[v * words_ + w]));
        return c;
    }
    bool has(std::size_t v, Element a) const {
        return (dom_[v * words_ + (a >> 6)] >> (a & 63)) & 1U;
    }
    Element lowest(std::size_t v) const {
        for (std::size_t w = 0; w < words_; ++w)
            if (auto x = dom_[v * words_ + w]) return static_cast<Element>(w * 64 + std::countr_zero(x));
        return 0;
    }
    std::optional<Element> next_value(std::size_t v, std::int64_t after) const {
        std::uint64_t start = static_cast<std::uint64_t>(after + 1);
        for (std::size_t w = start >> 6; w < words_; ++w) {
            std::uint64_t x = dom_[v * words_ + w];
            if (w == (start >> 6)) x &= ~std::uint64_t{0} << (start & 63);
            if (x) return static_cast<Element>(w * 64 + std::countr_zero(x));
        }
        return std::nullopt;
    }

    std::optional<std::uint32_t> select(const std::vector<char>& is_focus, bool projected) const {
        std::optional<std::uint32_t> best;
        bool best_focus = false;
        for (std::uint32_t v = 0; v < count_.size(); ++v) {
            if (count_[v] <= 1) continue;
            const bool f = is_focus[v] != 0;
            if (order_ == VariableOrder::lexicographic) {
                if (!projected || f) return v;
                if (!best) best = v;
                continue;
            }
            if (!best || (projected && f && !best_focus) ||
                ((!projected || f == best_focus) && count_[v] < count_[*best])) {
                best = v;
                best_focus = f;
            }
        }
        return best;
    }

    bool charge_node() {
        ++nodes_;
        std::uint64_t total = nodes_;
        if (shared_nodes_) total = shared_nodes_->fetch_add(1) + 1;
        if (total > budget_.node_limit) return false;
        if ((nodes_ & 255) == 0) {
            if (cancel_ && cancel_()) {
                cancelled_ = true;
                return false;
            }
            if (std::chrono::steady_clock::now() - start_ > budget_.time_limit) return false;
        }
        return true;
    }

    void save(std::uint32_t v) {
        if (stamp_[v] == generation_) return;
        trail_.push_back({v, count_[v], stamp_[v]});
        trail_words_.insert(trail_words_.end(), dom_.begin() + static_cast<std::ptrdiff_t>(v * words_),
                            dom_.begin() + static_cast<std::ptrdiff_t>((v + 1) * words_));
        stamp_[v] = generation_;
    }

    void undo(std::size_t mark) {
        while (trail_.size() > mark) {
            const TrailEntry& e = trail_.back();
            std::copy(trail_words_.end() - static_cast<std::ptrdiff_t>(words_), trail_words_.end(),
                      dom_.begin() + static_cast<std::ptrdiff_t>(e.var * words_));
            count_[e.var] = e.count;
            stamp_[e.var] = e.stamp;
            trail_words_.resize(trail_words_.size() - words_);
            trail_.pop_back();
        }
    }

    bool fail() {
        for (auto q : queue_) in_queue_[q] = 0;
        queue_.clear();
        singles_.clear();
        return false;
    }

    void enqueue(std::uint32_t c) {
        if (!in_queue_[c]) {
            in_queue_[c] = 1;
            queue_.push_back(c);
        }
    }

    void touched(std::uint32_t v, std::int64_t except) {
        for (std::uint32_t k = adj_offset_[v]; k < adj_offset_[v + 1]; ++k)
            if (adj_[k] != except) enqueue(adj_[k]);
        if (p_->injective() && count_[v] == 1) singles_.push_back(v);
    }

    void set_singleton(std::uint32_t v, Element a) {
        save(v);
        std::fill_n(dom_.begin() + static_cast<std::ptrdiff_t>(v * words_), words_, 0);
        dom_[v * words_ + (a >> 6)] = std::uint64_t{1} << (a & 63);
        count_[v] = 1;
        touched(v, -1);
    }

    bool propagate() {
        for (;;) {
            while (!queue_.empty()) {
                std::uint32_t c = queue_.back();
                queue_.pop_back();
                in_queue_[c] = 0;
                if (!revise(c)) return fail();
            }
            if (singles_.empty()) return true;
            while (!singles_.empty()) {
                std::uint32_t v = singles_.back();
                singles_.pop_back();
                if (count_[v] != 1) {
                    if (count_[v] == 0) return fail();
                    continue;
                }
                const Element a = lowest(v);
                for (std::uint32_t u = 0; u < count_.size(); ++u) {
                    if (u == v || !has(u, a)) continue;
                    save(u);
                    dom_[u * words_ + (a >> 6)] &= ~(std::uint64_t{1} << (a & 63));
                    if (--count_[u] == 0) return fail();
                    touched(u, -1);
                }
            }
        }
    }

    bool revise(std::uint32_t c) {
        auto scope = p_->scope(c);
        const Relation& rel = p_->relation(p_->constraint_relation(c));
        const std::size_t k = scope.size();
        bool all_fixed = true;
        for (std::size_t i = 0; i < k; ++i) {
            if (count_[scope[i]] != 1) {
                all_fixed = false;
                break;
            }
            fixed_[i] = lowest(scope[i]);
        }
        if (all_fixed) return rel.contains(std::span<const Element>(fixed_.data(), k));

        std::fill_n(support_.begin(), k * words_, 0);
        const Element* data = rel.flat().data();
        const bool rep = repeats_[c] != 0;
        for (std::size_t t = 0; t < rel.size(); ++t) {
            const Element* tup = data + t * k;
            bool ok = true;
            for (std::size_t i = 0; i < k && ok; ++i) ok = has(scope[i], tup[i]);
            if (ok && rep)
                for (std::size_t i = 0; i < k && ok; ++i)
                    for (std::size_t j = i + 1; j < k && ok; ++j)
                        if (scope[i] == scope[j] && tup[i] != tup[j]) ok = false;
            if (!ok) continue;
            for (std::size_t i = 0; i < k; ++i)
                support_[i * words_ + (tup[i] >> 6)] |= std::uint64_t{1} << (tup[i] & 63);
        }
        for (std::size_t i = 0; i < k; ++i) {
            const std::uint32_t v = scope[i];
            bool changed = false;
            for (std::size_t w = 0; w < words_; ++w)
                if ((dom_[v * words_ + w] & support_[i * words_ + w]) != dom_[v * words_ + w]) {
                    changed = true;
                    break;
                }
            if (!changed) continue;
            save(v);
            for (std::size_t w = 0; w < words_; ++w) dom_[v * words_ + w] &= support_[i * words_ + w];
            count_[v] = popcount(v);
            if (count_[v] == 0) return false;
            touched(v, c);
        }
        return true;
    }

    std::shared_ptr<const Problem> p_;
    SearchBudget budget_;
    VariableOrder order_;
    std::size_t words_;
    std::vector<std::uint64_t> dom_;
    std::vector<std::uint32_t> count_;
    std::vector<std::uint64_t> stamp_;
    std::uint64_t generation_ = 1;
    std::vector<TrailEntry> trail_;
    std::vector<std::uint64_t> trail_words_;
    std::vector<std::uint32_t> adj_offset_;
    std::vector<std::uint32_t> adj_;
    std::vector<char> repeats_;
    std::vector<std::uint64_t> support_;
    std::vector<Element> fixed_;
    std::vector<std::uint32_t> queue_;
    std::vector<char> in_queue_;
    std::vector<std::uint32_t> singles_;
    std::uint64_t nodes_ = 0;
    std::atomic<std::uint64_t>* shared_nodes_ = nullptr;
    std::function<bool()> cancel_;
    bool cancelled_ = false;
    bool initialized_ = false;
    bool ok_ = true;
    std::chrono::steady_clock::time_point start_;
};

struct FirstSolution {
    Outcome outcome = Outcome::none;
    std::vector<Element> assignment;
    SearchStats stats;
};

/// First solution in search order. With parallel_width > 1 the branching variable of the root
/// is split across workers; the witness returned is the one from the least root value that has
/// a solution, which is exactly the sequential witness.
inline FirstSolution solve_first(std::shared_ptr<const Problem> problem, const SearchBudget& budget,
                                 VariableOrder order = VariableOrder::smallest_domain) {
    FirstSolution result;
    Solver root(problem, budget, order);
    if (budget.parallel_width <= 1) {
        result.outcome = root.solve_first(result.assignment);
        result.stats.nodes = root.nodes();
        return result;
    }
    if (!root.initialize()) return result;
    auto var = root.branching_variable();
    if (!var) {
        result.outcome = root.solve_first(result.assignment);
        return result;
    }
    const std::vector<Element> vals = root.values(*var);
    std::vector<std::optional<std::vector<Element>>> found(vals.size());
    std::vector<char> exceeded(vals.size(), 0);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> best{std::numeric_limits<std::size_t>::max()};
    std::atomic<std::uint64_t> nodes{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= vals.size() || i > best.load()) return;
            Solver s = root;
            s.set_shared_nodes(&nodes);
            s.set_cancel([&best, i] { return best.load() < i; });
            if (!s.assign_root(*var, vals[i])) continue;
            std::vector<Element> sol;
            Outcome o = s.solve_first(sol);
            if (o == Outcome::found) {
                found[i] = std::move(sol);
                std::size_t cur = best.load();
                while (i < cur && !best.compare_exchange_weak(cur, i)) {}
            } else if (o == Outcome::budget_exceeded && !s.cancelled()) {
                exceeded[i] = 1;
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned width = std::min<unsigned>(budget.parallel_width, static_cast<unsigned>(vals.size()));
    for (unsigned t = 0; t < width; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    result.stats.nodes = nodes.load();
    if (best.load() != std::numeric_limits<std::size_t>::max()) {
        result.outcome = Outcome::found;
        result.assignment = std::move(*found[best.load()]);
    } else if (std::any_of(exceeded.begin(), exceeded.end(), [](char c) { return c != 0; })) {
        result.outcome = Outcome::budget_exceeded;
    }
    return result;
}

/// Disjoint-set forest used to merge table cells before search.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) std::swap(a, b);
        parent_[a] = b; // smallest index is the representative
    }

private:
    std::vector<std::size_t> parent_;
};

} // namespace polyclone::csp
