#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <string>
#include <vector>

#include "dpmpqp/errors.hpp"

namespace dpmpqp {

/// Strictly increasing list of 1-based constraint indices.
class ActiveSet {
public:
    ActiveSet() = default;

    /// Takes indices in any order; duplicates are rejected.
    explicit ActiveSet(std::vector<int> indices) : idx_(std::move(indices)) {
        std::sort(idx_.begin(), idx_.end());
        if (std::adjacent_find(idx_.begin(), idx_.end()) != idx_.end())
            throw InvalidInput("ActiveSet: duplicate index");
        if (!idx_.empty() && idx_.front() < 1) throw IndexOutOfRange("ActiveSet: indices are 1-based");
    }

    ActiveSet(std::initializer_list<int> indices) : ActiveSet(std::vector<int>(indices)) {}

    const std::vector<int>& indices() const { return idx_; }
    std::size_t size() const { return idx_.size(); }
    bool empty() const { return idx_.empty(); }
    auto begin() const { return idx_.begin(); }
    auto end() const { return idx_.end(); }
    int max() const { return idx_.empty() ? 0 : idx_.back(); }

    bool contains(int i) const { return std::binary_search(idx_.begin(), idx_.end(), i); }

    bool subset_of(const ActiveSet& other) const {
        return std::includes(other.idx_.begin(), other.idx_.end(), idx_.begin(), idx_.end());
    }

    /// True iff every index is at most `last`, i.e. A ⊆ {1, ..., last}.
    bool within(int last) const { return max() <= last; }

    /// Minkowski sum with {offset}.
    ActiveSet shifted(int offset) const {
        ActiveSet s;
        s.idx_.reserve(idx_.size());
        for (int i : idx_) s.idx_.push_back(i + offset);
        if (!s.idx_.empty() && s.idx_.front() < 1) throw IndexOutOfRange("ActiveSet::shifted: index below 1");
        return s;
    }

    ActiveSet united(const ActiveSet& other) const {
        ActiveSet s;
        std::set_union(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                       std::back_inserter(s.idx_));
        return s;
    }

    /// Appends an index larger than max().
    ActiveSet appended(int i) const {
        ActiveSet s = *this;
        if (i <= max()) throw InvalidInput("ActiveSet::appended: index must exceed max()");
        s.idx_.push_back(i);
        return s;
    }

    /// Ordering by cardinality, then lexicographically.
    friend std::strong_ordering operator<=>(const ActiveSet& a, const ActiveSet& b) {
        if (a.size() != b.size()) return a.size() <=> b.size();
        return a.idx_ <=> b.idx_;
    }
    friend bool operator==(const ActiveSet&, const ActiveSet&) = default;

    std::string to_string() const {
        std::string s = "{";
        for (std::size_t k = 0; k < idx_.size(); ++k) {
            if (k) s += ",";
            s += std::to_string(idx_[k]);
        }
        return s + "}";
    }

private:
    std::vector<int> idx_;
};

inline ActiveSet shift(const ActiveSet& a, int offset) { return a.shifted(offset); }

/// Fixed-width bit mask over 1-based indices, used for fast subset tests.
class IndexMask {
public:
    IndexMask() = default;
    explicit IndexMask(const ActiveSet& a) {
        words_.assign(static_cast<std::size_t>(a.max() / 64 + 1), 0);
        for (int i : a) words_[static_cast<std::size_t>(i / 64)] |= std::uint64_t{1} << (i % 64);
    }

    /// True iff this ⊆ other.
    bool subset_of(const IndexMask& other) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            const std::uint64_t o = w < other.words_.size() ? other.words_[w] : 0;
            if (words_[w] & ~o) return false;
        }
        return true;
    }

private:
    std::vector<std::uint64_t> words_;
};

/// Antichain of minimal infeasible active sets.
class PrunedStore {
public:
    /// True iff `a` is a superset of (or equal to) a stored set.
    bool covers(const ActiveSet& a) const { return covers(IndexMask(a)); }

    bool covers(const IndexMask& mask) const {
        return std::any_of(masks_.begin(), masks_.end(),
                           [&](const IndexMask& p) { return p.subset_of(mask); });
    }

    /// Inserts `a` unless already covered; drops stored supersets of `a`.
    void add(const ActiveSet& a) {
        const IndexMask mask(a);
        if (covers(mask)) return;
        std::size_t out = 0;
        for (std::size_t k = 0; k < sets_.size(); ++k) {
            if (mask.subset_of(masks_[k])) continue;
            if (out != k) {
                sets_[out] = std::move(sets_[k]);
                masks_[out] = std::move(masks_[k]);
            }
            ++out;
        }
        sets_.resize(out);
        masks_.resize(out);
        sets_.push_back(a);
        masks_.push_back(mask);
    }

    const std::vector<ActiveSet>& sets() const { return sets_; }
    std::size_t size() const { return sets_.size(); }

private:
    std::vector<ActiveSet> sets_;
    std::vector<IndexMask> masks_;
};

}  // namespace dpmpqp
