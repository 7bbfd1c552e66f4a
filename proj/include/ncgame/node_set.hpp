/*
 * Copyright 2026 The ncgame Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace ncgame {

using NodeIndex = std::uint32_t;

/// Dense bitset over the node indices [0, universe) of one graph.
class NodeSet {
public:
    NodeSet() = default;
    explicit NodeSet(std::size_t universe) : universe_(universe), words_((universe + 63) / 64, 0) {}
    NodeSet(std::size_t universe, std::initializer_list<NodeIndex> members) : NodeSet(universe)
    {
        for (NodeIndex v : members) insert(v);
    }

    std::size_t universe() const noexcept { return universe_; }

    bool contains(NodeIndex v) const noexcept
    {
        return v < universe_ && (words_[v / 64] >> (v % 64)) & 1u;
    }

    void insert(NodeIndex v)
    {
        check(v);
        words_[v / 64] |= std::uint64_t{1} << (v % 64);
    }

    void erase(NodeIndex v)
    {
        check(v);
        words_[v / 64] &= ~(std::uint64_t{1} << (v % 64));
    }

    std::size_t size() const noexcept
    {
        std::size_t n = 0;
        for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    bool empty() const noexcept
    {
        for (auto w : words_)
            if (w) return false;
        return true;
    }

    NodeSet& operator|=(const NodeSet& other)
    {
        same_universe(other);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
        return *this;
    }

    NodeSet& operator&=(const NodeSet& other)
    {
        same_universe(other);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
        return *this;
    }

    /// Set difference: removes every member of other.
    NodeSet& operator-=(const NodeSet& other)
    {
        same_universe(other);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
        return *this;
    }

    friend NodeSet operator|(NodeSet a, const NodeSet& b) { return a |= b; }
    friend NodeSet operator&(NodeSet a, const NodeSet& b) { return a &= b; }
    friend NodeSet operator-(NodeSet a, const NodeSet& b) { return a -= b; }

    bool is_subset_of(const NodeSet& other) const
    {
        same_universe(other);
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~other.words_[i]) return false;
        return true;
    }

    /// Members in increasing index order.
    std::vector<NodeIndex> members() const
    {
        std::vector<NodeIndex> out;
        for (std::size_t i = 0; i < words_.size(); ++i) {
            std::uint64_t w = words_[i];
            while (w) {
                out.push_back(static_cast<NodeIndex>(i * 64 + static_cast<std::size_t>(std::countr_zero(w))));
                w &= w - 1;
            }
        }
        return out;
    }

    friend bool operator==(const NodeSet&, const NodeSet&) = default;

private:
    void check(NodeIndex v) const
    {
        if (v >= universe_) throw std::out_of_range("node index outside NodeSet universe");
    }
    void same_universe(const NodeSet& other) const
    {
        if (other.universe_ != universe_) throw std::invalid_argument("NodeSet universes differ");
    }

    std::size_t universe_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace ncgame
