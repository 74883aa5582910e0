#pragma once

// Trees on vertices 1..N: validation, AHU canonical codes, enumeration of
// isomorphism classes, centres, reverse level order labelling, the
// single-nonzero column check, and bipartition enumeration.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cvgme/error.hpp"

namespace cvgme {

using Edge = std::pair<int, int>;

class Tree {
public:
    Tree() = default;

    Tree(int order, std::vector<Edge> edges) : order_(order), edges_(std::move(edges)) {
        if (order_ < 2) throw error(errc::invalid_tree, "order must be >= 2");
        if (static_cast<int>(edges_.size()) != order_ - 1)
            throw error(errc::invalid_tree, "a tree on N vertices has N-1 edges");
        std::vector<int> parent(order_ + 1);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
        for (auto& [u, v] : edges_) {
            if (u < 1 || v < 1 || u > order_ || v > order_ || u == v)
                throw error(errc::invalid_tree, "edge endpoint out of range");
            if (u > v) std::swap(u, v);
            const int a = find(u), b = find(v);
            if (a == b) throw error(errc::invalid_tree, "edges contain a cycle");
            parent[a] = b;
        }
        std::sort(edges_.begin(), edges_.end());
    }

    int order() const noexcept { return order_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    std::vector<std::vector<int>> neighbours() const {
        std::vector<std::vector<int>> adj(order_ + 1);
        for (auto [u, v] : edges_) {
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        for (auto& a : adj) std::sort(a.begin(), a.end());
        return adj;
    }

    // Zero-one N x N matrix, row-major, 0-based.
    std::vector<std::vector<int>> adjacency() const {
        std::vector<std::vector<int>> a(order_, std::vector<int>(order_, 0));
        for (auto [u, v] : edges_) a[u - 1][v - 1] = a[v - 1][u - 1] = 1;
        return a;
    }

    bool operator==(const Tree&) const = default;

private:
    int order_ = 0;
    std::vector<Edge> edges_;
};

// A tree whose vertex ids are already the labels; the root is vertex N.
// parent(i) is the unique neighbour j > i once the labelling validates.
struct LabeledTree {
    Tree tree;

    int order() const noexcept { return tree.order(); }
    const std::vector<Edge>& edges() const noexcept { return tree.edges(); }
};

struct LabelingCheck {
    bool ok = true;
    int failing_column = 0; // 1-based; 0 when ok
};

// Every column segment A_{i+1:N,i}, i = 1..N-1, has exactly one nonzero.
inline LabelingCheck validate_labeling(const LabeledTree& lt) {
    const auto a = lt.tree.adjacency();
    const int n = lt.order();
    for (int i = 0; i < n - 1; ++i) {
        int nz = 0;
        for (int j = i + 1; j < n; ++j) nz += a[j][i];
        if (nz != 1) return {false, i + 1};
    }
    return {};
}

// parent[i] for i = 1..N-1 under a validated labelling; parent[N] = 0.
inline std::vector<int> parents(const LabeledTree& lt) {
    const auto chk = validate_labeling(lt);
    if (!chk.ok)
        throw error(errc::structural, "labelling fails the single-nonzero check at column " +
                                          std::to_string(chk.failing_column));
    std::vector<int> par(lt.order() + 1, 0);
    for (auto [u, v] : lt.edges()) par[u] = v; // edges are stored with u < v
    return par;
}

// AHU code of the subtree hanging at v when entered from `from`.
namespace detail {

inline std::string ahu(const std::vector<std::vector<int>>& adj, int v, int from) {
    std::vector<std::string> kids;
    for (int w : adj[v])
        if (w != from) kids.push_back(ahu(adj, w, v));
    std::sort(kids.begin(), kids.end());
    std::string s = "(";
    for (auto& k : kids) s += k;
    return s + ")";
}

inline int subtree_size(const std::vector<std::vector<int>>& adj, int v, int from) {
    int s = 1;
    for (int w : adj[v])
        if (w != from) s += subtree_size(adj, w, v);
    return s;
}

} // namespace detail

struct Center {
    int first = 0;
    int second = 0; // 0 for a vertex centre

    bool is_vertex() const noexcept { return second == 0; }
};

// Iterated leaf deletion.
inline Center find_center(const Tree& t) {
    const auto adj = t.neighbours();
    std::vector<int> deg(t.order() + 1, 0);
    std::vector<int> layer;
    for (int v = 1; v <= t.order(); ++v) {
        deg[v] = static_cast<int>(adj[v].size());
        if (deg[v] <= 1) layer.push_back(v);
    }
    int remaining = t.order();
    while (remaining > 2) {
        remaining -= static_cast<int>(layer.size());
        std::vector<int> next;
        for (int v : layer)
            for (int w : adj[v])
                if (--deg[w] == 1) next.push_back(w);
        layer = std::move(next);
    }
    std::sort(layer.begin(), layer.end());
    if (layer.size() == 1) return {layer[0], 0};
    return {layer[0], layer[1]};
}

// Canonical code of an unrooted tree: AHU code rooted at the centre, the
// lexicographically larger side first for an edge centre.
inline std::string canonical_code(const Tree& t) {
    const auto adj = t.neighbours();
    const Center c = find_center(t);
    if (c.is_vertex()) return detail::ahu(adj, c.first, 0);
    std::string a = detail::ahu(adj, c.first, c.second);
    std::string b = detail::ahu(adj, c.second, c.first);
    if (a < b) std::swap(a, b);
    return "[" + a + b + "]";
}

namespace detail {

// Builds a tree from a rooted AHU code, vertex ids in preorder.
inline void build_from_code(const std::string& code, std::size_t& pos, int parent, int& next_id,
                            std::vector<Edge>& edges) {
    const int me = ++next_id;
    if (parent) edges.emplace_back(parent, me);
    ++pos; // '('
    while (code[pos] == '(') build_from_code(code, pos, me, next_id, edges);
    ++pos; // ')'
}

// Rooted trees on n vertices as sorted AHU codes, children non-increasing.
inline std::vector<std::vector<std::string>> rooted_codes(int max_n) {
    std::vector<std::vector<std::string>> table{{}, {"()"}};
    while (static_cast<int>(table.size()) <= max_n) {
        const int n = static_cast<int>(table.size());
        std::set<std::string> out;
        // Children: a multiset of rooted trees with sizes summing to n-1.
        std::function<void(int, std::vector<std::string>&)> rec = [&](int left, std::vector<std::string>& kids) {
            if (left == 0) {
                std::vector<std::string> k = kids;
                std::sort(k.begin(), k.end());
                std::string s = "(";
                for (auto& c : k) s += c;
                out.insert(s + ")");
                return;
            }
            for (int sz = 1; sz <= left; ++sz)
                for (const auto& c : table[sz]) {
                    // enforce non-increasing (size, code) to avoid permutations
                    if (!kids.empty()) {
                        const auto& last = kids.back();
                        const int last_sz = static_cast<int>(std::count(last.begin(), last.end(), '('));
                        if (sz > last_sz || (sz == last_sz && c > last)) continue;
                    }
                    kids.push_back(c);
                    rec(left - sz, kids);
                    kids.pop_back();
                }
        };
        std::vector<std::string> kids;
        rec(n - 1, kids);
        table.emplace_back(out.begin(), out.end());
    }
    return table;
}

} // namespace detail

// One representative per isomorphism class, sorted by canonical code.
inline std::vector<Tree> enumerate_trees(int order) {
    if (order < 2 || order > 12) throw error(errc::unsupported_order, "order must lie in [2, 12]");
    const auto rooted = detail::rooted_codes(order);
    std::map<std::string, Tree> classes;
    for (const auto& code : rooted[order]) {
        std::vector<Edge> edges;
        std::size_t pos = 0;
        int next_id = 0;
        detail::build_from_code(code, pos, 0, next_id, edges);
        Tree t(order, edges);
        classes.emplace(canonical_code(t), t);
    }
    std::vector<Tree> out;
    out.reserve(classes.size());
    for (auto& [code, t] : classes) out.push_back(std::move(t));
    return out;
}

// Reverse level order labelling from the centre. Children are ordered by
// descending subtree size, then descending AHU code, then smallest id. For
// an edge centre the default root is the endpoint on the larger side.
inline LabeledTree reverse_level_order_label(const Tree& t, std::optional<int> root_choice = std::nullopt) {
    const auto adj = t.neighbours();
    const Center c = find_center(t);
    int root = c.first;
    if (root_choice) {
        if (*root_choice != c.first && *root_choice != c.second)
            throw error(errc::invalid_root, "root must be the centre vertex or an endpoint of the centre edge");
        root = *root_choice;
    } else if (!c.is_vertex()) {
        const int sa = detail::subtree_size(adj, c.first, c.second);
        const int sb = detail::subtree_size(adj, c.second, c.first);
        if (sb > sa || (sb == sa && detail::ahu(adj, c.second, c.first) > detail::ahu(adj, c.first, c.second)))
            root = c.second;
    }

    std::vector<int> label(t.order() + 1, 0);
    int next = t.order();
    std::vector<std::pair<int, int>> level{{root, 0}};
    while (!level.empty()) {
        std::vector<std::pair<int, int>> below;
        for (auto [v, from] : level) {
            label[v] = next--;
            struct Kid {
                int size;
                std::string code;
                int id;
            };
            std::vector<Kid> kids;
            for (int w : adj[v])
                if (w != from) kids.push_back({detail::subtree_size(adj, w, v), detail::ahu(adj, w, v), w});
            std::sort(kids.begin(), kids.end(), [](const Kid& a, const Kid& b) {
                if (a.size != b.size) return a.size > b.size;
                if (a.code != b.code) return a.code > b.code;
                return a.id < b.id;
            });
            for (auto& k : kids) below.emplace_back(k.id, v);
        }
        level = std::move(below);
    }
    std::vector<Edge> edges;
    for (auto [u, v] : t.edges()) edges.emplace_back(label[u], label[v]);
    LabeledTree lt{Tree(t.order(), edges)};
    const auto chk = validate_labeling(lt);
    if (!chk.ok)
        throw error(errc::structural, "reverse level order labelling failed the column check at " +
                                          std::to_string(chk.failing_column));
    return lt;
}

inline LabeledTree standard_linear_label(int order) {
    if (order < 2) throw error(errc::invalid_tree, "order must be >= 2");
    std::vector<Edge> edges;
    for (int i = 1; i < order; ++i) edges.emplace_back(i, i + 1);
    return {Tree(order, edges)};
}

// Canonical split: side I holds mode 1. Stored as a bitmask over modes.
struct Bipartition {
    int modes = 0;
    std::uint32_t mask_i = 0; // bit m-1 set when mode m is in side I

    bool in_i(int mode) const noexcept { return mask_i & (1u << (mode - 1)); }

    std::vector<int> side_i() const {
        std::vector<int> s;
        for (int m = 1; m <= modes; ++m)
            if (in_i(m)) s.push_back(m);
        return s;
    }

    std::vector<int> side_j() const {
        std::vector<int> s;
        for (int m = 1; m <= modes; ++m)
            if (!in_i(m)) s.push_back(m);
        return s;
    }

    std::string to_string() const {
        std::string s;
        for (int m : side_i()) s += std::to_string(m) + (m > 9 ? "," : "");
        s += "|";
        for (int m : side_j()) s += std::to_string(m) + (m > 9 ? "," : "");
        return s;
    }

    bool operator==(const Bipartition&) const = default;
};

// All 2^{N-1}-1 canonical splits, side I sorted and listed lexicographically.
inline std::vector<Bipartition> bipartitions(int modes) {
    if (modes < 2) throw error(errc::invalid_dimension, "needs at least two modes");
    if (modes > 22) throw error(errc::size_limit, "more than 22 modes");
    std::vector<Bipartition> out;
    const std::uint32_t count = (1u << (modes - 1)) - 1u;
    for (std::uint32_t rest = 0; rest < count; ++rest) out.push_back({modes, 1u | (rest << 1)});
    std::sort(out.begin(), out.end(),
              [](const Bipartition& a, const Bipartition& b) { return a.side_i() < b.side_i(); });
    return out;
}

// Newline-separated "u v" pairs, 1-based; '#' starts a comment.
inline Tree parse_tree(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<Edge> edges;
    int order = 0;
    while (std::getline(in, line)) {
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        std::istringstream ls(line);
        int u = 0, v = 0;
        if (!(ls >> u)) continue;
        if (!(ls >> v)) throw error(errc::parse, "edge line needs two vertices: '" + line + "'");
        edges.emplace_back(u, v);
        order = std::max({order, u, v});
    }
    return Tree(order, edges);
}

inline std::string format_tree(const Tree& t) {
    std::string s;
    for (auto [u, v] : t.edges()) s += std::to_string(u) + " " + std::to_string(v) + "\n";
    return s;
}

inline const std::vector<std::string>& fixture_tree_keys() {
    static const std::vector<std::string> keys{"3", "4a", "4b", "5a", "5b", "5c", "6a", "6b", "6c", "6d", "6e", "6f"};
    return keys;
}

// The labelled trees of the non-isomorphic catalogue for N = 3..6.
inline LabeledTree fixture_tree(const std::string& key) {
    static const std::map<std::string, std::pair<int, std::vector<Edge>>> table{
        {"3", {3, {{1, 2}, {2, 3}}}},
        {"4a", {4, {{1, 2}, {2, 3}, {3, 4}}}},
        {"4b", {4, {{1, 4}, {2, 4}, {3, 4}}}},
        {"5a", {5, {{1, 2}, {2, 3}, {3, 4}, {4, 5}}}},
        {"5b", {5, {{1, 5}, {2, 5}, {3, 5}, {4, 5}}}},
        {"5c", {5, {{1, 2}, {2, 5}, {4, 5}, {3, 5}}}},
        {"6a", {6, {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}}}},
        {"6b", {6, {{1, 6}, {2, 6}, {3, 6}, {4, 6}, {5, 6}}}},
        {"6c", {6, {{2, 5}, {5, 6}, {3, 6}, {1, 3}, {4, 6}}}},
        {"6d", {6, {{3, 5}, {5, 6}, {4, 6}, {1, 4}, {2, 4}}}},
        {"6e", {6, {{1, 5}, {2, 5}, {5, 6}, {4, 6}, {3, 6}}}},
        {"6f", {6, {{5, 6}, {4, 6}, {3, 4}, {1, 4}, {2, 4}}}},
    };
    const auto it = table.find(key);
    if (it == table.end()) throw error(errc::lookup, "unknown tree key '" + key + "'");
    return {Tree(it->second.first, it->second.second)};
}

} // namespace cvgme
