#pragma once

#include <cstddef>
#include <queue>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace lipro {

/// Exact rational scalar for coupling computations. Doubles convert to
/// cpp_rational without rounding, so flow values are exact for any weights
/// that arrive as IEEE doubles.
using Rational = boost::multiprecision::cpp_rational;

/// Dinic max-flow over exact rationals. Graph sizes here are tiny (atoms of
/// two finitely supported measures plus source and sink), so simplicity and
/// determinism win over asymptotics. Supports incremental edge insertion:
/// run() continues from the current feasible flow.
class MaxFlow {
public:
    explicit MaxFlow(std::size_t nodes) : head_(nodes, -1) {}

    std::size_t add_edge(std::size_t from, std::size_t to, Rational capacity) {
        const std::size_t id = edges_.size();
        edges_.push_back({to, head_[from], std::move(capacity), 0});
        head_[from] = static_cast<int>(id);
        edges_.push_back({from, head_[to], Rational(0), 0});
        head_[to] = static_cast<int>(id + 1);
        return id;
    }

    Rational flow_on(std::size_t edge_id) const { return edges_[edge_id].flow; }

    /// Augments the current flow to a maximum flow from s to t and returns
    /// the total value (including flow pushed by earlier calls).
    Rational run(std::size_t s, std::size_t t) {
        Rational bound = 1;
        for (std::size_t e = 0; e < edges_.size(); e += 2) bound += edges_[e].cap;
        while (build_levels(s, t)) {
            iter_ = head_;
            for (;;) {
                const Rational pushed = push(s, t, bound);
                if (pushed == 0) break;
                total_ += pushed;
            }
        }
        return total_;
    }

private:
    struct Edge {
        std::size_t to;
        int next;
        Rational cap;
        Rational flow;
    };

    bool build_levels(std::size_t s, std::size_t t) {
        level_.assign(head_.size(), -1);
        std::queue<std::size_t> q;
        level_[s] = 0;
        q.push(s);
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop();
            for (int e = head_[u]; e != -1; e = edges_[e].next) {
                const Edge& ed = edges_[e];
                if (level_[ed.to] < 0 && ed.flow < ed.cap) {
                    level_[ed.to] = level_[u] + 1;
                    q.push(ed.to);
                }
            }
        }
        return level_[t] >= 0;
    }

    Rational push(std::size_t u, std::size_t t, const Rational& limit) {
        if (u == t) return limit;
        for (int& e = iter_[u]; e != -1; e = edges_[e].next) {
            Edge& ed = edges_[e];
            if (level_[ed.to] != level_[u] + 1 || !(ed.flow < ed.cap)) continue;
            Rational avail = ed.cap - ed.flow;
            if (limit < avail) avail = limit;
            const Rational pushed = push(ed.to, t, avail);
            if (pushed > 0) {
                ed.flow += pushed;
                edges_[e ^ 1].flow -= pushed;
                return pushed;
            }
        }
        level_[u] = -1;
        return Rational(0);
    }

    std::vector<int> head_;
    std::vector<Edge> edges_;
    std::vector<int> level_;
    std::vector<int> iter_;
    Rational total_ = 0;
};

}  // namespace lipro
