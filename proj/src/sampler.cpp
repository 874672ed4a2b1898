#include "i2b/sampler.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace i2b {

void SamplingConfig::validate() const {
    if (hops != 1 && hops != 2) throw std::invalid_argument("hops must be 1 or 2");
    if (max_neighbors < 1) throw std::invalid_argument("max_neighbors must be >= 1");
}

Matrix Subgraph::dense_adjacency(bool use_frequency) const {
    Matrix A(node_count(), node_count());
    for (const SubgraphEdge& e : edges) {
        const double w = use_frequency ? e.frequency : e.volume;
        A.at(e.u, e.v) = w;
        if (symmetric) A.at(e.v, e.u) = w;
    }
    return A;
}

std::vector<AccountHandle> rank_neighbors(const TransactionGraph& g, AccountHandle account,
                                          int n_u) {
    if (account >= g.account_count()) throw std::out_of_range("unknown account handle");

    // Bidirectional volume per partner: volume(a->u) + volume(u->a). Both
    // adjacency lists are sorted by peer, so a two-pointer merge gives each
    // partner exactly once with a fixed summation order.
    const auto& oe = g.out_edges(account);
    const auto& ie = g.in_edges(account);
    std::vector<std::pair<AccountHandle, double>> score;
    score.reserve(oe.size() + ie.size());
    size_t i = 0, j = 0;
    while (i < oe.size() || j < ie.size()) {
        if (j >= ie.size() || (i < oe.size() && oe[i].peer < ie[j].peer)) {
            score.emplace_back(oe[i].peer, oe[i].volume);
            ++i;
        } else if (i >= oe.size() || ie[j].peer < oe[i].peer) {
            score.emplace_back(ie[j].peer, ie[j].volume);
            ++j;
        } else {
            score.emplace_back(oe[i].peer, oe[i].volume + ie[j].volume);
            ++i;
            ++j;
        }
    }

    std::sort(score.begin(), score.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<int>(score.size()) > n_u) score.resize(n_u);

    std::vector<AccountHandle> out;
    out.reserve(score.size());
    for (const auto& [peer, s] : score) out.push_back(peer);
    return out;
}

Subgraph extract_subgraph(const TransactionGraph& g, AccountHandle account,
                          const SamplingConfig& cfg) {
    cfg.validate();
    if (account >= g.account_count()) throw std::out_of_range("unknown account handle");

    Subgraph sub;
    sub.symmetric = cfg.symmetrize;

    std::vector<AccountHandle> order;
    std::unordered_set<AccountHandle> seen;
    auto add_node = [&](AccountHandle a) {
        if (seen.insert(a).second) order.push_back(a);
    };

    add_node(account);
    const auto hop1 = rank_neighbors(g, account, cfg.max_neighbors);
    for (AccountHandle v : hop1) add_node(v);
    if (cfg.hops == 2) {
        for (AccountHandle v : hop1) {
            if (cfg.eosio_mode && is_system_account(g.name(v))) continue;
            for (AccountHandle u : rank_neighbors(g, v, cfg.max_neighbors)) add_node(u);
        }
    }

    sub.nodes = order;
    sub.center = 0;
    sub.isolated = hop1.empty();
    sub.node_kinds.reserve(order.size());
    for (AccountHandle a : order) sub.node_kinds.push_back(g.kind(a));

    std::unordered_map<AccountHandle, int> local;
    local.reserve(order.size());
    for (int i = 0; i < static_cast<int>(order.size()); ++i) local.emplace(order[i], i);

    // Induced edges: every aggregated graph edge with both endpoints selected.
    for (int i = 0; i < static_cast<int>(order.size()); ++i) {
        for (const AdjEdge& e : g.out_edges(order[i])) {
            auto it = local.find(e.peer);
            if (it == local.end()) continue;
            const int j = it->second;
            if (cfg.symmetrize) {
                if (i < j) {
                    // fold the reverse direction in the same pass
                    sub.edges.push_back(SubgraphEdge{
                        i, j, e.volume + g.volume(order[j], order[i]),
                        static_cast<double>(e.frequency) +
                            static_cast<double>(g.frequency(order[j], order[i]))});
                } else if (i > j && g.volume(order[j], order[i]) == 0.0 &&
                           g.frequency(order[j], order[i]) == 0) {
                    // reverse-only edge, not covered by the i < j pass
                    sub.edges.push_back(SubgraphEdge{j, i, e.volume,
                                                     static_cast<double>(e.frequency)});
                }
            } else {
                sub.edges.push_back(SubgraphEdge{i, j, e.volume,
                                                 static_cast<double>(e.frequency)});
            }
        }
    }
    std::sort(sub.edges.begin(), sub.edges.end(), [](const SubgraphEdge& a, const SubgraphEdge& b) {
        if (a.u != b.u) return a.u < b.u;
        return a.v < b.v;
    });
    return sub;
}

std::vector<Subgraph> extract_dataset(const TransactionGraph& g,
                                      const std::vector<AccountHandle>& accounts,
                                      const SamplingConfig& cfg, int threads) {
    cfg.validate();
    for (AccountHandle a : accounts)
        if (g.label(a) < 0)
            throw std::runtime_error("account " + g.name(a) + " has no label");

    std::vector<Subgraph> out(accounts.size());
    auto work = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            out[i] = extract_subgraph(g, accounts[i], cfg);
            out[i].id = static_cast<int64_t>(i);
            out[i].label = g.label(accounts[i]);
        }
    };

    const size_t n = accounts.size();
    if (threads <= 1 || n < 2) {
        work(0, n);
        return out;
    }
    // Static partition: each slot is written by exactly one worker, so the
    // result matches the sequential run regardless of scheduling.
    const size_t n_workers = std::min<size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    const size_t chunk = (n + n_workers - 1) / n_workers;
    for (size_t w = 0; w < n_workers; ++w) {
        const size_t b = w * chunk;
        const size_t e = std::min(n, b + chunk);
        if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& t : pool) t.join();
    return out;
}

}  // namespace i2b
