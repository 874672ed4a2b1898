#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "i2b/names.hpp"

namespace i2b::test {

RefGraph ref_build(const TransactionGraph& g, const std::vector<EdgeRecord>& rows) {
    RefGraph ref;
    for (const EdgeRecord& r : rows) {
        if (r.src == r.dst) continue;
        const auto s = g.find(r.src), d = g.find(r.dst);
        auto& cell = ref.agg[{*s, *d}];
        cell.first += r.volume;
        cell.second += r.count;
        ref.nbrs[*s].insert(*d);
        ref.nbrs[*d].insert(*s);
    }
    return ref;
}

std::vector<AccountHandle> ref_rank(const RefGraph& ref, AccountHandle a, int n_u) {
    std::vector<std::pair<AccountHandle, double>> scored;
    const auto it = ref.nbrs.find(a);
    if (it != ref.nbrs.end()) {
        for (AccountHandle u : it->second) {
            double s = 0.0;
            // fixed order: out volume first, then in volume
            if (auto e = ref.agg.find({a, u}); e != ref.agg.end()) s = e->second.first;
            if (auto e = ref.agg.find({u, a}); e != ref.agg.end()) s += e->second.first;
            scored.emplace_back(u, s);
        }
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    if (static_cast<int>(scored.size()) > n_u) scored.resize(n_u);
    std::vector<AccountHandle> out;
    for (const auto& [u, s] : scored) out.push_back(u);
    return out;
}

Subgraph ref_extract(const RefGraph& ref, const TransactionGraph& g, AccountHandle center,
                     const SamplingConfig& cfg) {
    Subgraph sub;
    sub.symmetric = cfg.symmetrize;

    std::vector<AccountHandle> order;
    std::set<AccountHandle> seen;
    auto add = [&](AccountHandle a) {
        if (seen.insert(a).second) order.push_back(a);
    };
    add(center);
    const auto hop1 = ref_rank(ref, center, cfg.max_neighbors);
    for (AccountHandle v : hop1) add(v);
    if (cfg.hops == 2) {
        for (AccountHandle v : hop1) {
            if (cfg.eosio_mode && is_system_account(g.name(v))) continue;
            for (AccountHandle u : ref_rank(ref, v, cfg.max_neighbors)) add(u);
        }
    }
    sub.nodes = order;
    sub.center = 0;
    sub.isolated = hop1.empty();
    for (AccountHandle a : order) sub.node_kinds.push_back(g.kind(a));

    const int m = static_cast<int>(order.size());
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            const auto fwd = ref.agg.find({order[i], order[j]});
            if (cfg.symmetrize) {
                if (i > j) continue;
                const auto rev = ref.agg.find({order[j], order[i]});
                if (fwd == ref.agg.end() && rev == ref.agg.end()) continue;
                double vol = fwd != ref.agg.end() ? fwd->second.first : 0.0;
                double freq = fwd != ref.agg.end() ? static_cast<double>(fwd->second.second) : 0.0;
                if (rev != ref.agg.end()) {
                    vol += rev->second.first;
                    freq += static_cast<double>(rev->second.second);
                }
                sub.edges.push_back(SubgraphEdge{i, j, vol, freq});
            } else if (fwd != ref.agg.end()) {
                sub.edges.push_back(SubgraphEdge{i, j, fwd->second.first,
                                                 static_cast<double>(fwd->second.second)});
            }
        }
    }
    std::sort(sub.edges.begin(), sub.edges.end(), [](const SubgraphEdge& a, const SubgraphEdge& b) {
        if (a.u != b.u) return a.u < b.u;
        return a.v < b.v;
    });
    return sub;
}

Matrix dense_normalize_ref(const Matrix& A, WeightTransform wt) {
    const int n = A.rows;
    Matrix at(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            at.at(i, j) = i == j ? 1.0
                                 : (wt == WeightTransform::Log1p ? std::log1p(A.at(i, j))
                                                                 : A.at(i, j));
    std::vector<double> d(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d[i] += at.at(i, j);
    Matrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (at.at(i, j) != 0.0) out.at(i, j) = at.at(i, j) / std::sqrt(d[i] * d[j]);
    return out;
}

Matrix mat_exp(const Matrix& M) {
    const int n = M.rows;
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += std::abs(M.at(i, j));
        norm = std::max(norm, row);
    }
    int squarings = 0;
    double scale = 1.0;
    while (norm * scale > 0.5) {
        scale *= 0.5;
        ++squarings;
    }
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a.at(i, j) = M.at(i, j) * scale;

    Matrix result(n, n), term(n, n);
    for (int i = 0; i < n; ++i) {
        result.at(i, i) = 1.0;
        term.at(i, i) = 1.0;
    }
    for (int k = 1; k <= 40; ++k) {
        Matrix next;
        matmul(term, a, next);
        double mx = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                next.at(i, j) /= k;
                mx = std::max(mx, std::abs(next.at(i, j)));
            }
        term = next;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) result.at(i, j) += term.at(i, j);
        if (mx < 1e-19) break;
    }
    for (int s = 0; s < squarings; ++s) {
        Matrix sq;
        matmul(result, result, sq);
        result = sq;
    }
    return result;
}

double heat_trace_ref(const Matrix& L, double t) {
    const int n = L.rows;
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.at(i, j) = -t * L.at(i, j);
    const Matrix e = mat_exp(m);
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += e.at(i, i);
    return tr;
}

int count_components(const Subgraph& sub) {
    const int n = sub.node_count();
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const SubgraphEdge& e : sub.edges) parent[find(e.u)] = find(e.v);
    std::set<int> roots;
    for (int i = 0; i < n; ++i) roots.insert(find(i));
    return static_cast<int>(roots.size());
}

Subgraph random_subgraph(Rng& rng, int max_nodes, int feat_dim) {
    Subgraph sub;
    const int m = 1 + static_cast<int>(rng.uniform_int(max_nodes));
    sub.nodes.resize(m);
    for (int i = 0; i < m; ++i) sub.nodes[i] = static_cast<AccountHandle>(i);
    sub.node_kinds.assign(m, NameKind::General);
    sub.center = 0;
    sub.symmetric = true;
    sub.label = static_cast<int>(rng.uniform_int(2));

    const double p = rng.uniform(0.2, 0.7);
    for (int u = 0; u < m; ++u)
        for (int v = u + 1; v < m; ++v)
            if (rng.uniform01() < p)
                sub.edges.push_back(SubgraphEdge{
                    u, v, rng.uniform(0.1, 50.0),
                    static_cast<double>(1 + rng.uniform_int(40))});
    sub.isolated = sub.edges.empty();

    sub.features.cols = feat_dim;
    sub.features.rows.resize(m);
    for (int i = 0; i < m; ++i)
        for (int c = 0; c < feat_dim; ++c)
            if (rng.uniform01() < 0.5) sub.features.rows[i].emplace_back(c, rng.uniform(0.0, 3.0));
    return sub;
}

std::vector<EdgeRecord> random_edge_records(Rng& rng, int n_accounts, int n_rows,
                                            bool eosio_names) {
    std::vector<std::string> names(n_accounts);
    for (int i = 0; i < n_accounts; ++i) {
        if (eosio_names && rng.uniform01() < 0.15)
            names[i] = "eosio.s" + std::to_string(i);
        else
            names[i] = "a" + std::to_string(i);
    }
    std::vector<EdgeRecord> rows;
    rows.reserve(n_rows);
    for (int r = 0; r < n_rows; ++r) {
        EdgeRecord rec;
        rec.src = names[rng.uniform_int(n_accounts)];
        rec.dst = names[rng.uniform_int(n_accounts)];  // may equal src: self-loop case
        // small integer volumes make exact score ties common
        rec.volume = static_cast<double>(1 + rng.uniform_int(5));
        rec.count = 1 + rng.uniform_int(4);
        rows.push_back(std::move(rec));
    }
    return rows;
}

}  // namespace i2b::test
