#include "i2b/graph.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "i2b/csv.hpp"

namespace i2b {

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

AccountHandle TransactionGraph::intern(const std::string& name) {
    auto it = handle_of_.find(name);
    if (it != handle_of_.end()) return it->second;
    const auto h = static_cast<AccountHandle>(names_.size());
    handle_of_.emplace(name, h);
    names_.push_back(name);
    kinds_.push_back(classify_name(name));
    out_.emplace_back();
    in_.emplace_back();
    labels_.push_back(-1);
    return h;
}

namespace {

const AdjEdge* find_edge(const std::vector<AdjEdge>& edges, AccountHandle peer) {
    auto it = std::lower_bound(edges.begin(), edges.end(), peer,
                               [](const AdjEdge& e, AccountHandle p) { return e.peer < p; });
    if (it == edges.end() || it->peer != peer) return nullptr;
    return &*it;
}

}  // namespace

double TransactionGraph::volume(AccountHandle a, AccountHandle b) const {
    const AdjEdge* e = find_edge(out_[a], b);
    return e ? e->volume : 0.0;
}

uint64_t TransactionGraph::frequency(AccountHandle a, AccountHandle b) const {
    const AdjEdge* e = find_edge(out_[a], b);
    return e ? e->frequency : 0;
}

void TransactionGraph::set_label(AccountHandle a, int cls) {
    if (cls != 0 && cls != 1) throw std::invalid_argument("label must be 0 or 1");
    if (labels_[a] >= 0 && labels_[a] != cls)
        throw std::runtime_error("conflicting label for " + names_[a]);
    labels_[a] = static_cast<int8_t>(cls);
}

std::vector<AccountHandle> TransactionGraph::labeled_accounts() const {
    std::vector<AccountHandle> out;
    for (AccountHandle a = 0; a < labels_.size(); ++a)
        if (labels_[a] >= 0) out.push_back(a);
    return out;
}

void TransactionGraph::finalize_adjacency(
    const std::vector<std::unordered_map<AccountHandle, std::pair<double, uint64_t>>>& acc) {
    edge_count_ = 0;
    for (AccountHandle src = 0; src < acc.size(); ++src) {
        auto& edges = out_[src];
        edges.reserve(acc[src].size());
        for (const auto& [dst, vc] : acc[src])
            edges.push_back(AdjEdge{dst, vc.first, vc.second});
        std::sort(edges.begin(), edges.end(),
                  [](const AdjEdge& a, const AdjEdge& b) { return a.peer < b.peer; });
        edge_count_ += edges.size();
    }
    for (AccountHandle src = 0; src < out_.size(); ++src)
        for (const AdjEdge& e : out_[src])
            in_[e.peer].push_back(AdjEdge{src, e.volume, e.frequency});
    for (auto& edges : in_)
        std::sort(edges.begin(), edges.end(),
                  [](const AdjEdge& a, const AdjEdge& b) { return a.peer < b.peer; });
}

TransactionGraph ingest_edges(const std::vector<EdgeRecord>& rows) {
    if (rows.empty()) throw std::runtime_error("empty graph");
    TransactionGraph g;
    // Aggregation accumulates in row order so that repeated ingest of the
    // same stream is bitwise reproducible.
    std::vector<std::unordered_map<AccountHandle, std::pair<double, uint64_t>>> acc;
    for (const EdgeRecord& r : rows) {
        if (r.volume < 0.0) throw std::runtime_error("negative volume on edge " + r.src + "->" + r.dst);
        if (r.count < 1) throw std::runtime_error("zero count on edge " + r.src + "->" + r.dst);
        const AccountHandle s = g.intern(r.src);
        const AccountHandle d = g.intern(r.dst);
        if (s == d) {
            ++g.dropped_self_loops_;
            continue;
        }
        if (acc.size() < g.account_count()) acc.resize(g.account_count());
        auto& cell = acc[s][d];
        cell.first += r.volume;
        cell.second += r.count;
    }
    acc.resize(g.account_count());
    g.finalize_adjacency(acc);
    return g;
}

void ingest_labels_into(TransactionGraph& g,
                        const std::vector<std::pair<std::string, int>>& rows) {
    for (const auto& [name, cls] : rows) {
        const bool known = g.find(name).has_value();
        const AccountHandle a = g.intern(name);
        if (!known) g.label_only_.push_back(a);
        g.set_label(a, cls);
    }
}

CallTable ingest_calls(TransactionGraph& g,
                       const std::vector<std::tuple<std::string, std::string, uint64_t>>& rows,
                       uint32_t top_c) {
    if (top_c < 1) throw std::invalid_argument("top_c must be >= 1");

    // Total call count per contract, first-appearance order kept for ties.
    std::vector<std::string> contract_names;
    std::unordered_map<std::string, uint32_t> contract_idx;
    std::vector<uint64_t> totals;
    for (const auto& [account, contract, count] : rows) {
        (void)account;
        auto it = contract_idx.find(contract);
        uint32_t idx;
        if (it == contract_idx.end()) {
            idx = static_cast<uint32_t>(contract_names.size());
            contract_idx.emplace(contract, idx);
            contract_names.push_back(contract);
            totals.push_back(0);
        } else {
            idx = it->second;
        }
        totals[idx] += count;
    }

    std::vector<uint32_t> order(contract_names.size());
    for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](uint32_t a, uint32_t b) { return totals[a] > totals[b]; });
    if (order.size() > top_c) order.resize(top_c);

    CallTable table;
    for (uint32_t rank = 0; rank < order.size(); ++rank) {
        table.vocab.names.push_back(contract_names[order[rank]]);
        table.vocab.index.emplace(contract_names[order[rank]], rank);
    }

    std::vector<std::unordered_map<uint32_t, uint64_t>> acc;
    for (const auto& [account, contract, count] : rows) {
        auto it = table.vocab.index.find(contract);
        if (it == table.vocab.index.end()) continue;
        const AccountHandle a = g.intern(account);
        if (acc.size() < g.account_count()) acc.resize(g.account_count());
        acc[a][it->second] += count;
    }
    acc.resize(g.account_count());

    table.calls.resize(g.account_count());
    for (AccountHandle a = 0; a < acc.size(); ++a) {
        auto& row = table.calls[a];
        row.assign(acc[a].begin(), acc[a].end());
        std::sort(row.begin(), row.end());
    }
    return table;
}

// --- file loaders -----------------------------------------------------------

std::vector<EdgeRecord> read_edge_file(const std::string& path) {
    CsvReader csv(path, {"src", "dst", "volume", "count"});
    std::vector<EdgeRecord> rows;
    std::vector<std::string> f;
    while (csv.next(f)) {
        EdgeRecord r;
        r.src = f[0];
        r.dst = f[1];
        r.volume = csv.parse_double(f[2]);
        r.count = csv.parse_count(f[3]);
        if (r.src.empty() || r.dst.empty()) csv.fail("empty account name");
        if (r.volume < 0.0) csv.fail("negative volume");
        if (r.count < 1) csv.fail("count must be >= 1");
        rows.push_back(std::move(r));
        // field 5 (timestamp), when present, is deliberately ignored
    }
    return rows;
}

std::vector<std::pair<std::string, int>> read_label_file(
    const std::string& path, const std::unordered_map<std::string, int>& label_map) {
    CsvReader csv(path, {"account", "label"});
    std::vector<std::pair<std::string, int>> rows;
    std::vector<std::string> f;
    while (csv.next(f)) {
        if (f[0].empty()) csv.fail("empty account name");
        auto it = label_map.find(f[1]);
        if (it == label_map.end()) csv.fail("unknown class token '" + f[1] + "'");
        rows.emplace_back(f[0], it->second);
    }
    return rows;
}

std::vector<std::tuple<std::string, std::string, uint64_t>> read_call_file(
    const std::string& path) {
    CsvReader csv(path, {"account", "contract", "count"});
    std::vector<std::tuple<std::string, std::string, uint64_t>> rows;
    std::vector<std::string> f;
    while (csv.next(f)) {
        if (f[0].empty() || f[1].empty()) csv.fail("empty identifier");
        const uint64_t count = csv.parse_count(f[2]);
        if (count < 1) csv.fail("count must be >= 1");
        rows.emplace_back(f[0], f[1], count);
    }
    return rows;
}

// --- persistence ------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'I', '2', 'B', 'G'};
constexpr uint16_t kFormatVersion = 1;

enum SectionId : uint16_t {
    kSecMeta = 1,
    kSecAccounts = 2,
    kSecAdjacency = 3,
    kSecLabels = 4,
    kSecKinds = 5,
};

// All writes funnel through this buffer so the trailing checksum can cover
// every preceding byte.
struct ByteSink {
    std::vector<char> bytes;

    void raw(const void* p, size_t n) {
        const char* c = static_cast<const char*>(p);
        bytes.insert(bytes.end(), c, c + n);
    }
    template <typename T>
    void pod(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        raw(&v, sizeof v);
    }
    void str(const std::string& s) {
        pod(static_cast<uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
};

struct ByteSource {
    const char* p;
    const char* end;

    void raw(void* out, size_t n) {
        if (static_cast<size_t>(end - p) < n) throw std::runtime_error("graph file truncated");
        std::memcpy(out, p, n);
        p += n;
    }
    template <typename T>
    T pod() {
        T v;
        raw(&v, sizeof v);
        return v;
    }
    std::string str() {
        const auto len = pod<uint32_t>();
        if (static_cast<size_t>(end - p) < len) throw std::runtime_error("graph file truncated");
        std::string s(p, p + len);
        p += len;
        return s;
    }
};

void write_section(ByteSink& sink, uint16_t id, const std::vector<char>& payload) {
    sink.pod(id);
    sink.pod(static_cast<uint64_t>(payload.size()));
    sink.raw(payload.data(), payload.size());
}

}  // namespace

void save_graph(const TransactionGraph& g, const std::string& path, const std::string& meta) {
    ByteSink sink;
    sink.raw(kMagic, 4);
    sink.pod(kFormatVersion);

    {
        ByteSink s;
        s.str(meta);
        write_section(sink, kSecMeta, s.bytes);
    }
    {
        ByteSink s;
        s.pod(g.account_count());
        for (AccountHandle a = 0; a < g.account_count(); ++a) s.str(g.name(a));
        write_section(sink, kSecAccounts, s.bytes);
    }
    {
        // CSR layout with the two weight arrays side by side.
        ByteSink s;
        s.pod(g.edge_count());
        uint64_t offset = 0;
        for (AccountHandle a = 0; a < g.account_count(); ++a) {
            s.pod(offset);
            offset += g.out_edges(a).size();
        }
        s.pod(offset);
        for (AccountHandle a = 0; a < g.account_count(); ++a)
            for (const AdjEdge& e : g.out_edges(a)) s.pod(e.peer);
        for (AccountHandle a = 0; a < g.account_count(); ++a)
            for (const AdjEdge& e : g.out_edges(a)) s.pod(e.volume);
        for (AccountHandle a = 0; a < g.account_count(); ++a)
            for (const AdjEdge& e : g.out_edges(a)) s.pod(e.frequency);
        write_section(sink, kSecAdjacency, s.bytes);
    }
    {
        ByteSink s;
        const auto labeled = g.labeled_accounts();
        s.pod(static_cast<uint64_t>(labeled.size()));
        for (AccountHandle a : labeled) {
            s.pod(a);
            s.pod(static_cast<int8_t>(g.label(a)));
        }
        s.pod(static_cast<uint64_t>(g.label_only_accounts().size()));
        for (AccountHandle a : g.label_only_accounts()) s.pod(a);
        write_section(sink, kSecLabels, s.bytes);
    }
    {
        ByteSink s;
        for (AccountHandle a = 0; a < g.account_count(); ++a)
            s.pod(static_cast<uint8_t>(g.kind(a)));
        write_section(sink, kSecKinds, s.bytes);
    }

    const uint64_t checksum = fnv1a64(sink.bytes.data(), sink.bytes.size());
    sink.pod(checksum);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(sink.bytes.data(), static_cast<std::streamsize>(sink.bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path);
}

namespace {

std::vector<char> read_and_check(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 4 + sizeof(uint16_t) + sizeof(uint64_t))
        throw std::runtime_error(path + ": checksum error (file truncated)");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw std::runtime_error(path + ": not a graph file (bad magic)");
    uint64_t stored = 0;
    std::memcpy(&stored, bytes.data() + bytes.size() - sizeof(uint64_t), sizeof(uint64_t));
    const uint64_t computed = fnv1a64(bytes.data(), bytes.size() - sizeof(uint64_t));
    if (stored != computed) throw std::runtime_error(path + ": checksum error");
    uint16_t version = 0;
    std::memcpy(&version, bytes.data() + 4, sizeof version);
    if (version != kFormatVersion)
        throw std::runtime_error(path + ": unsupported format version " + std::to_string(version));
    return bytes;
}

// Positions the source at each section payload; sections appear in fixed order.
std::unordered_map<uint16_t, std::pair<const char*, uint64_t>> index_sections(ByteSource& src) {
    std::unordered_map<uint16_t, std::pair<const char*, uint64_t>> sections;
    while (src.p < src.end) {
        const auto id = src.pod<uint16_t>();
        const auto len = src.pod<uint64_t>();
        if (static_cast<uint64_t>(src.end - src.p) < len)
            throw std::runtime_error("graph file truncated");
        sections[id] = {src.p, len};
        src.p += len;
    }
    return sections;
}

}  // namespace

TransactionGraph load_graph(const std::string& path) {
    const auto bytes = read_and_check(path);
    ByteSource src{bytes.data() + 6, bytes.data() + bytes.size() - sizeof(uint64_t)};
    const auto sections = index_sections(src);
    for (uint16_t id : {kSecAccounts, kSecAdjacency, kSecLabels, kSecKinds})
        if (!sections.count(id))
            throw std::runtime_error(path + ": missing section " + std::to_string(id));

    TransactionGraph g;
    {
        auto [p, len] = sections.at(kSecAccounts);
        ByteSource s{p, p + len};
        const auto n = s.pod<uint32_t>();
        for (uint32_t i = 0; i < n; ++i) g.intern(s.str());
    }
    {
        auto [p, len] = sections.at(kSecAdjacency);
        ByteSource s{p, p + len};
        const auto n_edges = s.pod<uint64_t>();
        const uint32_t n = g.account_count();
        std::vector<uint64_t> offsets(n + 1);
        for (auto& o : offsets) o = s.pod<uint64_t>();
        if (offsets[n] != n_edges) throw std::runtime_error(path + ": adjacency index mismatch");
        std::vector<AccountHandle> peers(n_edges);
        for (auto& x : peers) x = s.pod<AccountHandle>();
        std::vector<double> volumes(n_edges);
        for (auto& x : volumes) x = s.pod<double>();
        std::vector<uint64_t> freqs(n_edges);
        for (auto& x : freqs) x = s.pod<uint64_t>();
        g.edge_count_ = n_edges;
        for (uint32_t a = 0; a < n; ++a) {
            auto& edges = g.out_[a];
            edges.reserve(offsets[a + 1] - offsets[a]);
            for (uint64_t i = offsets[a]; i < offsets[a + 1]; ++i)
                edges.push_back(AdjEdge{peers[i], volumes[i], freqs[i]});
            for (const AdjEdge& e : edges) g.in_[e.peer].push_back(AdjEdge{a, e.volume, e.frequency});
        }
        for (auto& edges : g.in_)
            std::sort(edges.begin(), edges.end(),
                      [](const AdjEdge& x, const AdjEdge& y) { return x.peer < y.peer; });
    }
    {
        auto [p, len] = sections.at(kSecLabels);
        ByteSource s{p, p + len};
        const auto n_labeled = s.pod<uint64_t>();
        for (uint64_t i = 0; i < n_labeled; ++i) {
            const auto a = s.pod<AccountHandle>();
            const auto cls = s.pod<int8_t>();
            g.set_label(a, cls);
        }
        const auto n_only = s.pod<uint64_t>();
        for (uint64_t i = 0; i < n_only; ++i) g.label_only_.push_back(s.pod<AccountHandle>());
    }
    {
        auto [p, len] = sections.at(kSecKinds);
        ByteSource s{p, p + len};
        for (uint32_t a = 0; a < g.account_count(); ++a)
            g.kinds_[a] = static_cast<NameKind>(s.pod<uint8_t>());
    }
    return g;
}

std::string load_graph_meta(const std::string& path) {
    const auto bytes = read_and_check(path);
    ByteSource src{bytes.data() + 6, bytes.data() + bytes.size() - sizeof(uint64_t)};
    const auto sections = index_sections(src);
    auto it = sections.find(kSecMeta);
    if (it == sections.end()) return {};
    ByteSource s{it->second.first, it->second.first + it->second.second};
    return s.str();
}

}  // namespace i2b
