#include "i2b/bundle.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace i2b {

using nlohmann::json;

namespace {

json schema_to_json(const FeatureSchema& s) {
    return json{{"vocabulary", s.vocabulary},
                {"use_name_kind", s.use_name_kind},
                {"transform", transform_name(s.transform)}};
}

FeatureSchema schema_from_json(const json& j) {
    FeatureSchema s;
    s.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    s.use_name_kind = j.at("use_name_kind").get<bool>();
    s.transform = transform_from_name(j.at("transform").get<std::string>());
    return s;
}

}  // namespace

void save_bundle(const Bundle& bundle, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);

    json header{{"format", "i2b-bundle"},
                {"version", 1},
                {"hops", bundle.header.sampling.hops},
                {"max_neighbors", bundle.header.sampling.max_neighbors},
                {"symmetrize", bundle.header.sampling.symmetrize},
                {"eosio_mode", bundle.header.sampling.eosio_mode},
                {"schema", schema_to_json(bundle.header.schema)},
                {"schema_hash", bundle.header.schema.hash()},
                {"config", bundle.header.config_echo}};
    out << header.dump() << '\n';

    for (size_t gi = 0; gi < bundle.subgraphs.size(); ++gi) {
        const Subgraph& sub = bundle.subgraphs[gi];
        json edges = json::array();
        for (const SubgraphEdge& e : sub.edges)
            edges.push_back(json::array({e.u, e.v, e.volume, e.frequency}));
        json features = json::array();
        for (const auto& row : sub.features.rows) {
            json jr = json::array();
            for (const auto& [col, val] : row) jr.push_back(json::array({col, val}));
            features.push_back(std::move(jr));
        }
        json kinds = json::array();
        for (NameKind k : sub.node_kinds) kinds.push_back(static_cast<int>(k));

        json rec{{"id", sub.id},
                 {"center", sub.center},
                 {"label", sub.label},
                 {"nodes", bundle.node_names[gi]},
                 {"kinds", std::move(kinds)},
                 {"edges", std::move(edges)},
                 {"features", std::move(features)}};
        if (sub.isolated) rec["isolated"] = true;
        out << rec.dump() << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

Bundle load_bundle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty bundle");

    Bundle bundle;
    try {
        const json header = json::parse(line);
        if (header.at("format").get<std::string>() != "i2b-bundle")
            throw std::runtime_error("not a bundle file");
        if (header.at("version").get<int>() != 1)
            throw std::runtime_error("unsupported bundle version");
        bundle.header.sampling.hops = header.at("hops").get<int>();
        bundle.header.sampling.max_neighbors = header.at("max_neighbors").get<int>();
        bundle.header.sampling.symmetrize = header.at("symmetrize").get<bool>();
        bundle.header.sampling.eosio_mode = header.at("eosio_mode").get<bool>();
        bundle.header.schema = schema_from_json(header.at("schema"));
        bundle.header.config_echo = header.value("config", "");
        const auto stored_hash = header.at("schema_hash").get<uint64_t>();
        if (stored_hash != bundle.header.schema.hash())
            throw std::runtime_error("schema hash mismatch in header");
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": bad bundle header: " + e.what());
    }

    const int f_dim = bundle.header.schema.dimension();
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json rec = json::parse(line);
            Subgraph sub;
            sub.id = rec.at("id").get<int64_t>();
            sub.center = rec.at("center").get<int>();
            sub.label = rec.at("label").get<int>();
            sub.symmetric = bundle.header.sampling.symmetrize;
            sub.isolated = rec.value("isolated", false);
            auto names = rec.at("nodes").get<std::vector<std::string>>();
            const size_t m = names.size();
            sub.nodes.resize(m);
            for (size_t i = 0; i < m; ++i) sub.nodes[i] = static_cast<AccountHandle>(i);
            for (const auto& jk : rec.at("kinds"))
                sub.node_kinds.push_back(static_cast<NameKind>(jk.get<int>()));
            if (sub.node_kinds.size() != m)
                throw std::runtime_error("kinds/nodes length mismatch");
            for (const auto& je : rec.at("edges")) {
                SubgraphEdge e;
                e.u = je.at(0).get<int>();
                e.v = je.at(1).get<int>();
                e.volume = je.at(2).get<double>();
                e.frequency = je.at(3).get<double>();
                if (e.u < 0 || e.v < 0 || e.u >= static_cast<int>(m) || e.v >= static_cast<int>(m))
                    throw std::runtime_error("edge endpoint out of range");
                sub.edges.push_back(e);
            }
            sub.features.cols = f_dim;
            for (const auto& jrow : rec.at("features")) {
                std::vector<std::pair<int, double>> row;
                for (const auto& jcell : jrow) {
                    const int col = jcell.at(0).get<int>();
                    if (col < 0 || col >= f_dim)
                        throw std::runtime_error("feature column out of range");
                    row.emplace_back(col, jcell.at(1).get<double>());
                }
                sub.features.rows.push_back(std::move(row));
            }
            if (sub.features.rows.size() != m)
                throw std::runtime_error("feature rows/nodes length mismatch");
            bundle.subgraphs.push_back(std::move(sub));
            bundle.node_names.push_back(std::move(names));
        } catch (const json::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": bad subgraph record: " + e.what());
        }
    }
    return bundle;
}

}  // namespace i2b
