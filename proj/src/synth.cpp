#include "i2b/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include "i2b/rng.hpp"

namespace i2b {

void SynthConfig::validate() const {
    if (per_class < 1) throw std::invalid_argument("synth: per_class must be >= 1");
    if (contracts < 1) throw std::invalid_argument("synth: contracts must be >= 1");
    if (!(noise >= 0.0 && noise <= 1.0)) throw std::invalid_argument("synth: noise must be in [0,1]");
    if (background_factor < 1)
        throw std::invalid_argument("synth: background_factor must be >= 1");
}

namespace {

// Per-class generative profile. All fields use the same distribution family
// for both classes so that blended profiles stay comparable.
struct Profile {
    double deg_lambda;         // extra degree ~ Poisson(deg_lambda), min degree 1
    double freq_lambda;        // edge frequency ~ 1 + Poisson(freq_lambda)
    double vol_mu, vol_sigma;  // edge volume ~ LogNormal(mu, sigma)
    double band_frac;          // fraction of the vocabulary this class calls into
    double types_lambda;       // distinct call targets ~ 1 + Poisson(types_lambda)
    double count_lambda;       // per-target call count ~ 1 + Poisson(count_lambda)
};

constexpr Profile kBot = {8.0, 30.0, 0.7, 0.3, 0.2, 2.0, 24.0};
constexpr Profile kNormal = {3.0, 2.0, 3.0, 1.4, 1.0, 4.0, 2.0};

double blend(double own, double other, double noise) {
    return own + 0.5 * noise * (other - own);
}

Profile blended(const Profile& own, const Profile& other, double noise) {
    return {blend(own.deg_lambda, other.deg_lambda, noise),
            blend(own.freq_lambda, other.freq_lambda, noise),
            blend(own.vol_mu, other.vol_mu, noise),
            blend(own.vol_sigma, other.vol_sigma, noise),
            blend(own.band_frac, other.band_frac, noise),
            blend(own.types_lambda, other.types_lambda, noise),
            blend(own.count_lambda, other.count_lambda, noise)};
}

std::string numbered(const char* prefix, int i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%s%05d", prefix, i);
    return buf;
}

}  // namespace

SynthData generate(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    SynthData out;

    const int n_bg = cfg.background_factor * 2 * cfg.per_class;
    std::vector<std::string> bg_names(n_bg);
    for (int i = 0; i < n_bg; ++i) bg_names[i] = numbered("bg", i);

    std::vector<std::string> contract_names(cfg.contracts);
    for (int c = 0; c < cfg.contracts; ++c) contract_names[c] = numbered("c", c);

    const Profile mid = blended(kBot, kNormal, 1.0);

    auto emit_account = [&](const std::string& name, const Profile& p) {
        const int degree = 1 + static_cast<int>(rng.poisson(p.deg_lambda));
        std::unordered_set<int> used;
        for (int e = 0; e < degree && e < n_bg; ++e) {
            int peer = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n_bg)));
            while (used.count(peer))
                peer = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n_bg)));
            used.insert(peer);
            const double volume = rng.lognormal(p.vol_mu, p.vol_sigma);
            const uint64_t freq = 1 + rng.poisson(p.freq_lambda);
            if (rng.uniform01() < 0.5)
                out.edges.push_back({name, bg_names[peer], volume, freq});
            else
                out.edges.push_back({bg_names[peer], name, volume, freq});
        }
        const int band =
            std::max(1, std::min(cfg.contracts,
                                 static_cast<int>(std::lround(p.band_frac * cfg.contracts))));
        const int types = 1 + static_cast<int>(rng.poisson(p.types_lambda));
        for (int t = 0; t < types; ++t) {
            const int c = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(band)));
            out.calls.emplace_back(name, contract_names[c], 1 + rng.poisson(p.count_lambda));
        }
    };

    const Profile bot = blended(kBot, kNormal, cfg.noise);
    const Profile normal = blended(kNormal, kBot, cfg.noise);
    for (int i = 0; i < cfg.per_class; ++i) {
        const std::string name = numbered("bot", i);
        out.labels.emplace_back(name, 1);
        emit_account(name, bot);
    }
    for (int i = 0; i < cfg.per_class; ++i) {
        const std::string name = numbered("usr", i);
        out.labels.emplace_back(name, 0);
        emit_account(name, normal);
    }

    // Class-neutral background <-> background edges and calls give the pool
    // its own 2-hop structure.
    for (int i = 0; i < n_bg; ++i) {
        for (int e = 0; e < 2; ++e) {
            int peer = i;
            while (peer == i) peer = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n_bg)));
            const double volume = rng.lognormal(mid.vol_mu, mid.vol_sigma);
            const uint64_t freq = 1 + rng.poisson(mid.freq_lambda);
            out.edges.push_back({bg_names[i], bg_names[peer], volume, freq});
        }
        const int band = std::max(
            1, std::min(cfg.contracts,
                        static_cast<int>(std::lround(mid.band_frac * cfg.contracts))));
        const int c = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(band)));
        out.calls.emplace_back(bg_names[i], contract_names[c], 1 + rng.poisson(mid.count_lambda));
    }
    return out;
}

std::pair<TransactionGraph, CallTable> materialize(const SynthData& data, uint32_t top_c) {
    TransactionGraph g = ingest_edges(data.edges);
    ingest_labels_into(g, data.labels);
    uint32_t keep = top_c;
    if (keep == 0) {
        std::unordered_set<std::string> distinct;
        for (const auto& [acct, contract, count] : data.calls) distinct.insert(contract);
        keep = static_cast<uint32_t>(distinct.size());
    }
    CallTable ct = ingest_calls(g, data.calls, keep);
    return {std::move(g), std::move(ct)};
}

void save_synth_csv(const SynthData& data, const std::string& edges_path,
                    const std::string& labels_path, const std::string& calls_path) {
    char buf[32];
    {
        std::ofstream out(edges_path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + edges_path);
        out << "src,dst,volume,count\n";
        for (const EdgeRecord& e : data.edges) {
            std::snprintf(buf, sizeof buf, "%.17g", e.volume);
            out << e.src << ',' << e.dst << ',' << buf << ',' << e.count << '\n';
        }
        if (!out) throw std::runtime_error("write failed for " + edges_path);
    }
    {
        std::ofstream out(labels_path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + labels_path);
        out << "account,label\n";
        for (const auto& [name, cls] : data.labels) out << name << ',' << cls << '\n';
        if (!out) throw std::runtime_error("write failed for " + labels_path);
    }
    {
        std::ofstream out(calls_path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + calls_path);
        out << "account,contract,count\n";
        for (const auto& [name, contract, count] : data.calls)
            out << name << ',' << contract << ',' << count << '\n';
        if (!out) throw std::runtime_error("write failed for " + calls_path);
    }
}

}  // namespace i2b
