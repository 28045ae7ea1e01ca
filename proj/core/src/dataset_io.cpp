#include "imgcf/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "imgcf/errors.hpp"

namespace imgcf {

namespace {

using nlohmann::json;

std::string pair_file_name(const std::string& split, const std::string& behavior) {
    return split + "_" + behavior + ".tsv";
}

void write_pairs(const InteractionSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    for (std::int64_t u = 0; u < set.num_users(); ++u) {
        for (const auto i : set.items_of(u)) {
            out << u << '\t' << i << '\n';
        }
    }
}

std::vector<UserItemPair> read_pairs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot read '" + path.string() + "'");
    }
    std::vector<UserItemPair> pairs;
    std::int64_t u = 0;
    std::int64_t i = 0;
    while (in >> u >> i) {
        pairs.emplace_back(u, i);
    }
    return pairs;
}

}  // namespace

void write_dataset_dir(const Dataset& dataset, const std::filesystem::path& dir,
                       const DatasetProvenance& provenance) {
    std::filesystem::create_directories(dir);

    json meta;
    meta["num_users"] = dataset.num_users;
    meta["num_items"] = dataset.num_items;
    meta["behavior_names"] = dataset.behavior_names;
    meta["target_behavior"] = dataset.target_behavior;
    meta["source"] = provenance.source;
    meta["seed"] = provenance.seed;
    meta["filter_threshold"] = provenance.filter_threshold;
    meta["split_ratio"] = provenance.split_ratio;
    if (provenance.imbalance_ratio > 0.0) {
        meta["imbalance_ratio"] = provenance.imbalance_ratio;
    }
    json sizes = json::object();
    for (int k = 0; k < dataset.num_behaviors(); ++k) {
        const auto& name = dataset.behavior_names[static_cast<std::size_t>(k)];
        sizes[name] = {{"train", dataset.train[static_cast<std::size_t>(k)].num_pairs()},
                       {"test", dataset.test[static_cast<std::size_t>(k)].num_pairs()}};
    }
    meta["behavior_sizes"] = sizes;

    std::ofstream meta_out(dir / "metadata.json", std::ios::binary);
    if (!meta_out) {
        throw DataError("cannot write '" + (dir / "metadata.json").string() + "'");
    }
    meta_out << meta.dump(2) << '\n';

    for (int k = 0; k < dataset.num_behaviors(); ++k) {
        const auto& name = dataset.behavior_names[static_cast<std::size_t>(k)];
        write_pairs(dataset.train[static_cast<std::size_t>(k)],
                    dir / pair_file_name("train", name));
        write_pairs(dataset.test[static_cast<std::size_t>(k)],
                    dir / pair_file_name("test", name));
    }
}

Dataset read_dataset_dir(const std::filesystem::path& dir) {
    std::ifstream meta_in(dir / "metadata.json");
    if (!meta_in) {
        throw DataError("cannot read '" + (dir / "metadata.json").string() +
                        "', is this a prepared dataset directory?");
    }
    json meta;
    try {
        meta_in >> meta;
    } catch (const json::exception& e) {
        throw DataError("malformed metadata.json in '" + dir.string() + "': " + e.what());
    }

    Dataset dataset;
    try {
        dataset.num_users = meta.at("num_users").get<std::int64_t>();
        dataset.num_items = meta.at("num_items").get<std::int64_t>();
        dataset.behavior_names = meta.at("behavior_names").get<std::vector<std::string>>();
        dataset.target_behavior = meta.at("target_behavior").get<int>();
    } catch (const json::exception& e) {
        throw DataError("metadata.json in '" + dir.string() + "' misses fields: " + e.what());
    }
    if (dataset.target_behavior < 0 || dataset.target_behavior >= dataset.num_behaviors()) {
        throw DataError("metadata.json: target behavior out of range");
    }

    // Canonical files store dense indices, so the loaded maps are identities.
    for (std::int64_t u = 0; u < dataset.num_users; ++u) {
        dataset.user_index.emplace(std::to_string(u), u);
    }
    for (std::int64_t i = 0; i < dataset.num_items; ++i) {
        dataset.item_index.emplace(std::to_string(i), i);
    }

    for (int k = 0; k < dataset.num_behaviors(); ++k) {
        const auto& name = dataset.behavior_names[static_cast<std::size_t>(k)];
        dataset.train.push_back(
            InteractionSet::from_pairs(k, dataset.num_users, dataset.num_items,
                                       read_pairs(dir / pair_file_name("train", name))));
        dataset.test.push_back(
            InteractionSet::from_pairs(k, dataset.num_users, dataset.num_items,
                                       read_pairs(dir / pair_file_name("test", name))));
    }
    return dataset;
}

DatasetProvenance read_provenance(const std::filesystem::path& dir) {
    std::ifstream meta_in(dir / "metadata.json");
    if (!meta_in) {
        throw DataError("cannot read '" + (dir / "metadata.json").string() + "'");
    }
    json meta;
    meta_in >> meta;
    DatasetProvenance provenance;
    provenance.source = meta.value("source", std::string{});
    provenance.seed = meta.value("seed", std::uint64_t{0});
    provenance.filter_threshold = meta.value("filter_threshold", std::int64_t{0});
    provenance.split_ratio = meta.value("split_ratio", 0.8);
    provenance.imbalance_ratio = meta.value("imbalance_ratio", 0.0);
    return provenance;
}

std::string dataset_metadata_hash(const std::filesystem::path& dir) {
    std::ifstream in(dir / "metadata.json", std::ios::binary);
    if (!in) {
        throw DataError("cannot read '" + (dir / "metadata.json").string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    std::uint64_t hash = 1469598103934665603ULL;
    for (const char c : text) {
        hash ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        hash *= 1099511628211ULL;
    }
    std::ostringstream hex;
    hex << std::hex << hash;
    return hex.str();
}

}  // namespace imgcf
