#include "imgcf/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "imgcf/errors.hpp"

namespace imgcf {

namespace {

constexpr char kMagic[8] = {'I', 'M', 'G', 'C', 'F', 'C', 'K', '1'};

void put_i64(std::ostream& out, std::int64_t value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

void put_u64(std::ostream& out, std::uint64_t value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

void put_f64(std::ostream& out, double value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

std::int64_t get_i64(std::istream& in) {
    std::int64_t value = 0;
    in.read(reinterpret_cast<char*>(&value), sizeof(value));
    return value;
}

std::uint64_t get_u64(std::istream& in) {
    std::uint64_t value = 0;
    in.read(reinterpret_cast<char*>(&value), sizeof(value));
    return value;
}

double get_f64(std::istream& in) {
    double value = 0;
    in.read(reinterpret_cast<char*>(&value), sizeof(value));
    return value;
}

void put_matrix(std::ostream& out, const Matrix& matrix) {
    put_i64(out, matrix.rows());
    put_i64(out, matrix.cols());
    out.write(reinterpret_cast<const char*>(matrix.data().data()),
              static_cast<std::streamsize>(matrix.data().size() * sizeof(double)));
}

Matrix get_matrix(std::istream& in) {
    const std::int64_t rows = get_i64(in);
    const std::int64_t cols = get_i64(in);
    if (rows < 0 || cols < 0 || !in) {
        throw DataError("checkpoint: corrupt matrix header");
    }
    Matrix matrix(rows, cols);
    in.read(reinterpret_cast<char*>(matrix.data().data()),
            static_cast<std::streamsize>(matrix.data().size() * sizeof(double)));
    return matrix;
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write checkpoint '" + path.string() + "'");
    }
    out.write(kMagic, sizeof(kMagic));
    const auto& config = checkpoint.config;
    put_i64(out, config.embedding_dim);
    put_i64(out, config.num_layers);
    put_i64(out, static_cast<std::int64_t>(config.aggregator));
    put_i64(out, static_cast<std::int64_t>(config.base_embedding_mode));
    put_i64(out, config.stop_gradient ? 1 : 0);
    put_f64(out, config.init_scale);
    put_u64(out, config.seed);
    put_i64(out, static_cast<std::int64_t>(config.enhancement_map.size()));
    for (const auto& [sparse, rich] : config.enhancement_map) {
        put_i64(out, sparse);
        put_i64(out, rich);
    }
    put_i64(out, checkpoint.num_users);
    put_i64(out, checkpoint.num_items);
    put_i64(out, static_cast<std::int64_t>(checkpoint.params.tables.size()));
    for (const auto& table : checkpoint.params.tables) {
        put_i64(out, table.step);
        put_matrix(out, table.values);
        put_matrix(out, table.first_moment);
        put_matrix(out, table.second_moment);
    }
    if (!out) {
        throw DataError("failed while writing checkpoint '" + path.string() + "'");
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read checkpoint '" + path.string() + "'");
    }
    char magic[sizeof(kMagic)] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw DataError("'" + path.string() + "' is not an imgcf checkpoint");
    }
    Checkpoint checkpoint;
    auto& config = checkpoint.config;
    config.embedding_dim = get_i64(in);
    config.num_layers = get_i64(in);
    config.aggregator = static_cast<Aggregator>(get_i64(in));
    config.base_embedding_mode = static_cast<BaseEmbeddingMode>(get_i64(in));
    config.stop_gradient = get_i64(in) != 0;
    config.init_scale = get_f64(in);
    config.seed = get_u64(in);
    const std::int64_t map_size = get_i64(in);
    if (!in || map_size < 0 || map_size > 1'000'000) {
        throw DataError("checkpoint '" + path.string() + "' has a corrupt header");
    }
    for (std::int64_t e = 0; e < map_size; ++e) {
        const auto sparse = static_cast<int>(get_i64(in));
        const auto rich = static_cast<int>(get_i64(in));
        config.enhancement_map.emplace_back(sparse, rich);
    }
    checkpoint.num_users = get_i64(in);
    checkpoint.num_items = get_i64(in);
    const std::int64_t num_tables = get_i64(in);
    if (!in || num_tables <= 0 || num_tables > 1'000'000) {
        throw DataError("checkpoint '" + path.string() + "' has a corrupt table count");
    }
    for (std::int64_t t = 0; t < num_tables; ++t) {
        EmbeddingTable table;
        table.step = get_i64(in);
        table.values = get_matrix(in);
        table.first_moment = get_matrix(in);
        table.second_moment = get_matrix(in);
        if (!in) {
            throw DataError("checkpoint '" + path.string() + "' is truncated");
        }
        checkpoint.params.tables.push_back(std::move(table));
    }
    return checkpoint;
}

}  // namespace imgcf
