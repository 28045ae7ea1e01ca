#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "imgcf/dataset.hpp"
#include "imgcf/dataset_io.hpp"
#include "imgcf/errors.hpp"

using namespace imgcf;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& contents) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << contents;
    return path;
}

const std::vector<std::string> kFunnel = {"click", "cart", "purchase"};

}  // namespace

TEST_CASE("ingest parses one record per line") {
    const auto path = write_temp("imgcf_ingest_basic.tsv",
                                 "u1\ti1\tclick\n"
                                 "u1\ti2\tcart\n"
                                 "u2\ti1\tpurchase\n");
    const auto log = ingest(path, {}, kFunnel);
    REQUIRE(log.records.size() == 3);
    CHECK(log.records[0].user_key == "u1");
    CHECK(log.records[0].behavior == 0);
    CHECK(log.records[1].behavior == 1);
    CHECK(log.records[2].behavior == 2);
}

TEST_CASE("ingest of an empty file gives an empty log") {
    const auto path = write_temp("imgcf_ingest_empty.tsv", "");
    CHECK(ingest(path, {}, kFunnel).records.empty());
}

TEST_CASE("ingest rejects undeclared behaviors naming the line") {
    const auto path = write_temp("imgcf_ingest_unknown.tsv",
                                 "u1\ti1\tclick\n"
                                 "u2\ti2\tview\n");
    CHECK_THROWS_WITH_AS(ingest(path, {}, kFunnel), doctest::Contains("line 2"), DataError);
}

TEST_CASE("ingest reports malformed rows and missing files") {
    const auto path = write_temp("imgcf_ingest_short.tsv", "u1\ti1\tclick\nu2\ti2\n");
    CHECK_THROWS_WITH_AS(ingest(path, {}, kFunnel), doctest::Contains("line 2"), DataError);
    CHECK_THROWS_AS(ingest("/nonexistent/imgcf.tsv", {}, kFunnel), DataError);
}

TEST_CASE("ingest honors schema: delimiter, header, column order") {
    const auto path = write_temp("imgcf_ingest_schema.csv",
                                 "behavior,item,user\n"
                                 "click,i9,u3\n");
    IngestSchema schema;
    schema.delimiter = ',';
    schema.has_header = true;
    schema.behavior_column = 0;
    schema.item_column = 1;
    schema.user_column = 2;
    const auto log = ingest(path, schema, kFunnel);
    REQUIRE(log.records.size() == 1);
    CHECK(log.records[0].user_key == "u3");
    CHECK(log.records[0].item_key == "i9");
}

TEST_CASE("cold-start filter drops entities at the threshold boundary") {
    RawEventLog log;
    log.behavior_names = {"click"};
    // u_small has 19 events on well-connected items; everyone else clears 20.
    for (int e = 0; e < 19; ++e) {
        log.records.push_back({"u_small", "i" + std::to_string(e % 2), 0});
    }
    for (int e = 0; e < 25; ++e) {
        log.records.push_back({"u_big", "i0", 0});
        log.records.push_back({"u_big2", "i1", 0});
    }
    FilterStats stats;
    const auto filtered = filter_cold_start(log, 20, &stats);
    for (const auto& r : filtered.records) {
        CHECK(r.user_key != "u_small");
    }
    CHECK(stats.users_before == 3);
    CHECK(stats.users_after == 2);
    CHECK(stats.events_after == 50);
}

TEST_CASE("cold-start filter is the identity when everyone clears the bar") {
    RawEventLog log;
    log.behavior_names = {"click"};
    for (int e = 0; e < 30; ++e) {
        log.records.push_back({"u" + std::to_string(e % 2), "i" + std::to_string(e % 3), 0});
    }
    const auto filtered = filter_cold_start(log, 5);
    CHECK(filtered.records.size() == log.records.size());
}

TEST_CASE("cold-start filter agrees with a brute-force recount") {
    RawEventLog log;
    log.behavior_names = {"click", "purchase"};
    const std::vector<std::tuple<std::string, std::string, int>> events = {
        {"a", "x", 0}, {"a", "y", 0}, {"a", "x", 1}, {"b", "x", 0},
        {"b", "y", 1}, {"c", "z", 0}, {"a", "z", 0}, {"b", "z", 0},
    };
    for (const auto& [u, i, b] : events) {
        log.records.push_back({u, i, b});
    }
    const std::int64_t threshold = 3;

    // Brute-force: recount from scratch, drop by membership.
    std::map<std::string, int> user_count;
    std::map<std::string, int> item_count;
    for (const auto& r : log.records) {
        ++user_count[r.user_key];
        ++item_count[r.item_key];
    }
    std::vector<std::pair<std::string, std::string>> expected;
    for (const auto& r : log.records) {
        if (user_count[r.user_key] >= threshold && item_count[r.item_key] >= threshold) {
            expected.emplace_back(r.user_key, r.item_key);
        }
    }

    const auto filtered = filter_cold_start(log, threshold);
    REQUIRE(filtered.records.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(filtered.records[i].user_key == expected[i].first);
        CHECK(filtered.records[i].item_key == expected[i].second);
    }
}

namespace {

RawEventLog synthetic_log(int num_users, int num_items, int behaviors_every) {
    RawEventLog log;
    log.behavior_names = kFunnel;
    for (int u = 0; u < num_users; ++u) {
        for (int i = 0; i < num_items; ++i) {
            log.records.push_back({"u" + std::to_string(u), "i" + std::to_string(i),
                                   (u * num_items + i) % behaviors_every});
        }
    }
    return log;
}

}  // namespace

TEST_CASE("split produces ceil(ratio*n) training pairs") {
    RawEventLog log;
    log.behavior_names = {"click"};
    for (int i = 0; i < 10; ++i) {
        log.records.push_back({"u" + std::to_string(i % 3), "i" + std::to_string(i), 0});
    }
    const auto dataset = split(log, {.ratio = 0.8, .seed = 1});
    CHECK(dataset.train[0].num_pairs() == 8);
    CHECK(dataset.test[0].num_pairs() == 2);
}

TEST_CASE("split with ratio 1.0 leaves test sets empty") {
    const auto dataset = split(synthetic_log(4, 5, 3), {.ratio = 1.0, .seed = 9});
    for (const auto& t : dataset.test) {
        CHECK(t.num_pairs() == 0);
    }
}

TEST_CASE("split is seed-deterministic and seed-sensitive") {
    const auto log = synthetic_log(10, 10, 3);
    const auto a = split(log, {.ratio = 0.8, .seed = 42});
    const auto b = split(log, {.ratio = 0.8, .seed = 42});
    const auto c = split(log, {.ratio = 0.8, .seed = 43});
    bool any_difference = false;
    for (int k = 0; k < 3; ++k) {
        CHECK(a.train[static_cast<std::size_t>(k)].pairs() ==
              b.train[static_cast<std::size_t>(k)].pairs());
        CHECK(a.test[static_cast<std::size_t>(k)].pairs() ==
              b.test[static_cast<std::size_t>(k)].pairs());
        if (a.train[static_cast<std::size_t>(k)].pairs() !=
            c.train[static_cast<std::size_t>(k)].pairs()) {
            any_difference = true;
        }
    }
    CHECK(any_difference);
}

TEST_CASE("splits are disjoint and cover the deduplicated pairs") {
    RawEventLog log = synthetic_log(8, 9, 3);
    // Duplicate a slice of events; dedup should absorb them.
    for (int extra = 0; extra < 10; ++extra) {
        log.records.push_back(log.records[static_cast<std::size_t>(extra)]);
    }
    const auto dataset = split(log, {.ratio = 0.7, .seed = 5});
    for (int k = 0; k < 3; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        std::set<UserItemPair> unique;
        for (const auto& r : log.records) {
            if (r.behavior == k) {
                unique.emplace(dataset.user_index.at(r.user_key),
                               dataset.item_index.at(r.item_key));
            }
        }
        CHECK(dataset.train[kk].num_pairs() + dataset.test[kk].num_pairs() ==
              static_cast<std::int64_t>(unique.size()));
        for (const auto& [u, i] : dataset.test[kk].pairs()) {
            CHECK_FALSE(dataset.train[kk].contains(u, i));
        }
    }
}

TEST_CASE("split_source_behaviors=false sends sources fully to train") {
    SplitOptions options;
    options.ratio = 0.8;
    options.seed = 3;
    options.split_source_behaviors = false;
    const auto dataset = split(synthetic_log(8, 9, 3), options);
    CHECK(dataset.test[0].num_pairs() == 0);
    CHECK(dataset.test[1].num_pairs() == 0);
    CHECK(dataset.test[2].num_pairs() > 0);
}

TEST_CASE("negative sampling is forced when one candidate remains") {
    const auto train = InteractionSet::from_pairs(0, 1, 2, {{0, 0}});
    RngStream rng(11);
    for (int draw = 0; draw < 20; ++draw) {
        CHECK(sample_negative(train, 0, rng) == 1);
    }
}

TEST_CASE("negative sampling is uniform over non-interacted items") {
    const auto train = InteractionSet::from_pairs(0, 1, 100, {{0, 0}});
    RngStream rng(2025);
    const int draws = 100000;
    std::vector<int> histogram(100, 0);
    for (int d = 0; d < draws; ++d) {
        ++histogram[static_cast<std::size_t>(sample_negative(train, 0, rng))];
    }
    CHECK(histogram[0] == 0);
    // Each of the 99 candidates: p = 1/99, sigma = sqrt(p(1-p)/draws).
    const double p = 1.0 / 99.0;
    const double sigma = std::sqrt(p * (1.0 - p) / draws);
    for (int i = 1; i < 100; ++i) {
        const double freq = histogram[static_cast<std::size_t>(i)] / static_cast<double>(draws);
        CHECK(std::fabs(freq - p) < 3.0 * sigma + 1e-12);
    }
}

TEST_CASE("negative sampling never returns a training positive") {
    RngStream gen(8);
    const auto train = InteractionSet::from_pairs(
        0, 5, 20, {{0, 1}, {0, 5}, {1, 2}, {2, 0}, {2, 19}, {3, 7}, {4, 4}});
    RngStream rng(9);
    for (int d = 0; d < 10000; ++d) {
        const std::int64_t u = gen.next_index(5);
        CHECK_FALSE(train.contains(u, sample_negative(train, u, rng)));
    }
}

TEST_CASE("negative sampling rejects a fully-saturated user") {
    const auto train = InteractionSet::from_pairs(0, 1, 3, {{0, 0}, {0, 1}, {0, 2}});
    RngStream rng(1);
    CHECK_THROWS_AS(sample_negative(train, 0, rng), DataError);
}

TEST_CASE("synthetic funnel sizes and nesting follow the keep fractions") {
    SyntheticSpec spec;
    spec.num_users = 10;
    spec.num_items = 10;
    spec.keep_fractions = {0.5, 0.1};
    spec.seed = 77;
    spec.split_ratio = 1.0;  // keep everything in train for exact counting
    const auto dataset = generate_synthetic(spec);
    CHECK(dataset.train[0].num_pairs() == 50);
    CHECK(dataset.train[1].num_pairs() == 10);
    for (const auto& [u, i] : dataset.train[1].pairs()) {
        CHECK(dataset.train[0].contains(u, i));
    }
}

TEST_CASE("synthetic generation is seed-deterministic") {
    SyntheticSpec spec;
    spec.num_users = 12;
    spec.num_items = 9;
    spec.keep_fractions = {0.4, 0.08};
    spec.seed = 5;
    const auto a = generate_synthetic(spec);
    const auto b = generate_synthetic(spec);
    for (int k = 0; k < 2; ++k) {
        CHECK(a.train[static_cast<std::size_t>(k)].pairs() ==
              b.train[static_cast<std::size_t>(k)].pairs());
        CHECK(a.test[static_cast<std::size_t>(k)].pairs() ==
              b.test[static_cast<std::size_t>(k)].pairs());
    }
}

TEST_CASE("synthetic imbalance ratio is exact by construction") {
    SyntheticSpec spec;
    spec.num_users = 100;
    spec.num_items = 100;
    spec.keep_fractions = {0.3, 0.03};
    spec.seed = 123;
    spec.split_ratio = 1.0;
    const auto dataset = generate_synthetic(spec);
    CHECK(dataset.train[0].num_pairs() == 3000);
    CHECK(dataset.train[1].num_pairs() == 300);
    CHECK(dataset.imbalance_ratio() == 10.0);
}

TEST_CASE("synthetic generation rejects fractions that yield no pairs") {
    SyntheticSpec spec;
    spec.num_users = 10;
    spec.num_items = 10;
    spec.keep_fractions = {0.5, 0.001};
    spec.seed = 1;
    CHECK_THROWS_AS(generate_synthetic(spec), DataError);

    spec.keep_fractions = {0.1, 0.5};
    CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
}

TEST_CASE("restrict_to_behavior keeps indexing and isolates one behavior") {
    SyntheticSpec spec;
    spec.num_users = 10;
    spec.num_items = 8;
    spec.keep_fractions = {0.5, 0.2};
    spec.seed = 3;
    const auto dataset = generate_synthetic(spec);
    const auto single = restrict_to_behavior(dataset, 1);
    CHECK(single.num_behaviors() == 1);
    CHECK(single.target_behavior == 0);
    CHECK(single.num_users == dataset.num_users);
    CHECK(single.train[0].pairs() == dataset.train[1].pairs());
    CHECK(single.test[0].pairs() == dataset.test[1].pairs());
}

TEST_CASE("carve_validation removes the carved pairs from training") {
    SyntheticSpec spec;
    spec.num_users = 20;
    spec.num_items = 15;
    spec.keep_fractions = {0.5, 0.2};
    spec.seed = 4;
    const auto dataset = generate_synthetic(spec);
    const auto carved = carve_validation(dataset, 0.25, 99);
    const auto k = static_cast<std::size_t>(dataset.target_behavior);
    CHECK(carved.train[k].num_pairs() < dataset.train[k].num_pairs());
    CHECK(carved.train[k].num_pairs() + carved.test[k].num_pairs() ==
          dataset.train[k].num_pairs());
    for (const auto& [u, i] : carved.test[k].pairs()) {
        CHECK(dataset.train[k].contains(u, i));
        CHECK_FALSE(carved.train[k].contains(u, i));
    }
}

TEST_CASE("dataset directory round-trips and is byte-stable") {
    SyntheticSpec spec;
    spec.num_users = 15;
    spec.num_items = 12;
    spec.keep_fractions = {0.4, 0.1};
    spec.seed = 21;
    const auto dataset = generate_synthetic(spec);

    const auto dir = std::filesystem::temp_directory_path() / "imgcf_dataset_io_test";
    std::filesystem::remove_all(dir);
    DatasetProvenance provenance;
    provenance.source = "synthetic";
    provenance.seed = spec.seed;
    provenance.split_ratio = spec.split_ratio;
    provenance.imbalance_ratio = dataset.imbalance_ratio();
    write_dataset_dir(dataset, dir, provenance);

    const auto loaded = read_dataset_dir(dir);
    CHECK(loaded.num_users == dataset.num_users);
    CHECK(loaded.num_items == dataset.num_items);
    CHECK(loaded.behavior_names == dataset.behavior_names);
    CHECK(loaded.target_behavior == dataset.target_behavior);
    for (int k = 0; k < 2; ++k) {
        CHECK(loaded.train[static_cast<std::size_t>(k)].pairs() ==
              dataset.train[static_cast<std::size_t>(k)].pairs());
        CHECK(loaded.test[static_cast<std::size_t>(k)].pairs() ==
              dataset.test[static_cast<std::size_t>(k)].pairs());
    }

    const auto hash_before = dataset_metadata_hash(dir);
    write_dataset_dir(dataset, dir, provenance);
    CHECK(dataset_metadata_hash(dir) == hash_before);

    const auto back = read_provenance(dir);
    CHECK(back.source == "synthetic");
    CHECK(back.seed == spec.seed);
}
