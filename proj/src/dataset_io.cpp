#include <cstring>
#include <fstream>

#include <json.hpp>

#include "nhnn/dataset.hpp"

namespace nhnn {

namespace {

constexpr char kMagic[4] = {'N', 'H', 'N', 'N'};
constexpr std::uint16_t kVersion = 1;

template <class T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw MalformedFile("unexpected end of file");
    return v;
}

std::string task_name(Task t) {
    return t == Task::NodeClassification ? "node-classification" : "hypergraph-classification";
}

Task task_from_name(const std::string& s) {
    if (s == "node-classification") return Task::NodeClassification;
    if (s == "hypergraph-classification") return Task::HypergraphClassification;
    throw MalformedFile("unknown task '" + s + "'");
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw MalformedFile("cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    write_pod(os, kVersion);

    nlohmann::json header = {
        {"version", 1},
        {"task", task_name(ds.task)},
        {"N", ds.topology.num_nodes()},
        {"M", ds.topology.num_edges()},
        {"d0", ds.feature_dim()},
        {"C", ds.num_classes},
        {"S", ds.num_samples},
        {"has_planted", ds.has_planted},
        {"label_factor", ds.label_factor},
    };
    const std::string hdr = header.dump();
    write_pod(os, static_cast<std::uint32_t>(hdr.size()));
    os.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));

    write_pod(os, static_cast<std::uint64_t>(ds.topology.pairs().size()));
    for (const auto& [v, e] : ds.topology.pairs()) {
        write_pod(os, static_cast<std::uint32_t>(v));
        write_pod(os, static_cast<std::uint32_t>(e));
    }
    // features, f32 row-major
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i)
        for (Eigen::Index j = 0; j < ds.features.cols(); ++j) write_pod(os, ds.features(i, j));
    for (int label : ds.labels) write_pod(os, static_cast<std::uint32_t>(label));
    os.write(reinterpret_cast<const char*>(ds.train_mask.data()),
             static_cast<std::streamsize>(ds.train_mask.size()));
    os.write(reinterpret_cast<const char*>(ds.val_mask.data()),
             static_cast<std::streamsize>(ds.val_mask.size()));
    os.write(reinterpret_cast<const char*>(ds.test_mask.data()),
             static_cast<std::streamsize>(ds.test_mask.size()));
    if (ds.has_planted)
        for (int f : ds.planted_factors) write_pod(os, static_cast<std::uint32_t>(f));
    if (!os) throw MalformedFile("write failure on '" + path + "'");
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw MalformedFile("cannot open '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw MalformedFile("bad magic bytes");
    const auto version = read_pod<std::uint16_t>(is);
    if (version != kVersion)
        throw VersionMismatch("file version " + std::to_string(version) + ", expected " +
                              std::to_string(kVersion));

    const auto hdr_len = read_pod<std::uint32_t>(is);
    std::string hdr(hdr_len, '\0');
    is.read(hdr.data(), hdr_len);
    if (!is) throw MalformedFile("truncated header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(hdr);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedFile(std::string("header parse: ") + e.what());
    }

    Dataset ds;
    ds.task = task_from_name(header.at("task").get<std::string>());
    const int n = header.at("N").get<int>();
    const int m = header.at("M").get<int>();
    const int d0 = header.at("d0").get<int>();
    ds.num_classes = header.at("C").get<int>();
    ds.num_samples = header.at("S").get<int>();
    ds.has_planted = header.at("has_planted").get<bool>();
    ds.label_factor = header.at("label_factor").get<int>();

    const auto num_pairs = read_pod<std::uint64_t>(is);
    std::vector<Hypergraph::Pair> pairs;
    pairs.reserve(num_pairs);
    for (std::uint64_t i = 0; i < num_pairs; ++i) {
        const auto v = read_pod<std::uint32_t>(is);
        const auto e = read_pod<std::uint32_t>(is);
        pairs.emplace_back(static_cast<int>(v), static_cast<int>(e));
    }
    ds.topology = Hypergraph::build(std::move(pairs), n, m);

    const Eigen::Index feat_rows =
        ds.task == Task::NodeClassification ? n : static_cast<Eigen::Index>(ds.num_samples) * n;
    ds.features = MatF(feat_rows, d0);
    for (Eigen::Index i = 0; i < feat_rows; ++i)
        for (Eigen::Index j = 0; j < d0; ++j) ds.features(i, j) = read_pod<float>(is);

    const int pop = ds.labeled_population();
    ds.labels.resize(pop);
    for (int i = 0; i < pop; ++i) ds.labels[i] = static_cast<int>(read_pod<std::uint32_t>(is));
    auto read_mask = [&](std::vector<std::uint8_t>& mask) {
        mask.resize(pop);
        is.read(reinterpret_cast<char*>(mask.data()), pop);
        if (!is) throw MalformedFile("truncated mask section");
    };
    read_mask(ds.train_mask);
    read_mask(ds.val_mask);
    read_mask(ds.test_mask);
    if (ds.has_planted) {
        ds.planted_factors.resize(m);
        for (int e = 0; e < m; ++e)
            ds.planted_factors[e] = static_cast<int>(read_pod<std::uint32_t>(is));
    }
    return ds;
}

}  // namespace nhnn
