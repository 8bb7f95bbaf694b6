#include "graphmi/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "graphmi/rng.hpp"

namespace fs = std::filesystem;

namespace gmi {

namespace {

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        lines.push_back(line);
    }
    return lines;
}

long parse_int(const std::string& token, const std::string& context) {
    std::size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(token, &pos);
    } catch (const std::exception&) {
        throw Error(context + ": not an integer: '" + token + "'");
    }
    if (pos != token.size()) throw Error(context + ": not an integer: '" + token + "'");
    return v;
}

}  // namespace

Graph load_dataset(const std::string& dir) {
    const fs::path root(dir);
    if (!fs::is_directory(root)) throw Error("dataset directory not found: " + dir);

    Graph g;

    // labels.csv fixes the node count.
    const auto label_lines = read_lines(root / "labels.csv");
    g.num_nodes = label_lines.size();
    if (g.num_nodes == 0) throw Error("labels.csv: no rows");
    g.labels.reserve(g.num_nodes);
    for (const auto& line : label_lines) {
        const long y = parse_int(line, "labels.csv");
        if (y < 0) throw Error("labels.csv: negative label");
        g.labels.push_back(static_cast<int>(y));
    }

    const fs::path feat_path = root / "features.csv";
    if (fs::exists(feat_path)) {
        const auto rows = read_lines(feat_path);
        if (rows.size() != g.num_nodes)
            throw Error("features.csv: row count does not match labels.csv");
        std::size_t cols = 0;
        std::vector<double> values;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::stringstream ss(rows[i]);
            std::string cell;
            std::size_t c = 0;
            while (std::getline(ss, cell, ',')) {
                try {
                    values.push_back(std::stod(cell));
                } catch (const std::exception&) {
                    throw Error("features.csv: not a number: '" + cell + "'");
                }
                ++c;
            }
            if (i == 0)
                cols = c;
            else if (c != cols)
                throw Error("features.csv: inconsistent column count");
        }
        g.features = Tensor({g.num_nodes, cols});
        g.features.data = std::move(values);
    } else {
        g.features = Tensor::identity(g.num_nodes);
    }

    g.adjacency = Tensor({g.num_nodes, g.num_nodes});
    std::size_t self_loops = 0;
    for (const auto& line : read_lines(root / "edges.tsv")) {
        std::stringstream ss(line);
        std::string a, b, extra;
        if (!(ss >> a >> b)) throw Error("edges.tsv: malformed line '" + line + "'");
        if (ss >> extra) throw Error("edges.tsv: more than two columns in '" + line + "'");
        const long u = parse_int(a, "edges.tsv");
        const long v = parse_int(b, "edges.tsv");
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= g.num_nodes ||
            static_cast<std::size_t>(v) >= g.num_nodes)
            throw Error("edges.tsv: node id out of range in '" + line + "'");
        if (u == v) {
            ++self_loops;
            continue;
        }
        g.adjacency(static_cast<std::size_t>(u), static_cast<std::size_t>(v)) = 1.0;
        g.adjacency(static_cast<std::size_t>(v), static_cast<std::size_t>(u)) = 1.0;
    }
    if (self_loops > 0)
        std::fprintf(stderr, "graphmi: dropped %zu self-loop(s) from %s\n", self_loops,
                     (root / "edges.tsv").string().c_str());

    g.validate();
    return g;
}

void save_dataset(const Graph& g, const std::string& dir) {
    const fs::path root(dir);
    fs::create_directories(root);
    {
        std::ofstream out(root / "edges.tsv");
        for (auto [i, j] : g.edge_list()) out << i << "\t" << j << "\n";
    }
    {
        std::ofstream out(root / "labels.csv");
        for (int y : g.labels) out << y << "\n";
    }
    {
        std::ofstream out(root / "features.csv");
        out.precision(17);
        for (std::size_t i = 0; i < g.num_nodes; ++i) {
            for (std::size_t f = 0; f < g.features.cols(); ++f) {
                if (f) out << ",";
                out << g.features(i, f);
            }
            out << "\n";
        }
    }
}

Graph generate_sbm(const SbmParams& params, std::uint64_t seed) {
    if (params.blocks < 1 || params.nodes_per_block < 1)
        throw Error("generate_sbm: blocks and nodes_per_block must be positive");
    if (!(params.p_in >= 0.0 && params.p_in <= 1.0 && params.p_out >= 0.0 && params.p_out <= 1.0))
        throw Error("generate_sbm: probabilities must be in [0,1]");
    const std::size_t n =
        static_cast<std::size_t>(params.blocks) * static_cast<std::size_t>(params.nodes_per_block);
    Graph g;
    g.num_nodes = n;
    g.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        g.labels[i] = static_cast<int>(i / static_cast<std::size_t>(params.nodes_per_block));

    Rng root(seed);
    Rng edge_rng = root.fork("edges");
    g.adjacency = Tensor({n, n});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double p = g.labels[i] == g.labels[j] ? params.p_in : params.p_out;
            if (edge_rng.bernoulli(p)) {
                g.adjacency(i, j) = 1.0;
                g.adjacency(j, i) = 1.0;
            }
        }

    Rng feat_rng = root.fork("features");
    g.features = Tensor({n, static_cast<std::size_t>(params.blocks)});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t b = 0; b < static_cast<std::size_t>(params.blocks); ++b) {
            const double base = g.labels[i] == static_cast<int>(b) ? 1.0 : 0.0;
            g.features(i, b) = base + params.feature_noise * feat_rng.normal();
        }
    return g;
}

}  // namespace gmi
