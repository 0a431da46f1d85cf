#include "mvne/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mvne/error.hpp"

namespace mvne {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// ViewGraph

ViewGraph::ViewGraph(std::string name, std::vector<std::size_t> offsets, std::vector<NodeId> neighbors)
    : name_(std::move(name)), offsets_(std::move(offsets)), neighbors_(std::move(neighbors)) {
    if (offsets_.empty() || offsets_.front() != 0 || offsets_.back() != neighbors_.size() ||
        !std::is_sorted(offsets_.begin(), offsets_.end()))
        throw ShapeError("view '" + name_ + "': offsets do not describe the neighbor array");
}

ViewGraph ViewGraph::from_edges(std::string name, std::size_t num_nodes, std::span<const Edge> edges) {
    std::vector<std::vector<NodeId>> adj(num_nodes);
    for (NodeId i = 0; i < num_nodes; ++i) adj[i].push_back(i);
    for (const auto& [u, v] : edges) {
        if (u >= num_nodes || v >= num_nodes)
            throw IndexError("view '" + name + "': edge (" + std::to_string(u) + "," + std::to_string(v) +
                             ") has endpoint >= N=" + std::to_string(num_nodes));
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    std::vector<std::size_t> offsets{0};
    std::vector<NodeId> nbrs;
    for (auto& list : adj) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
        nbrs.insert(nbrs.end(), list.begin(), list.end());
        offsets.push_back(nbrs.size());
    }
    return ViewGraph(std::move(name), std::move(offsets), std::move(nbrs));
}

std::size_t ViewGraph::num_undirected_edges() const { return edge_list().size(); }

std::span<const NodeId> ViewGraph::neighbors(NodeId i) const {
    if (i >= num_nodes())
        throw IndexError("node " + std::to_string(i) + " out of range for view '" + name_ + "' with " +
                         std::to_string(num_nodes()) + " nodes");
    return {neighbors_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

std::vector<NodeId> ViewGraph::sources() const {
    std::vector<NodeId> src(neighbors_.size());
    for (NodeId i = 0; i < num_nodes(); ++i)
        std::fill(src.begin() + offsets_[i], src.begin() + offsets_[i + 1], i);
    return src;
}

std::vector<Edge> ViewGraph::edge_list() const {
    std::vector<Edge> out;
    for (NodeId i = 0; i < num_nodes(); ++i)
        for (NodeId j : neighbors(i))
            if (i < j) out.emplace_back(i, j);
    return out;
}

// ---------------------------------------------------------------------------
// MultiViewGraph

std::size_t MultiViewGraph::num_classes() const {
    if (!labels || labels->empty()) return 0;
    return static_cast<std::size_t>(*std::max_element(labels->begin(), labels->end())) + 1;
}

std::vector<std::string> MultiViewGraph::view_names() const {
    std::vector<std::string> names;
    for (const auto& v : views) names.push_back(v.name());
    return names;
}

std::vector<Violation> validate(const MultiViewGraph& g) {
    std::vector<Violation> out;
    const std::size_t n = g.num_nodes;
    if (g.views.empty()) out.push_back({"view-count", 0, 0, "graph has no views"});
    if (g.attributes.rows() != n)
        out.push_back({"attribute-rows", 0, g.attributes.rows(),
                       "attribute matrix has " + std::to_string(g.attributes.rows()) + " rows, expected " +
                           std::to_string(n)});
    if (g.attributes.cols() == 0) out.push_back({"attribute-cols", 0, 0, "attribute matrix has no columns"});

    for (std::size_t r = 0; r < g.views.size(); ++r) {
        const ViewGraph& v = g.views[r];
        if (v.num_nodes() != n) {
            out.push_back({"node-count", r, v.num_nodes(),
                           "view '" + v.name() + "' has " + std::to_string(v.num_nodes()) + " nodes"});
            continue;
        }
        const auto& offs = v.offsets();
        const auto& tg = v.targets();
        bool ranges_ok = true;
        for (NodeId i = 0; i < n; ++i) {
            for (std::size_t e = offs[i]; e < offs[i + 1]; ++e) {
                if (tg[e] >= n) {
                    out.push_back({"index-range", r, i,
                                   "neighbor " + std::to_string(tg[e]) + " of node " + std::to_string(i) +
                                       " is out of range"});
                    ranges_ok = false;
                }
            }
        }
        for (NodeId i = 0; i < n; ++i) {
            std::span<const NodeId> nb(tg.data() + offs[i], offs[i + 1] - offs[i]);
            bool sorted_unique = true;
            for (std::size_t k = 1; k < nb.size(); ++k)
                if (nb[k] <= nb[k - 1]) sorted_unique = false;
            if (!sorted_unique)
                out.push_back({"sorted-unique", r, i, "neighbor list of node " + std::to_string(i) +
                                                          " is not strictly increasing"});
            const auto self_count = std::count(nb.begin(), nb.end(), i);
            if (self_count != 1)
                out.push_back({"self-loop", r, i,
                               "node " + std::to_string(i) + " has " + std::to_string(self_count) + " self-loops"});
        }
        if (!ranges_ok) continue;
        for (NodeId i = 0; i < n; ++i) {
            for (std::size_t e = offs[i]; e < offs[i + 1]; ++e) {
                const NodeId j = tg[e];
                std::span<const NodeId> nj(tg.data() + offs[j], offs[j + 1] - offs[j]);
                if (std::find(nj.begin(), nj.end(), i) == nj.end())
                    out.push_back({"symmetry", r, i,
                                   "edge " + std::to_string(i) + "->" + std::to_string(j) + " has no reverse"});
            }
        }
    }

    if (g.labels) {
        if (g.labels->size() != n)
            out.push_back({"label-count", 0, g.labels->size(), "label vector length differs from N"});
        for (std::size_t i = 0; i < g.labels->size(); ++i)
            if ((*g.labels)[i] < 0)
                out.push_back({"label-range", 0, i, "negative label at node " + std::to_string(i)});
    }
    return out;
}

MultiViewGraph permute(const MultiViewGraph& g, std::span<const NodeId> perm) {
    const std::size_t n = g.num_nodes;
    if (perm.size() != n) throw ShapeError("permutation length differs from node count");
    MultiViewGraph out;
    out.num_nodes = n;
    for (const auto& v : g.views) {
        std::vector<Edge> edges;
        for (const auto& [i, j] : v.edge_list()) edges.emplace_back(perm[i], perm[j]);
        out.views.push_back(ViewGraph::from_edges(v.name(), n, edges));
    }
    out.attributes = Tensor(n, g.attributes.cols());
    for (NodeId i = 0; i < n; ++i) {
        auto src = g.attributes.row(i);
        std::copy(src.begin(), src.end(), out.attributes.row(perm[i]).begin());
    }
    if (g.labels) {
        std::vector<int> l(n);
        for (NodeId i = 0; i < n; ++i) l[perm[i]] = (*g.labels)[i];
        out.labels = std::move(l);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Text formats

namespace {

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

std::string_view strip_comment(std::string_view s) {
    if (auto p = s.find('#'); p != std::string_view::npos) s = s.substr(0, p);
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
bool parse_int(std::string_view tok, T& out) {
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc{} && p == tok.data() + tok.size();
}

bool parse_real(std::string_view tok, double& out) {
    std::string s(tok);
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return !s.empty() && end == s.c_str() + s.size();
}

std::string fmt_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::vector<Edge> read_edge_file(const fs::path& path) {
    auto in = open_in(path);
    std::vector<Edge> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto body = strip_comment(line);
        if (body.empty()) continue;
        auto tok = split_ws(body);
        Edge e;
        if (tok.size() != 2 || !parse_int(tok[0], e.first) || !parse_int(tok[1], e.second))
            throw ParseError(path.string() + ": expected 'src<TAB>dst'", lineno);
        edges.push_back(e);
    }
    return edges;
}

Tensor read_attribute_file(const fs::path& path) {
    auto in = open_in(path);
    std::string line;
    std::size_t lineno = 0;
    std::size_t n = 0, f = 0;
    bool have_header = false;
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto body = strip_comment(line);
        if (body.empty()) continue;
        auto tok = split_ws(body);
        if (!have_header) {
            if (tok.size() != 2 || !parse_int(tok[0], n) || !parse_int(tok[1], f) || f == 0)
                throw ParseError(path.string() + ": expected header 'N F' with F >= 1", lineno);
            have_header = true;
            values.reserve(n * f);
            continue;
        }
        if (tok.size() != f)
            throw ParseError(path.string() + ": expected " + std::to_string(f) + " values, found " +
                                 std::to_string(tok.size()),
                             lineno);
        for (auto t : tok) {
            double v;
            if (!parse_real(t, v)) throw ParseError(path.string() + ": bad real '" + std::string(t) + "'", lineno);
            values.push_back(v);
        }
        ++rows;
    }
    if (!have_header) throw ParseError(path.string() + ": missing 'N F' header");
    if (rows != n)
        throw ShapeError(path.string() + ": header declares " + std::to_string(n) + " rows but file has " +
                         std::to_string(rows));
    return Tensor({n, f}, std::move(values));
}

std::vector<int> read_label_file(const fs::path& path, std::size_t num_nodes) {
    auto in = open_in(path);
    std::vector<int> labels(num_nodes, -1);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto body = strip_comment(line);
        if (body.empty()) continue;
        auto tok = split_ws(body);
        std::size_t node;
        int label;
        if (tok.size() != 2 || !parse_int(tok[0], node) || !parse_int(tok[1], label) || label < 0)
            throw ParseError(path.string() + ": expected 'node_id<TAB>label' with label >= 0", lineno);
        if (node >= num_nodes)
            throw IndexError(path.string() + ": node " + std::to_string(node) + " >= N=" +
                             std::to_string(num_nodes) + " (line " + std::to_string(lineno) + ")");
        if (labels[node] != -1)
            throw ParseError(path.string() + ": duplicate label for node " + std::to_string(node), lineno);
        labels[node] = label;
    }
    for (std::size_t i = 0; i < num_nodes; ++i)
        if (labels[i] == -1) throw ShapeError(path.string() + ": node " + std::to_string(i) + " has no label");
    return labels;
}

MultiViewGraph load_multiview_graph(std::span<const fs::path> edge_paths, const fs::path& attr_path,
                                    const std::optional<fs::path>& label_path) {
    if (edge_paths.empty()) throw ConfigError("at least one edge file is required");
    MultiViewGraph g;
    g.attributes = read_attribute_file(attr_path);
    g.num_nodes = g.attributes.rows();
    for (const auto& p : edge_paths) {
        auto edges = read_edge_file(p);
        g.views.push_back(ViewGraph::from_edges(p.stem().string(), g.num_nodes, edges));
    }
    if (label_path) g.labels = read_label_file(*label_path, g.num_nodes);
    return g;
}

MultiViewGraph load_dataset_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a dataset directory: " + dir.string());
    std::vector<fs::path> edges;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".edges") edges.push_back(entry.path());
    std::sort(edges.begin(), edges.end());
    if (edges.empty()) throw IoError("no *.edges files in " + dir.string());
    std::optional<fs::path> labels;
    if (fs::exists(dir / "labels.txt")) labels = dir / "labels.txt";
    return load_multiview_graph(edges, dir / "attributes.txt", labels);
}

void write_label_file(const fs::path& path, std::span<const int> labels) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < labels.size(); ++i) out << i << '\t' << labels[i] << '\n';
}

std::vector<fs::path> save_multiview_graph(const MultiViewGraph& g, const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<fs::path> written;
    for (const auto& v : g.views) {
        auto p = dir / (v.name() + ".edges");
        auto out = open_out(p);
        for (const auto& [i, j] : v.edge_list()) out << i << '\t' << j << '\n';
        written.push_back(p);
    }
    {
        auto p = dir / "attributes.txt";
        auto out = open_out(p);
        out << g.attributes.rows() << ' ' << g.attributes.cols() << '\n';
        for (std::size_t i = 0; i < g.attributes.rows(); ++i) {
            auto row = g.attributes.row(i);
            for (std::size_t c = 0; c < row.size(); ++c) out << (c ? " " : "") << fmt_real(row[c]);
            out << '\n';
        }
        written.push_back(p);
    }
    if (g.labels) {
        auto p = dir / "labels.txt";
        write_label_file(p, *g.labels);
        written.push_back(p);
    }
    return written;
}

}  // namespace mvne
