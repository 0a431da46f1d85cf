#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mvne/tensor.hpp"

namespace mvne {

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

/// One relation type of a multi-view network, stored as compressed neighbor lists.
///
/// Graphs built through from_edges() are undirected, carry exactly one self-loop
/// per node, and keep each neighbor list sorted and duplicate-free. The raw
/// constructor accepts arbitrary lists so that validate() can be exercised.
class ViewGraph {
public:
    ViewGraph() = default;
    ViewGraph(std::string name, std::vector<std::size_t> offsets, std::vector<NodeId> neighbors);

    static ViewGraph from_edges(std::string name, std::size_t num_nodes, std::span<const Edge> edges);

    const std::string& name() const noexcept { return name_; }
    std::size_t num_nodes() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    /// Directed entry count, self-loops included.
    std::size_t num_entries() const noexcept { return neighbors_.size(); }
    /// Undirected edges excluding self-loops.
    std::size_t num_undirected_edges() const;

    std::span<const NodeId> neighbors(NodeId i) const;
    std::size_t degree(NodeId i) const { return neighbors(i).size(); }

    const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }
    const std::vector<NodeId>& targets() const noexcept { return neighbors_; }
    /// Owning node of each entry: sources()[e] = i for e in [offsets[i], offsets[i+1]).
    std::vector<NodeId> sources() const;
    /// Undirected edge list (i < j), no self-loops, in adjacency order.
    std::vector<Edge> edge_list() const;

    friend bool operator==(const ViewGraph&, const ViewGraph&) = default;

private:
    std::string name_;
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> neighbors_;
};

struct MultiViewGraph {
    std::size_t num_nodes = 0;
    std::vector<ViewGraph> views;
    Tensor attributes;                       ///< N x F
    std::optional<std::vector<int>> labels;  ///< class ids 0..C-1

    std::size_t num_views() const noexcept { return views.size(); }
    std::size_t num_attributes() const noexcept { return attributes.cols(); }
    std::size_t num_classes() const;
    std::vector<std::string> view_names() const;

    friend bool operator==(const MultiViewGraph&, const MultiViewGraph&) = default;
};

struct Violation {
    std::string invariant;  ///< short tag, e.g. "index-range", "symmetry", "self-loop"
    std::size_t view = 0;
    std::size_t index = 0;  ///< offending node (or label position)
    std::string message;
};

/// Checks every structural invariant; never throws.
std::vector<Violation> validate(const MultiViewGraph& g);

/// Node relabeling: node i of the input becomes node perm[i] of the output.
MultiViewGraph permute(const MultiViewGraph& g, std::span<const NodeId> perm);

// File formats ---------------------------------------------------------------
//   edges:      "src<TAB>dst" per line, '#' starts a comment
//   attributes: "N F" header then N rows of F reals
//   labels:     "node_id<TAB>label" per line, every node exactly once

std::vector<Edge> read_edge_file(const std::filesystem::path& path);
Tensor read_attribute_file(const std::filesystem::path& path);
std::vector<int> read_label_file(const std::filesystem::path& path, std::size_t num_nodes);

MultiViewGraph load_multiview_graph(std::span<const std::filesystem::path> edge_paths,
                                    const std::filesystem::path& attr_path,
                                    const std::optional<std::filesystem::path>& label_path = std::nullopt);

/// Loads `<dir>/*.edges` (sorted by file name), `<dir>/attributes.txt` and, if present, `<dir>/labels.txt`.
MultiViewGraph load_dataset_dir(const std::filesystem::path& dir);

/// Writes one `<view name>.edges` per view, `attributes.txt` and (if labelled) `labels.txt`.
/// Returns the written paths.
std::vector<std::filesystem::path> save_multiview_graph(const MultiViewGraph& g, const std::filesystem::path& dir);

void write_label_file(const std::filesystem::path& path, std::span<const int> labels);

}  // namespace mvne
