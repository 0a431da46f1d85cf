#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "mvne/cli.hpp"
#include "mvne/error.hpp"
#include "mvne/evaluation.hpp"
#include "mvne/graph.hpp"
#include "mvne/synthetic.hpp"
#include "mvne/trainer.hpp"

namespace py = pybind11;
using namespace mvne;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<long long, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_numpy(const Tensor& t) {
    py::array_t<double> out({t.rows(), t.cols()});
    std::copy(t.data().begin(), t.data().end(), out.mutable_data());
    return out;
}

Tensor to_tensor(const Array& a) {
    if (a.ndim() != 2) throw ShapeError("expected a 2-D array, got " + std::to_string(a.ndim()) + " dimensions");
    Tensor t(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), t.data().begin());
    return t;
}

std::vector<int> to_labels(const IntArray& a) {
    if (a.ndim() != 1) throw ShapeError("labels must be a 1-D array");
    return {a.data(), a.data() + a.size()};
}

py::array_t<long long> labels_to_numpy(const std::vector<int>& v) {
    py::array_t<long long> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::array_t<long long> edges_to_numpy(const ViewGraph& v) {
    const auto edges = v.edge_list();
    py::array_t<long long> out({edges.size(), std::size_t{2}});
    auto w = out.mutable_unchecked<2>();
    for (std::size_t k = 0; k < edges.size(); ++k) {
        w(k, 0) = static_cast<long long>(edges[k].first);
        w(k, 1) = static_cast<long long>(edges[k].second);
    }
    return out;
}

KeyValues to_key_values(const py::dict& d) {
    KeyValues kv;
    for (const auto& [k, v] : d) {
        std::string value;
        if (py::isinstance<py::bool_>(v)) value = v.cast<bool>() ? "true" : "false";
        else if (py::isinstance<py::float_>(v)) value = format_real(v.cast<double>());
        else value = py::str(v).cast<std::string>();
        kv[py::str(k).cast<std::string>()] = value;
    }
    return kv;
}

py::dict to_dict(const KeyValues& kv) {
    py::dict d;
    for (const auto& [k, v] : kv) d[py::str(k)] = v;
    return d;
}

MultiViewGraph make_graph(std::size_t num_nodes, const py::dict& views, const Array& attributes,
                          const std::optional<IntArray>& labels) {
    MultiViewGraph g;
    g.num_nodes = num_nodes;
    for (const auto& [name, arr] : views) {
        const auto e = arr.cast<IntArray>();
        if (e.ndim() != 2 || (e.size() > 0 && e.shape(1) != 2)) throw ShapeError("edge arrays must have shape (E, 2)");
        std::vector<Edge> edges;
        const auto r = e.unchecked<2>();
        for (py::ssize_t k = 0; k < (e.size() ? e.shape(0) : 0); ++k) {
            if (r(k, 0) < 0 || r(k, 1) < 0) throw IndexError("negative node id in view " + py::str(name).cast<std::string>());
            edges.emplace_back(static_cast<NodeId>(r(k, 0)), static_cast<NodeId>(r(k, 1)));
        }
        g.views.push_back(ViewGraph::from_edges(py::str(name).cast<std::string>(), num_nodes, edges));
    }
    g.attributes = to_tensor(attributes);
    if (labels) g.labels = to_labels(*labels);
    const auto bad = validate(g);
    if (!bad.empty()) throw ConfigError("invalid graph: " + bad.front().message);
    return g;
}

py::dict embedding_dict(const MultiViewGraph& g, const EmbeddingSet& e) {
    py::dict views;
    for (std::size_t r = 0; r < e.views.size(); ++r) views[py::str(g.views[r].name())] = to_numpy(e.views[r]);
    py::dict out;
    out["fused"] = to_numpy(e.fused);
    out["views"] = views;
    out["view_weights"] = e.view_weights.size() ? py::object(to_numpy(e.view_weights)) : py::none();
    return out;
}

py::dict report_dict(const EvalReport& r) {
    py::dict d;
    d["nmi"] = r.mean_nmi;
    d["nmi_runs"] = r.nmi;
    if (r.classification) {
        d["macro_f1"] = r.mean_macro_f1;
        d["micro_f1"] = r.mean_micro_f1;
        d["macro_f1_runs"] = r.macro_f1;
        d["micro_f1_runs"] = r.micro_f1;
    }
    d["runs"] = r.runs();
    d["train_ratio"] = r.train_ratio;
    d["base_seed"] = r.base_seed;
    d["table"] = format_report_table(r);
    return d;
}

}  // namespace

PYBIND11_MODULE(_mvne, m) {
    m.doc() = "Multi-view network embedding core (contrastive node-to-node training, evaluation probes).";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<IndexError>(m, "IndexError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    py::class_<MultiViewGraph>(m, "Graph")
        .def(py::init(&make_graph), py::arg("num_nodes"), py::arg("views"), py::arg("attributes"),
             py::arg("labels") = py::none(),
             "Build from {view name: (E, 2) edge array}, an (N, F) attribute matrix and optional labels.")
        .def_readonly("num_nodes", &MultiViewGraph::num_nodes)
        .def_property_readonly("num_views", &MultiViewGraph::num_views)
        .def_property_readonly("num_attributes", &MultiViewGraph::num_attributes)
        .def_property_readonly("num_classes", &MultiViewGraph::num_classes)
        .def_property_readonly("view_names", &MultiViewGraph::view_names)
        .def_property_readonly("attributes", [](const MultiViewGraph& g) { return to_numpy(g.attributes); })
        .def_property_readonly("labels",
                               [](const MultiViewGraph& g) -> py::object {
                                   if (!g.labels) return py::none();
                                   return labels_to_numpy(*g.labels);
                               })
        .def(
            "edges",
            [](const MultiViewGraph& g, const std::string& view) {
                for (const auto& v : g.views)
                    if (v.name() == view) return edges_to_numpy(v);
                throw IndexError("no view named '" + view + "'");
            },
            py::arg("view"), "Undirected edges (i < j) of one view as an (E, 2) array.")
        .def("save", [](const MultiViewGraph& g, const std::filesystem::path& dir) { save_multiview_graph(g, dir); },
             py::arg("directory"))
        .def("__repr__", [](const MultiViewGraph& g) {
            std::ostringstream os;
            os << "<mvne.Graph nodes=" << g.num_nodes << " views=" << g.num_views() << " attributes=" << g.num_attributes()
               << ">";
            return os.str();
        });

    m.def("load", &load_dataset_dir, py::arg("directory"), "Read a dataset directory (*.edges, attributes.txt, labels.txt).");

    m.def(
        "generate",
        [](const py::dict& spec) { return generate(synth_spec_from(to_key_values(spec))); }, py::arg("spec") = py::dict(),
        "Multi-view planted-partition graph. Keys: n, c, views, p_in, p_out, complementary, attr_dim, attr_noise, seed.");

    m.def("default_config", [] { return to_dict(to_key_values(TrainConfig{})); }, "Every training key with its default.");

    m.def(
        "train",
        [](const MultiViewGraph& g, const py::dict& config) {
            const TrainConfig cfg = train_config_from(to_key_values(config));
            TrainResult res;
            {
                py::gil_scoped_release release;
                res = train(g, cfg);
            }
            py::dict out = embedding_dict(g, res.embeddings);
            out["loss_history"] = res.loss_history;
            out["best_loss"] = res.best_loss;
            out["best_epoch"] = res.best_epoch;
            out["stopped_early"] = res.stopped_early;
            out["config"] = to_dict(to_key_values(cfg));
            return out;
        },
        py::arg("graph"), py::arg("config") = py::dict(),
        "Train on `graph` with dotted config keys (e.g. {'trainer.epochs': 50}). Returns embeddings and the loss history.");

    m.def(
        "evaluate",
        [](const Array& z, const IntArray& labels, std::size_t runs, double train_ratio, std::uint64_t seed,
           bool classification) {
            const Tensor t = to_tensor(z);
            const std::vector<int> l = to_labels(labels);
            EvalReport rep;
            {
                py::gil_scoped_release release;
                rep = evaluate(t, l, {.runs = runs, .train_ratio = train_ratio, .base_seed = seed,
                                      .classification = classification});
            }
            return report_dict(rep);
        },
        py::arg("embeddings"), py::arg("labels"), py::arg("runs") = 50, py::arg("train_ratio") = 0.8,
        py::arg("seed") = 0, py::arg("classification") = true,
        "Logistic-regression F1 and k-means NMI averaged over `runs` seeded splits.");

    m.def(
        "kmeans",
        [](const Array& z, std::size_t k, std::uint64_t seed, std::size_t restarts) {
            const KMeansResult r = kmeans(to_tensor(z), k, seed, restarts);
            return py::make_tuple(labels_to_numpy(r.assignment), r.inertia);
        },
        py::arg("points"), py::arg("k"), py::arg("seed") = 0, py::arg("restarts") = 10);

    m.def(
        "nmi", [](const IntArray& a, const IntArray& b) { return nmi(to_labels(a), to_labels(b)); }, py::arg("a"),
        py::arg("b"));

    m.def(
        "f1_scores",
        [](const IntArray& pred, const IntArray& truth, std::size_t num_classes) {
            const F1 f = f1_scores(to_labels(pred), to_labels(truth), num_classes);
            return py::make_tuple(f.macro, f.micro);
        },
        py::arg("pred"), py::arg("truth"), py::arg("num_classes"));

    m.def(
        "logistic_regression",
        [](const Array& train, const IntArray& labels, const Array& test, std::size_t num_classes) {
            return labels_to_numpy(logistic_regression(to_tensor(train), to_labels(labels), to_tensor(test), num_classes));
        },
        py::arg("train"), py::arg("labels"), py::arg("test"), py::arg("num_classes"));

    m.def("table3_variants", &cli::table3_variant_names, "Variant names in ablation-table row order.");

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "mvne");
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command-line tool in-process; returns (exit code, stdout, stderr).");
}
