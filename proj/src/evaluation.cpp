#include "mvne/evaluation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "mvne/config.hpp"
#include "mvne/error.hpp"
#include "mvne/graph.hpp"

namespace mvne {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMat> view(const Tensor& t) { return {t.data().data(), Eigen::Index(t.rows()), Eigen::Index(t.cols())}; }

void check_labels(std::span<const int> labels, std::size_t num_classes, const char* what) {
    for (int l : labels)
        if (l < 0 || static_cast<std::size_t>(l) >= num_classes)
            throw IndexError(std::string(what) + ": label " + std::to_string(l) + " outside [0," +
                             std::to_string(num_classes) + ")");
}

}  // namespace

// ---------------------------------------------------------------------------

Split split_nodes(std::size_t n, double train_ratio, std::uint64_t seed, std::optional<std::span<const int>> labels) {
    if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw DomainError("train ratio must lie in (0, 1)");
    std::mt19937_64 rng(seed);
    Split s;
    auto take = [&](std::vector<std::size_t> ids) {
        std::shuffle(ids.begin(), ids.end(), rng);
        const auto m = ids.size();
        auto k = static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(m)));
        k = std::clamp<std::size_t>(k, 1, m - 1);
        s.train.insert(s.train.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));
        s.test.insert(s.test.end(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end());
    };
    if (labels) {
        if (labels->size() != n) throw ShapeError("split_nodes: label count differs from n");
        std::map<int, std::vector<std::size_t>> by_class;
        for (std::size_t i = 0; i < n; ++i) by_class[(*labels)[i]].push_back(i);
        for (auto& [c, ids] : by_class)
            if (ids.size() < 2)
                throw DomainError("class " + std::to_string(c) + " has fewer than 2 members; cannot stratify");
        for (auto& [c, ids] : by_class) take(std::move(ids));
    } else {
        if (n < 2) throw DomainError("split_nodes needs at least 2 nodes");
        std::vector<std::size_t> ids(n);
        std::iota(ids.begin(), ids.end(), 0);
        take(std::move(ids));
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

// ---------------------------------------------------------------------------

std::vector<int> logistic_regression(const Tensor& train, std::span<const int> train_labels, const Tensor& test,
                                     std::size_t num_classes, const LogisticRegressionOptions& opt) {
    const auto n = static_cast<Eigen::Index>(train.rows());
    const auto d = static_cast<Eigen::Index>(train.cols());
    const auto C = static_cast<Eigen::Index>(num_classes);
    if (train_labels.size() != train.rows()) throw ShapeError("logistic_regression: label count differs from rows");
    if (test.cols() != train.cols() && test.rows() > 0) throw ShapeError("logistic_regression: feature width differs");
    if (n == 0) throw DomainError("logistic_regression: empty training set");
    check_labels(train_labels, num_classes, "logistic_regression");
    if (std::all_of(train_labels.begin(), train_labels.end(), [&](int l) { return l == train_labels[0]; }))
        throw DomainError("logistic_regression: training set contains a single class");

    // Augmented design matrix with a trailing bias column.
    Eigen::MatrixXd X(n, d + 1);
    X.leftCols(d) = view(train);
    X.col(d).setOnes();
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, C);
    for (Eigen::Index i = 0; i < n; ++i) Y(i, train_labels[static_cast<std::size_t>(i)]) = 1.0;

    // Step 1/L with L bounding the Hessian of the mean cross-entropy.
    const Eigen::MatrixXd gram = X.transpose() * X / static_cast<double>(n);
    const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    const double step = 1.0 / (0.5 * lmax + opt.l2);

    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(d + 1, C);
    Eigen::MatrixXd V = W;  // look-ahead point
    double t = 1.0;
    auto gradient = [&](const Eigen::MatrixXd& M) {
        Eigen::MatrixXd logits = X * M;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double mx = logits.row(i).maxCoeff();
            logits.row(i) = (logits.row(i).array() - mx).exp().matrix();
            logits.row(i) /= logits.row(i).sum();
        }
        Eigen::MatrixXd G = X.transpose() * (logits - Y) / static_cast<double>(n);
        G.topRows(d) += opt.l2 * M.topRows(d);
        return G;
    };
    for (std::size_t it = 0; it < opt.max_iter; ++it) {
        const Eigen::MatrixXd Gw = gradient(W);
        if (Gw.norm() < opt.grad_tol) break;
        const Eigen::MatrixXd next = V - step * gradient(V);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        V = next + ((t - 1.0) / t_next) * (next - W);
        // Restart momentum when the step points uphill.
        if (((next - W).array() * Gw.array()).sum() > 0.0) {
            V = next;
            t = 1.0;
        } else {
            t = t_next;
        }
        W = next;
    }

    std::vector<int> pred(test.rows());
    for (std::size_t i = 0; i < test.rows(); ++i) {
        Eigen::VectorXd x(d + 1);
        for (Eigen::Index c = 0; c < d; ++c) x[c] = test(i, static_cast<std::size_t>(c));
        x[d] = 1.0;
        const Eigen::VectorXd s = W.transpose() * x;
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < C; ++c)
            if (s[c] > s[best]) best = c;
        pred[i] = static_cast<int>(best);
    }
    return pred;
}

// ---------------------------------------------------------------------------

F1 f1_scores(std::span<const int> pred, std::span<const int> truth, std::size_t num_classes) {
    if (pred.size() != truth.size()) throw ShapeError("f1_scores: length mismatch");
    check_labels(pred, num_classes, "f1_scores");
    check_labels(truth, num_classes, "f1_scores");
    std::vector<std::size_t> tp(num_classes), fp(num_classes), fn(num_classes);
    std::vector<bool> present(num_classes);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        present[pred[i]] = present[truth[i]] = true;
        if (pred[i] == truth[i]) {
            ++tp[pred[i]];
        } else {
            ++fp[pred[i]];
            ++fn[truth[i]];
        }
    }
    F1 out;
    std::size_t classes = 0, TP = 0, FP = 0, FN = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        TP += tp[c];
        FP += fp[c];
        FN += fn[c];
        if (!present[c]) continue;
        ++classes;
        const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
        out.macro += denom > 0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
    }
    if (classes) out.macro /= static_cast<double>(classes);
    const double micro_denom = static_cast<double>(2 * TP + FP + FN);
    out.micro = micro_denom > 0 ? 2.0 * static_cast<double>(TP) / micro_denom : 0.0;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double t = a[c] - b[c];
        s += t * t;
    }
    return s;
}

Tensor kmeanspp(const Tensor& X, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = X.rows();
    Tensor centers(k, X.cols());
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::vector<bool> chosen(n, false);
    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    for (std::size_t c = 0; c < k; ++c) {
        if (c > 0) {
            const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
            if (total > 0.0) {
                double u = std::uniform_real_distribution<double>(0.0, total)(rng);
                pick = n - 1;
                for (std::size_t i = 0; i < n; ++i) {
                    if (u < d2[i]) {
                        pick = i;
                        break;
                    }
                    u -= d2[i];
                }
                while (d2[pick] == 0.0 && pick > 0) --pick;  // guard against rounding onto a chosen point
            } else {
                pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
                if (pick == n) pick = 0;
            }
        }
        chosen[pick] = true;
        std::copy_n(X.row(pick).begin(), X.cols(), centers.row(c).begin());
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(X.row(i), centers.row(c)));
    }
    return centers;
}

KMeansResult lloyd(const Tensor& X, Tensor centers, std::size_t max_iter) {
    const std::size_t n = X.rows(), k = centers.rows(), d = X.cols();
    KMeansResult r;
    r.assignment.assign(n, -1);
    std::vector<double> dist(n);
    auto assign = [&] {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double bd = sq_dist(X.row(i), centers.row(0));
            for (std::size_t c = 1; c < k; ++c) {
                const double dd = sq_dist(X.row(i), centers.row(c));
                if (dd < bd) {
                    bd = dd;
                    best = static_cast<int>(c);
                }
            }
            if (best != r.assignment[i]) changed = true;
            r.assignment[i] = best;
            dist[i] = bd;
            inertia += bd;
        }
        r.inertia_trace.push_back(inertia);
        r.inertia = inertia;
        return changed;
    };
    bool converged = false;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        if (!assign()) {
            converged = true;
            break;
        }
        Tensor sums(k, d);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto s = sums.row(static_cast<std::size_t>(r.assignment[i]));
            auto x = X.row(i);
            for (std::size_t c = 0; c < d; ++c) s[c] += x[c];
            ++counts[static_cast<std::size_t>(r.assignment[i])];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (std::size_t j = 0; j < d; ++j) centers(c, j) = sums(c, j) / static_cast<double>(counts[c]);
            } else {
                // Empty cluster: re-seed at the point farthest from its centroid.
                const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
                std::copy_n(X.row(far).begin(), d, centers.row(c).begin());
                dist[far] = 0.0;
            }
        }
    }
    if (!converged) assign();
    r.centroids = std::move(centers);
    return r;
}

}  // namespace

KMeansResult kmeans(const Tensor& points, std::size_t k, std::uint64_t seed, std::size_t restarts,
                    std::size_t max_iter) {
    if (k == 0) throw DomainError("kmeans: k must be positive");
    if (k > points.rows())
        throw DomainError("kmeans: k=" + std::to_string(k) + " exceeds point count " + std::to_string(points.rows()));
    std::mt19937_64 rng(seed);
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
        KMeansResult cur = lloyd(points, kmeanspp(points, k, rng), max_iter);
        if (cur.inertia < best.inertia) best = std::move(cur);
    }
    return best;
}

// ---------------------------------------------------------------------------

double nmi(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw ShapeError("nmi: length mismatch");
    if (a.empty()) return 1.0;
    std::map<int, double> pa, pb;
    std::map<std::pair<int, int>, double> pab;
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa[a[i]] += 1.0;
        pb[b[i]] += 1.0;
        pab[{a[i], b[i]}] += 1.0;
    }
    auto entropy = [n](const std::map<int, double>& m) {
        double h = 0.0;
        for (const auto& [k, c] : m) h -= c / n * std::log(c / n);
        return h;
    };
    const double ha = entropy(pa), hb = entropy(pb);
    if (pa.size() == 1 && pb.size() == 1) return 1.0;
    if (ha <= 0.0 || hb <= 0.0) return 0.0;
    double mi = 0.0;
    for (const auto& [key, c] : pab) mi += c / n * std::log(c * n / (pa[key.first] * pb[key.second]));
    return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

// ---------------------------------------------------------------------------

EvalReport evaluate(const Tensor& z, std::span<const int> labels, const EvalOptions& opt) {
    if (labels.size() != z.rows()) throw ShapeError("evaluate: label count differs from embedding rows");
    if (labels.empty()) throw DomainError("evaluate: no labels");
    if (opt.runs == 0) throw DomainError("evaluate: runs must be positive");
    const std::size_t C = static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
    check_labels(labels, C, "evaluate");
    EvalReport rep;
    rep.train_ratio = opt.train_ratio;
    rep.base_seed = opt.base_seed;
    rep.classification = opt.classification;
    std::size_t clusters = 0;
    {
        std::vector<bool> seen(C);
        for (int l : labels) seen[l] = true;
        clusters = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
    }
    for (std::size_t run = 0; run < opt.runs; ++run) {
        const std::uint64_t seed = opt.base_seed + run;
        if (opt.classification) {
            const Split s = split_nodes(z.rows(), opt.train_ratio, seed, labels);
            Tensor xtr(s.train.size(), z.cols()), xte(s.test.size(), z.cols());
            std::vector<int> ytr, yte;
            for (std::size_t k = 0; k < s.train.size(); ++k) {
                std::copy_n(z.row(s.train[k]).begin(), z.cols(), xtr.row(k).begin());
                ytr.push_back(labels[s.train[k]]);
            }
            for (std::size_t k = 0; k < s.test.size(); ++k) {
                std::copy_n(z.row(s.test[k]).begin(), z.cols(), xte.row(k).begin());
                yte.push_back(labels[s.test[k]]);
            }
            const F1 f = f1_scores(logistic_regression(xtr, ytr, xte, C), yte, C);
            rep.macro_f1.push_back(f.macro);
            rep.micro_f1.push_back(f.micro);
        }
        rep.nmi.push_back(nmi(kmeans(z, clusters, seed, opt.kmeans_restarts).assignment, labels));
    }
    auto avg = [](const std::vector<double>& v) {
        return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    rep.mean_macro_f1 = avg(rep.macro_f1);
    rep.mean_micro_f1 = avg(rep.micro_f1);
    rep.mean_nmi = avg(rep.nmi);
    return rep;
}

std::string format_report_table(const EvalReport& r) {
    std::ostringstream os;
    char buf[128];
    std::snprintf(buf, sizeof buf, "runs=%zu train_ratio=%.3g base_seed=%llu\n", r.runs(), r.train_ratio,
                  static_cast<unsigned long long>(r.base_seed));
    os << buf;
    os << "metric     mean\n";
    if (r.classification) {
        std::snprintf(buf, sizeof buf, "MaF1       %.4f\nMiF1       %.4f\n", r.mean_macro_f1, r.mean_micro_f1);
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "NMI        %.4f\n", r.mean_nmi);
    os << buf;
    return os.str();
}

std::string format_report_records(const EvalReport& r) {
    std::ostringstream os;
    auto emit = [&](const char* name, const std::vector<double>& vals, double mean) {
        for (std::size_t i = 0; i < vals.size(); ++i)
            os << "metric=" << name << " run=" << i << " value=" << format_real(vals[i]) << '\n';
        os << "metric=" << name << " run=mean value=" << format_real(mean) << '\n';
    };
    if (r.classification) {
        emit("macro_f1", r.macro_f1, r.mean_macro_f1);
        emit("micro_f1", r.micro_f1, r.mean_micro_f1);
    }
    emit("nmi", r.nmi, r.mean_nmi);
    return os.str();
}

void write_embeddings(const std::filesystem::path& path, const Tensor& z) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << z.rows() << ' ' << z.cols() << '\n';
    for (std::size_t i = 0; i < z.rows(); ++i) {
        auto row = z.row(i);
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? " " : "") << format_real(row[c]);
        out << '\n';
    }
}

Tensor read_embeddings(const std::filesystem::path& path) { return read_attribute_file(path); }

}  // namespace mvne
