#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvl/error.hpp"
#include "mvl/graph.hpp"
#include "mvl/mood.hpp"
#include "mvl/mvfs.hpp"
#include "mvl/tensor.hpp"

namespace mvl::dataio {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace io_detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return out;
}

inline double parse_real(const std::string& s, const std::string& file, long line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        if (!std::isfinite(v))
            throw ParseError(file + ":" + std::to_string(line) + ": non-finite value");
        return v;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError(file + ":" + std::to_string(line) + ": bad number '" + s + "'");
    }
}

inline long parse_int(const std::string& s, const std::string& file, long line) {
    try {
        std::size_t used = 0;
        const long v = std::stol(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(file + ":" + std::to_string(line) + ": bad integer '" + s + "'");
    }
}

/// CSV with one header row; returns rows of reals, all equal width.
inline Matrix read_csv_matrix(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path.string() + ":1: missing header row");
    const std::size_t cols = split_csv_line(line).size();
    if (cols == 0) throw ParseError(path.string() + ":1: empty header");
    std::vector<std::vector<double>> rows;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != cols)
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": expected " + std::to_string(cols) + " cells, got " +
                             std::to_string(cells.size()));
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i)
            row[i] = parse_real(cells[i], path.string(), lineno);
        rows.push_back(std::move(row));
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return m;
}

inline void write_csv_matrix(const fs::path& path, const Matrix& m,
                             const std::vector<std::string>& header) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path.string());
    out.precision(17);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << "\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
        out << "\n";
    }
}

}  // namespace io_detail

/// Rescales each feature column to [0, 1]; constant features map to 0.
inline void min_max_normalize(Matrix& instances_by_features) {
    for (Eigen::Index c = 0; c < instances_by_features.cols(); ++c) {
        const double lo = instances_by_features.col(c).minCoeff();
        const double hi = instances_by_features.col(c).maxCoeff();
        if (hi > lo)
            instances_by_features.col(c) =
                (instances_by_features.col(c).array() - lo) / (hi - lo);
        else
            instances_by_features.col(c).setZero();
    }
}

/// Directory with one instances-by-features CSV per view plus labels.csv.
/// Views are read in filename order; features are min-max normalized.
inline mvfs::MultiViewDataset load_multiview(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw ParseError("load_multiview: not a directory: " + dir.string());
    std::vector<fs::path> view_files;
    fs::path labels_file;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".csv") continue;
        if (entry.path().filename() == "labels.csv") labels_file = entry.path();
        else view_files.push_back(entry.path());
    }
    std::sort(view_files.begin(), view_files.end());
    if (labels_file.empty())
        throw ParseError("load_multiview: missing labels.csv in " + dir.string());
    if (view_files.size() < 2)
        throw ParseError("load_multiview: need at least two view CSVs in " + dir.string());

    mvfs::MultiViewDataset data;
    for (const auto& f : view_files) {
        Matrix m = io_detail::read_csv_matrix(f);
        if (m.rows() == 0 || m.cols() == 0)
            throw InvalidArgument("load_multiview: empty view " + f.string());
        min_max_normalize(m);
        data.views.push_back(m.transpose());
        data.view_names.push_back(f.stem().string());
    }
    const Matrix lab = io_detail::read_csv_matrix(labels_file);
    if (lab.cols() != 1)
        throw ParseError("load_multiview: labels.csv must have one column");
    data.labels = lab.col(0);
    data.validate();
    return data;
}

inline void save_multiview(const fs::path& dir, const mvfs::MultiViewDataset& data) {
    fs::create_directories(dir);
    for (std::size_t v = 0; v < data.views.size(); ++v) {
        std::vector<std::string> header;
        for (Eigen::Index i = 0; i < data.views[v].rows(); ++i)
            header.push_back("f" + std::to_string(i + 1));
        io_detail::write_csv_matrix(dir / (data.view_names.empty()
                                               ? "view" + std::to_string(v + 1) + ".csv"
                                               : data.view_names[v] + ".csv"),
                                    data.views[v].transpose(), header);
    }
    io_detail::write_csv_matrix(dir / "labels.csv", data.labels, {"label"});
}

/// gSpan-style corpus: `t # <id> <label|?>`, `v <idx> <node-label>`,
/// `e <i> <j> <edge-label-or-weight>`. With an edge threshold in [0, 1] the
/// third edge token is a real weight and edges below the threshold are
/// dropped (labels become 0).
struct GraphCorpusBundle {
    subgraph::GraphCorpus corpus;
    subgraph::SideViewSet sides;
};

inline GraphCorpusBundle load_graph_corpus(const fs::path& path,
                                           std::optional<double> edge_threshold = {}) {
    if (edge_threshold && (*edge_threshold < 0.0 || *edge_threshold > 1.0))
        throw InvalidArgument("load_graph_corpus: threshold outside [0,1]");
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());

    GraphCorpusBundle out;
    std::string line;
    long lineno = 0;
    bool have_graph = false;
    subgraph::LabeledGraph current;
    int current_label = 0;
    auto flush = [&]() {
        if (have_graph) {
            out.corpus.graphs.push_back(std::move(current));
            out.corpus.labels.push_back(current_label);
            current = {};
        }
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string tag;
        ss >> tag;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (tag == "t") {
            std::string hash, id, label;
            ss >> hash >> id >> label;
            if (hash != "#" || id.empty() || label.empty())
                throw ParseError(where + ": malformed graph header");
            flush();
            have_graph = true;
            current_label =
                label == "?" ? 0
                             : static_cast<int>(io_detail::parse_int(label, path.string(), lineno));
            if (current_label != 0 && current_label != 1 && current_label != -1)
                throw ParseError(where + ": graph label must be 1, -1, or ?");
        } else if (tag == "v") {
            std::string idx, lab;
            ss >> idx >> lab;
            if (!have_graph) throw ParseError(where + ": vertex before graph header");
            const long i = io_detail::parse_int(idx, path.string(), lineno);
            if (i != current.node_count())
                throw ParseError(where + ": vertices must be declared in order");
            current.node_labels.push_back(
                static_cast<int>(io_detail::parse_int(lab, path.string(), lineno)));
        } else if (tag == "e") {
            std::string ui, vi, third;
            ss >> ui >> vi >> third;
            if (!have_graph) throw ParseError(where + ": edge before graph header");
            const long u = io_detail::parse_int(ui, path.string(), lineno);
            const long v = io_detail::parse_int(vi, path.string(), lineno);
            try {
                if (edge_threshold) {
                    const double w = io_detail::parse_real(third, path.string(), lineno);
                    if (w >= *edge_threshold)
                        current.add_edge(static_cast<int>(u), static_cast<int>(v), 0);
                } else {
                    current.add_edge(static_cast<int>(u), static_cast<int>(v),
                                     static_cast<int>(io_detail::parse_int(
                                         third, path.string(), lineno)));
                }
            } catch (const InvalidArgument& e) {
                throw ParseError(where + ": " + e.what());
            }
        } else {
            throw ParseError(where + ": unknown record '" + tag + "'");
        }
    }
    flush();
    out.corpus.validate();

    fs::path side_dir = path;
    side_dir.replace_extension();
    side_dir += "_sideviews";
    if (fs::is_directory(side_dir)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(side_dir))
            if (entry.path().extension() == ".csv") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            Matrix z = io_detail::read_csv_matrix(f);
            min_max_normalize(z);
            out.sides.views.push_back(std::move(z));
            out.sides.lambdas.push_back(1.0);
        }
        out.sides.validate(out.corpus.size());
    }
    return out;
}

inline void save_graph_corpus(const fs::path& path, const subgraph::GraphCorpus& corpus,
                              const subgraph::SideViewSet* sides = nullptr) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path.string());
    for (std::size_t g = 0; g < corpus.size(); ++g) {
        out << "t # " << g << " "
            << (corpus.labels[g] == 0 ? std::string("?") : std::to_string(corpus.labels[g]))
            << "\n";
        const auto& graph = corpus.graphs[g];
        for (int v = 0; v < graph.node_count(); ++v)
            out << "v " << v << " " << graph.node_labels[static_cast<std::size_t>(v)] << "\n";
        for (const auto& e : graph.edges)
            out << "e " << e.u << " " << e.v << " " << e.label << "\n";
    }
    if (sides && !sides->views.empty()) {
        fs::path side_dir = path;
        side_dir.replace_extension();
        side_dir += "_sideviews";
        fs::create_directories(side_dir);
        for (std::size_t v = 0; v < sides->views.size(); ++v) {
            std::vector<std::string> header;
            for (Eigen::Index i = 0; i < sides->views[v].cols(); ++i)
                header.push_back("z" + std::to_string(i + 1));
            io_detail::write_csv_matrix(
                side_dir / ("view" + std::to_string(v + 1) + ".csv"), sides->views[v],
                header);
        }
    }
}

struct SessionLoadOptions {
    int min_length = 10;
    int max_length = 100;
    bool dichotomize_hdrs = false;  // score <= 7 -> class 0, >= 8 -> class 1
};

/// Line-delimited JSON: one {"label": y, "views": [[[t, f...], ...], ...]}
/// object per session. Data points must be chronological per view; timestamps
/// are validation-only. Sessions are truncated to max_length and dropped when
/// any view is shorter than min_length.
inline std::vector<mood::SessionInstance> load_sessions(const fs::path& path,
                                                        const SessionLoadOptions& opt = {}) {
    if (opt.min_length < 1 || opt.max_length < opt.min_length)
        throw InvalidArgument("load_sessions: bad length bounds");
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::vector<mood::SessionInstance> out;
    std::vector<Eigen::Index> dims;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const std::exception& e) {
            throw ParseError(where + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("label") || !j.contains("views"))
            throw ParseError(where + ": session needs 'label' and 'views'");
        mood::SessionInstance inst;
        const double raw = j["label"].get<double>();
        if (!std::isfinite(raw)) throw ParseError(where + ": non-finite label");
        inst.label = opt.dichotomize_hdrs ? (raw >= 8.0 ? 1.0 : 0.0) : raw;
        const auto& views = j["views"];
        if (!views.is_array() || views.empty())
            throw ParseError(where + ": 'views' must be a nonempty array");
        if (dims.empty()) dims.assign(views.size(), -1);
        if (views.size() != dims.size())
            throw ParseError(where + ": inconsistent view count");
        bool keep = true;
        for (std::size_t p = 0; p < views.size(); ++p) {
            const auto& view = views[p];
            if (!view.is_array()) throw ParseError(where + ": view must be an array");
            std::vector<Vector> seq;
            double prev_t = -std::numeric_limits<double>::infinity();
            for (const auto& point : view) {
                if (static_cast<int>(seq.size()) == opt.max_length) break;  // truncate
                if (!point.is_array() || point.size() < 2)
                    throw ParseError(where + ": data point needs [t, features...]");
                const double t = point[0].get<double>();
                if (!std::isfinite(t) || t < prev_t)
                    throw ParseError(where + ": timestamps must be non-decreasing");
                prev_t = t;
                Vector x(static_cast<Eigen::Index>(point.size()) - 1);
                for (std::size_t i = 1; i < point.size(); ++i) {
                    x[static_cast<Eigen::Index>(i - 1)] = point[i].get<double>();
                    if (!std::isfinite(x[static_cast<Eigen::Index>(i - 1)]))
                        throw ParseError(where + ": non-finite feature");
                }
                if (dims[p] == -1) dims[p] = x.size();
                if (x.size() != dims[p])
                    throw ParseError(where + ": inconsistent feature width in view " +
                                     std::to_string(p + 1));
                seq.push_back(std::move(x));
            }
            if (static_cast<int>(seq.size()) < opt.min_length) keep = false;
            inst.views.push_back(std::move(seq));
        }
        if (keep) out.push_back(std::move(inst));
    }
    return out;
}

inline void save_sessions(const fs::path& path,
                          const std::vector<mood::SessionInstance>& sessions) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path.string());
    out.precision(17);
    for (const auto& inst : sessions) {
        json views = json::array();
        for (const auto& view : inst.views) {
            json seq = json::array();
            double t = 0.0;
            for (const Vector& x : view) {
                json point = json::array();
                point.push_back(t);  // synthetic timestamps: step index
                for (Eigen::Index i = 0; i < x.size(); ++i) point.push_back(x[i]);
                seq.push_back(std::move(point));
                t += 1.0;
            }
            views.push_back(std::move(seq));
        }
        json j;
        j["label"] = inst.label;
        j["views"] = std::move(views);
        out << j.dump() << "\n";
    }
}

struct NetworkStack {
    PartiallySymmetricTensor3 tensor;
    Matrix side_features;  // n x d
    Matrix labels_onehot;  // l x c
    std::vector<int> label_ids;
};

/// Single JSON document: {"networks": [n x m x m], "side_features": [n x d],
/// "labels": [l class ids]}. Labels cover the first l subjects.
inline NetworkStack load_network_stack(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const std::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    for (const char* key : {"networks", "side_features", "labels"})
        if (!j.contains(key))
            throw ParseError(path.string() + ": missing '" + std::string(key) + "'");

    std::vector<Matrix> mats;
    for (const auto& net : j["networks"]) {
        const auto m = static_cast<Eigen::Index>(net.size());
        Matrix a(m, m);
        for (Eigen::Index r = 0; r < m; ++r) {
            if (static_cast<Eigen::Index>(net[static_cast<std::size_t>(r)].size()) != m)
                throw ParseError(path.string() + ": adjacency rows must be square");
            for (Eigen::Index c = 0; c < m; ++c) {
                a(r, c) = net[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]
                              .get<double>();
                if (!std::isfinite(a(r, c)))
                    throw ParseError(path.string() + ": non-finite adjacency entry");
            }
        }
        mats.push_back(std::move(a));
    }
    if (mats.empty()) throw ParseError(path.string() + ": no networks");

    const auto n = static_cast<Eigen::Index>(mats.size());
    const auto& sf = j["side_features"];
    if (static_cast<Eigen::Index>(sf.size()) != n)
        throw ParseError(path.string() + ": side_features must have one row per subject");
    const auto d = static_cast<Eigen::Index>(sf.front().size());
    Matrix side(n, d);
    for (Eigen::Index r = 0; r < n; ++r) {
        if (static_cast<Eigen::Index>(sf[static_cast<std::size_t>(r)].size()) != d)
            throw ParseError(path.string() + ": ragged side_features");
        for (Eigen::Index c = 0; c < d; ++c) {
            side(r, c) =
                sf[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
            if (!std::isfinite(side(r, c)))
                throw ParseError(path.string() + ": non-finite side feature");
        }
    }

    std::vector<int> ids;
    for (const auto& v : j["labels"]) ids.push_back(v.get<int>());
    if (static_cast<Eigen::Index>(ids.size()) > n)
        throw ParseError(path.string() + ": more labels than subjects");
    int classes = 0;
    for (int id : ids) {
        if (id < 0) throw ParseError(path.string() + ": class ids must be >= 0");
        classes = std::max(classes, id + 1);
    }
    classes = std::max(classes, 2);
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(ids.size()), classes);
    for (std::size_t i = 0; i < ids.size(); ++i)
        y(static_cast<Eigen::Index>(i), ids[i]) = 1.0;

    NetworkStack out{stack_networks(mats), std::move(side), std::move(y), std::move(ids)};
    return out;
}

inline void save_network_stack(const fs::path& path, const std::vector<Matrix>& networks,
                               const Matrix& side_features, const std::vector<int>& labels) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path.string());
    json j;
    json nets = json::array();
    for (const Matrix& a : networks) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
            rows.push_back(std::move(row));
        }
        nets.push_back(std::move(rows));
    }
    j["networks"] = std::move(nets);
    json sf = json::array();
    for (Eigen::Index r = 0; r < side_features.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < side_features.cols(); ++c)
            row.push_back(side_features(r, c));
        sf.push_back(std::move(row));
    }
    j["side_features"] = std::move(sf);
    j["labels"] = labels;
    out << j.dump(2) << "\n";
}

// --- binary model container ------------------------------------------------

/// Model files carry a JSON header describing named little-endian double
/// blocks (column-major), then the raw payload.
inline void write_model_file(const fs::path& path, json header,
                             const std::vector<std::pair<std::string, const Matrix*>>& fields) {
    json fields_json = json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, m] : fields) {
        json f;
        f["name"] = name;
        f["rows"] = m->rows();
        f["cols"] = m->cols();
        f["offset"] = offset;
        offset += static_cast<std::uint64_t>(m->size()) * sizeof(double);
        fields_json.push_back(std::move(f));
    }
    header["fields"] = std::move(fields_json);
    const std::string htext = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path.string());
    out.write("MVLMODEL1\n", 10);
    const std::uint64_t hsize = htext.size();
    out.write(reinterpret_cast<const char*>(&hsize), sizeof(hsize));
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    for (const auto& [name, m] : fields)
        out.write(reinterpret_cast<const char*>(m->data()),
                  static_cast<std::streamsize>(sizeof(double) * m->size()));
}

struct ModelFile {
    json header;
    std::vector<std::pair<std::string, Matrix>> fields;

    const Matrix& field(const std::string& name) const {
        for (const auto& [n, m] : fields)
            if (n == name) return m;
        throw ParseError("model file missing field " + name);
    }
};

inline ModelFile read_model_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    char magic[10];
    in.read(magic, 10);
    if (!in || std::string(magic, 10) != "MVLMODEL1\n")
        throw ParseError(path.string() + ": bad magic");
    std::uint64_t hsize = 0;
    in.read(reinterpret_cast<char*>(&hsize), sizeof(hsize));
    std::string htext(hsize, '\0');
    in.read(htext.data(), static_cast<std::streamsize>(hsize));
    if (!in) throw ParseError(path.string() + ": truncated header");
    ModelFile out;
    try {
        out.header = json::parse(htext);
    } catch (const std::exception& e) {
        throw ParseError(path.string() + ": bad header: " + e.what());
    }
    for (const auto& f : out.header["fields"]) {
        Matrix m(f["rows"].get<Eigen::Index>(), f["cols"].get<Eigen::Index>());
        in.read(reinterpret_cast<char*>(m.data()),
                static_cast<std::streamsize>(sizeof(double) * m.size()));
        if (!in) throw ParseError(path.string() + ": truncated payload");
        out.fields.emplace_back(f["name"].get<std::string>(), std::move(m));
    }
    return out;
}

}  // namespace mvl::dataio
