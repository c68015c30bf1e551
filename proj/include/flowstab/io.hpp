// Copyright 2026 The flowstab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FLOWSTAB_IO_HPP_
#define FLOWSTAB_IO_HPP_

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "common.hpp"
#include "error_model.hpp"
#include "graph.hpp"
#include "metrics.hpp"
#include "partition.hpp"

namespace flowstab::io {

inline std::ofstream openForWrite(const std::filesystem::path &path) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    return out;
}

inline std::ifstream openForRead(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    return in;
}

inline std::vector<std::string> splitCsv(const std::string &line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline double parseNumber(const std::string &s, const std::string &what) {
    double v = 0.0;
    std::string t = s;
    t.erase(0, t.find_first_not_of(" \t"));
    t.erase(t.find_last_not_of(" \t") + 1);
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw IoError("cannot parse " + what + " '" + s + "'");
    return v;
}

/// Rows of a CSV file after checking its header.
inline std::vector<std::vector<std::string>> readCsv(const std::filesystem::path &path,
                                                     const std::vector<std::string> &header) {
    auto in = openForRead(path);
    std::string line;
    if (!std::getline(in, line) || splitCsv(line) != header) {
        std::string expect;
        for (const auto &h : header)
            expect += (expect.empty() ? "" : ",") + h;
        throw IoError("'" + path.string() + "' must start with header '" + expect + "'");
    }
    std::vector<std::vector<std::string>> rows;
    std::size_t lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty() || line == "\r")
            continue;
        auto row = splitCsv(line);
        if (row.size() != header.size())
            throw IoError("'" + path.string() + "' line " + std::to_string(lineNo) + ": expected " +
                          std::to_string(header.size()) + " fields");
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---- partitions ----------------------------------------------------------

/// Partition file contents keyed by node label.
struct LabeledPartition {
    double markovTime = 0.0;
    double quality = 0.0;
    std::map<std::string, int> clusters;
};

inline nlohmann::json partitionJson(const Partition &p, const WeightedDigraph &g) {
    nlohmann::json clusters = nlohmann::json::object();
    for (std::size_t i = 0; i < p.nodes.size(); ++i)
        clusters[g.label(p.nodes[i])] = p.labels[i];
    return nlohmann::json{{"markov_time", p.markovTime}, {"quality", p.quality}, {"clusters", clusters}};
}

inline void writePartition(const std::filesystem::path &path, const Partition &p, const WeightedDigraph &g) {
    auto out = openForWrite(path);
    out << partitionJson(p, g).dump(1) << '\n';
}

inline LabeledPartition readLabeledPartition(const std::filesystem::path &path) {
    auto in = openForRead(path);
    LabeledPartition lp;
    try {
        nlohmann::json j = nlohmann::json::parse(in);
        lp.markovTime = j.value("markov_time", 0.0);
        lp.quality = j.value("quality", 0.0);
        for (auto &[label, c] : j.at("clusters").items())
            lp.clusters[label] = c.get<int>();
    } catch (const nlohmann::json::exception &err) {
        throw IoError("malformed partition file '" + path.string() + "': " + err.what());
    }
    return lp;
}

/// Map a labeled partition onto graph node ids. Every label must exist in g.
inline Partition toPartition(const LabeledPartition &lp, const WeightedDigraph &g) {
    std::vector<std::pair<node_t, int>> pairs;
    for (const auto &[label, c] : lp.clusters) {
        auto idx = g.indexOf(label);
        if (!idx)
            throw ConfigError("partition node '" + label + "' is not in the graph");
        pairs.emplace_back(*idx, c);
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<int> raw;
    Partition p;
    for (auto [u, c] : pairs) {
        p.nodes.push_back(u);
        raw.push_back(c);
    }
    p.labels = densify(raw);
    p.markovTime = lp.markovTime;
    p.quality = lp.quality;
    return p;
}

/// Label universe made of the partition's own labels, in sorted order.
inline WeightedDigraph labelUniverse(const LabeledPartition &lp) {
    std::vector<std::string> labels;
    for (const auto &kv : lp.clusters)
        labels.push_back(kv.first);
    return WeightedDigraph(std::move(labels), {});
}

inline Partition readPartition(const std::filesystem::path &path, const WeightedDigraph &g) {
    return toPartition(readLabeledPartition(path), g);
}

// ---- errors, stats, removal records --------------------------------------

inline void writeErrors(const std::filesystem::path &path, const ErrorVector &e, const WeightedDigraph &g) {
    auto out = openForWrite(path);
    out << (e.epsIn ? "node,epsilon,epsilon_in\n" : "node,epsilon\n");
    for (node_t u = 0; u < g.numberOfNodes(); ++u) {
        out << g.label(u) << ',' << formatDouble(e.epsOut[u]);
        if (e.epsIn)
            out << ',' << formatDouble((*e.epsIn)[u]);
        out << '\n';
    }
}

/// Error file `node,epsilon`, or `node,epsilon,epsilon_in` for errors on both
/// strengths. Nodes absent from the file get 0; unknown labels are skipped
/// with a warning.
inline ErrorVector readErrors(const std::filesystem::path &path, const WeightedDigraph &g) {
    std::string headerLine;
    {
        auto in = openForRead(path);
        std::getline(in, headerLine);
    }
    const bool withIn = splitCsv(headerLine) == std::vector<std::string>{"node", "epsilon", "epsilon_in"};
    const std::vector<std::string> header = withIn ? std::vector<std::string>{"node", "epsilon", "epsilon_in"}
                                                   : std::vector<std::string>{"node", "epsilon"};
    ErrorVector e = ErrorVector::zeros(g.numberOfNodes());
    if (withIn)
        e.epsIn = std::vector<double>(g.numberOfNodes(), 0.0);
    std::size_t unknown = 0;
    for (const auto &row : readCsv(path, header)) {
        auto idx = g.indexOf(row[0]);
        if (!idx) {
            ++unknown;
            continue;
        }
        const double v = parseNumber(row[1], "epsilon");
        const double w = withIn ? parseNumber(row[2], "epsilon_in") : 0.0;
        if (!(v >= 0.0) || !(w >= 0.0))
            throw ConfigError("negative error for node '" + row[0] + "'");
        e.epsOut[*idx] = v;
        if (withIn)
            (*e.epsIn)[*idx] = w;
    }
    if (unknown > 0)
        warn(std::to_string(unknown) + " error rows name nodes absent from the graph");
    return e;
}

inline std::vector<ChannelStats> readChannelStats(const std::filesystem::path &path) {
    std::vector<ChannelStats> stats;
    for (const auto &row : readCsv(path, {"node", "n_deleted", "n_observed", "n_with_links"})) {
        ChannelStats s;
        s.node = row[0];
        s.nDeleted = parseNumber(row[1], "n_deleted");
        s.nObserved = parseNumber(row[2], "n_observed");
        s.nWithLinks = parseNumber(row[3], "n_with_links");
        stats.push_back(std::move(s));
    }
    return stats;
}

inline void writeRemovalRecord(const std::filesystem::path &path, const RemovalRecord &rec,
                               const WeightedDigraph &g) {
    auto out = openForWrite(path);
    out << "src,dst,weight\n";
    for (const Edge &e : rec.removedEdges)
        out << g.label(e.src) << ',' << g.label(e.dst) << ',' << formatDouble(e.weight) << '\n';
}

inline void writeEdgeListFile(const std::filesystem::path &path, const WeightedDigraph &g) {
    auto out = openForWrite(path);
    writeEdgeList(out, g);
}

// ---- matrices --------------------------------------------------------------

/// Square matrix with a header row and column of axis values.
inline void writeLabeledMatrix(const std::filesystem::path &path, const std::vector<double> &axis,
                               const Eigen::MatrixXd &m, const std::string &corner = "t") {
    auto out = openForWrite(path);
    out << corner;
    for (double a : axis)
        out << ',' << formatDouble(a);
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << formatDouble(axis[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out << ',' << formatDouble(m(i, j));
        out << '\n';
    }
}

inline std::string formatOptional(double x) { return std::isnan(x) ? std::string() : formatDouble(x); }

inline void writeRoles(const std::filesystem::path &path, const std::vector<ClusterRole> &roles) {
    auto out = openForWrite(path);
    out << "cluster,size,in_balance,role\n";
    for (const ClusterRole &r : roles)
        out << r.cluster << ',' << r.size << ',' << formatDouble(r.inBalance) << ',' << toString(r.role) << '\n';
}

} // namespace flowstab::io

#endif // FLOWSTAB_IO_HPP_
