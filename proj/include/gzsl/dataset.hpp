#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gzsl/error.hpp"
#include "gzsl/matrix.hpp"

namespace gzsl {

// One gesture sample: frames are an l x d_x matrix (rows are timesteps).
struct SkeletonSequence {
    std::string id;
    Matrix frames;
    int gesture = 0;
    int emotion = 0;
    std::string subject;  // optional, "-" when absent
};

// Seen/unseen split of the gesture classes plus the fixed gesture-to-emotion
// map. Prototype index k corresponds to seen[k]; StAE score row j to
// unseen[j].
struct PartitionSpec {
    std::vector<int> seen;
    std::vector<int> unseen;
    std::vector<int> emotion_of;  // indexed by gesture class id

    bool is_seen(int gesture) const {
        return std::find(seen.begin(), seen.end(), gesture) != seen.end();
    }
    bool is_unseen(int gesture) const {
        return std::find(unseen.begin(), unseen.end(), gesture) != unseen.end();
    }
    int seen_index(int gesture) const {
        auto it = std::find(seen.begin(), seen.end(), gesture);
        if (it == seen.end()) throw DataError("PartitionSpec: gesture is not a seen class");
        return static_cast<int>(it - seen.begin());
    }
    int emotion(int gesture) const {
        if (gesture < 0 || static_cast<std::size_t>(gesture) >= emotion_of.size())
            throw DataError("PartitionSpec: gesture id out of range");
        return emotion_of[gesture];
    }
};

struct Dataset {
    std::size_t num_classes = 0;
    std::size_t num_emotions = 0;
    std::vector<int> emotion_map;  // gesture -> emotion
    std::size_t frame_dim = 0;
    std::vector<SkeletonSequence> train;
    std::vector<SkeletonSequence> test;
};

// Per-class semantic descriptors; rows are classes, columns attributes.
// Continuous attributes ('c') live in [0,1], binary ('b') in {0,1}.
struct AttributeMatrix {
    std::vector<int> class_ids;
    std::vector<std::string> names;
    std::vector<char> kinds;
    Matrix values;  // classes x d_s

    std::size_t dim() const { return values.cols(); }

    const double* row_for(int class_id) const {
        for (std::size_t i = 0; i < class_ids.size(); ++i)
            if (class_ids[i] == class_id) return values.row(i);
        throw DataError("AttributeMatrix: missing class " + std::to_string(class_id));
    }

    // d_s x C matrix whose columns are the l2-normalized attribute vectors
    // of the requested classes, in order.
    Matrix normalized_columns(const std::vector<int>& classes) const {
        Matrix out(values.cols(), classes.size());
        for (std::size_t j = 0; j < classes.size(); ++j) {
            const double* src = row_for(classes[j]);
            double norm = 0.0;
            for (std::size_t i = 0; i < values.cols(); ++i) norm += src[i] * src[i];
            norm = std::sqrt(norm);
            if (norm == 0.0)
                throw DataError("AttributeMatrix: class " + std::to_string(classes[j]) +
                                " has an all-zero attribute vector");
            for (std::size_t i = 0; i < values.cols(); ++i) out(i, j) = src[i] / norm;
        }
        return out;
    }
};

namespace io_detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class LineReader {
public:
    LineReader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

    bool next(std::string& line) {
        if (!std::getline(in_, line)) return false;
        ++line_no_;
        return true;
    }

    std::string require(const char* what) {
        std::string line;
        if (!next(line)) fail(std::string("unexpected end of file, expected ") + what);
        return line;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw DataError(path_ + ":" + std::to_string(line_no_) + ": malformed file: " + msg);
    }

    std::size_t line_no() const { return line_no_; }

private:
    std::istream& in_;
    std::string path_;
    std::size_t line_no_ = 0;
};

inline std::vector<std::string> tokens(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

inline double parse_double(const std::string& tok, LineReader& r) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || tok.empty()) r.fail("expected a number, got '" + tok + "'");
    if (!std::isfinite(v)) r.fail("non-finite value '" + tok + "'");
    return v;
}

inline long parse_int(const std::string& tok, LineReader& r) {
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end != tok.c_str() + tok.size() || tok.empty())
        r.fail("expected an integer, got '" + tok + "'");
    return v;
}

inline std::vector<std::string> expect_keyword(LineReader& r, const std::string& key,
                                               std::size_t min_values) {
    auto toks = tokens(r.require(key.c_str()));
    if (toks.empty() || toks[0] != key) r.fail("expected '" + key + "' line");
    if (toks.size() < 1 + min_values) r.fail("'" + key + "' line has too few fields");
    return {toks.begin() + 1, toks.end()};
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    return out;
}

}  // namespace io_detail

inline constexpr const char* kDatasetMagic = "gzsl-dataset-v1";
inline constexpr const char* kAttributesMagic = "gzsl-attributes-v1";
inline constexpr const char* kPartitionMagic = "gzsl-partition-v1";

inline void save_dataset(std::ostream& out, const Dataset& ds) {
    out << kDatasetMagic << "\n";
    out << "classes " << ds.num_classes << "\n";
    out << "emotions " << ds.num_emotions << "\n";
    out << "emap";
    for (int e : ds.emotion_map) out << ' ' << e;
    out << "\n";
    out << "frame_dim " << ds.frame_dim << "\n";
    out << "samples " << ds.train.size() + ds.test.size() << "\n";
    auto write_sample = [&](const SkeletonSequence& s, const char* split) {
        out << "sample " << s.id << ' ' << split << ' ' << s.gesture << ' ' << s.emotion << ' '
            << s.frames.rows() << ' ' << (s.subject.empty() ? "-" : s.subject) << "\n";
        for (std::size_t i = 0; i < s.frames.rows(); ++i) {
            for (std::size_t j = 0; j < s.frames.cols(); ++j) {
                if (j) out << ' ';
                out << io_detail::format_double(s.frames(i, j));
            }
            out << "\n";
        }
    };
    for (const auto& s : ds.train) write_sample(s, "train");
    for (const auto& s : ds.test) write_sample(s, "test");
}

inline void save_dataset(const std::string& path, const Dataset& ds) {
    auto out = io_detail::open_output(path);
    save_dataset(out, ds);
}

inline Dataset load_dataset_file(std::istream& in, const std::string& path) {
    io_detail::LineReader r(in, path);
    if (r.require("magic header") != kDatasetMagic)
        r.fail(std::string("expected magic '") + kDatasetMagic + "'");

    Dataset ds;
    ds.num_classes = io_detail::parse_int(io_detail::expect_keyword(r, "classes", 1)[0], r);
    ds.num_emotions = io_detail::parse_int(io_detail::expect_keyword(r, "emotions", 1)[0], r);
    auto emap = io_detail::expect_keyword(r, "emap", ds.num_classes);
    if (emap.size() != ds.num_classes) r.fail("emap must list one emotion per gesture class");
    for (const auto& tok : emap) {
        const long e = io_detail::parse_int(tok, r);
        if (e < 0 || e >= static_cast<long>(ds.num_emotions)) r.fail("emotion id out of range");
        ds.emotion_map.push_back(static_cast<int>(e));
    }
    ds.frame_dim = io_detail::parse_int(io_detail::expect_keyword(r, "frame_dim", 1)[0], r);
    if (ds.frame_dim == 0) r.fail("frame_dim must be positive");
    const long n_samples = io_detail::parse_int(io_detail::expect_keyword(r, "samples", 1)[0], r);

    for (long s = 0; s < n_samples; ++s) {
        auto f = io_detail::expect_keyword(r, "sample", 5);
        SkeletonSequence seq;
        seq.id = f[0];
        const std::string& split = f[1];
        if (split != "train" && split != "test") r.fail("split must be 'train' or 'test'");
        seq.gesture = static_cast<int>(io_detail::parse_int(f[2], r));
        if (seq.gesture < 0 || static_cast<std::size_t>(seq.gesture) >= ds.num_classes)
            throw DataError(path + ": unknown class id " + f[2] + " in sample " + seq.id);
        seq.emotion = static_cast<int>(io_detail::parse_int(f[3], r));
        if (seq.emotion != ds.emotion_map[seq.gesture])
            r.fail("sample emotion disagrees with the emap entry of its gesture");
        const long frames = io_detail::parse_int(f[4], r);
        if (frames < 1) r.fail("sample must have at least one frame");
        seq.subject = f[5] == "-" ? std::string() : f[5];
        seq.frames = Matrix(frames, ds.frame_dim);
        for (long i = 0; i < frames; ++i) {
            auto row = io_detail::tokens(r.require("frame row"));
            if (row.size() != ds.frame_dim) r.fail("frame row has wrong arity");
            for (std::size_t j = 0; j < ds.frame_dim; ++j)
                seq.frames(i, j) = io_detail::parse_double(row[j], r);
        }
        (split == "train" ? ds.train : ds.test).push_back(std::move(seq));
    }
    std::string extra;
    if (r.next(extra) && !io_detail::tokens(extra).empty()) r.fail("trailing content after samples");
    return ds;
}

inline PartitionSpec load_partition_file(std::istream& in, const std::string& path,
                                         const Dataset& ds) {
    io_detail::LineReader r(in, path);
    if (r.require("magic header") != kPartitionMagic)
        r.fail(std::string("expected magic '") + kPartitionMagic + "'");
    PartitionSpec spec;
    spec.emotion_of = ds.emotion_map;
    for (const auto& tok : io_detail::expect_keyword(r, "seen", 1))
        spec.seen.push_back(static_cast<int>(io_detail::parse_int(tok, r)));
    for (const auto& tok : io_detail::expect_keyword(r, "unseen", 1))
        spec.unseen.push_back(static_cast<int>(io_detail::parse_int(tok, r)));
    std::set<int> all;
    for (int g : spec.seen) all.insert(g);
    for (int g : spec.unseen) {
        if (all.count(g))
            throw DataError(path + ": class " + std::to_string(g) + " is both seen and unseen");
        all.insert(g);
    }
    for (int g : all)
        if (g < 0 || static_cast<std::size_t>(g) >= ds.num_classes)
            throw DataError(path + ": unknown class id " + std::to_string(g));
    return spec;
}

inline void save_partition(const std::string& path, const PartitionSpec& spec) {
    auto out = io_detail::open_output(path);
    out << kPartitionMagic << "\n";
    out << "seen";
    for (int g : spec.seen) out << ' ' << g;
    out << "\nunseen";
    for (int g : spec.unseen) out << ' ' << g;
    out << "\n";
}

struct LoadedData {
    Dataset dataset;
    PartitionSpec partition;
};

// Loads and cross-validates a dataset/partition pair. Training samples must
// all come from seen classes.
inline LoadedData load_dataset(const std::string& dataset_path,
                               const std::string& partition_path) {
    auto din = io_detail::open_input(dataset_path);
    Dataset ds = load_dataset_file(din, dataset_path);
    auto pin = io_detail::open_input(partition_path);
    PartitionSpec spec = load_partition_file(pin, partition_path, ds);
    for (const auto& s : ds.train)
        if (!spec.is_seen(s.gesture))
            throw DataError(dataset_path + ": training sample " + s.id +
                            " belongs to unseen class " + std::to_string(s.gesture));
    for (const auto& s : ds.test)
        if (!spec.is_seen(s.gesture) && !spec.is_unseen(s.gesture))
            throw DataError(dataset_path + ": test sample " + s.id + " has class " +
                            std::to_string(s.gesture) + " absent from the partition");
    return {std::move(ds), std::move(spec)};
}

inline void save_attributes(const std::string& path, const AttributeMatrix& attrs) {
    auto out = io_detail::open_output(path);
    out << kAttributesMagic << "\n";
    out << "classes " << attrs.class_ids.size() << "\n";
    out << "dim " << attrs.dim() << "\n";
    out << "names";
    for (const auto& n : attrs.names) out << ' ' << n;
    out << "\nkinds";
    for (char k : attrs.kinds) out << ' ' << k;
    out << "\n";
    for (std::size_t i = 0; i < attrs.class_ids.size(); ++i) {
        out << "class " << attrs.class_ids[i];
        for (std::size_t j = 0; j < attrs.dim(); ++j)
            out << ' ' << io_detail::format_double(attrs.values(i, j));
        out << "\n";
    }
}

inline AttributeMatrix load_attributes(const std::string& path) {
    auto in = io_detail::open_input(path);
    io_detail::LineReader r(in, path);
    if (r.require("magic header") != kAttributesMagic)
        r.fail(std::string("expected magic '") + kAttributesMagic + "'");
    const long n_classes = io_detail::parse_int(io_detail::expect_keyword(r, "classes", 1)[0], r);
    const long dim = io_detail::parse_int(io_detail::expect_keyword(r, "dim", 1)[0], r);
    if (n_classes < 1 || dim < 1) r.fail("classes and dim must be positive");

    AttributeMatrix attrs;
    attrs.names = io_detail::expect_keyword(r, "names", dim);
    if (attrs.names.size() != static_cast<std::size_t>(dim)) r.fail("names arity mismatch");
    auto kind_toks = io_detail::expect_keyword(r, "kinds", dim);
    if (kind_toks.size() != static_cast<std::size_t>(dim)) r.fail("kinds arity mismatch");
    for (const auto& k : kind_toks) {
        if (k != "c" && k != "b") r.fail("attribute kind must be 'c' or 'b'");
        attrs.kinds.push_back(k[0]);
    }
    attrs.values = Matrix(n_classes, dim);
    for (long i = 0; i < n_classes; ++i) {
        auto f = io_detail::expect_keyword(r, "class", 1 + dim);
        if (f.size() != static_cast<std::size_t>(1 + dim)) r.fail("class row arity mismatch");
        attrs.class_ids.push_back(static_cast<int>(io_detail::parse_int(f[0], r)));
        for (long j = 0; j < dim; ++j) {
            const double v = io_detail::parse_double(f[1 + j], r);
            if (attrs.kinds[j] == 'b' && v != 0.0 && v != 1.0)
                throw DataError(path + ":" + std::to_string(r.line_no()) +
                                ": binary attribute out of range: " + f[1 + j]);
            if (attrs.kinds[j] == 'c' && (v < 0.0 || v > 1.0))
                throw DataError(path + ":" + std::to_string(r.line_no()) +
                                ": continuous attribute out of range: " + f[1 + j]);
            attrs.values(i, j) = v;
        }
    }
    return attrs;
}

}  // namespace gzsl
