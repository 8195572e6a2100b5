#pragma once

#include <map>
#include <string>

#include "gzsl/dataset.hpp"
#include "gzsl/error.hpp"
#include "gzsl/matrix.hpp"

namespace gzsl {

inline constexpr const char* kCheckpointMagic = "gzsl-ckpt-v1";

// Named parameter tensors plus free-form metadata, serialized as canonical
// text (17 significant digits, keys sorted) so equal checkpoints are
// byte-identical.
struct Checkpoint {
    std::map<std::string, std::string> meta;
    std::map<std::string, Matrix> params;

    const Matrix& require(const std::string& name) const {
        auto it = params.find(name);
        if (it == params.end()) throw DataError("checkpoint: missing parameter " + name);
        return it->second;
    }

    double meta_double(const std::string& key) const {
        auto it = meta.find(key);
        if (it == meta.end()) throw DataError("checkpoint: missing meta key " + key);
        return std::strtod(it->second.c_str(), nullptr);
    }
};

inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    auto out = io_detail::open_output(path);
    out << kCheckpointMagic << "\n";
    for (const auto& [key, value] : ckpt.meta) out << "meta " << key << ' ' << value << "\n";
    for (const auto& [name, m] : ckpt.params) {
        out << "param " << name << ' ' << m.rows() << ' ' << m.cols() << "\n";
        for (std::size_t i = 0; i < m.rows(); ++i) {
            for (std::size_t j = 0; j < m.cols(); ++j) {
                if (j) out << ' ';
                out << io_detail::format_double(m(i, j));
            }
            out << "\n";
        }
    }
}

inline Checkpoint load_checkpoint(const std::string& path) {
    auto in = io_detail::open_input(path);
    io_detail::LineReader r(in, path);
    if (r.require("magic header") != kCheckpointMagic)
        r.fail(std::string("expected magic '") + kCheckpointMagic + "'");
    Checkpoint ckpt;
    std::string line;
    while (r.next(line)) {
        auto toks = io_detail::tokens(line);
        if (toks.empty()) continue;
        if (toks[0] == "meta") {
            if (toks.size() != 3) r.fail("meta line needs key and value");
            ckpt.meta[toks[1]] = toks[2];
        } else if (toks[0] == "param") {
            if (toks.size() != 4) r.fail("param line needs name, rows, cols");
            const long rows = io_detail::parse_int(toks[2], r);
            const long cols = io_detail::parse_int(toks[3], r);
            if (rows < 0 || cols < 0) r.fail("negative parameter shape");
            Matrix m(rows, cols);
            for (long i = 0; i < rows; ++i) {
                auto row = io_detail::tokens(r.require("parameter row"));
                if (row.size() != static_cast<std::size_t>(cols)) r.fail("parameter row arity");
                for (long j = 0; j < cols; ++j) m(i, j) = io_detail::parse_double(row[j], r);
            }
            ckpt.params[toks[1]] = std::move(m);
        } else {
            r.fail("unknown record '" + toks[0] + "'");
        }
    }
    return ckpt;
}

}  // namespace gzsl
