#include "al/pool.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace al {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& tok, std::size_t line_no) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw Error("line " + std::to_string(line_no) + ": bad number '" + tok + "'");
    return v;
}

std::uint64_t parse_id(const std::string& tok, std::size_t line_no) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw Error("line " + std::to_string(line_no) + ": bad id '" + tok + "'");
    return v;
}

template <typename T>
void read_raw(std::istream& in, T* out, std::size_t count, const char* what) {
    in.read(reinterpret_cast<char*>(out), static_cast<std::streamsize>(count * sizeof(T)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(T))
        throw Error(std::string("truncated payload: ") + what);
}

template <typename T>
void write_raw(std::ostream& out, const T* data, std::size_t count) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
}

constexpr char kEmbeddingMagic[4] = {'E', 'M', 'B', 'D'};

}  // namespace

std::size_t EmbeddingMatrix::row_index(std::uint64_t id) const {
    auto it = index_.find(id);
    if (it == index_.end())
        throw Error("unknown id " + std::to_string(id));
    return it->second;
}

void EmbeddingMatrix::validate() {
    if (d == 0) throw Error("embedding dimension must be >= 1");
    if (ids.size() != n) throw Error("id count does not match row count");
    if (data.size() != n * d) throw Error("data size does not match n*d");
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i]))
            throw Error("non-finite value at row " + std::to_string(i / d));
    }
    index_.clear();
    index_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!index_.emplace(ids[i], i).second)
            throw Error("duplicate id " + std::to_string(ids[i]) +
                        " at row " + std::to_string(i));
    }
}

bool LabelStore::has(std::uint64_t id) const {
    return kind == LabelKind::Class ? class_labels.count(id) != 0
                                    : dense_labels.count(id) != 0;
}

std::size_t LabelStore::size() const {
    return kind == LabelKind::Class ? class_labels.size() : dense_labels.size();
}

void check_pool_invariants(const PoolState& state,
                           const std::vector<std::uint64_t>& all_ids) {
    std::unordered_set<std::uint64_t> seen;
    for (const auto* set : {&state.labelled, &state.unlabelled, &state.selected}) {
        for (std::uint64_t id : *set) {
            if (!seen.insert(id).second)
                throw Error("pool sets overlap at id " + std::to_string(id));
        }
    }
    if (seen.size() != all_ids.size())
        throw Error("pool partition does not cover the id population");
    for (std::uint64_t id : all_ids) {
        if (!seen.count(id))
            throw Error("id " + std::to_string(id) + " missing from pool partition");
    }
}

PoolState commit_selection(const PoolState& state, const LabelStore& labels) {
    for (std::uint64_t id : state.selected) {
        if (!labels.has(id))
            throw Error("no label available for selected id " + std::to_string(id));
    }
    PoolState out = state;
    out.labelled.insert(out.labelled.end(), out.selected.begin(), out.selected.end());
    out.selected.clear();
    return out;
}

namespace {

EmbeddingMatrix load_embeddings_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error("malformed header: empty file");
    auto header = split_csv_line(line);
    if (header.size() < 2 || trim(header[0]) != "id")
        throw Error("malformed header: expected 'id,f0,...'");
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (trim(header[j]) != "f" + std::to_string(j - 1))
            throw Error("malformed header: column " + std::to_string(j) +
                        " is '" + trim(header[j]) + "', expected f" + std::to_string(j - 1));
    }
    EmbeddingMatrix m;
    m.d = header.size() - 1;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto toks = split_csv_line(line);
        if (toks.size() != header.size())
            throw Error("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " columns, got " +
                        std::to_string(toks.size()));
        m.ids.push_back(parse_id(trim(toks[0]), line_no));
        for (std::size_t j = 1; j < toks.size(); ++j) {
            double v = parse_double(trim(toks[j]), line_no);
            if (!std::isfinite(v))
                throw Error("line " + std::to_string(line_no) + ": non-finite value");
            m.data.push_back(v);
        }
        ++m.n;
    }
    m.validate();
    return m;
}

EmbeddingMatrix load_embeddings_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    char magic[4];
    read_raw(in, magic, 4, "magic");
    if (std::memcmp(magic, kEmbeddingMagic, 4) != 0)
        throw Error("bad magic: not an EMBD file");
    std::uint32_t version = 0;
    read_raw(in, &version, 1, "version");
    if (version != 1)
        throw Error("unsupported EMBD version " + std::to_string(version));
    std::uint64_t n = 0, d = 0;
    read_raw(in, &n, 1, "n");
    read_raw(in, &d, 1, "d");
    EmbeddingMatrix m;
    m.n = static_cast<std::size_t>(n);
    m.d = static_cast<std::size_t>(d);
    std::vector<float> payload(m.n * m.d);
    read_raw(in, payload.data(), payload.size(), "floats");
    m.data.assign(payload.begin(), payload.end());
    m.ids.resize(m.n);
    read_raw(in, m.ids.data(), m.ids.size(), "ids");
    m.validate();
    return m;
}

void save_embeddings_csv(const std::string& path, const EmbeddingMatrix& m) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "id";
    for (std::size_t j = 0; j < m.d; ++j) out << ",f" << j;
    out << "\n";
    char buf[64];
    for (std::size_t i = 0; i < m.n; ++i) {
        out << m.ids[i];
        for (double v : m.row(i)) {
            std::snprintf(buf, sizeof(buf), "%.9g", v);
            out << ',' << buf;
        }
        out << "\n";
    }
}

void save_embeddings_binary(const std::string& path, const EmbeddingMatrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    write_raw(out, kEmbeddingMagic, 4);
    std::uint32_t version = 1;
    write_raw(out, &version, 1);
    std::uint64_t n = m.n, d = m.d;
    write_raw(out, &n, 1);
    write_raw(out, &d, 1);
    std::vector<float> payload(m.data.begin(), m.data.end());
    write_raw(out, payload.data(), payload.size());
    write_raw(out, m.ids.data(), m.ids.size());
}

}  // namespace

EmbeddingMatrix load_embeddings(const std::string& path, EmbeddingFormat format) {
    return format == EmbeddingFormat::Csv ? load_embeddings_csv(path)
                                          : load_embeddings_binary(path);
}

void save_embeddings(const std::string& path, EmbeddingFormat format,
                     const EmbeddingMatrix& m) {
    if (format == EmbeddingFormat::Csv)
        save_embeddings_csv(path, m);
    else
        save_embeddings_binary(path, m);
}

LabelStore load_class_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line).size() != 2 ||
        trim(split_csv_line(line)[0]) != "id")
        throw Error("malformed header: expected 'id,label'");
    LabelStore store;
    store.kind = LabelKind::Class;
    std::size_t line_no = 1;
    int max_label = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto toks = split_csv_line(line);
        if (toks.size() != 2)
            throw Error("line " + std::to_string(line_no) + ": expected 2 columns");
        std::uint64_t id = parse_id(trim(toks[0]), line_no);
        double raw = parse_double(trim(toks[1]), line_no);
        int label = static_cast<int>(raw);
        if (raw != label || label < 0)
            throw Error("line " + std::to_string(line_no) + ": label must be a non-negative integer");
        if (!store.class_labels.emplace(id, label).second)
            throw Error("line " + std::to_string(line_no) + ": duplicate id " + std::to_string(id));
        max_label = std::max(max_label, label);
    }
    store.num_classes = static_cast<std::size_t>(max_label + 1);
    return store;
}

LabelStore load_dense_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error("malformed header: empty file");
    auto header = split_csv_line(line);
    if (header.size() < 2 || trim(header[0]) != "id")
        throw Error("malformed header: expected 'id,v0,...'");
    LabelStore store;
    store.kind = LabelKind::Dense;
    store.dense_dim = header.size() - 1;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto toks = split_csv_line(line);
        if (toks.size() != header.size())
            throw Error("line " + std::to_string(line_no) + ": dense label shape mismatch");
        std::uint64_t id = parse_id(trim(toks[0]), line_no);
        std::vector<double> vec;
        vec.reserve(store.dense_dim);
        for (std::size_t j = 1; j < toks.size(); ++j)
            vec.push_back(parse_double(trim(toks[j]), line_no));
        if (!store.dense_labels.emplace(id, std::move(vec)).second)
            throw Error("line " + std::to_string(line_no) + ": duplicate id " + std::to_string(id));
    }
    return store;
}

std::vector<std::uint64_t> load_index_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<std::uint64_t> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty()) continue;
        out.push_back(parse_id(t, line_no));
    }
    return out;
}

void save_index_list(const std::string& path,
                     const std::vector<std::uint64_t>& ids) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (std::uint64_t id : ids) out << id << "\n";
}

}  // namespace al
