#include "repeval/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "repeval/errors.hpp"
#include "repeval/fingerprint.hpp"

namespace repeval {

namespace {

constexpr char kMagic[4] = {'R', 'P', 'E', 'V'};
constexpr std::uint32_t kVersion = 1;

std::string fmt_size(std::size_t v) { return std::to_string(v); }

// ---- little-endian encode/decode helpers ----

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

class ByteReader {
public:
    ByteReader(const std::string& bytes, const std::string& path)
        : bytes_(bytes), path_(path) {}

    std::size_t offset() const { return offset_; }
    std::size_t remaining() const { return bytes_.size() - offset_; }

    void need(std::size_t count, const char* what) {
        if (remaining() < count) {
            throw IoError(path_ + ": truncated file: need " + fmt_size(count) +
                          " bytes for " + what + " at byte " + fmt_size(offset_) +
                          ", have " + fmt_size(remaining()));
        }
    }

    void read_raw(void* dst, std::size_t count, const char* what) {
        need(count, what);
        std::memcpy(dst, bytes_.data() + offset_, count);
        offset_ += count;
    }

    std::uint32_t get_u32(const char* what) {
        unsigned char b[4];
        read_raw(b, 4, what);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }

    std::uint64_t get_u64(const char* what) {
        std::uint64_t v = 0;
        unsigned char b[8];
        read_raw(b, 8, what);
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }

    float get_f32(const char* what) {
        const std::uint32_t bits = get_u32(what);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    double get_f64(const char* what) {
        const std::uint64_t bits = get_u64(what);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

private:
    const std::string& bytes_;
    std::string path_;
    std::size_t offset_ = 0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure on " + path);
    return std::move(buf).str();
}

Dataset load_binary(const std::string& path) {
    const std::string bytes = read_file(path);
    ByteReader r(bytes, path);

    char magic[4];
    r.read_raw(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw IoError(path + ": bad magic at byte 0; not a dataset container");
    }
    const std::uint32_t version = r.get_u32("version");
    if (version != kVersion) {
        throw IoError(path + ": unsupported container version " +
                      std::to_string(version));
    }

    Dataset ds;
    const std::uint64_t n64 = r.get_u64("row count");
    ds.n = static_cast<std::size_t>(n64);
    ds.d = r.get_u32("feature width");
    ds.num_classes = r.get_u32("class count");

    if (ds.n == 0 || ds.d == 0) {
        throw ValidationError(path + ": header declares empty shape (n=" +
                              fmt_size(ds.n) + ", d=" + fmt_size(ds.d) + ")");
    }
    const std::size_t cells = ds.n * ds.d;
    r.need(cells * 4, "feature block");
    ds.features.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) ds.features[i] = r.get_f32("feature");
    ds.labels.resize(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) ds.labels[i] = r.get_u32("label");

    unsigned char oracle_present;
    r.read_raw(&oracle_present, 1, "oracle flag");
    const double oracle = r.get_f64("oracle loss");
    if (oracle_present) ds.oracle_loss = oracle;

    const std::uint32_t name_len = r.get_u32("name length");
    ds.name.resize(name_len);
    if (name_len > 0) r.read_raw(ds.name.data(), name_len, "name");

    if (r.remaining() != 0) {
        throw IoError(path + ": unexpected " + fmt_size(r.remaining()) +
                      " trailing bytes at byte " + fmt_size(r.offset()));
    }

    try {
        ds.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return ds;
}

bool parse_double(std::string_view token, double& out) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return fields;
}

Dataset load_csv(const std::string& path) {
    const std::string text = read_file(path);

    Dataset ds;
    std::size_t line_no = 0;
    std::size_t start = 0;
    bool saw_data = false;
    bool first_line = true;
    std::uint32_t max_label = 0;

    while (start <= text.size()) {
        const std::size_t end = std::min(text.find('\n', start), text.size());
        std::string_view line = trim(std::string_view(text).substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }

        const auto fields = split_csv_line(line);

        if (first_line) {
            first_line = false;
            // A header line is one whose fields are not all numeric.
            bool all_numeric = true;
            for (const auto& f : fields) {
                double v;
                if (!parse_double(f, v)) {
                    all_numeric = false;
                    break;
                }
            }
            if (!all_numeric) continue;  // skip header
        }

        if (fields.size() < 2) {
            throw ValidationError(path + ": line " + fmt_size(line_no) +
                                  ": need at least one feature column and a label");
        }
        if (!saw_data) {
            ds.d = fields.size() - 1;
            saw_data = true;
        } else if (fields.size() != ds.d + 1) {
            throw ValidationError(path + ": line " + fmt_size(line_no) + ": expected " +
                                  fmt_size(ds.d + 1) + " fields, got " +
                                  fmt_size(fields.size()));
        }

        for (std::size_t c = 0; c < ds.d; ++c) {
            double v;
            if (!parse_double(fields[c], v) || !std::isfinite(v)) {
                throw ValidationError(path + ": line " + fmt_size(line_no) +
                                      ": feature column " + fmt_size(c) +
                                      " is not a finite number: '" +
                                      std::string(fields[c]) + "'");
            }
            ds.features.push_back(static_cast<float>(v));
        }

        const std::string_view label_tok = fields[ds.d];
        std::uint32_t label;
        auto [ptr, ec] = std::from_chars(label_tok.data(),
                                         label_tok.data() + label_tok.size(), label);
        if (ec != std::errc() || ptr != label_tok.data() + label_tok.size()) {
            throw ValidationError(path + ": line " + fmt_size(line_no) +
                                  ": label is not a non-negative integer: '" +
                                  std::string(label_tok) + "'");
        }
        ds.labels.push_back(label);
        max_label = std::max(max_label, label);

        if (end == text.size()) break;
    }

    ds.n = ds.labels.size();
    ds.num_classes = max_label + 1;  // inferred; validate() demands >= 2
    try {
        ds.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return ds;
}

}  // namespace

void Dataset::validate() const {
    if (n == 0) throw ValidationError("dataset has no rows");
    if (d == 0) throw ValidationError("dataset has zero feature width");
    if (num_classes < 2) {
        throw ValidationError("dataset declares " + std::to_string(num_classes) +
                              " classes; at least 2 are required");
    }
    if (features.size() != n * d) {
        throw ValidationError("feature storage holds " + fmt_size(features.size()) +
                              " values, expected n*d = " + fmt_size(n * d));
    }
    if (labels.size() != n) {
        throw ValidationError("label storage holds " + fmt_size(labels.size()) +
                              " values, expected n = " + fmt_size(n));
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (!std::isfinite(features[i])) {
            throw ValidationError("non-finite feature in record " + fmt_size(i / d) +
                                  ", column " + fmt_size(i % d));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] >= num_classes) {
            throw ValidationError("label " + std::to_string(labels[i]) +
                                  " out of range [0, " + std::to_string(num_classes) +
                                  ") in record " + fmt_size(i));
        }
    }
    if (oracle_loss && (!std::isfinite(*oracle_loss) || *oracle_loss < 0.0)) {
        throw ValidationError("oracle loss must be finite and non-negative");
    }
}

Dataset load_dataset(const std::string& path, DatasetFormat format) {
    return format == DatasetFormat::csv ? load_csv(path) : load_binary(path);
}

void save_dataset(const Dataset& ds, const std::string& path) {
    ds.validate();  // invalid datasets are rejected before any write

    std::string out;
    out.reserve(25 + ds.features.size() * 4 + ds.labels.size() * 4 + ds.name.size() + 16);
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_u64(out, ds.n);
    put_u32(out, static_cast<std::uint32_t>(ds.d));
    put_u32(out, ds.num_classes);
    for (float f : ds.features) put_f32(out, f);
    for (std::uint32_t l : ds.labels) put_u32(out, l);
    out.push_back(ds.oracle_loss ? '\1' : '\0');
    put_f64(out, ds.oracle_loss.value_or(0.0));
    put_u32(out, static_cast<std::uint32_t>(ds.name.size()));
    out.append(ds.name);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    f.flush();
    if (!f) throw IoError("write failure on " + path);
}

DatasetFormat format_from_path(const std::string& path) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
        return DatasetFormat::csv;
    }
    return DatasetFormat::binary;
}

std::pair<Dataset, NormalizationStats> normalize_features(const Dataset& ds) {
    NormalizationStats stats;
    stats.mean.assign(ds.d, 0.0);
    stats.stddev.assign(ds.d, 0.0);

    for (std::size_t i = 0; i < ds.n; ++i) {
        for (std::size_t c = 0; c < ds.d; ++c) {
            stats.mean[c] += ds.features[i * ds.d + c];
        }
    }
    for (std::size_t c = 0; c < ds.d; ++c) stats.mean[c] /= static_cast<double>(ds.n);

    for (std::size_t i = 0; i < ds.n; ++i) {
        for (std::size_t c = 0; c < ds.d; ++c) {
            const double delta = ds.features[i * ds.d + c] - stats.mean[c];
            stats.stddev[c] += delta * delta;
        }
    }
    for (std::size_t c = 0; c < ds.d; ++c) {
        stats.stddev[c] = std::sqrt(stats.stddev[c] / static_cast<double>(ds.n));
    }

    return {apply_normalization(ds, stats), stats};
}

Dataset apply_normalization(const Dataset& ds, const NormalizationStats& stats) {
    if (stats.mean.size() != ds.d || stats.stddev.size() != ds.d) {
        throw ValidationError("normalization stats cover " +
                              fmt_size(stats.mean.size()) +
                              " columns, dataset has " + fmt_size(ds.d));
    }
    Dataset out = ds;
    for (std::size_t i = 0; i < ds.n; ++i) {
        for (std::size_t c = 0; c < ds.d; ++c) {
            const std::size_t idx = i * ds.d + c;
            // Zero-variance columns carry no information; map them to zero.
            out.features[idx] =
                stats.stddev[c] > 0.0
                    ? static_cast<float>((ds.features[idx] - stats.mean[c]) /
                                         stats.stddev[c])
                    : 0.0f;
        }
    }
    return out;
}

Dataset bootstrap_subsample(const Dataset& ds, std::size_t n, RngStream stream) {
    if (ds.n == 0) throw ValidationError("cannot subsample an empty dataset");
    if (n == 0) throw ValidationError("subsample size must be >= 1");
    Dataset out;
    out.n = n;
    out.d = ds.d;
    out.num_classes = ds.num_classes;
    out.name = ds.name;
    out.oracle_loss = ds.oracle_loss;
    out.features.resize(n * ds.d);
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = stream.next_below(ds.n);
        std::copy_n(ds.features.data() + src * ds.d, ds.d,
                    out.features.data() + i * ds.d);
        out.labels[i] = ds.labels[src];
    }
    return out;
}

std::pair<Dataset, Dataset> split_holdout(const Dataset& ds, double fraction,
                                          RngStream stream) {
    if (!(fraction > 0.0) || !(fraction < 1.0)) {
        throw ValidationError("holdout fraction must lie strictly between 0 and 1");
    }
    const std::size_t h =
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(ds.n)));
    if (h >= ds.n) {
        throw ValidationError("holdout fraction " + std::to_string(fraction) +
                              " leaves no training pool (n=" + fmt_size(ds.n) + ")");
    }

    std::vector<std::size_t> idx(ds.n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = ds.n - 1; i > 0; --i) {
        const std::size_t j = stream.next_below(i + 1);
        std::swap(idx[i], idx[j]);
    }

    auto take = [&](std::size_t begin, std::size_t count) {
        Dataset part;
        part.n = count;
        part.d = ds.d;
        part.num_classes = ds.num_classes;
        part.name = ds.name;
        part.oracle_loss = ds.oracle_loss;
        part.features.resize(count * ds.d);
        part.labels.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t src = idx[begin + i];
            std::copy_n(ds.features.data() + src * ds.d, ds.d,
                        part.features.data() + i * ds.d);
            part.labels[i] = ds.labels[src];
        }
        return part;
    };

    Dataset holdout = take(0, h);
    Dataset pool = take(h, ds.n - h);
    return {std::move(pool), std::move(holdout)};
}

std::string dataset_fingerprint(const Dataset& ds) {
    Fingerprint fp;
    fp.add("dataset/v1");
    fp.add(static_cast<std::uint64_t>(ds.n));
    fp.add(static_cast<std::uint64_t>(ds.d));
    fp.add(static_cast<std::uint64_t>(ds.num_classes));
    fp.add(ds.name);
    fp.add_bytes(ds.features.data(), ds.features.size() * sizeof(float));
    fp.add_bytes(ds.labels.data(), ds.labels.size() * sizeof(std::uint32_t));
    fp.add(static_cast<std::uint64_t>(ds.oracle_loss.has_value() ? 1 : 0));
    fp.add(ds.oracle_loss.value_or(0.0));
    return fp.hex();
}

}  // namespace repeval
