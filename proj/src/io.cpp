#include "io.hpp"

#include "errors.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace rbig {

using nlohmann::json;

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t hash) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= p[i];
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

bool parse_cell(std::string_view cell, double& value) {
    if (cell.empty()) return false;
    if (cell.front() == '+') cell.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    return ec == std::errc() && ptr == cell.data() + cell.size();
}

}  // namespace

Dataset read_csv(std::istream& in, bool has_header) {
    Dataset ds;
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;
    bool header_pending = has_header;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty()) continue;
        const auto cells = split(view);
        if (header_pending) {
            header_pending = false;
            cols = cells.size();
            for (auto c : cells) ds.columns.emplace_back(c);
            continue;
        }
        if (cols == 0) cols = cells.size();
        if (cells.size() != cols)
            fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected " + std::to_string(cols) + " columns, found " +
                                       std::to_string(cells.size()));
        bool finite = true;
        const std::size_t mark = values.size();
        for (auto c : cells) {
            double v;
            if (!parse_cell(c, v)) fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": cannot parse '" + std::string(c) + "'");
            finite = finite && std::isfinite(v);
            values.push_back(v);
        }
        if (!finite) {
            values.resize(mark);
            ++ds.rejected_rows;
            continue;
        }
        ++rows;
    }
    if (in.bad()) fail(ErrorCode::Io, "read error");
    if (cols == 0) fail(ErrorCode::Parse, "empty input: no rows");
    if (rows == 0) fail(ErrorCode::Parse, "no finite data rows");
    ds.values = Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    return ds;
}

Dataset load_csv(const std::string& path, bool has_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
    try {
        return read_csv(in, has_header);
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what());
    }
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const Matrix& values, const std::vector<std::string>& header) {
    if (!header.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
        out << '\n';
    }
    std::string line;
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        line.clear();
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (j) line += ',';
            line += format_double(values(i, j));
        }
        line += '\n';
        out << line;
    }
}

void write_csv(const std::string& path, const Matrix& values, const std::vector<std::string>& header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
    write_csv(out, values, header);
    if (!out) fail(ErrorCode::Io, "write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Model files

namespace {

constexpr std::string_view kMagic = "RBIG-MODEL";

class PayloadWriter {
public:
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    const std::string& bytes() const { return bytes_; }

private:
    std::string bytes_;
};

class PayloadReader {
public:
    explicit PayloadReader(const std::string& bytes) : bytes_(bytes) {}
    double f64() { return std::bit_cast<double>(u64()); }
    std::uint64_t u64() {
        if (pos_ + 8 > bytes_.size()) fail(ErrorCode::Corrupt, "model payload shorter than its header describes");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    const std::string& bytes_;
    std::size_t pos_ = 0;
};

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j, double fallback) { return j.is_null() ? fallback : j.get<double>(); }

json config_to_json(const FitConfig& c) {
    return json{{"rotation", std::string(rotation_kind_name(c.rotation))},
                {"max_iterations", c.max_iterations},
                {"stop_tolerance_bits", c.stop_tolerance_bits},
                {"gaussianity_alpha", c.gaussianity_alpha},
                {"seed", c.seed},
                {"bins", c.bins},
                {"negentropy_bins", c.negentropy_bins},
                {"clamp", c.clamp},
                {"null_resamples", c.null_resamples},
                {"calibration_rows", c.calibration_rows},
                {"safety_iterations", c.safety_iterations}};
}

FitConfig config_from_json(const json& j) {
    FitConfig c;
    c.rotation = parse_rotation_kind(j.at("rotation").get<std::string>());
    c.max_iterations = j.at("max_iterations").get<std::size_t>();
    c.stop_tolerance_bits = j.at("stop_tolerance_bits").get<double>();
    c.gaussianity_alpha = j.at("gaussianity_alpha").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.bins = j.at("bins").get<std::size_t>();
    c.negentropy_bins = j.at("negentropy_bins").get<std::size_t>();
    c.clamp = j.at("clamp").get<double>();
    c.null_resamples = j.at("null_resamples").get<std::size_t>();
    c.calibration_rows = j.at("calibration_rows").get<std::size_t>();
    c.safety_iterations = j.at("safety_iterations").get<std::size_t>();
    return c;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    for (int i = 15; i >= 0; --i) {
        buf[i] = "0123456789abcdef"[v & 0xf];
        v >>= 4;
    }
    return std::string(buf, 16);
}

}  // namespace

void save_model(std::ostream& out, const RbigModel& model, const std::optional<OneClassParams>& one_class) {
    const std::size_t d = model.dim();
    PayloadWriter w;
    for (double v : model.standardizer().mean) w.f64(v);
    for (double v : model.standardizer().scale) w.f64(v);

    json layers = json::array();
    for (const auto& layer : model.layers()) {
        w.f64(layer.delta_j);
        const Matrix& r = layer.rotation.matrix();
        for (Eigen::Index i = 0; i < r.rows(); ++i)
            for (Eigen::Index j = 0; j < r.cols(); ++j) w.f64(r(i, j));
        json knots = json::array();
        for (const auto& m : layer.marginals) {
            const auto& cdf = m.cdf();
            knots.push_back(cdf.knots_x().size());
            w.f64(cdf.tail_scale());
            w.f64(cdf.clamp());
            for (double v : cdf.knots_x()) w.f64(v);
            for (double v : cdf.knots_u()) w.f64(v);
        }
        json entry{{"rotation", std::string(rotation_kind_name(layer.rotation.provenance()))}, {"knots", knots}};
        entry["rotation_seed"] = layer.rotation.seed() ? json(*layer.rotation.seed()) : json(nullptr);
        layers.push_back(std::move(entry));
    }

    json records = json::array();
    for (const auto& r : model.trace().records)
        records.push_back(json{{"iteration", r.iteration},
                               {"jm_bits", r.jm_bits},
                               {"cumulative_dj_bits", r.cumulative_dj_bits},
                               {"gauss_stat", number_or_null(r.gauss_stat)},
                               {"gauss_threshold", number_or_null(r.gauss_threshold)},
                               {"gauss_accept", r.gauss_accept}});

    const std::string& payload = w.bytes();
    json header{{"format_version", kModelFormatVersion},
                {"dim", d},
                {"config", config_to_json(model.config())},
                {"layers", layers},
                {"trace", json{{"converged", model.trace().converged}, {"records", records}}},
                {"payload_bytes", payload.size()},
                {"payload_fnv1a64", hex64(fnv1a64(payload.data(), payload.size()))}};
    if (one_class) header["one_class"] = json{{"nu", one_class->nu}, {"log_threshold", one_class->log_threshold}};

    out << kMagic << ' ' << kModelFormatVersion << '\n' << header.dump() << '\n';
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) fail(ErrorCode::Io, "model write failed");
}

void save_model(const std::string& path, const RbigModel& model, const std::optional<OneClassParams>& one_class) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
    save_model(out, model, one_class);
    out.close();
    if (!out) fail(ErrorCode::Io, "write to '" + path + "' failed");
}

LoadedModel load_model_file(std::istream& in) {
    std::string magic_line;
    if (!std::getline(in, magic_line)) fail(ErrorCode::Corrupt, "empty model file");
    std::istringstream ms(magic_line);
    std::string magic;
    long long version = -1;
    ms >> magic >> version;
    if (magic != kMagic) fail(ErrorCode::Corrupt, "not a model file");
    if (version != kModelFormatVersion)
        fail(ErrorCode::Version, "model format version " + std::to_string(version) + " is not supported (expected " +
                                     std::to_string(kModelFormatVersion) + ")");

    std::string header_line;
    if (!std::getline(in, header_line)) fail(ErrorCode::Corrupt, "model header missing");
    json header;
    try {
        header = json::parse(header_line);
    } catch (const json::exception&) {
        fail(ErrorCode::Corrupt, "model header is not valid JSON");
    }

    try {
        if (header.at("format_version").get<long long>() != kModelFormatVersion)
            fail(ErrorCode::Version, "model header version mismatch");
        const auto size = header.at("payload_bytes").get<std::size_t>();
        std::string payload(size, '\0');
        in.read(payload.data(), static_cast<std::streamsize>(size));
        if (static_cast<std::size_t>(in.gcount()) != size) fail(ErrorCode::Corrupt, "model payload truncated");
        if (in.peek() != std::char_traits<char>::eof()) fail(ErrorCode::Corrupt, "trailing bytes after model payload");
        if (hex64(fnv1a64(payload.data(), payload.size())) != header.at("payload_fnv1a64").get<std::string>())
            fail(ErrorCode::Corrupt, "model checksum mismatch");

        const auto d = header.at("dim").get<std::size_t>();
        if (d == 0) fail(ErrorCode::Corrupt, "model dimension is zero");
        PayloadReader r(payload);
        Standardizer st;
        for (std::size_t i = 0; i < d; ++i) st.mean.push_back(r.f64());
        for (std::size_t i = 0; i < d; ++i) st.scale.push_back(r.f64());

        std::vector<RbigLayer> layers;
        for (const auto& entry : header.at("layers")) {
            const double delta_j = r.f64();
            Matrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64();
            const auto& seed_json = entry.at("rotation_seed");
            std::optional<std::uint64_t> seed;
            if (!seed_json.is_null()) seed = seed_json.get<std::uint64_t>();
            auto rotation = OrthonormalRotation::from_matrix(std::move(m), parse_rotation_kind(entry.at("rotation").get<std::string>()), seed);
            const auto& knots = entry.at("knots");
            if (knots.size() != d) fail(ErrorCode::Corrupt, "layer marginal count does not match dimension");
            std::vector<MarginalGaussianizer> marginals;
            for (const auto& kj : knots) {
                const auto k = kj.get<std::size_t>();
                if (k > payload.size() / 8) fail(ErrorCode::Corrupt, "knot count exceeds payload");
                const double tail = r.f64();
                const double clamp = r.f64();
                std::vector<double> kx(k), ku(k);
                for (auto& v : kx) v = r.f64();
                for (auto& v : ku) v = r.f64();
                marginals.emplace_back(EmpiricalCdf::from_tables(std::move(kx), std::move(ku), tail, clamp));
            }
            layers.push_back(RbigLayer{std::move(marginals), std::move(rotation), delta_j});
        }
        if (!r.done()) fail(ErrorCode::Corrupt, "model payload longer than its header describes");

        FitTrace trace;
        trace.converged = header.at("trace").at("converged").get<bool>();
        for (const auto& jr : header.at("trace").at("records")) {
            TraceRecord rec;
            rec.iteration = jr.at("iteration").get<std::size_t>();
            rec.jm_bits = jr.at("jm_bits").get<double>();
            rec.cumulative_dj_bits = jr.at("cumulative_dj_bits").get<double>();
            rec.gauss_stat = number_from(jr.at("gauss_stat"), std::numeric_limits<double>::quiet_NaN());
            rec.gauss_threshold = number_from(jr.at("gauss_threshold"), std::numeric_limits<double>::infinity());
            rec.gauss_accept = jr.at("gauss_accept").get<bool>();
            trace.records.push_back(rec);
        }

        LoadedModel loaded{RbigModel(std::move(st), std::move(layers), config_from_json(header.at("config")), std::move(trace)), {}};
        if (header.contains("one_class")) {
            const auto& oc = header.at("one_class");
            loaded.one_class = OneClassParams{oc.at("nu").get<double>(), oc.at("log_threshold").get<double>()};
        }
        return loaded;
    } catch (const json::exception& e) {
        fail(ErrorCode::Corrupt, std::string("malformed model header: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Config || e.code() == ErrorCode::Shape) fail(ErrorCode::Corrupt, e.what());
        throw;
    }
}

LoadedModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
    return load_model_file(in);
}

RbigModel load_model(const std::string& path) { return load_model_file(path).model; }

}  // namespace rbig
