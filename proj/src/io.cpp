#include "flo/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace flo::io {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_real(std::string_view s, Scalar& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, long long& out) {
    s = trim(s);
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

}  // namespace

std::string format_real(Scalar value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

Matrix parse_columns_csv(std::istream& in, const std::string& source) {
    std::vector<std::vector<Scalar>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        std::vector<Scalar> row;
        row.reserve(fields.size());
        bool numeric = true;
        for (auto f : fields) {
            Scalar v;
            if (!parse_real(f, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (rows.empty() && lineno == 1) continue;  // header
            throw FormatError(source + ":" + std::to_string(lineno) + ": non-numeric field");
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw FormatError(source + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(rows.front().size()) + " fields, found " +
                              std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw FormatError(source + ": no data rows");
    Matrix m(static_cast<Index>(rows.front().size()), static_cast<Index>(rows.size()));
    for (std::size_t c = 0; c < rows.size(); ++c)
        for (std::size_t r = 0; r < rows[c].size(); ++r) m(static_cast<Index>(r), static_cast<Index>(c)) = rows[c][r];
    return m;
}

Matrix read_columns_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse_columns_csv(in, path.string());
}

void write_columns_csv(const std::filesystem::path& path, const Matrix& columns) {
    auto out = open_out(path);
    for (Index c = 0; c < columns.cols(); ++c) {
        for (Index r = 0; r < columns.rows(); ++r) out << (r ? "," : "") << format_real(columns(r, c));
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    Matrix m = read_columns_csv(path).transpose();
    if (m.rows() != m.cols())
        throw FormatError(path.string() + ": distance matrix is " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", expected square");
    return m;
}

metrics::LabelVector read_labels_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    metrics::LabelVector labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto field = trim(line);
        if (field.empty()) continue;
        long long v;
        if (!parse_int(field, v)) {
            if (lineno == 1 && labels.empty()) continue;
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected an integer label");
        }
        if (v < -1) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": label below -1");
        labels.push_back(v == -1 ? Assignee{} : Assignee{static_cast<Index>(v)});
    }
    return labels;
}

void write_labels_csv(const std::filesystem::path& path, const metrics::LabelVector& labels) {
    auto out = open_out(path);
    for (const auto& l : labels) out << (l ? *l : -1) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Trajectory> parse_trajectories_csv(std::istream& in, const std::string& source) {
    struct Sample {
        long long seq;
        Scalar x, y;
    };
    std::vector<std::string> order;
    std::map<std::string, std::vector<Sample>> groups;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split(line);
        if (f.size() != 4) throw FormatError(source + ":" + std::to_string(lineno) + ": expected id,seq,x,y");
        Sample s;
        if (!parse_int(f[1], s.seq) || !parse_real(f[2], s.x) || !parse_real(f[3], s.y)) {
            if (lineno == 1) continue;
            throw FormatError(source + ":" + std::to_string(lineno) + ": malformed trajectory row");
        }
        std::string id(trim(f[0]));
        auto [it, inserted] = groups.try_emplace(id);
        if (inserted) order.push_back(id);
        it->second.push_back(s);
    }
    std::vector<Trajectory> out;
    for (const auto& id : order) {
        auto samples = groups[id];
        std::stable_sort(samples.begin(), samples.end(),
                         [](const Sample& a, const Sample& b) { return a.seq < b.seq; });
        Trajectory t;
        t.id = id;
        t.points.resize(2, static_cast<Index>(samples.size()));
        for (std::size_t k = 0; k < samples.size(); ++k) {
            t.points(0, static_cast<Index>(k)) = samples[k].x;
            t.points(1, static_cast<Index>(k)) = samples[k].y;
        }
        out.push_back(std::move(t));
    }
    if (out.empty()) throw FormatError(source + ": no trajectories");
    return out;
}

std::vector<Trajectory> read_trajectories_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse_trajectories_csv(in, path.string());
}

void write_trajectories_csv(const std::filesystem::path& path, const std::vector<Trajectory>& trajectories) {
    auto out = open_out(path);
    out << "id,seq,x,y\n";
    for (const auto& t : trajectories)
        for (Index k = 0; k < t.points.cols(); ++k)
            out << t.id << ',' << k << ',' << format_real(t.points(0, k)) << ',' << format_real(t.points(1, k))
                << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

nlohmann::ordered_json to_json(const SolutionRecord& record) {
    const Solution& s = record.solution;
    nlohmann::ordered_json j;
    j["method"] = record.method;
    j["energy"] = s.energy;
    j["exemplars"] = s.exemplars;
    auto assignment = nlohmann::ordered_json::array();
    for (const auto& a : s.assignment) assignment.push_back(a ? *a : Index{-1});
    j["assignment"] = std::move(assignment);
    j["outliers"] = s.outliers();
    j["iterations"] = s.iterations;
    j["converged"] = s.converged;
    if (record.dual_bound) j["dual_bound"] = *record.dual_bound;
    j["params"] = record.params;
    return j;
}

SolutionRecord solution_from_json(const nlohmann::json& doc) {
    try {
        SolutionRecord r;
        r.method = doc.at("method").get<std::string>();
        r.solution.energy = doc.at("energy").get<Scalar>();
        r.solution.exemplars = doc.at("exemplars").get<std::vector<Index>>();
        for (const auto& a : doc.at("assignment")) {
            const auto v = a.get<Index>();
            if (v < -1) throw FormatError("solution JSON: assignment entry below -1");
            r.solution.assignment.push_back(v == -1 ? Assignee{} : Assignee{v});
        }
        r.solution.iterations = doc.value("iterations", std::size_t{0});
        r.solution.converged = doc.value("converged", true);
        if (doc.contains("dual_bound")) r.dual_bound = doc.at("dual_bound").get<Scalar>();
        if (doc.contains("params")) r.params = nlohmann::ordered_json(doc.at("params"));
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("solution JSON: ") + e.what());
    }
}

std::string dump_solution(const SolutionRecord& record) { return to_json(record).dump(2) + "\n"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace flo::io
