#pragma once

// File formats shared by the command-line tool.
//
//   points / histograms CSV  one row per item, comma-separated reals,
//                            optional non-numeric header row
//   labels CSV               one integer per row, -1 = outlier
//   trajectories CSV         id,seq,x,y rows grouped by id, ordered by seq
//   distance matrix CSV      square matrix of reals
//   solution JSON            see SolutionRecord

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flo/core.hpp"
#include "flo/distances.hpp"
#include "flo/metrics.hpp"

namespace flo::io {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rows of a numeric CSV as the columns of the returned matrix (d x n).
Matrix read_columns_csv(const std::filesystem::path& path);
Matrix parse_columns_csv(std::istream& in, const std::string& source = "<stream>");
void write_columns_csv(const std::filesystem::path& path, const Matrix& columns);

/// Square matrix, row i of the file is row i of the matrix.
Matrix read_matrix_csv(const std::filesystem::path& path);

metrics::LabelVector read_labels_csv(const std::filesystem::path& path);
void write_labels_csv(const std::filesystem::path& path, const metrics::LabelVector& labels);

std::vector<Trajectory> read_trajectories_csv(const std::filesystem::path& path);
std::vector<Trajectory> parse_trajectories_csv(std::istream& in, const std::string& source = "<stream>");
void write_trajectories_csv(const std::filesystem::path& path, const std::vector<Trajectory>& trajectories);

/// Formats a real with 17 significant digits (lossless for doubles).
std::string format_real(Scalar value);

struct SolutionRecord {
    std::string method;
    Solution solution;
    std::optional<Scalar> dual_bound;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
};

nlohmann::ordered_json to_json(const SolutionRecord& record);
SolutionRecord solution_from_json(const nlohmann::json& doc);

/// Serialized form used for files; identical inputs give identical bytes.
std::string dump_solution(const SolutionRecord& record);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace flo::io
