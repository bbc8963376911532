#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtopk/surrogates.hpp"

namespace rtopk {

struct QueryRecord {
    std::string qid;
    FeatureMatrix x;
    RelevanceVector r;
    std::size_t padded_rows = 0;  // zero rows appended by truncate_or_pad
    bool truncated = false;

    std::size_t size() const noexcept { return r.size(); }
};

struct Dataset {
    std::vector<QueryRecord> queries;
    std::size_t d = 0;
    int max_grade = 4;
    // Generating weight of synthetic data; empty for loaded files.
    Eigen::VectorXd hidden_weight;

    // Largest document-row norm across all queries.
    double r_d() const;
};

// Reads "grade qid:<id> idx:val ... # comment" lines. Feature indices are
// 1-based in the file; d is the largest index seen and shorter rows are
// zero-padded. Grades above max_grade raise DomainError; malformed lines
// raise ParseError with the line number.
Dataset load_svmlight_ranking(const std::string& path, int max_grade = 4);

// Dense writer; values use 17 significant digits so a reload is bit-exact.
void write_svmlight_ranking(const Dataset& data, const std::string& path);

// Linearly rankable synthetic queries: unit-norm hidden w*, unit-norm
// Gaussian rows, y = X w* + noise * N(0,1), and grades 0..4 from global
// quantile cuts at 50/75/90/97 percent so relevant documents are scarce.
Dataset synthesize_contextual(std::size_t num_queries, std::size_t m, std::size_t d, double noise,
                              std::uint64_t seed);

// Keeps the first m documents or appends zero-feature, grade-0 documents.
QueryRecord truncate_or_pad(const QueryRecord& record, std::size_t m);

}  // namespace rtopk
