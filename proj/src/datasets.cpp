#include "rtopk/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace rtopk {

double Dataset::r_d() const {
    double best = 0.0;
    for (const auto& q : queries) best = std::max(best, operator_norm_1_to_2(q.x));
    return best;
}

namespace {

struct RawDoc {
    int grade;
    std::vector<std::pair<std::size_t, double>> features;
};

double parse_double(const std::string& text, std::size_t line, const char* what) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v))
        throw ParseError(std::string("bad ") + what + " '" + text + "'", line);
    return v;
}

}  // namespace

Dataset load_svmlight_ranking(const std::string& path, int max_grade) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open dataset " + path);

    std::vector<std::string> order;
    std::map<std::string, std::vector<RawDoc>> groups;
    std::size_t d = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string tok;
        if (!(ss >> tok)) continue;

        RawDoc doc;
        const double g = parse_double(tok, lineno, "grade");
        if (g != std::floor(g)) throw ParseError("grade must be an integer", lineno);
        doc.grade = static_cast<int>(g);
        if (doc.grade < 0 || doc.grade > max_grade)
            throw DomainError("line " + std::to_string(lineno) + ": grade " + std::to_string(doc.grade) +
                              " outside 0.." + std::to_string(max_grade));

        if (!(ss >> tok) || tok.rfind("qid:", 0) != 0 || tok.size() == 4)
            throw ParseError("expected qid:<id>", lineno);
        const std::string qid = tok.substr(4);

        std::size_t last_index = 0;
        while (ss >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos || colon == 0) throw ParseError("expected index:value, got '" + tok + "'", lineno);
            std::size_t index = 0;
            const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + colon, index);
            if (ec != std::errc() || ptr != tok.data() + colon || index == 0)
                throw ParseError("bad feature index in '" + tok + "'", lineno);
            if (index <= last_index) throw ParseError("feature indices must increase", lineno);
            last_index = index;
            doc.features.emplace_back(index - 1, parse_double(tok.substr(colon + 1), lineno, "feature value"));
            d = std::max(d, index);
        }
        auto [it, fresh] = groups.try_emplace(qid);
        if (fresh) order.push_back(qid);
        it->second.push_back(std::move(doc));
    }

    Dataset data;
    data.d = d;
    data.max_grade = max_grade;
    for (const auto& qid : order) {
        const auto& docs = groups.at(qid);
        QueryRecord rec;
        rec.qid = qid;
        rec.x = FeatureMatrix::Zero(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(d));
        std::vector<int> grades;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            grades.push_back(docs[i].grade);
            for (const auto& [j, v] : docs[i].features)
                rec.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
        rec.r = RelevanceVector(std::move(grades), max_grade);
        data.queries.push_back(std::move(rec));
    }
    return data;
}

void write_svmlight_ranking(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write dataset " + path);
    char buf[40];
    for (const auto& q : data.queries) {
        for (Eigen::Index i = 0; i < q.x.rows(); ++i) {
            out << q.r[static_cast<std::size_t>(i)] << " qid:" << q.qid;
            for (Eigen::Index j = 0; j < q.x.cols(); ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", q.x(i, j));
                out << ' ' << (j + 1) << ':' << buf;
            }
            out << '\n';
        }
    }
}

Dataset synthesize_contextual(std::size_t num_queries, std::size_t m, std::size_t d, double noise,
                              std::uint64_t seed) {
    if (num_queries == 0 || m == 0 || d == 0) throw ConfigError("synthesize: sizes must be positive");
    if (!(noise >= 0.0)) throw ConfigError("synthesize: noise must be >= 0");
    Rng rng(seed);
    Eigen::VectorXd w_star(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < w_star.size(); ++j) w_star(j) = rng.normal();
    w_star.normalize();

    Dataset data;
    data.d = d;
    data.max_grade = 4;
    data.hidden_weight = w_star;
    std::vector<Eigen::VectorXd> ys;
    std::vector<double> pooled;
    for (std::size_t q = 0; q < num_queries; ++q) {
        QueryRecord rec;
        rec.qid = std::to_string(q);
        rec.x.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
        for (Eigen::Index i = 0; i < rec.x.rows(); ++i) {
            for (Eigen::Index j = 0; j < rec.x.cols(); ++j) rec.x(i, j) = rng.normal();
            rec.x.row(i).normalize();
        }
        Eigen::VectorXd y = rec.x * w_star;
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += noise * rng.normal();
        pooled.insert(pooled.end(), y.data(), y.data() + y.size());
        ys.push_back(std::move(y));
        data.queries.push_back(std::move(rec));
    }

    std::sort(pooled.begin(), pooled.end());
    const double levels[4] = {0.5, 0.75, 0.9, 0.97};
    double cuts[4];
    for (int c = 0; c < 4; ++c)
        cuts[c] = pooled[std::min(pooled.size() - 1, static_cast<std::size_t>(levels[c] * pooled.size()))];
    for (std::size_t q = 0; q < num_queries; ++q) {
        std::vector<int> grades(m, 0);
        for (std::size_t i = 0; i < m; ++i)
            for (double cut : cuts) grades[i] += ys[q](static_cast<Eigen::Index>(i)) >= cut ? 1 : 0;
        data.queries[q].r = RelevanceVector(std::move(grades), 4);
    }
    return data;
}

QueryRecord truncate_or_pad(const QueryRecord& record, std::size_t m) {
    if (m == 0) throw InputError("truncate_or_pad: m must be >= 1");
    const std::size_t mq = record.size();
    if (mq == m) return record;
    QueryRecord out;
    out.qid = record.qid;
    const auto cols = record.x.cols();
    out.x = FeatureMatrix::Zero(static_cast<Eigen::Index>(m), cols);
    std::vector<int> grades(m, 0);
    const std::size_t keep = std::min(m, mq);
    out.x.topRows(static_cast<Eigen::Index>(keep)) = record.x.topRows(static_cast<Eigen::Index>(keep));
    for (std::size_t i = 0; i < keep; ++i) grades[i] = record.r[i];
    out.r = RelevanceVector(std::move(grades), record.r.max_grade());
    out.truncated = record.truncated || mq > m;
    out.padded_rows = mq < m ? m - mq : 0;
    return out;
}

}  // namespace rtopk
