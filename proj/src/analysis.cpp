#include "gsn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "gsn/io.hpp"

namespace gsn {

Aggregate parse_aggregate(const std::string& name) {
    if (name == "mean") return Aggregate::Mean;
    if (name == "final") return Aggregate::Final;
    if (name == "min") return Aggregate::Min;
    if (name == "max") return Aggregate::Max;
    throw ParseError("unknown aggregate '" + name + "' (expected mean|final|min|max)");
}

namespace {

double aggregate(const std::vector<MetricRecord>& rows, double MetricRecord::* field, Aggregate agg) {
    switch (agg) {
        case Aggregate::Mean: {
            double s = 0.0;
            for (const auto& r : rows) s += r.*field;
            return s / static_cast<double>(rows.size());
        }
        case Aggregate::Final:
            return rows.back().*field;
        case Aggregate::Min: {
            double s = rows[0].*field;
            for (const auto& r : rows) s = std::min(s, r.*field);
            return s;
        }
        case Aggregate::Max: {
            double s = rows[0].*field;
            for (const auto& r : rows) s = std::max(s, r.*field);
            return s;
        }
    }
    throw Error("aggregate: unreachable");
}

}  // namespace

TrajectorySummary summarize_trajectory(const TrialRecord& rec, Aggregate agg) {
    if (rec.metrics.empty()) throw EmptyTrajectory("summarize_trajectory: record has no steps");
    TrajectorySummary s;
    s.seed = rec.seed;
    s.intensity = aggregate(rec.metrics, &MetricRecord::intensity, agg);
    s.variance = aggregate(rec.metrics, &MetricRecord::variance, agg);
    s.iou = aggregate(rec.metrics, &MetricRecord::iou, agg);
    s.com_distance = aggregate(rec.metrics, &MetricRecord::com_distance, agg);
    s.sym_kl = aggregate(rec.metrics, &MetricRecord::sym_kl, agg);
    s.cc = aggregate(rec.metrics, &MetricRecord::cc, agg);
    s.success = rec.success ? 1 : 0;
    return s;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimMismatch("pearson: length mismatch");
    const size_t n = x.size();
    if (n < 3) throw ValidationError("pearson: need at least 3 samples");
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateVariance("pearson: zero variance input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

const std::array<const char*, CorrMatrix::kDim>& CorrMatrix::labels() {
    static const std::array<const char*, kDim> names = {"intensity", "variance",  "iou",    "com_distance",
                                                        "sym_kl",    "cc",        "success"};
    return names;
}

CorrMatrix correlation_matrix(std::span<const TrajectorySummary> summaries) {
    if (summaries.size() < 3) throw ValidationError("correlation_matrix: need at least 3 summaries");
    std::array<std::vector<double>, CorrMatrix::kDim> cols;
    for (auto& c : cols) c.reserve(summaries.size());
    for (const auto& s : summaries) {
        cols[0].push_back(s.intensity);
        cols[1].push_back(s.variance);
        cols[2].push_back(s.iou);
        cols[3].push_back(s.com_distance);
        cols[4].push_back(s.sym_kl);
        cols[5].push_back(s.cc);
        cols[6].push_back(static_cast<double>(s.success));
    }
    for (int a = 0; a < CorrMatrix::kDim; ++a) {
        const double first = cols[a][0];
        if (std::all_of(cols[a].begin(), cols[a].end(), [&](double x) { return x == first; }))
            throw DegenerateVariance(std::string("correlation_matrix: column '") + CorrMatrix::labels()[a] +
                                     "' has zero variance");
    }
    CorrMatrix m;
    for (int a = 0; a < CorrMatrix::kDim; ++a) {
        m.at(a, a) = 1.0;
        for (int b = a + 1; b < CorrMatrix::kDim; ++b) {
            const double r = pearson(cols[a], cols[b]);
            m.at(a, b) = r;
            m.at(b, a) = r;
        }
    }
    return m;
}

std::string summaries_csv(std::span<const TrajectorySummary> summaries) {
    std::string out = "seed,intensity,variance,iou,com_distance,sym_kl,cc,success\n";
    for (const auto& s : summaries) {
        out += std::to_string(s.seed);
        for (double x : {s.intensity, s.variance, s.iou, s.com_distance, s.sym_kl, s.cc})
            out += "," + format_double(x);
        out += "," + std::to_string(s.success) + "\n";
    }
    return out;
}

std::vector<TrajectorySummary> parse_summaries_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "seed,intensity,variance,iou,com_distance,sym_kl,cc,success")
        throw IoError("summaries csv: bad header");
    std::vector<TrajectorySummary> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        TrajectorySummary s;
        unsigned long long seed = 0;
        if (std::sscanf(line.c_str(), "%llu,%lf,%lf,%lf,%lf,%lf,%lf,%d", &seed, &s.intensity, &s.variance, &s.iou,
                        &s.com_distance, &s.sym_kl, &s.cc, &s.success) != 8)
            throw IoError("summaries csv: bad row '" + line + "'");
        s.seed = seed;
        out.push_back(s);
    }
    return out;
}

std::string corr_csv(const CorrMatrix& m) {
    std::string out = "metric";
    for (const char* name : CorrMatrix::labels()) out += std::string(",") + name;
    out += "\n";
    for (int a = 0; a < CorrMatrix::kDim; ++a) {
        out += CorrMatrix::labels()[a];
        for (int b = 0; b < CorrMatrix::kDim; ++b) out += "," + format_double(m.at(a, b));
        out += "\n";
    }
    return out;
}

CorrMatrix parse_corr_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string header = "metric";
    for (const char* name : CorrMatrix::labels()) header += std::string(",") + name;
    if (!std::getline(in, line) || line != header) throw IoError("corr csv: bad header");
    CorrMatrix m;
    for (int a = 0; a < CorrMatrix::kDim; ++a) {
        if (!std::getline(in, line)) throw IoError("corr csv: truncated");
        std::istringstream row(line);
        std::string cell;
        if (!std::getline(row, cell, ',') || cell != CorrMatrix::labels()[a])
            throw IoError("corr csv: bad row label '" + cell + "'");
        for (int b = 0; b < CorrMatrix::kDim; ++b) {
            if (!std::getline(row, cell, ',')) throw IoError("corr csv: short row");
            m.at(a, b) = std::strtod(cell.c_str(), nullptr);
        }
    }
    return m;
}

}  // namespace gsn
