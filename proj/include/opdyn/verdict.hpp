#pragma once

#include <optional>
#include <string>
#include <vector>

#include "opdyn/atomic_system.hpp"

namespace opdyn {

enum class Status { ProvenTrue, ProvenFalse, Indicated, Unknown };

enum class Notion { Expansive, Average, Uniform, Positive, AveragePositive, UniformPositive };

inline const char* notion_name(Notion n) {
    switch (n) {
        case Notion::Expansive: return "expansive";
        case Notion::Average: return "average";
        case Notion::Uniform: return "uniform";
        case Notion::Positive: return "positive";
        case Notion::AveragePositive: return "average_positive";
        case Notion::UniformPositive: return "uniform_positive";
    }
    return "?";
}

inline Notion notion_from_name(const std::string& s) {
    for (Notion n : {Notion::Expansive, Notion::Average, Notion::Uniform, Notion::Positive,
                     Notion::AveragePositive, Notion::UniformPositive})
        if (s == notion_name(n)) return n;
    throw std::invalid_argument("unknown notion: " + s);
}

inline const char* status_name(Status s) {
    switch (s) {
        case Status::ProvenTrue: return "ProvenTrue";
        case Status::ProvenFalse: return "ProvenFalse";
        case Status::Indicated: return "Indicated";
        case Status::Unknown: return "Unknown";
    }
    return "?";
}

struct Witness {
    AtomId atom;
    std::int64_t n = 0;
    double log10_value = 0.0;
};

// Per-atom exponential rates of the criterion sequence, with the largest
// finite-horizon value over the transient window. lambda entries are absent
// where a direction does not apply.
struct GrowthProfile {
    AtomId atom;
    std::optional<double> lambda_plus;
    std::optional<double> lambda_minus;
    double transient_max_log10 = 0.0;
    char assignment = ' ';  // uniform criteria: '+', '-', or 'x' (unassignable)
};

struct Verdict {
    Status status = Status::Unknown;
    std::int64_t horizon = 0;
    std::optional<Witness> witness;
    std::vector<GrowthProfile> rate_data;
    std::string detail;
};

}  // namespace opdyn
