#include "angiokit/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace angiokit::evaluate {

void derive_ratios(PixelMetrics& m) {
    const auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.sn = ratio(m.tp, m.tp + m.fn);
    m.sp = ratio(m.tn, m.tn + m.fp);
    m.dice = ratio(2 * m.tp, 2 * m.tp + m.fp + m.fn);
}

PixelMetrics pixel_metrics(const BinaryMask& pred, const BinaryMask& gt) {
    require(pred.same_shape(gt), ErrorCode::InvalidInput, "pixel_metrics: masks must have identical dimensions");
    PixelMetrics m;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] != 0;
        const bool g = gt[i] != 0;
        if (p && g) ++m.tp;
        else if (p) ++m.fp;
        else if (g) ++m.fn;
        else ++m.tn;
    }
    derive_ratios(m);
    return m;
}

std::optional<double> true_positive_rate(std::size_t tpp, std::size_t fnp) {
    if (tpp + fnp == 0) return std::nullopt;
    return static_cast<double>(tpp) / static_cast<double>(tpp + fnp);
}

std::optional<double> positive_predictive_value(std::size_t tpp, std::size_t fpp) {
    if (tpp + fpp == 0) return std::nullopt;
    return static_cast<double>(tpp) / static_cast<double>(tpp + fpp);
}

StenosisEval match_stenoses(const std::vector<stenosis::StenosisFinding>& pred,
                            const std::vector<stenosis::StenosisFinding>& gt, double radius_px) {
    require(radius_px > 0.0, ErrorCode::InvalidParameter, "match radius must be positive");

    struct Candidate {
        double distance;
        std::size_t p;
        std::size_t g;
    };
    std::vector<Candidate> candidates;
    for (std::size_t p = 0; p < pred.size(); ++p) {
        for (std::size_t g = 0; g < gt.size(); ++g) {
            const double d = std::hypot(pred[p].location.x - gt[g].location.x, pred[p].location.y - gt[g].location.y);
            if (d <= radius_px) candidates.push_back({d, p, g});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(a.distance, a.p, a.g) < std::tie(b.distance, b.p, b.g);
    });

    StenosisEval eval;
    std::vector<bool> pred_used(pred.size(), false);
    std::vector<bool> gt_used(gt.size(), false);
    for (const Candidate& c : candidates) {
        if (pred_used[c.p] || gt_used[c.g]) continue;
        pred_used[c.p] = gt_used[c.g] = true;
        MatchedPair m;
        m.pred_index = c.p;
        m.gt_index = c.g;
        m.pred_point = pred[c.p].location;
        m.gt_point = gt[c.g].location;
        m.b_e = pred[c.p].percent / 100.0;
        m.b_g = gt[c.g].percent / 100.0;
        m.pred_grade = pred[c.p].grade;
        m.gt_grade = gt[c.g].grade;
        m.distance_px = c.distance;
        eval.matches.push_back(m);
    }
    for (std::size_t p = 0; p < pred.size(); ++p) {
        if (pred_used[p]) continue;
        eval.unmatched_pred.push_back(p);
        eval.unmatched_pred_grades.push_back(pred[p].grade);
    }
    for (std::size_t g = 0; g < gt.size(); ++g) {
        if (gt_used[g]) continue;
        eval.unmatched_gt.push_back(g);
        eval.unmatched_gt_grades.push_back(gt[g].grade);
    }
    eval.tpp = eval.matches.size();
    eval.fpp = eval.unmatched_pred.size();
    eval.fnp = eval.unmatched_gt.size();
    return eval;
}

namespace {

std::optional<double> rmse_of(const std::vector<const MatchedPair*>& pairs) {
    if (pairs.empty()) return std::nullopt;
    double acc = 0.0;
    for (const MatchedPair* m : pairs) acc += (m->b_e - m->b_g) * (m->b_e - m->b_g);
    return std::sqrt(acc / static_cast<double>(pairs.size()));
}

}  // namespace

StenosisEval stenosis_metrics(StenosisEval eval) {
    eval.n = eval.matches.size();
    eval.tpr = true_positive_rate(eval.tpp, eval.fnp);
    eval.ppv = positive_predictive_value(eval.tpp, eval.fpp);

    std::vector<const MatchedPair*> all;
    for (const auto& m : eval.matches) all.push_back(&m);
    eval.rmse = rmse_of(all);

    eval.per_grade.clear();
    using stenosis::Grade;
    for (const Grade g : {Grade::minimal, Grade::mild, Grade::moderate, Grade::severe}) {
        GradeBreakdown b;
        b.grade = g;
        std::vector<const MatchedPair*> mine;
        for (const auto& m : eval.matches)
            if (m.gt_grade == g) mine.push_back(&m);
        b.tpp = mine.size();
        b.fnp = static_cast<std::size_t>(std::count(eval.unmatched_gt_grades.begin(), eval.unmatched_gt_grades.end(), g));
        b.fpp = static_cast<std::size_t>(
            std::count(eval.unmatched_pred_grades.begin(), eval.unmatched_pred_grades.end(), g));
        b.tpr = true_positive_rate(b.tpp, b.fnp);
        b.ppv = positive_predictive_value(b.tpp, b.fpp);
        b.rmse = rmse_of(mine);
        eval.per_grade.push_back(b);
    }
    return eval;
}

}  // namespace angiokit::evaluate
