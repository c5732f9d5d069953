#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "angiokit/raster.hpp"
#include "angiokit/stenosis.hpp"

namespace angiokit::evaluate {

struct PixelMetrics {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;
    // Absent when the denominator is zero.
    std::optional<double> sn;
    std::optional<double> sp;
    std::optional<double> dice;  // 2TP / (2TP + FP + FN)
};

PixelMetrics pixel_metrics(const BinaryMask& pred, const BinaryMask& gt);

// Fills sn/sp/dice from the confusion counts.
void derive_ratios(PixelMetrics& m);

struct MatchedPair {
    std::size_t pred_index = 0;
    std::size_t gt_index = 0;
    Point pred_point;
    Point gt_point;
    double b_e = 0.0;  // predicted level, fraction of 1
    double b_g = 0.0;  // ground-truth level, fraction of 1
    stenosis::Grade pred_grade = stenosis::Grade::none;
    stenosis::Grade gt_grade = stenosis::Grade::none;
    double distance_px = 0.0;
};

struct GradeBreakdown {
    stenosis::Grade grade = stenosis::Grade::none;
    std::size_t tpp = 0;  // matches whose ground truth has this grade
    std::size_t fnp = 0;  // unmatched ground truth of this grade
    std::size_t fpp = 0;  // unmatched predictions of this grade
    std::optional<double> tpr;
    std::optional<double> ppv;
    std::optional<double> rmse;
};

struct StenosisEval {
    std::size_t tpp = 0;
    std::size_t fnp = 0;
    std::size_t fpp = 0;
    std::vector<MatchedPair> matches;
    std::vector<std::size_t> unmatched_pred;
    std::vector<std::size_t> unmatched_gt;
    std::vector<stenosis::Grade> unmatched_pred_grades;
    std::vector<stenosis::Grade> unmatched_gt_grades;

    std::optional<double> tpr;
    std::optional<double> ppv;
    std::optional<double> rmse;  // fractional scale, over matched pairs
    std::size_t n = 0;           // matched pairs entering the RMSE
    std::vector<GradeBreakdown> per_grade;  // minimal, mild, moderate, severe
};

/// Greedy one-to-one matching: all pairs within `radius_px`, ascending by
/// distance (ties by prediction index, then ground-truth index), accepted
/// while both members are free.
StenosisEval match_stenoses(const std::vector<stenosis::StenosisFinding>& pred,
                            const std::vector<stenosis::StenosisFinding>& gt, double radius_px);

/// TPR = TPP / (TPP + FNP), PPV = TPP / (TPP + FPP), RMSE over matched
/// levels on the 0–1 scale, plus a per-grade breakdown.
StenosisEval stenosis_metrics(StenosisEval eval);

// Convenience for reproducing published rows from raw counts.
std::optional<double> true_positive_rate(std::size_t tpp, std::size_t fnp);
std::optional<double> positive_predictive_value(std::size_t tpp, std::size_t fpp);

}  // namespace angiokit::evaluate
