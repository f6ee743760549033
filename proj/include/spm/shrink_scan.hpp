#pragma once

#include <vector>

namespace spm {

// Extra relations between (f1, f2) and t = 1/(a - x3) left over when x3 = x4.
// Collapse: what the three alpha conditions leave besides the two one-cut equations.
// Traceless: the form quoted alongside the one-cut equations; at points satisfying them
// it coincides with the fourth (zero-trace) endpoint condition.
enum class ShrinkRelation { Collapse, Traceless };

struct ShrinkGrid {
    double a_min = 0.0, a_max = 10.0, a_step = 0.1;
    double gap_min = 0.01, gap_max = 10.0;
    int gap_points = 50;  // log-spaced
    int f1_samples = 4001;
    ShrinkRelation relation = ShrinkRelation::Collapse;  // relation used to eliminate f2
};

// Extra relation between (f1, f2) and t = 1/(a - x3), as (left side) - (right side).
double shrink_relation(double f1, double f2, double a, double t, ShrinkRelation which);

struct ShrinkPoint {
    double a = 0.0, gap = 0.0;
    double f1 = 0.0, f2 = 0.0, A = 0.0;
    double y1 = 0.0, y2 = 0.0;
    double firstgood_residual = 0.0;  // Traceless relation
    double collapse_residual = 0.0;   // Collapse relation
    double fourth_residual = 0.0;     // zero-trace endpoint equation at (y1, y2, x3, x3)
    bool constraints_ok = false;      // real y, x3 > a > y2 > y1, G(a) > 0, A > 0
    bool admissible = false;          // constraints_ok and every residual below 1e-10
};

// All roots of the reduced one-variable problem at a single (a, gap).
std::vector<ShrinkPoint> shrink_points(double a, double gap, const ShrinkGrid& grid = {});

struct ShrinkReport {
    std::vector<ShrinkPoint> points;
    int grid_points = 0;
    int roots = 0;
    int constraint_points = 0;
    int admissible = 0;
};

ShrinkReport shrink_condition_scan(const ShrinkGrid& grid = {});

}  // namespace spm
