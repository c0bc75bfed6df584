#include "tnn/costmodel.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace tnn::cost {

int log2_ceil(std::int64_t p) {
    if (p < 1) throw std::invalid_argument("log2 of a non-positive size");
    int bits = 0;
    while ((std::int64_t{1} << bits) < p) ++bits;
    return bits;
}

GateCostReport neuron_cost(std::int64_t p) {
    if (p < 2) throw std::invalid_argument("neuron cost needs p >= 2");
    const std::int64_t lg = log2_ceil(p);
    GateCostReport r;
    r.gates = 102 * p + 8 * lg + 36;
    r.delay_gates = 6 * lg + 4;
    r.time_gate_delays = kGammaCycles * r.delay_gates;
    r.p_static_units = r.gates;
    r.p_dynamic_units = 204 * p + 185 * lg + 241;
    return r;
}

GateCostReport column_cost(std::int64_t p, std::int64_t q) {
    if (p < 2) throw std::invalid_argument("column cost needs p >= 2");
    if (q < 1) throw std::invalid_argument("column cost needs q >= 1");
    const std::int64_t lg = log2_ceil(p);
    GateCostReport r;
    r.gates = 102 * p * q + 8 * q * lg + 44 * q + q * q;
    r.delay_gates = 6 * lg + 4;
    r.time_gate_delays = 90 * lg + 60;
    r.p_static_units = r.gates;
    r.p_dynamic_units = 204 * p * q + 185 * q * lg + 257 * q + 2 * q * q;
    return r;
}

GateCostReport column_cost(std::int64_t p, std::int64_t q, LearningMode mode) {
    GateCostReport r = column_cost(p, q);
    if (mode == LearningMode::Rstdp) r.multiplier = kRstdpOverhead;
    return r;
}

namespace {
constexpr std::array<ReferenceRow, 6> kReference = {{
    {64, 8, LearningMode::Stdp, 51'824, 0.05, 28.95, 0.25},
    {128, 10, LearningMode::Stdp, 128'658, 0.13, 32.40, 0.62},
    {1024, 16, LearningMode::Stdp, 1'639'020, 1.65, 42.30, 7.96},
    {64, 8, LearningMode::Rstdp, 54'384, 0.05, 28.95, 0.26},
    {128, 10, LearningMode::Rstdp, 135'058, 0.14, 32.40, 0.65},
    {1024, 16, LearningMode::Rstdp, 1'720'940, 1.75, 42.30, 8.36},
}};

double fit_through_origin(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const char* what) {
    const double xx = x.squaredNorm();
    if (xx == 0.0) throw std::invalid_argument(std::string("degenerate calibration for ") + what);
    return x.dot(y) / xx;
}
}  // namespace

std::span<const ReferenceRow> reference_rows() { return kReference; }

std::vector<ReferenceRow> reference_rows(LearningMode mode) {
    std::vector<ReferenceRow> rows;
    for (const auto& r : kReference) {
        if (r.mode == mode) rows.push_back(r);
    }
    return rows;
}

CalibrationFit calibrate(std::span<const ReferenceRow> rows) {
    if (rows.empty()) throw std::invalid_argument("calibration needs at least one reference row");
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());

    Eigen::VectorXd gates(n), delays(n), stat(n), dyn(n), area(n), time(n), power(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto& row = rows[static_cast<std::size_t>(k)];
        const GateCostReport rep = column_cost(row.p, row.q, row.mode);
        gates(k) = rep.effective_gates();
        delays(k) = static_cast<double>(rep.time_gate_delays);
        stat(k) = rep.effective_static();
        dyn(k) = rep.effective_dynamic();
        area(k) = row.area_mm2;
        time(k) = row.time_ns;
        power(k) = row.power_mw;
    }

    CalibrationFit fit;
    TechCalibration& c = fit.calibration;
    c.area_per_gate = fit_through_origin(gates, area, "area");
    c.delay_per_gate = fit_through_origin(delays, time, "delay");

    Eigen::MatrixXd design(n, 2);
    design << stat, dyn;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto sv = svd.singularValues();
    fit.power_condition = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : INFINITY;

    // Two-variable NNLS: take the unconstrained solution if it is feasible,
    // otherwise the better of the two single-variable fits.
    Eigen::Vector2d coef = Eigen::Vector2d::Zero();
    bool unconstrained_ok = false;
    if (n >= 2 && std::isfinite(fit.power_condition)) {
        coef = svd.solve(power);
        unconstrained_ok = coef(0) > 0 && coef(1) > 0;
    }
    if (!unconstrained_ok) {
        const double s_only = fit_through_origin(stat, power, "static power");
        const double d_only = dyn.squaredNorm() > 0 ? dyn.dot(power) / dyn.squaredNorm() : 0.0;
        const double rs = (stat * s_only - power).squaredNorm();
        const double rd = (dyn * d_only - power).squaredNorm();
        coef = rs <= rd ? Eigen::Vector2d(s_only, 0.0) : Eigen::Vector2d(0.0, d_only);
        fit.power_coefficient_clamped = true;
    }
    c.static_power_per_gate = coef(0);
    c.dynamic_power_per_transition = coef(1);

    if (!(c.area_per_gate > 0 && c.delay_per_gate > 0 && (coef(0) > 0 || coef(1) > 0))) {
        throw std::invalid_argument("calibration produced non-positive coefficients");
    }

    for (const auto& row : rows) {
        fit.residuals.push_back({row, estimate_physical(column_cost(row.p, row.q, row.mode), c)});
    }
    return fit;
}

PhysicalEstimate estimate_physical(const GateCostReport& report, const TechCalibration& calib) {
    PhysicalEstimate e;
    e.area_mm2 = calib.area_per_gate * report.effective_gates();
    e.time_ns = calib.delay_per_gate * static_cast<double>(report.time_gate_delays);
    e.power_mw = calib.static_power_per_gate * report.effective_static() +
                 calib.dynamic_power_per_transition * report.effective_dynamic();
    return e;
}

}  // namespace tnn::cost
