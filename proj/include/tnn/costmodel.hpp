// costmodel.hpp
//
// Gate-level scaling equations for a neuron and a p x q column (gate count in
// AND equivalents, critical-path gates, gamma time, transitions), plus a
// linear technology calibration fitted to 45 nm post-synthesis data.

#ifndef TNN_COSTMODEL_HPP
#define TNN_COSTMODEL_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tnn/column.hpp"

namespace tnn::cost {

/// ceil(log2 p), the adder width used by the equations.
int log2_ceil(std::int64_t p);

struct GateCostReport {
    std::int64_t gates = 0;
    std::int64_t delay_gates = 0;
    std::int64_t time_gate_delays = 0;   // 15 * delay_gates
    std::int64_t p_static_units = 0;
    std::int64_t p_dynamic_units = 0;
    double multiplier = 1.0;             // applied to gates and power (R-STDP overhead)

    double effective_gates() const { return multiplier * static_cast<double>(gates); }
    double effective_static() const { return multiplier * static_cast<double>(p_static_units); }
    double effective_dynamic() const { return multiplier * static_cast<double>(p_dynamic_units); }
};

inline constexpr double kRstdpOverhead = 1.05;

GateCostReport neuron_cost(std::int64_t p);
GateCostReport column_cost(std::int64_t p, std::int64_t q);
/// column_cost with the R-STDP overhead multiplier when mode is Rstdp.
GateCostReport column_cost(std::int64_t p, std::int64_t q, LearningMode mode);

/// One synthesized column configuration.
struct ReferenceRow {
    std::int64_t p = 0;
    std::int64_t q = 0;
    LearningMode mode = LearningMode::Stdp;
    std::int64_t gates = 0;
    double area_mm2 = 0;
    double time_ns = 0;
    double power_mw = 0;
};

/// The six 45 nm rows (STDP then R-STDP for 64x8, 128x10, 1024x16).
std::span<const ReferenceRow> reference_rows();
std::vector<ReferenceRow> reference_rows(LearningMode mode);

struct TechCalibration {
    double area_per_gate = 0;               // mm^2
    double delay_per_gate = 0;              // ns per gate delay
    double static_power_per_gate = 0;       // mW
    double dynamic_power_per_transition = 0;  // mW
};

struct PhysicalEstimate {
    double area_mm2 = 0;
    double time_ns = 0;
    double power_mw = 0;
};

struct RowResidual {
    ReferenceRow row;
    PhysicalEstimate predicted;
};

struct CalibrationFit {
    TechCalibration calibration;
    std::vector<RowResidual> residuals;
    /// Condition number of the two-column power design matrix.
    double power_condition = 0;
    /// True when non-negativity forced a power coefficient to zero.
    bool power_coefficient_clamped = false;
};

/// Least-squares fit of the per-gate coefficients to the reference rows.
/// Area and delay are single-coefficient fits through the origin; power is a
/// non-negative fit over static units and transitions. Throws
/// std::invalid_argument for an empty or degenerate reference set.
CalibrationFit calibrate(std::span<const ReferenceRow> rows);

PhysicalEstimate estimate_physical(const GateCostReport& report, const TechCalibration& calib);

}  // namespace tnn::cost

#endif  // TNN_COSTMODEL_HPP
