#pragma once

#include <memory>
#include <cstdint>
#include <optional>
#include <vector>

#include "lensrig/collar.hpp"
#include "lensrig/lens.hpp"

namespace lensrig {

struct TransplantOptions {
    IntegratorOptions tol;
    LensGrid smoke_grid{8, 7};
    LensThresholds thresholds;
    bool require_lens_match = true;
    // T1 is capped at T0 + collar_cap * epsilon.
    double collar_cap = 10.0;
};

// Two metrics on one domain with collar charts of a common width.
class TransplantContext {
public:
    // Runs the smoke lens comparison; throws LensMismatchError when it does not pass
    // and opt.require_lens_match is set.
    TransplantContext(MetricField m1, MetricField m2, Domain d, double epsilon,
                      const TransplantOptions& opt = {});

    const MetricField& m1() const { return chart1_->metric(); }
    const MetricField& m2() const { return chart2_->metric(); }
    const Domain& domain() const { return chart1_->domain(); }
    const CollarChart& chart1() const { return *chart1_; }
    const CollarChart& chart2() const { return *chart2_; }
    double epsilon() const { return chart1_->epsilon(); }
    const TransplantOptions& options() const { return opt_; }
    const LensComparison& smoke() const { return smoke_; }
    bool lens_match() const { return smoke_.verdict == Verdict::Pass; }

    // Closed-form map chi with g2 = (chi^-1)^* g1, when m2 was built as such a pullback of m1.
    std::optional<Vec2> reference(Vec2 p) const;

    // Same pair with the roles of g1 and g2 exchanged; shares the charts.
    TransplantContext swapped() const;

    // Box holding the extended domain and the outer collar.
    const Box& bounds() const { return bounds_; }

private:
    TransplantContext() = default;

    std::shared_ptr<const CollarChart> chart1_, chart2_;
    TransplantOptions opt_;
    LensComparison smoke_;
    std::optional<std::array<Expr, 2>> chi_, chi_inverse_;
    Box bounds_;
};

struct ExitTimes {
    double T0 = 0.0;
    double T1 = 0.0;
    ExitEvent exit;
    bool reentered = false;  // T1 is a re-entry into M rather than depth epsilon
    bool capped = false;     // neither happened before the cap
};

// Exit times of the backward geodesic t -> gamma_{x,-v}(t). Throws TrappedError, and
// DegenerateError for a tangential exit.
ExitTimes exit_times(const TransplantContext& ctx, Vec2 x, Vec2 v);

struct PhiTilde {
    Vec2 point;
    Vec2 footpoint;  // gamma_{x,-v}(T) in the collar
    Vec2 xi;         // xi_v
    double entry_time = 0.0;  // time the g2 geodesic enters M
};

// exp^{g2}(T phi0_* xi_v). Throws LensMismatchError when the g2 geodesic does not run
// through M over the same interval as its g1 counterpart.
PhiTilde phi_tilde_detail(const TransplantContext& ctx, Vec2 x, Vec2 v, double T,
                          const ExitTimes& et);
Vec2 phi_tilde(const TransplantContext& ctx, Vec2 x, Vec2 v, double T);

// Default anchor time T0 + min(eps / 2, (T1 - T0) / 2).
double default_anchor(const ExitTimes& et, double epsilon);

struct DirectionChoice {
    Vec2 v;
    int index = 0;
    int directions = 0;
    ExitTimes times;
};

// Transversal backward exit with minimal T0 among 16 (then 64) equispaced directions.
DirectionChoice choose_direction(const TransplantContext& ctx, Vec2 x);

struct PhiPoint {
    Vec2 point;
    bool collar = false;  // evaluated by phi0
    std::optional<DirectionChoice> direction;
};

PhiPoint phi_point_detail(const TransplantContext& ctx, Vec2 x);
Vec2 phi_point(const TransplantContext& ctx, Vec2 x);

enum class SegmentLabel { Collar, Interior, Exterior };
std::string_view segment_label_name(SegmentLabel l);

struct SegmentPartition {
    std::vector<double> times;  // t_0 = 0 < ... < t_m = window
    std::vector<SegmentLabel> labels;  // one per subsegment
    std::vector<int> contact_orders;   // one per interior time
};

// Throws DegenerateError on a tangential contact.
SegmentPartition segment_partition(const MetricField& m, const TransplantContext& ctx,
                                   const GeodesicState& s, double window);
SegmentPartition segment_partition(const TransplantContext& ctx, Vec2 x, Vec2 v, double window);

struct WellDefinedRow {
    Vec2 x;
    double t_spread = 0.0;
    double v_spread = 0.0;
    int directions = 0;  // admissible directions used
    int skipped = 0;     // degenerate directions
    std::string error;   // non-empty when the sample failed
};

struct WellDefinedReport {
    std::vector<WellDefinedRow> rows;
    double max_t_spread = 0.0;
    double max_v_spread = 0.0;
    int skipped = 0;
    int mismatches = 0;  // samples that raised LensMismatchError
    int failures = 0;    // samples that raised any other error
    bool pass = false;
};

inline constexpr double kTSpreadTol = 1e-7;
inline constexpr double kVSpreadTol = 1e-6;

WellDefinedReport verify_well_defined(const TransplantContext& ctx, const std::vector<Vec2>& samples);

struct InverseRow {
    Vec2 x;
    Vec2 phi;
    double psi_phi = 0.0;  // |psi(phi(x)) - x|
    double phi_psi = 0.0;  // |phi(psi(x)) - x|
    std::string error;
};

struct InverseReport {
    std::vector<InverseRow> rows;
    double max_psi_phi = 0.0;
    double max_phi_psi = 0.0;
    int failures = 0;
    bool pass = false;
};

inline constexpr double kInverseTol = 1e-5;

InverseReport verify_inverse(const TransplantContext& ctx, const std::vector<Vec2>& samples);

struct IsometryRow {
    Vec2 x;
    Vec2 phi;
    std::optional<Vec2> reference;
    double defect = 0.0;
    double unit_defect = 0.0;
    std::string error;
};

struct IsometryReport {
    std::vector<IsometryRow> rows;
    double max_defect = 0.0;
    double max_unit_defect = 0.0;
    double max_reference_error = 0.0;  // |phi - chi| when a reference map exists
    int failures = 0;
    bool pass = false;
};

inline constexpr double kIsometryTol = 1e-4;
inline constexpr double kIsometryStep = 1e-4;

IsometryReport verify_isometry(const TransplantContext& ctx, const std::vector<Vec2>& samples);

// Deterministic interior sample points with F < 0 from a seeded generator, kept at
// least `margin` (Euclidean) away from the boundary when margin > 0.
std::vector<Vec2> interior_samples(const Domain& d, int n, std::uint64_t seed, double margin = 0.0);

}  // namespace lensrig
