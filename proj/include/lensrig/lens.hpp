#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lensrig/geodesic.hpp"

namespace lensrig {

// Boundary unit vector c*nu + sign*sqrt(1 - c^2)*tau at point s of a component.
struct BoundaryVector {
    int component = 0;
    double s = 0.0;
    double c = 0.0;
    int sign = 0;
};

// (s, c, sign) -> (s, -c, -sign)
BoundaryVector negate(const BoundaryVector& v);

GeodesicState realize(const Domain& d, const MetricField& m, const BoundaryVector& v);
// Coordinates of a unit vector based at (or within rounding of) the boundary.
BoundaryVector boundary_coordinates(const Domain& d, const MetricField& m,
                                    const GeodesicState& s);

// The correspondence between the boundary unit vectors of two metrics sharing the
// boundary: identity in (component, s, c, sign).
inline BoundaryVector lambda_map(const BoundaryVector& v) { return v; }

enum class LensStatus { Ok, Grazing, Trapped, Failed };

std::string_view status_name(LensStatus s);
LensStatus parse_status(std::string_view s);

struct LensRecord {
    BoundaryVector v_in;
    BoundaryVector v_out;
    double length = 0.0;
    LensStatus status = LensStatus::Ok;
    // Boundary crossings of the geodesic continued past its exit until it leaves
    // the extended box.
    int crossings = 0;
    std::string message;  // reason for a non-ok status
};

LensRecord scattering(const MetricField& m, const Domain& d, const BoundaryVector& v_in,
                      const IntegratorOptions& tol = {}, bool count_crossings = true);

struct LensGrid {
    int N_s = 16;
    int N_c = 15;
};

// Direction j of N_c: angle theta_j = -pi/2 + pi (j + 1) / (N_c + 1) from the inward normal.
BoundaryVector grid_vector(const Domain& d, const LensGrid& g, int component, int i, int j);

struct LensTable {
    LensGrid grid;
    std::vector<LensRecord> records;  // ordered by (component, i, j)
    std::string metric_hash;
    std::string domain_hash;
    IntegratorOptions tol;

    std::size_t count(LensStatus s) const;
};

// Throws TrappedError when more than 1% of the rays are trapped.
LensTable sample_lens_table(const MetricField& m, const Domain& d, const LensGrid& grid,
                            const IntegratorOptions& tol = {});

struct LensThresholds {
    double pass_tol = 1e-6;
    double fail_floor = 1e-3;
};

enum class Verdict { Pass, Fail, Inconclusive };
std::string_view verdict_name(Verdict v);

struct LensComparison {
    std::size_t compared = 0;
    std::size_t skipped = 0;    // non-ok records of the reference table
    std::size_t mismatched = 0;  // ok in the reference, not ok under m2
    double max_ds = 0.0, max_dc = 0.0, max_dlength = 0.0;
    double mean_ds = 0.0, mean_dc = 0.0, mean_dlength = 0.0;
    std::size_t argmax_ds = 0, argmax_dc = 0, argmax_dlength = 0;
    double max_discrepancy = 0.0;
    Verdict verdict = Verdict::Pass;
};

LensComparison compare_lens_tables(const LensTable& t1, const MetricField& m2, const Domain& d,
                                   const LensThresholds& th = {},
                                   const IntegratorOptions& tol = {});

struct NontrapReport {
    std::size_t rays = 0;
    std::size_t trapped = 0;
    std::size_t grazing = 0;
    std::size_t failed = 0;
    double max_length = 0.0;
    bool pass = false;
};

NontrapReport check_nontrapping(const MetricField& m, const Domain& d, const LensGrid& grid,
                                const IntegratorOptions& tol = {});

struct AdmissibleTangent {
    int component = 0;
    int sign = 1;
    double s = 0.0;
    bool zero_length = false;
    double length = 0.0;  // maximal geodesic length inside M
    std::vector<double> boundary_times;  // signed times of the boundary points on the geodesic
    std::vector<double> jacobi_zeros;    // signed times of Jacobi zeros from x0
    double min_separation = 0.0;         // min |boundary time - Jacobi zero|
    int samples_scanned = 0;
};

inline constexpr double kConjugateSeparation = 1e-4;

// First admissible tangential vector on one S(dM) component (component, sign).
// Finite chords through concave points are preferred; a zero-length geodesic at a
// convex point is returned only when no finite chord qualifies.
std::optional<AdmissibleTangent> find_admissible_tangent(const MetricField& m, const Domain& d,
                                                         int component, int sign,
                                                         int samples = 256,
                                                         const IntegratorOptions& tol = {});

void write_lens_csv(std::ostream& os, const LensTable& t);
// Reads records; grid and hashes are left for the caller to fill from metadata.
LensTable read_lens_csv(std::istream& is);

}  // namespace lensrig
