#pragma once

namespace dnp {

// Central numerical tolerances shared across modules and tests.
inline constexpr double UNITARITY_TOL = 1e-10;
inline constexpr double HERMITICITY_TOL = 1e-12;
inline constexpr double KRAUS_COMPLETENESS_TOL = 1e-10;
inline constexpr double TRACE_DRIFT_TOL = 1e-8;
inline constexpr double PSD_EIGENVALUE_TOL = -1e-8;

}  // namespace dnp
