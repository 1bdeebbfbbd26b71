#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "pxlap/domain.hpp"
#include "pxlap/energy.hpp"
#include "pxlap/nehari.hpp"
#include "pxlap/solver.hpp"
#include "pxlap/vexp.hpp"

namespace pxlap {

inline constexpr int kSchemaVersion = 1;

nlohmann::json to_json(const EmbeddingConstants& c);
nlohmann::json to_json(const HypothesisReport& r);
nlohmann::json to_json(const LambdaReport& r);
nlohmann::json to_json(const VerificationRecord& r);
nlohmann::json to_json(const BranchResult& r);
nlohmann::json to_json(const SolveReport& r);
nlohmann::json to_json(const OracleResult& r);
nlohmann::json to_json(const CriticalPoint& c);

/// "index,x,y,u"
void write_solution_csv(std::ostream& os, const GridFunction& u);
/// Reads a file written by write_solution_csv onto `mesh`; vertex count and
/// coordinates must match. Throws ConfigError otherwise.
GridFunction read_solution_csv(std::istream& is, std::shared_ptr<const Mesh> mesh);

/// "iter,energy,curvature,step"
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);
/// "t,phi,dphi,ddphi"
void write_fiber_csv(std::ostream& os, const FiberProfile& profile);
/// "index,t,dphi,ddphi,class"
void write_critical_csv(std::ostream& os, const std::vector<CriticalPoint>& points);
/// "lambda,pass,worst_direction"
void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows);

}  // namespace pxlap
