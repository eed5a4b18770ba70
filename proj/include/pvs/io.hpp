#pragma once

#include <cstdint>
#include <string>

#include "pvs/grid.hpp"
#include "pvs/local_solver.hpp"
#include "pvs/pde_solver.hpp"
#include "pvs/perron_verify.hpp"
#include "pvs/rough_path.hpp"

namespace pvs {

/// Shortest exact decimal form ("%.17g"). All artifact numbers go through
/// this so repeated runs emit identical bytes.
std::string format_g17(double v);

std::string read_text_file(const std::string& file);
void write_text_file(const std::string& file, const std::string& text);

/// FNV-1a, used to stamp the config into the manifest.
std::uint64_t fnv1a64(const std::string& text);

/// One row per node: coordinates then the value.
void write_field_csv(const std::string& file, const GridField& f);

/// <base>_times.csv plus one <base>_NNN.csv per frame.
void write_series_csv(const std::string& dir, const std::string& base, const FieldSeries& s);

void write_json_report(const std::string& file, const PathValidationReport& r);
void write_json_report(const std::string& file, const HorizonReport& r);
void write_json_report(const std::string& file, const PropertyReport& r);
void write_json_report(const std::string& file, const DependenceReport& r);
void write_json_report(const std::string& file, const SolveReport& r);
void write_json_report(const std::string& file, const RoughSolveReport& r);
void write_json_report(const std::string& file, const SubsolutionReport& r);
void write_json_report(const std::string& file, const BumpCertificate& r);
void write_json_report(const std::string& file, const CompareReport& r);
void write_json_report(const std::string& file, const SubSuperPair& r);

}  // namespace pvs
